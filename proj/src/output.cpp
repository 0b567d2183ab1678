#include <cctype>

#include "histree/errors.hpp"
#include "histree/protocol.hpp"

namespace histree {

bool parse_ratio(const std::string& text, Ratio& out) {
  if (text.empty()) return false;
  std::size_t i = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    i = 1;
  }
  auto digits = [&](std::size_t from, std::size_t to) {
    if (from >= to) return false;
    for (std::size_t k = from; k < to; ++k)
      if (!std::isdigit(static_cast<unsigned char>(text[k]))) return false;
    return true;
  };
  const std::size_t slash = text.find('/', i), dot = text.find('.', i);
  Ratio value;
  if (slash != std::string::npos) {
    if (!digits(i, slash) || !digits(slash + 1, text.size())) return false;
    const BigInt den(text.substr(slash + 1));
    if (den == 0) return false;
    value = Ratio(BigInt(text.substr(i, slash - i)), den);
  } else if (dot != std::string::npos) {
    const bool has_int = dot > i, has_frac = dot + 1 < text.size();
    if (!has_int && !has_frac) return false;
    if (has_int && !digits(i, dot)) return false;
    if (has_frac && !digits(dot + 1, text.size())) return false;
    BigInt whole = has_int ? BigInt(text.substr(i, dot - i)) : BigInt(0);
    BigInt frac = has_frac ? BigInt(text.substr(dot + 1)) : BigInt(0);
    BigInt scale = 1;
    for (std::size_t k = dot + 1; k < text.size(); ++k) scale *= 10;
    value = Ratio(whole * scale + frac, scale);
  } else {
    if (!digits(i, text.size())) return false;
    value = Ratio(BigInt(text.substr(i)));
  }
  out = negative ? Ratio(-value) : value;
  return true;
}

Output Output::number(const Ratio& x, std::optional<std::size_t> as_of) {
  Output o;
  o.kind = Kind::Number;
  o.value = x;
  o.as_of = as_of;
  return o;
}

Output Output::node_code(std::string c) {
  Output o;
  o.kind = Kind::Code;
  o.code = std::move(c);
  return o;
}

std::string Output::to_string() const {
  switch (kind) {
    case Kind::None:
      return "⊥";
    case Kind::Number:
      return as_of ? histree::to_string(value) + "@" + std::to_string(*as_of) : histree::to_string(value);
    case Kind::Code:
      return code;
  }
  return "⊥";
}

std::string to_string(ExecModel m) {
  switch (m) {
    case ExecModel::Synchronous:
      return "sync";
    case ExecModel::SemiSynchronous:
      return "semi-sync";
    case ExecModel::Asynchronous:
      return "async";
  }
  return "sync";
}

ExecModel exec_model_from_string(const std::string& s) {
  if (s == "sync" || s == "synchronous") return ExecModel::Synchronous;
  if (s == "semi-sync" || s == "semi-synchronous") return ExecModel::SemiSynchronous;
  if (s == "async" || s == "asynchronous") return ExecModel::Asynchronous;
  throw ParameterError("unknown execution model '" + s + "' (expected sync, semi-sync or async)");
}

}  // namespace histree
