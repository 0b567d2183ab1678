#include <algorithm>
#include <cctype>
#include <sstream>

#include "histree/corpus.hpp"
#include "histree/errors.hpp"

namespace histree {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw ParameterError("corpus key '" + key + "' needs a non-negative integer, got '" + v + "'");
  return std::stoull(v);
}

std::vector<std::size_t> parse_sizes(const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_uint("n", part));
      continue;
    }
    const std::size_t lo = parse_uint("n", part.substr(0, dots)), hi = parse_uint("n", part.substr(dots + 2));
    for (std::size_t n = lo; n <= hi; ++n) out.push_back(n);
  }
  for (std::size_t n : out)
    if (n < 1) throw ParameterError("corpus sizes must be positive");
  return out;
}

bool is_tau_family(const std::string& f) { return f == "tau" || f == "tau-directed"; }

std::vector<std::string> numeric_inputs(std::size_t n, std::uint64_t seed) {
  std::vector<std::string> v;
  for (std::size_t a = 0; a < n; ++a) v.push_back(std::to_string((a * 7 + seed) % 5));
  return v;
}

// Recursive descent over a bound expression.
class ExprParser {
 public:
  ExprParser(const std::string& text, const std::map<std::string, std::optional<long long>>& vars)
      : s_(text), vars_(vars) {}

  bool assertion() {
    const auto lhs = sum();
    skip();
    std::string op;
    for (const char* cand : {"<=", ">=", "==", "!=", "<", ">"})
      if (s_.compare(i_, std::string(cand).size(), cand) == 0) {
        op = cand;
        break;
      }
    if (op.empty()) fail("expected a comparison");
    i_ += op.size();
    const auto rhs = sum();
    skip();
    if (i_ != s_.size()) fail("trailing characters");
    if (!lhs || !rhs) return false;
    if (op == "<=") return *lhs <= *rhs;
    if (op == ">=") return *lhs >= *rhs;
    if (op == "<") return *lhs < *rhs;
    if (op == ">") return *lhs > *rhs;
    if (op == "==") return *lhs == *rhs;
    return *lhs != *rhs;
  }

 private:
  using Val = std::optional<long long>;

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw ParameterError("bad assertion '" + s_ + "': " + why + " at offset " + std::to_string(i_));
  }
  static Val combine(Val a, Val b, char op) {
    if (!a || !b) return std::nullopt;
    switch (op) {
      case '+': return *a + *b;
      case '-': return *a - *b;
      case '*': return *a * *b;
      default: return *b == 0 ? std::nullopt : Val(*a / *b);
    }
  }

  Val sum() {
    Val v = product();
    for (;;) {
      skip();
      if (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) {
        const char op = s_[i_++];
        v = combine(v, product(), op);
      } else {
        return v;
      }
    }
  }

  Val product() {
    Val v = atom();
    for (;;) {
      skip();
      if (i_ < s_.size() && (s_[i_] == '*' || s_[i_] == '/')) {
        const char op = s_[i_++];
        v = combine(v, atom(), op);
      } else if (i_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[i_])) || s_[i_] == '(')) {
        v = combine(v, atom(), '*');  // "2n" means 2*n
      } else {
        return v;
      }
    }
  }

  Val atom() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end");
    const char c = s_[i_];
    if (c == '(') {
      ++i_;
      const Val v = sum();
      skip();
      if (i_ >= s_.size() || s_[i_] != ')') fail("expected ')'");
      ++i_;
      return v;
    }
    if (c == '-') {
      ++i_;
      return combine(0, atom(), '-');
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      long long x = 0;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) x = x * 10 + (s_[i_++] - '0');
      return x;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string name;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) name += s_[i_++];
      const auto it = vars_.find(name);
      if (it == vars_.end()) fail("unknown variable '" + name + "'");
      return it->second;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  std::string s_;
  const std::map<std::string, std::optional<long long>>& vars_;
  std::size_t i_ = 0;
};

}  // namespace

CorpusSpec parse_corpus_spec(const std::string& text) {
  CorpusSpec corpus;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    const std::string key = trim(item.substr(0, eq));
    const std::string val = eq == std::string::npos ? "" : trim(item.substr(eq + 1));
    if (key == "family") {
      static const std::vector<std::string> known{"undirected", "directed", "ported", "static",
                                                  "tau",        "tau-directed", "async"};
      if (std::find(known.begin(), known.end(), val) == known.end())
        throw ParameterError("unknown corpus family '" + val + "'");
      corpus.family = val;
    } else if (key == "n") {
      corpus.sizes = parse_sizes(val);
    } else if (key == "seeds") {
      corpus.seeds = parse_uint(key, val);
    } else if (key == "seed") {
      corpus.first_seed = parse_uint(key, val);
    } else if (key == "t") {
      std::string v = val;
      if (!v.empty() && v.back() == 'n') v.pop_back();
      corpus.steps_per_agent = parse_uint(key, v);
      if (corpus.steps_per_agent < 1) throw ParameterError("corpus t must be positive");
    } else if (key == "tau") {
      corpus.tau = parse_uint(key, val);
      if (corpus.tau < 1) throw ParameterError("corpus tau must be positive");
    } else if (key == "delay") {
      corpus.max_delay = static_cast<std::uint32_t>(parse_uint(key, val));
    } else if (key == "leaders") {
      corpus.leaders = parse_uint(key, val);
    } else if (key == "known-n") {
      corpus.known_n = true;
    } else if (key == "corrupt") {
      corpus.corrupt = true;
    } else {
      throw ParameterError("unknown corpus key '" + key + "'");
    }
  }
  return corpus;
}

std::vector<CorpusEntry> build_corpus(const CorpusSpec& corpus, const std::string& protocol) {
  const ProtocolInfo info = protocol_info(protocol);
  const bool mean = info.answer == Answer::Mean || info.answer == Answer::StreamingMean;
  std::vector<CorpusEntry> out;
  for (std::size_t n : corpus.sizes)
    for (std::uint64_t k = 0; k < corpus.seeds; ++k) {
      const std::uint64_t seed = corpus.first_seed + k;
      const std::size_t t = corpus.steps_per_agent * n * (is_tau_family(corpus.family) ? corpus.tau : 1);
      DynamicSchedule s;
      if (corpus.family == "undirected") s = gen_random_connected(n, t, seed, false);
      else if (corpus.family == "directed") s = gen_random_connected(n, t, seed, true);
      else if (corpus.family == "ported") s = gen_random_ported(n, t, seed);
      else if (corpus.family == "static") s = gen_random_static(n, t, seed, false);
      else if (corpus.family == "tau") s = gen_tau_sparse(n, t, corpus.tau, seed, false);
      else if (corpus.family == "tau-directed") s = gen_tau_sparse(n, t, corpus.tau, seed, true);
      else s = with_random_delays(gen_random_connected(n, t, seed, true), seed, corpus.max_delay);
      s = mean ? with_inputs(s, numeric_inputs(n, seed)) : with_leaders(s, corpus.leaders);
      out.push_back(CorpusEntry{n, seed, std::move(s)});
    }
  return out;
}

ExecutorConfig corpus_config(const CorpusSpec& corpus, const CorpusEntry& e, const std::string& protocol) {
  ExecutorConfig cfg;
  cfg.max_steps = e.schedule.horizon();
  cfg.record_digests = false;
  cfg.params.leaders = corpus.leaders;
  if (is_tau_family(corpus.family) && protocol.rfind("tau-batch:", 0) == 0) cfg.params.tau = corpus.tau;
  if (corpus.known_n) cfg.params.n_known = e.n;
  if (corpus.corrupt) cfg.corrupt_seed = e.seed;
  if (corpus.family == "async") cfg.model = ExecModel::Asynchronous;
  return cfg;
}

std::optional<std::size_t> RunMetrics::measured() const {
  if (asynchronous) return rounds;
  if (termination) return termination;
  return stabilization;
}

RunMetrics measure_run(const DynamicSchedule& s, const std::string& protocol, const ExecutorConfig& cfg) {
  const ProtocolInfo info = protocol_info(protocol);
  const RunTrace trace = run(s, protocol, cfg);
  const Checker ok = make_checker(s, protocol, cfg);
  RunMetrics m;
  m.n = s.n;
  m.horizon = trace.final_time();
  m.asynchronous = cfg.model == ExecModel::Asynchronous;
  if (info.terminating) {
    bool all = true;
    std::size_t last = 0;
    for (const auto& x : trace.termination) {
      if (!x) all = false;
      else last = std::max(last, *x);
    }
    for (AgentId a = 0; a < s.n && all; ++a)
      if (!ok(trace.steps.back(), a)) all = false;
    m.correct = all;
    if (all) m.termination = last;
    return m;
  }
  const Stabilization st = measure_stabilization(trace, ok);
  m.correct = st.stabilized;
  if (st.stabilized) {
    m.stabilization = st.step;
    if (m.asynchronous) m.rounds = rounds_until(trace.rounds, st.step);
  }
  return m;
}

bool eval_assertion(const std::string& expr, const std::map<std::string, std::optional<long long>>& vars) {
  return ExprParser(expr, vars).assertion();
}

}  // namespace histree
