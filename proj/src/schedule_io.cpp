#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "histree/errors.hpp"
#include "histree/schedule.hpp"

namespace histree {

using nlohmann::json;

std::string to_json(const DynamicSchedule& s) {
  json j;
  j["n"] = s.n;
  j["directed"] = s.directed;
  j["awareness"] = to_string(s.awareness);
  if (s.varying_inputs())
    j["inputs"] = s.inputs;
  else
    j["inputs"] = s.inputs.at(0);
  json steps = json::array();
  for (const StepGraph& g : s.steps) {
    json edges = json::array();
    for (const Edge& e : g.edges) {
      json row = {e.src, e.dst, e.multiplicity};
      if (e.port) row.push_back(*e.port);
      edges.push_back(std::move(row));
    }
    steps.push_back(std::move(edges));
  }
  j["steps"] = std::move(steps);
  if (s.activation) j["activation"] = *s.activation;
  if (s.delays) j["delays"] = *s.delays;
  return j.dump() + "\n";
}

namespace {

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

template <class T>
T get_field(const json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("field '") + name + "': " + e.what());
  }
}

}  // namespace

DynamicSchedule schedule_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                         e.what(),
                     line, col);
  }
  if (!j.is_object()) throw ValidationError("schedule must be a JSON object");
  static const std::set<std::string> known{"n", "directed", "awareness", "inputs", "steps", "activation", "delays"};
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw ValidationError("unknown field '" + item.key() + "'");

  DynamicSchedule s;
  s.n = get_field<std::size_t>(j, "n");
  s.directed = get_field<bool>(j, "directed");
  s.awareness = awareness_from_string(j.contains("awareness") ? get_field<std::string>(j, "awareness") : "none");
  const json& inputs = j.at("inputs");
  if (!inputs.is_array()) throw ValidationError("field 'inputs' must be an array");
  if (!inputs.empty() && inputs.front().is_array())
    s.inputs = get_field<std::vector<std::vector<std::string>>>(j, "inputs");
  else
    s.inputs = {get_field<std::vector<std::string>>(j, "inputs")};

  const json& steps = j.at("steps");
  if (!steps.is_array()) throw ValidationError("field 'steps' must be an array");
  for (std::size_t k = 0; k < steps.size(); ++k) {
    StepGraph g;
    if (!steps[k].is_array()) throw ValidationError("step " + std::to_string(k + 1) + ": must be an array");
    for (const json& row : steps[k]) {
      if (!row.is_array() || row.size() < 3 || row.size() > 4)
        throw ValidationError("step " + std::to_string(k + 1) + ": edge must be [src, dst, multiplicity(, port)]");
      for (const json& x : row)
        if (!x.is_number_integer() || x.get<long long>() < 0)
          throw ValidationError("step " + std::to_string(k + 1) + ": edge entries must be non-negative integers");
      Edge e;
      e.src = row[0].get<AgentId>();
      e.dst = row[1].get<AgentId>();
      e.multiplicity = row[2].get<std::uint64_t>();
      if (row.size() == 4) e.port = row[3].get<std::uint32_t>();
      g.edges.push_back(e);
    }
    s.steps.push_back(std::move(g));
  }
  if (j.contains("activation"))
    s.activation = get_field<std::vector<std::vector<AgentId>>>(j, "activation");
  if (j.contains("delays")) s.delays = get_field<std::vector<std::vector<std::uint32_t>>>(j, "delays");
  check_well_formed(s);
  return s;
}

DynamicSchedule load_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open schedule file '" + path + "'", 0, 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return schedule_from_json(buf.str());
}

void save_schedule(const DynamicSchedule& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << to_json(s);
}

}  // namespace histree
