#include "histree/schedule.hpp"

#include <algorithm>
#include <set>

#include "histree/errors.hpp"
#include "histree/history.hpp"

namespace histree {

const char* to_string(Awareness a) {
  switch (a) {
    case Awareness::None: return "none";
    case Awareness::LateOutdegree: return "late-outdegree";
    case Awareness::EarlyOutdegree: return "early-outdegree";
    case Awareness::OutputPort: return "output-port";
  }
  return "none";
}

Awareness awareness_from_string(const std::string& s) {
  if (s == "none") return Awareness::None;
  if (s == "late-outdegree") return Awareness::LateOutdegree;
  if (s == "early-outdegree") return Awareness::EarlyOutdegree;
  if (s == "output-port") return Awareness::OutputPort;
  throw ValidationError("unknown awareness '" + s + "'");
}

const std::string& DynamicSchedule::input(AgentId a, std::size_t t) const {
  const auto& row = varying_inputs() ? inputs.at(t) : inputs.at(0);
  return row.at(a);
}

bool DynamicSchedule::active(AgentId a, std::size_t s) const {
  if (!activation) return true;
  const auto& set = activation->at(s - 1);
  return std::binary_search(set.begin(), set.end(), a);
}

std::uint64_t DynamicSchedule::outdegree(AgentId a, std::size_t s) const {
  std::uint64_t d = 0;
  for (const Edge& e : step(s).edges)
    if (e.src == a) d += e.multiplicity;
  return d;
}

void normalize_edges(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end());
  std::vector<Edge> out;
  for (const Edge& e : edges) {
    if (!out.empty() && !e.port && !out.back().port && out.back().src == e.src && out.back().dst == e.dst) {
      out.back().multiplicity += e.multiplicity;
      continue;
    }
    out.push_back(e);
  }
  edges = std::move(out);
}

namespace {

std::string at_step(std::size_t s) { return "step " + std::to_string(s) + ": "; }

}  // namespace

void check_well_formed(const DynamicSchedule& s) {
  if (s.n == 0) throw ValidationError("schedule has no agents");
  if (s.inputs.empty()) throw ValidationError("schedule has no inputs");
  if (s.varying_inputs() && s.inputs.size() != s.steps.size() + 1)
    throw ValidationError("varying inputs need one row per time 0.." + std::to_string(s.steps.size()));
  for (const auto& row : s.inputs) {
    if (row.size() != s.n) throw ValidationError("input row has " + std::to_string(row.size()) + " labels, expected " +
                                                 std::to_string(s.n));
    for (const auto& label : row)
      if (is_reserved_label(label)) throw ValidationError("input label uses the reserved prefix");
  }
  if (s.awareness == Awareness::OutputPort && !s.directed)
    throw ValidationError("output-port awareness requires a directed schedule");
  if (s.delays && !s.directed) throw ValidationError("delays require a directed schedule");
  if (s.delays && s.delays->size() != s.steps.size())
    throw ValidationError("delays must be parallel to steps");
  if (s.activation && s.activation->size() != s.steps.size())
    throw ValidationError("activation must have one set per step");

  for (std::size_t k = 0; k < s.steps.size(); ++k) {
    const std::size_t step = k + 1;
    const auto& edges = s.steps[k].edges;
    std::set<std::pair<AgentId, std::uint32_t>> ports;
    for (const Edge& e : edges) {
      if (e.src >= s.n || e.dst >= s.n)
        throw ValidationError(at_step(step) + "agent index out of range in edge (" + std::to_string(e.src) + "," +
                              std::to_string(e.dst) + ")");
      if (e.multiplicity == 0) throw ValidationError(at_step(step) + "zero multiplicity");
      if (s.awareness == Awareness::OutputPort) {
        if (!e.port) throw ValidationError(at_step(step) + "missing port on output-port schedule");
        if (e.multiplicity != 1) throw ValidationError(at_step(step) + "ported edge must have multiplicity 1");
        if (!ports.insert({e.src, *e.port}).second)
          throw ValidationError(at_step(step) + "duplicate port " + std::to_string(*e.port) + " at agent " +
                                std::to_string(e.src));
      } else if (e.port) {
        throw ValidationError(at_step(step) + "port present without output-port awareness");
      }
    }
    if (!s.directed) {
      std::map<std::pair<AgentId, AgentId>, std::uint64_t> m;
      for (const Edge& e : edges) m[{e.src, e.dst}] += e.multiplicity;
      for (const auto& [key, mult] : m) {
        auto it = m.find({key.second, key.first});
        if (it == m.end() || it->second != mult)
          throw ValidationError(at_step(step) + "undirected edge multiset is not symmetric at (" +
                                std::to_string(key.first) + "," + std::to_string(key.second) + ")");
      }
    }
    if (s.delays && (*s.delays)[k].size() != edges.size())
      throw ValidationError(at_step(step) + "delay count does not match edge count");
    if (s.activation) {
      const auto& act = (*s.activation)[k];
      for (std::size_t i = 0; i < act.size(); ++i) {
        if (act[i] >= s.n) throw ValidationError(at_step(step) + "activation id out of range");
        if (i > 0 && act[i] <= act[i - 1]) throw ValidationError(at_step(step) + "activation set must be sorted");
      }
    }
  }
}

bool is_connected(std::size_t n, const std::vector<Edge>& edges, bool directed) {
  if (n <= 1) return true;
  std::vector<std::vector<AgentId>> fwd(n), bwd(n);
  for (const Edge& e : edges) {
    fwd[e.src].push_back(e.dst);
    bwd[e.dst].push_back(e.src);
  }
  auto reach_all = [n](const std::vector<std::vector<AgentId>>& adj) {
    std::vector<char> seen(n, 0);
    std::vector<AgentId> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      AgentId u = stack.back();
      stack.pop_back();
      for (AgentId v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
    }
    return count == n;
  };
  if (!directed) {
    // Undirected schedules are symmetric, but be lenient and treat links as two-way.
    for (std::size_t u = 0; u < n; ++u)
      for (AgentId v : bwd[u]) fwd[u].push_back(v);
    return reach_all(fwd);
  }
  return reach_all(fwd) && reach_all(bwd);
}

ConnectivityReport validate(const DynamicSchedule& s) {
  check_well_formed(s);
  ConnectivityReport r;
  const std::size_t T = s.steps.size();
  for (const auto& g : s.steps) r.connected.push_back(is_connected(s.n, g.edges, s.directed));

  for (std::size_t tau = 1; tau <= T && !r.tau; ++tau) {
    bool ok = true;
    for (std::size_t start = 0; start + tau <= T && ok; ++start) {
      std::vector<Edge> all;
      for (std::size_t k = start; k < start + tau; ++k)
        all.insert(all.end(), s.steps[k].edges.begin(), s.steps[k].edges.end());
      ok = is_connected(s.n, all, s.directed);
    }
    if (ok) r.tau = tau;
  }

  // Forward flooding from every (agent, start time).
  std::optional<std::size_t> diameter;
  for (std::size_t t0 = 0; t0 < T; ++t0) {
    std::size_t worst = 0;
    bool complete = true;
    for (AgentId a = 0; a < s.n && complete; ++a) {
      std::vector<char> informed(s.n, 0);
      informed[a] = 1;
      std::size_t count = 1, used = 0;
      for (std::size_t k = t0; k < T && count < s.n; ++k) {
        std::vector<char> next = informed;
        for (const Edge& e : s.steps[k].edges) {
          if (informed[e.src] && !next[e.dst]) { next[e.dst] = 1; ++count; }
          if (!s.directed && informed[e.dst] && !next[e.src]) { next[e.src] = 1; ++count; }
        }
        informed = std::move(next);
        ++used;
      }
      if (count < s.n) complete = false;
      worst = std::max(worst, used);
    }
    if (!complete) {
      r.diameter_horizon_limited = true;
      continue;
    }
    diameter = std::max(diameter.value_or(0), worst);
  }
  if (s.n == 1) diameter = 0;
  r.dynamic_diameter = diameter;
  return r;
}

}  // namespace histree
