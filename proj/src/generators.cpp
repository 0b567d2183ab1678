#include <algorithm>
#include <random>
#include <set>

#include "histree/errors.hpp"
#include "histree/schedule.hpp"

namespace histree {

namespace {

// Portable draws: std distributions are implementation-defined, raw mt19937_64 output is not.
struct Rng {
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  std::uint64_t below(std::uint64_t k) { return k == 0 ? 0 : gen() % k; }
  bool coin(std::uint64_t num, std::uint64_t den) { return below(den) < num; }
  std::vector<AgentId> permutation(std::size_t n) {
    std::vector<AgentId> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<AgentId>(i);
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[below(i)]);
    return p;
  }
  std::mt19937_64 gen;
};

std::vector<std::string> two_labels(Rng& rng, std::size_t n) {
  std::vector<std::string> in(n);
  for (auto& x : in) x = rng.coin(1, 2) ? "1" : "0";
  return in;
}

std::vector<Edge> random_undirected(Rng& rng, std::size_t n) {
  std::map<std::pair<AgentId, AgentId>, std::uint64_t> links;
  auto key = [](AgentId a, AgentId b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  const auto perm = rng.permutation(n);
  for (std::size_t i = 1; i < n; ++i) links[key(perm[i], perm[rng.below(i)])] = 1;
  if (n >= 3) {
    const std::size_t extra = rng.below(n);
    for (std::size_t k = 0; k < extra; ++k) {
      AgentId a = static_cast<AgentId>(rng.below(n)), b = static_cast<AgentId>(rng.below(n));
      if (a != b) links.emplace(key(a, b), 1);
    }
    if (rng.coin(1, 5)) {
      auto it = links.begin();
      std::advance(it, static_cast<long>(rng.below(links.size())));
      it->second = 2;
    }
  }
  std::vector<Edge> edges;
  for (const auto& [k, m] : links) {
    edges.push_back(Edge{k.first, k.second, m, std::nullopt});
    edges.push_back(Edge{k.second, k.first, m, std::nullopt});
  }
  normalize_edges(edges);
  return edges;
}

std::vector<Edge> random_directed(Rng& rng, std::size_t n) {
  std::map<std::pair<AgentId, AgentId>, std::uint64_t> arcs;
  // An out-arborescence and an in-arborescence sharing a root give strong connectivity.
  const auto out_order = rng.permutation(n);
  for (std::size_t i = 1; i < n; ++i) arcs[{out_order[rng.below(i)], out_order[i]}] = 1;
  auto in_order = rng.permutation(n);
  std::swap(*std::find(in_order.begin(), in_order.end(), out_order[0]), in_order[0]);
  for (std::size_t i = 1; i < n; ++i) arcs[{in_order[i], in_order[rng.below(i)]}] = 1;
  if (n >= 3) {
    const std::size_t extra = rng.below(n);
    for (std::size_t k = 0; k < extra; ++k) {
      AgentId a = static_cast<AgentId>(rng.below(n)), b = static_cast<AgentId>(rng.below(n));
      if (a != b) arcs.emplace(std::make_pair(a, b), 1);
    }
    if (rng.coin(1, 5)) {
      auto it = arcs.begin();
      std::advance(it, static_cast<long>(rng.below(arcs.size())));
      it->second = 2;
    }
  }
  std::vector<Edge> edges;
  for (const auto& [k, m] : arcs) edges.push_back(Edge{k.first, k.second, m, std::nullopt});
  normalize_edges(edges);
  return edges;
}

std::vector<Edge> random_connected_step(Rng& rng, std::size_t n, bool directed) {
  if (n == 1) return {};
  return directed ? random_directed(rng, n) : random_undirected(rng, n);
}

void require_n(std::size_t n) {
  if (n < 2) throw ParameterError("generator needs n >= 2, got " + std::to_string(n));
}

}  // namespace

DynamicSchedule gen_random_connected(std::size_t n, std::size_t t, std::uint64_t seed, bool directed) {
  require_n(n);
  if (t < 1) throw ParameterError("generator needs t >= 1");
  Rng rng(seed);
  DynamicSchedule s;
  s.n = n;
  s.directed = directed;
  s.awareness = directed ? Awareness::LateOutdegree : Awareness::None;
  s.inputs = {two_labels(rng, n)};
  for (std::size_t k = 0; k < t; ++k) s.steps.push_back(StepGraph{random_connected_step(rng, n, directed)});
  return s;
}

DynamicSchedule gen_random_ported(std::size_t n, std::size_t t, std::uint64_t seed) {
  require_n(n);
  if (t < 1) throw ParameterError("generator needs t >= 1");
  Rng rng(seed);
  DynamicSchedule s;
  s.n = n;
  s.directed = true;
  s.awareness = Awareness::OutputPort;
  s.inputs = {two_labels(rng, n)};
  for (std::size_t k = 0; k < t; ++k) {
    std::vector<Edge> copies;
    for (const Edge& e : random_directed(rng, n))
      for (std::uint64_t c = 0; c < e.multiplicity; ++c) copies.push_back(Edge{e.src, e.dst, 1, std::nullopt});
    std::map<AgentId, std::vector<std::size_t>> by_src;
    for (std::size_t i = 0; i < copies.size(); ++i) by_src[copies[i].src].push_back(i);
    for (auto& [src, idx] : by_src) {
      const auto ports = rng.permutation(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) copies[idx[i]].port = ports[i];
    }
    std::sort(copies.begin(), copies.end());
    s.steps.push_back(StepGraph{std::move(copies)});
  }
  return s;
}

DynamicSchedule gen_tau_sparse(std::size_t n, std::size_t t, std::size_t tau, std::uint64_t seed, bool directed) {
  require_n(n);
  if (tau < 1) throw ParameterError("tau must be positive");
  Rng rng(seed);
  DynamicSchedule s;
  s.n = n;
  s.directed = directed;
  s.awareness = directed ? Awareness::LateOutdegree : Awareness::None;
  s.inputs = {two_labels(rng, n)};
  for (std::size_t step = 1; step <= t; ++step) {
    if (step % tau == 0)
      s.steps.push_back(StepGraph{random_connected_step(rng, n, directed)});
    else
      s.steps.push_back(StepGraph{});
  }
  return s;
}

DynamicSchedule gen_static(std::size_t n, const std::vector<std::pair<AgentId, AgentId>>& links, std::size_t t,
                           bool directed) {
  std::vector<Edge> edges;
  for (const auto& [a, b] : links) {
    if (a >= n || b >= n) throw ParameterError("static link out of range");
    edges.push_back(Edge{a, b, 1, std::nullopt});
    if (!directed && a != b) edges.push_back(Edge{b, a, 1, std::nullopt});
  }
  normalize_edges(edges);
  DynamicSchedule s;
  s.n = n;
  s.directed = directed;
  s.awareness = directed ? Awareness::LateOutdegree : Awareness::None;
  s.inputs = {std::vector<std::string>(n, "0")};
  s.steps.assign(t, StepGraph{edges});
  return s;
}

DynamicSchedule gen_random_static(std::size_t n, std::size_t t, std::uint64_t seed, bool directed) {
  require_n(n);
  Rng rng(seed);
  DynamicSchedule s;
  s.n = n;
  s.directed = directed;
  s.awareness = directed ? Awareness::LateOutdegree : Awareness::None;
  s.inputs = {two_labels(rng, n)};
  s.steps.assign(t, StepGraph{random_connected_step(rng, n, directed)});
  return s;
}

DynamicSchedule with_random_activation(DynamicSchedule s, std::uint64_t seed, std::size_t max_gap) {
  Rng rng(seed ^ 0x5eedULL);
  std::vector<std::size_t> idle(s.n, 0);
  std::vector<std::vector<AgentId>> act;
  for (std::size_t k = 0; k < s.steps.size(); ++k) {
    std::vector<AgentId> row;
    for (AgentId a = 0; a < s.n; ++a) {
      const bool on = idle[a] + 1 >= max_gap || rng.coin(1, 2);
      if (on) {
        row.push_back(a);
        idle[a] = 0;
      } else {
        ++idle[a];
      }
    }
    act.push_back(std::move(row));
  }
  s.activation = std::move(act);
  return s;
}

DynamicSchedule with_random_delays(DynamicSchedule s, std::uint64_t seed, std::uint32_t max_delay) {
  if (!s.directed) throw ParameterError("delays require a directed schedule");
  Rng rng(seed ^ 0xde1aULL);
  std::vector<std::vector<std::uint32_t>> d;
  for (const auto& g : s.steps) {
    std::vector<std::uint32_t> row;
    for (std::size_t k = 0; k < g.edges.size(); ++k) row.push_back(static_cast<std::uint32_t>(rng.below(max_delay + 1)));
    d.push_back(std::move(row));
  }
  s.delays = std::move(d);
  return s;
}

DynamicSchedule with_uniform_delay(DynamicSchedule s, std::uint32_t delay) {
  if (!s.directed) throw ParameterError("delays require a directed schedule");
  std::vector<std::vector<std::uint32_t>> d;
  for (const auto& g : s.steps) d.emplace_back(g.edges.size(), delay);
  s.delays = std::move(d);
  return s;
}

DynamicSchedule with_leaders(DynamicSchedule s, std::size_t k) {
  for (auto& row : s.inputs)
    for (std::size_t a = 0; a < k && a < row.size(); ++a) row[a] = kLeaderLabel;
  return s;
}

DynamicSchedule with_inputs(DynamicSchedule s, const std::vector<std::string>& labels) {
  if (labels.size() != s.n) throw ParameterError("label count does not match n");
  s.inputs = {labels};
  return s;
}

DynamicSchedule as_directed(DynamicSchedule s, Awareness awareness) {
  s.directed = true;
  s.awareness = awareness;
  return s;
}

DynamicSchedule permute_agents(const DynamicSchedule& s, const std::vector<AgentId>& perm) {
  DynamicSchedule out = s;
  for (std::size_t r = 0; r < s.inputs.size(); ++r)
    for (AgentId a = 0; a < s.n; ++a) out.inputs[r][perm[a]] = s.inputs[r][a];
  for (std::size_t k = 0; k < s.steps.size(); ++k) {
    std::vector<std::pair<Edge, std::uint32_t>> rows;
    for (std::size_t i = 0; i < s.steps[k].edges.size(); ++i) {
      Edge e = s.steps[k].edges[i];
      e.src = perm[e.src];
      e.dst = perm[e.dst];
      rows.emplace_back(e, s.delays ? (*s.delays)[k][i] : 0);
    }
    std::sort(rows.begin(), rows.end());
    out.steps[k].edges.clear();
    if (out.delays) (*out.delays)[k].clear();
    for (const auto& [e, d] : rows) {
      out.steps[k].edges.push_back(e);
      if (out.delays) (*out.delays)[k].push_back(d);
    }
    if (s.activation) {
      auto& act = (*out.activation)[k];
      for (AgentId& a : act) a = perm[a];
      std::sort(act.begin(), act.end());
    }
  }
  return out;
}

DynamicSchedule prefix(const DynamicSchedule& s, std::size_t t) {
  if (t > s.horizon()) throw RangeError("prefix longer than schedule");
  DynamicSchedule out = s;
  out.steps.resize(t);
  if (out.varying_inputs()) out.inputs.resize(t + 1);
  if (out.activation) out.activation->resize(t);
  if (out.delays) out.delays->resize(t);
  return out;
}

}  // namespace histree
