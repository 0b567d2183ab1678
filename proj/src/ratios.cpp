#include <algorithm>
#include <deque>
#include <map>

#include "histree/errors.hpp"
#include "histree/solver.hpp"

namespace histree {

namespace {

bool level_nonbranching(const HistoryGraph& g, int level) {
  bool any = false;
  for (NodeId x = 0; x < g.size(); ++x) {
    if (g.node(x).level != level) continue;
    any = true;
    if (g.children(x).size() != 1) return false;
  }
  return any;
}

}  // namespace

std::optional<int> find_nonbranching_level(const View& v, int min_level) {
  for (int l = std::max(min_level, -1); l < v.graph.max_level(); ++l)
    if (level_nonbranching(v.graph, l)) return l;
  return std::nullopt;
}

bool interval_nonbranching(const View& v, int first, int last) {
  if (first > last || last >= v.graph.max_level()) return false;
  for (int l = first; l <= last; ++l)
    if (!level_nonbranching(v.graph, l)) return false;
  return true;
}

std::optional<NodeId> chain_descendant(const View& view, NodeId v, int level) {
  while (view.graph.node(v).level < level) {
    const auto& ch = view.graph.children(v);
    if (ch.size() != 1) return std::nullopt;
    v = ch[0];
  }
  return v;
}

RatioAssignment solve_ratios_undirected(const View& v, int level) { return solve_ratios_undirected(v, level, level); }

RatioAssignment solve_ratios_undirected(const View& v, int first, int last) {
  const HistoryGraph& g = v.graph;
  if (!interval_nonbranching(v, first, last))
    throw ContractViolation("solve_ratios_undirected: levels " + std::to_string(first) + ".." + std::to_string(last) +
                            " are not non-branching in the view");
  const auto rank = canonical_ranks(v);
  std::vector<NodeId> branches = g.level_nodes(first);
  std::sort(branches.begin(), branches.end(), [&](NodeId a, NodeId b) { return rank[a] < rank[b]; });

  std::map<NodeId, std::size_t> branch_of;
  for (std::size_t b = 0; b < branches.size(); ++b) {
    NodeId x = branches[b];
    branch_of[x] = b;
    for (int l = first; l <= last; ++l) {
      x = g.children(x)[0];
      branch_of[x] = b;
    }
  }
  // m[i][j]: messages each agent of branch j received from branch i over the interval.
  const std::size_t k = branches.size();
  std::vector<std::vector<std::uint64_t>> m(k, std::vector<std::uint64_t>(k, 0));
  for (NodeId x = 0; x < g.size(); ++x) {
    const HNode& n = g.node(x);
    if (n.level <= first || n.level > last + 1) continue;
    for (const RedEdge& e : n.red_in) {
      auto src = branch_of.find(e.source);
      if (src == branch_of.end()) continue;
      m[src->second][branch_of.at(x)] += e.multiplicity;
    }
  }

  std::vector<std::optional<Ratio>> a(k);
  a[0] = Ratio(1);
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    for (std::size_t j = 0; j < k; ++j) {
      if (m[i][j] == 0 && m[j][i] == 0) continue;
      if (m[i][j] == 0 || m[j][i] == 0)
        throw InconsistencyError("solve_ratios_undirected: one-way red edges between branches");
      // a(j) * m[i][j] = a(i) * m[j][i]: both sides count messages exchanged by the two classes.
      const Ratio value = *a[i] * Ratio(m[j][i]) / Ratio(m[i][j]);
      if (a[j]) {
        if (*a[j] != value) throw InconsistencyError("solve_ratios_undirected: contradictory ratios");
        continue;
      }
      a[j] = value;
      queue.push_back(j);
    }
  }
  std::size_t unreached = 0;
  std::string names;
  for (std::size_t b = 0; b < k; ++b)
    if (!a[b]) {
      ++unreached;
      names += " " + std::to_string(branches[b]);
    }
  if (unreached)
    throw PartialAssignmentError("solve_ratios_undirected: unreached nodes:" + names, unreached);

  RatioAssignment r;
  r.level = first;
  r.basis = branches[0];
  for (std::size_t b = 0; b < k; ++b) r.ratio[branches[b]] = *a[b];
  for (int l = first - 1; l >= -1; --l) {
    for (NodeId x : g.level_nodes(l)) {
      Ratio sum = 0;
      bool all = !g.children(x).empty();
      for (NodeId c : g.children(x)) {
        auto it = r.ratio.find(c);
        if (it == r.ratio.end()) {
          all = false;
          break;
        }
        sum += it->second;
      }
      if (all) r.ratio[x] = sum;
    }
  }
  return r;
}

std::map<NodeId, BigInt> scale_with_leaders(const RatioAssignment& r, NodeId leader_node, const BigInt& ell) {
  auto it = r.ratio.find(leader_node);
  if (it == r.ratio.end()) throw ContractViolation("scale_with_leaders: leader node has no ratio");
  const Ratio factor = Ratio(ell) / it->second;
  std::map<NodeId, BigInt> out;
  for (const auto& [node, value] : r.ratio) {
    const Ratio scaled = value * factor;
    if (boost::multiprecision::denominator(scaled) != 1 || scaled <= 0)
      throw InconsistencyError("scale_with_leaders: non-integral anonymity " + to_string(scaled));
    out[node] = boost::multiprecision::numerator(scaled);
  }
  return out;
}

}  // namespace histree
