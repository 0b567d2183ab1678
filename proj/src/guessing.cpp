#include <algorithm>
#include <deque>
#include <set>

#include "histree/errors.hpp"
#include "histree/solver.hpp"

namespace histree {

bool is_guesser(const View& v, NodeId u, const std::map<NodeId, BigInt>& known) {
  auto it = known.find(u);
  if (it == known.end()) return false;
  const auto& ch = v.graph.children(u);
  if (ch.empty()) return false;
  BigInt sum = 0;
  for (NodeId c : ch) {
    auto k = known.find(c);
    if (k == known.end()) return false;
    sum += k->second;
  }
  return sum == it->second;
}

BigInt make_guess(const View& v, NodeId guesser, NodeId target, const std::map<NodeId, BigInt>& known) {
  const HistoryGraph& g = v.graph;
  if (!is_guesser(v, guesser, known)) throw ContractViolation("make_guess: node is not a guesser");
  std::uint64_t to_target = 0;
  for (const RedEdge& e : g.node(target).red_in)
    if (e.source == guesser) to_target += e.multiplicity;
  if (to_target == 0) throw ContractViolation("make_guess: no red edge from guesser to target");
  const NodeId p = g.node(target).parent;
  // Messages from p's class into the guesser's class equal messages from the guesser's class
  // into p's class, and target alone received to_target of each of the latter per agent.
  BigInt total = 0;
  for (NodeId c : g.children(guesser))
    for (const RedEdge& e : g.node(c).red_in)
      if (e.source == p) total += known.at(c) * e.multiplicity;
  return total / to_target;
}

std::optional<std::pair<NodeId, BigInt>> resolve_heavy(GuessTable& guesses, const View& v) {
  const HistoryGraph& g = v.graph;
  for (const auto& [x, value] : guesses.guess) {
    if (x == g.root()) throw ContractViolation("resolve_heavy: the root cannot carry a guess");
    for (NodeId s : g.children(g.node(x).parent))
      if (s != x && guesses.guess.count(s))
        throw ContractViolation("resolve_heavy: guesses are not well spread (siblings " + std::to_string(x) + ", " +
                                std::to_string(s) + ")");
  }
  guesses.weight.clear();
  for (const auto& [x, value] : guesses.guess)
    for (NodeId y = x; y != kNoNode; y = g.node(y).parent) ++guesses.weight[y];

  std::optional<NodeId> best;
  std::vector<std::uint32_t> rank;
  for (const auto& [x, value] : guesses.guess) {
    if (BigInt(guesses.weight[x]) < value) continue;
    if (!best) {
      best = x;
      continue;
    }
    const int lx = g.node(x).level, lb = g.node(*best).level;
    if (lx < lb) continue;
    if (lx == lb) {
      if (rank.empty()) rank = canonical_ranks(v);
      if (rank[x] > rank[*best]) continue;
    }
    best = x;
  }
  if (!best) return std::nullopt;
  const BigInt value = guesses.guess.at(*best);
  guesses.confirmed[*best] = value;
  return std::make_pair(*best, value);
}

UpperBoundTable propagate_upper_bounds(const View& v, int first, int last, const BigInt& ell) {
  const HistoryGraph& g = v.graph;
  if (!interval_nonbranching(v, first, last))
    throw ContractViolation("propagate_upper_bounds: interval is not non-branching in the view");
  const auto rank = canonical_ranks(v);
  std::vector<NodeId> branches = g.level_nodes(first);
  std::sort(branches.begin(), branches.end(), [&](NodeId a, NodeId b) { return rank[a] < rank[b]; });
  const std::size_t k = branches.size();
  std::map<NodeId, std::size_t> branch_of;
  std::vector<std::vector<NodeId>> chain(k);  // chain[b][l - first]
  for (std::size_t b = 0; b < k; ++b) {
    NodeId x = branches[b];
    chain[b].push_back(x);
    branch_of[x] = b;
    for (int l = first; l <= last; ++l) {
      x = g.children(x)[0];
      chain[b].push_back(x);
      branch_of[x] = b;
    }
  }
  // out[x]: red edges leaving x, as (target, multiplicity).
  std::map<NodeId, std::vector<std::pair<NodeId, std::uint64_t>>> out;
  for (NodeId x = 0; x < g.size(); ++x)
    for (const RedEdge& e : g.node(x).red_in)
      if (branch_of.count(e.source) && branch_of.count(x)) out[e.source].emplace_back(x, e.multiplicity);

  std::vector<std::optional<BigInt>> bound(k);
  std::vector<NodeId> anchor(k, kNoNode);
  std::deque<std::size_t> queue;
  for (std::size_t b = 0; b < k; ++b)
    if (g.node(branches[b]).input == kLeaderLabel) {
      bound[b] = ell;
      anchor[b] = branches[b];
      queue.push_back(b);
    }

  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    // Estimates on every other branch from the chain of i below its anchor.
    std::map<std::size_t, std::vector<std::pair<NodeId, BigInt>>> est;
    for (int l = g.node(anchor[i]).level; l <= last; ++l) {
      const NodeId x = chain[i][static_cast<std::size_t>(l - first)];
      const NodeId child = chain[i][static_cast<std::size_t>(l - first + 1)];
      if (!g.node(child).outdegree) throw ModelError("propagate_upper_bounds: missing outdegree annotation");
      const BigInt delta = *g.node(child).outdegree;
      for (const auto& [w, mult] : out[x]) {
        const std::size_t j = branch_of.at(w);
        if (j == i || bound[j] || g.node(w).level != l + 1) continue;
        auto& list = est[j];
        if (std::any_of(list.begin(), list.end(), [&](const auto& p) { return p.first == w; })) continue;
        list.emplace_back(w, delta * *bound[i]);
      }
    }
    for (auto& [j, list] : est) {
      // Branch i may split outside the view at most U_i - 1 times, so among its first U_i
      // estimates (on distinct levels) at least one uses the right outdegree.
      if (BigInt(list.size()) < *bound[i]) continue;
      std::sort(list.begin(), list.end(),
                [&](const auto& a, const auto& b) { return g.node(a.first).level < g.node(b.first).level; });
      const std::size_t need = static_cast<std::size_t>(*bound[i]);
      BigInt best = 0;
      for (std::size_t e = 0; e < need; ++e) best = std::max(best, list[e].second);
      bound[j] = best;
      anchor[j] = list[need - 1].first;
      queue.push_back(j);
    }
  }

  UpperBoundTable t;
  t.status = UpperBoundTable::Status::Complete;
  for (std::size_t b = 0; b < k; ++b) {
    if (!bound[b]) {
      t.status = UpperBoundTable::Status::NeedsMoreLevels;
      continue;
    }
    t.bound[branches[b]] = *bound[b];
    t.anchor[branches[b]] = anchor[b];
  }
  return t;
}

}  // namespace histree
