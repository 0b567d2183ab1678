#pragma once

// Checks shared by the unit tests and the acceptance binary. Each returns counters so callers
// can both assert on them and report them.

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "histree/history.hpp"
#include "histree/schedule.hpp"
#include "histree/solver.hpp"
#include "oracles.hpp"

namespace checks {

using namespace histree;

struct HeavyStats {
  std::size_t placements = 0;
  std::size_t confirmed = 0;
  std::size_t wrong = 0;           // confirmed anonymity differs from the true one
  std::size_t weight_errors = 0;   // weight differs from the number of guesses below
};

namespace detail {

inline void shapes(std::vector<int>& parent, std::size_t max_nodes, std::vector<std::vector<int>>& out) {
  if (parent.size() > 1) out.push_back(parent);
  if (parent.size() == max_nodes) return;
  const int last = parent.size() > 1 ? parent.back() : 0;
  for (int p = last; p < static_cast<int>(parent.size()); ++p) {
    parent.push_back(p);
    shapes(parent, max_nodes, out);
    parent.pop_back();
  }
}

// Anonymities with children summing to at most the parent (a view may miss siblings).
inline void anonymities(const std::vector<int>& parent, std::vector<int>& a, std::vector<std::vector<int>>& out) {
  const std::size_t i = a.size();
  if (i == parent.size()) {
    out.push_back(a);
    return;
  }
  const int p = parent[i];
  int used = 0, later = 0;
  for (std::size_t c = 1; c < i; ++c)
    if (parent[c] == p) used += a[c];
  for (std::size_t c = i + 1; c < parent.size(); ++c)
    if (parent[c] == p) ++later;
  for (int x = 1; x <= a[p] - used - later; ++x) {
    a.push_back(x);
    anonymities(parent, a, out);
    a.pop_back();
  }
}

}  // namespace detail

// Every rooted tree shape with at most max_nodes nodes, every anonymity assignment with root
// anonymity up to 3, and every well-spread placement of guesses in [a, a+2] (exact on nodes
// that are only children of a node of equal anonymity).
inline HeavyStats exhaustive_heavy(std::size_t max_nodes) {
  std::vector<std::vector<int>> all;
  std::vector<int> start = {-1};
  detail::shapes(start, max_nodes, all);
  HeavyStats st;
  for (const auto& parent : all) {
    const std::size_t k = parent.size();
    HistoryGraph g;
    std::vector<NodeId> id(k);
    id[0] = g.root();
    // Parents precede children in the enumeration, and distinct inputs prevent merging.
    for (std::size_t i = 1; i < k; ++i) id[i] = g.intern(id[parent[i]], std::to_string(i), {}, {});
    const View v{g, id[k - 1]};
    std::vector<std::vector<int>> assignments;
    for (int root = 1; root <= 3; ++root) {
      std::vector<int> a = {root};
      detail::anonymities(parent, a, assignments);
    }
    for (const auto& a : assignments) {
      std::vector<std::vector<int>> options(k);
      for (std::size_t i = 1; i < k; ++i) {
        options[i].push_back(0);
        const int hi = a[i] == a[parent[i]] ? a[i] : a[i] + 2;
        for (int gv = a[i]; gv <= hi; ++gv) options[i].push_back(gv);
      }
      std::vector<std::size_t> pick(k, 0);
      while (true) {
        GuessTable t;
        bool spread = true;
        for (std::size_t i = 1; i < k && spread; ++i) {
          if (!options[i][pick[i]]) continue;
          for (std::size_t j = 1; j < i; ++j)
            if (options[j][pick[j]] && parent[j] == parent[i]) spread = false;
          t.guess[id[i]] = options[i][pick[i]];
        }
        if (spread && !t.guess.empty()) {
          ++st.placements;
          const auto r = resolve_heavy(t, v);
          if (r) {
            const std::size_t i = static_cast<std::size_t>(std::find(id.begin(), id.end(), r->first) - id.begin());
            ++st.confirmed;
            if (r->second != a[i] || t.confirmed.at(r->first) != a[i]) ++st.wrong;
          }
          for (const auto& [x, w] : t.weight) {
            std::uint64_t count = 0;
            for (const auto& [y, gv] : t.guess)
              for (NodeId z = y; z != kNoNode; z = g.node(z).parent)
                if (z == x) ++count;
            if (w != count) ++st.weight_errors;
          }
        }
        std::size_t pos = 1;
        while (pos < k && ++pick[pos] == options[pos].size()) pick[pos++] = 0;
        if (pos == k) break;
      }
    }
  }
  return st;
}

struct GuessStats {
  std::size_t guesses = 0;
  std::size_t exact_only_children = 0;
  std::size_t under = 0;        // guess below the true anonymity
  std::size_t inexact_only = 0;  // only child whose guess is not exact
};

// All guesses a guesser can make on a whole ground-truth history tree with true anonymities.
inline void guess_soundness(const HistoryTree& ht, std::size_t t, GuessStats& st) {
  const HistoryGraph& g = ht.graph;
  const View whole{g, ht.agent_node[t][0]};
  std::map<NodeId, BigInt> known;
  for (NodeId x = 0; x < g.size(); ++x) known[x] = ht.anonymity[x];
  for (NodeId target = 0; target < g.size(); ++target) {
    std::set<NodeId> sources;
    for (const RedEdge& e : g.node(target).red_in) sources.insert(e.source);
    for (NodeId u : sources) {
      if (!is_guesser(whole, u, known)) continue;
      const BigInt guess = make_guess(whole, u, target, known);
      ++st.guesses;
      if (guess < ht.anonymity[target]) ++st.under;
      if (g.children(g.node(target).parent).size() == 1) {
        if (guess == ht.anonymity[target]) ++st.exact_only_children;
        else ++st.inexact_only;
      }
    }
  }
}

// Quotient of a static graph straight from the stable partition: classes are the agent sets of
// the partition at time t, arcs count the messages one receiver gets from each class.
struct PlainQuotient {
  std::vector<std::string> labels;
  std::vector<std::uint64_t> sizes;
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> arcs;
};

inline PlainQuotient plain_quotient(const DynamicSchedule& s, std::size_t t) {
  const auto cls = oracle::classes(s, t).back();
  std::map<AgentId, std::size_t> index;
  PlainQuotient q;
  for (AgentId a = 0; a < s.n; ++a)
    if (!index.count(cls[a])) {
      index[cls[a]] = q.labels.size();
      q.labels.push_back(s.inputs[0][a]);
      q.sizes.push_back(0);
    }
  for (AgentId a = 0; a < s.n; ++a) ++q.sizes[index[cls[a]]];
  // Agents of one class receive identical multisets, so any representative receiver works.
  std::map<std::size_t, AgentId> rep;
  for (AgentId a = 0; a < s.n; ++a) rep.emplace(index[cls[a]], a);
  for (const auto& e : s.steps[0].edges)
    if (rep.at(index[cls[e.dst]]) == e.dst) q.arcs[{index[cls[e.src]], index[cls[e.dst]]}] += e.multiplicity;
  return q;
}

// Isomorphism test by brute force over class permutations (quotients here have few classes).
inline bool isomorphic(const QuotientGraph& a, const PlainQuotient& b) {
  const std::size_t k = a.labels.size();
  if (k != b.labels.size()) return false;
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> arcs_a;
  for (const Arc& arc : a.arcs) arcs_a[{arc.from, arc.to}] += arc.multiplicity;
  std::vector<std::size_t> p(k);
  for (std::size_t i = 0; i < k; ++i) p[i] = i;
  do {
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i)
      ok = a.labels[i] == b.labels[p[i]] && a.class_sizes[i] == b.sizes[p[i]];
    if (!ok) continue;
    std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> mapped;
    for (const auto& [key, m] : arcs_a) mapped[{p[key.first], p[key.second]}] = m;
    if (mapped == b.arcs) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

}  // namespace checks
