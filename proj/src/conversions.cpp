#include <algorithm>
#include <map>

#include "histree/errors.hpp"
#include "histree/history.hpp"

namespace histree {

QuotientGraph minimum_base(const HistoryTree& ht) {
  const HistoryGraph& g = ht.graph;
  std::vector<std::vector<NodeId>> levels(static_cast<std::size_t>(g.max_level() + 1));
  for (NodeId i = 1; i < g.size(); ++i) levels[static_cast<std::size_t>(g.node(i).level)].push_back(i);

  for (std::size_t s = 0; s + 1 < levels.size(); ++s) {
    if (levels[s].size() != levels[s + 1].size()) continue;
    QuotientGraph q;
    q.level = static_cast<int>(s);
    std::map<NodeId, std::uint32_t> index;
    for (NodeId v : levels[s]) {
      index[v] = static_cast<std::uint32_t>(q.labels.size());
      q.labels.push_back(g.node(v).input);
      q.class_sizes.push_back(ht.anonymity.empty() ? 0 : ht.anonymity[v]);
    }
    for (NodeId c : levels[s + 1]) {
      const HNode& n = g.node(c);
      for (const RedEdge& e : n.red_in) {
        auto src = index.find(e.source);
        if (src == index.end()) throw StructureError("minimum_base: red edge skips a level");
        q.arcs.push_back(Arc{src->second, index.at(n.parent), e.multiplicity});
      }
    }
    std::sort(q.arcs.begin(), q.arcs.end());
    return q;
  }
  throw NotStabilizedError("minimum_base: no two consecutive levels of equal size within the horizon");
}

FoldedView folded_view(const View& v) {
  const HistoryGraph& g = v.graph;
  std::vector<char> keep(g.size(), 0);
  keep[v.bottom] = 1;
  for (NodeId i = static_cast<NodeId>(g.size()); i-- > 0;) {
    if (!keep[i]) continue;
    for (const RedEdge& e : g.node(i).red_in) keep[e.source] = 1;
  }
  FoldedView f;
  std::vector<std::uint32_t> index(g.size(), 0);
  for (NodeId i = 0; i < g.size(); ++i) {
    if (!keep[i]) continue;
    index[i] = static_cast<std::uint32_t>(f.level.size());
    f.level.push_back(g.node(i).level);
    f.input.push_back(g.node(i).input);
  }
  for (NodeId i = 0; i < g.size(); ++i) {
    if (!keep[i]) continue;
    for (const RedEdge& e : g.node(i).red_in) f.arcs.push_back(Arc{index[e.source], index[i], e.multiplicity});
  }
  f.sink = index[v.bottom];
  return f;
}

std::vector<std::size_t> UnraveledTree::count_per_depth() const {
  std::vector<std::size_t> out;
  for (std::uint32_t d : depth) {
    if (out.size() <= d) out.resize(d + 1, 0);
    ++out[d];
  }
  return out;
}

UnraveledTree unravel(const FoldedView& f, std::size_t depth, std::size_t cap) {
  if (static_cast<long long>(depth) > f.level[f.sink] + 1)
    throw ContractViolation("unravel: depth exceeds folded view height");
  std::vector<std::vector<Arc>> in(f.level.size());
  for (const Arc& a : f.arcs) in[a.to].push_back(a);

  UnraveledTree t;
  std::vector<std::uint32_t> folded;  // folded node behind each tree node
  t.parent.push_back(0);
  t.depth.push_back(0);
  t.input.push_back(f.input[f.sink]);
  folded.push_back(f.sink);
  for (std::size_t i = 0; i < t.parent.size(); ++i) {
    if (t.depth[i] >= depth) continue;
    for (const Arc& a : in[folded[i]]) {
      for (std::uint64_t k = 0; k < a.multiplicity; ++k) {
        if (t.parent.size() >= cap) throw CapExceededError("unravel: tree exceeds " + std::to_string(cap) + " nodes");
        t.parent.push_back(static_cast<std::uint32_t>(i));
        t.depth.push_back(t.depth[i] + 1);
        t.input.push_back(f.input[a.from]);
        folded.push_back(a.from);
      }
    }
  }
  return t;
}

}  // namespace histree
