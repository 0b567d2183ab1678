#include <algorithm>
#include <map>

#include "histree/errors.hpp"
#include "histree/history.hpp"

namespace histree {

namespace {

// Copies every node of `src` into `dst`, returning the id map.
std::vector<NodeId> absorb(HistoryGraph& dst, const HistoryGraph& src) {
  std::vector<NodeId> map(src.size(), kNoNode);
  map[0] = dst.root();
  for (NodeId i = 1; i < src.size(); ++i) {
    const HNode& n = src.node(i);
    std::vector<RedEdge> red = n.red_in;
    for (RedEdge& e : red) e.source = map[e.source];
    map[i] = dst.intern(map[n.parent], n.input, n.outdegree, std::move(red));
  }
  return map;
}

NodeId dummy_chain(HistoryGraph& g, NodeId x, int level) {
  while (g.node(x).level < level) x = g.intern(x, kInactiveLabel, {}, {});
  return x;
}

}  // namespace

View merge_views(const View& own, std::span<const Received> received, const MergeOptions& opt) {
  View out{own.graph, own.bottom};
  std::vector<RedEdge> red;
  std::map<const View*, NodeId> seen;
  for (const Received& r : received) {
    if (!r.view) throw ContractViolation("merge_views: null view");
    if (opt.strict && r.view->height() != own.height())
      throw ContractViolation("merge_views: received view of height " + std::to_string(r.view->height()) +
                              " does not match own height " + std::to_string(own.height()));
    auto it = seen.find(r.view.get());
    NodeId b;
    if (it != seen.end()) {
      b = it->second;
    } else {
      b = absorb(out.graph, r.view->graph)[r.view->bottom];
      seen.emplace(r.view.get(), b);
    }
    red.push_back(RedEdge{b, r.multiplicity, r.port, r.sender_outdegree});
  }
  const std::string& input = opt.input ? *opt.input : own.graph.node(own.bottom).input;
  const NodeId fresh = out.graph.intern(own.bottom, input, opt.outdegree, std::move(red));
  if (opt.strict) {
    out.bottom = fresh;
    return out;
  }
  // A taller received view may hold nodes that no longer lead to the new bottom.
  return fragment(out.graph, fresh);
}

std::vector<int> longest_path_levels(const View& v) {
  const HistoryGraph& g = v.graph;
  std::vector<int> lambda(g.size(), -1);
  for (NodeId i = 1; i < g.size(); ++i) {
    const HNode& n = g.node(i);
    int l = lambda[n.parent] + 1;
    for (const RedEdge& e : n.red_in) l = std::max(l, lambda[e.source] + 1);
    lambda[i] = l;
  }
  return lambda;
}

namespace {

View equalize_impl(const View& v, bool relocate_red) {
  const HistoryGraph& g = v.graph;
  const std::vector<int> lambda = longest_path_levels(v);
  View out;
  std::vector<NodeId> map(g.size(), kNoNode);
  map[0] = out.graph.root();
  for (NodeId i = 1; i < g.size(); ++i) {
    const HNode& n = g.node(i);
    const NodeId parent = dummy_chain(out.graph, map[n.parent], lambda[i] - 1);
    std::vector<RedEdge> red = n.red_in;
    for (RedEdge& e : red)
      e.source = relocate_red ? dummy_chain(out.graph, map[e.source], lambda[i] - 1) : map[e.source];
    map[i] = out.graph.intern(parent, n.input, n.outdegree, std::move(red));
  }
  out.bottom = map[v.bottom];
  return out;
}

}  // namespace

View equalize(const View& v) { return equalize_impl(v, true); }

View equalize_black(const View& v) { return equalize_impl(v, false); }

bool is_equalized(const View& v) {
  const HistoryGraph& g = v.graph;
  for (NodeId i = 1; i < g.size(); ++i)
    for (const RedEdge& e : g.node(i).red_in)
      if (g.node(e.source).level != g.node(i).level - 1) return false;
  return true;
}

View delete_level0_and_remerge(const View& v) {
  if (v.height() < 1) throw ContractViolation("delete_level0_and_remerge: view height must be at least 1");
  const HistoryGraph& g = v.graph;
  HistoryGraph out;
  std::vector<NodeId> map(g.size(), kNoNode);
  map[0] = out.root();
  // Storage order is topological, so every key below is built from already-merged nodes and
  // equal keys collapse on interning: one pass reaches the congruence fixpoint.
  for (NodeId i = 1; i < g.size(); ++i) {
    const HNode& n = g.node(i);
    if (n.level == 0) continue;
    std::vector<RedEdge> red;
    for (RedEdge e : n.red_in) {
      if (g.node(e.source).level == 0) continue;  // messages of the forgotten step
      e.source = map[e.source];
      red.push_back(e);
    }
    const bool top = n.level == 1;
    map[i] = out.intern(top ? out.root() : map[n.parent], n.input, top ? std::nullopt : n.outdegree,
                        std::move(red));
  }
  return fragment(out, map[v.bottom]);
}

}  // namespace histree
