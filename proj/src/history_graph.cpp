#include <algorithm>
#include <functional>

#include "histree/errors.hpp"
#include "histree/history.hpp"

namespace histree {

namespace {

inline void mix(std::size_t& h, std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); }

bool same_slot(const RedEdge& a, const RedEdge& b) {
  return a.source == b.source && a.port == b.port && a.sender_outdegree == b.sender_outdegree;
}

}  // namespace

HistoryGraph::HistoryGraph() {
  nodes_.push_back(HNode{});
  children_.emplace_back();
}

void HistoryGraph::normalize_red(std::vector<RedEdge>& red) {
  std::sort(red.begin(), red.end(), [](const RedEdge& a, const RedEdge& b) {
    return std::tie(a.source, a.port, a.sender_outdegree) < std::tie(b.source, b.port, b.sender_outdegree);
  });
  std::vector<RedEdge> out;
  for (const RedEdge& e : red) {
    if (e.multiplicity == 0) continue;
    if (!out.empty() && same_slot(out.back(), e)) {
      out.back().multiplicity += e.multiplicity;
      continue;
    }
    out.push_back(e);
  }
  red = std::move(out);
}

std::size_t HistoryGraph::key_hash(NodeId parent, const std::string& input,
                                   const std::optional<std::uint64_t>& outdegree,
                                   const std::vector<RedEdge>& red) const {
  std::size_t h = std::hash<std::string>{}(input);
  mix(h, parent);
  mix(h, outdegree ? *outdegree + 1 : 0);
  for (const RedEdge& e : red) {
    mix(h, e.source);
    mix(h, e.multiplicity);
    mix(h, e.port ? *e.port + 1 : 0);
    mix(h, e.sender_outdegree ? *e.sender_outdegree + 1 : 0);
  }
  return h;
}

std::optional<NodeId> HistoryGraph::find(NodeId parent, const std::string& input,
                                         std::optional<std::uint64_t> outdegree, std::vector<RedEdge> red_in) const {
  normalize_red(red_in);
  auto [lo, hi] = index_.equal_range(key_hash(parent, input, outdegree, red_in));
  for (auto it = lo; it != hi; ++it) {
    const HNode& n = nodes_[it->second];
    if (n.parent == parent && n.input == input && n.outdegree == outdegree && n.red_in == red_in) return it->second;
  }
  return std::nullopt;
}

NodeId HistoryGraph::intern(NodeId parent, const std::string& input, std::optional<std::uint64_t> outdegree,
                            std::vector<RedEdge> red_in) {
  if (parent >= nodes_.size()) throw ContractViolation("intern: parent does not exist");
  normalize_red(red_in);
  for (const RedEdge& e : red_in)
    if (e.source >= nodes_.size()) throw ContractViolation("intern: red source does not exist");
  const std::size_t h = key_hash(parent, input, outdegree, red_in);
  auto [lo, hi] = index_.equal_range(h);
  for (auto it = lo; it != hi; ++it) {
    const HNode& n = nodes_[it->second];
    if (n.parent == parent && n.input == input && n.outdegree == outdegree && n.red_in == red_in) return it->second;
  }
  HNode n;
  n.level = nodes_[parent].level + 1;
  n.parent = parent;
  n.input = input;
  n.outdegree = outdegree;
  n.red_in = std::move(red_in);
  const NodeId id = static_cast<NodeId>(nodes_.size());
  max_level_ = std::max(max_level_, n.level);
  nodes_.push_back(std::move(n));
  children_.emplace_back();
  children_[parent].push_back(id);
  index_.emplace(h, id);
  return id;
}

std::vector<NodeId> HistoryGraph::level_nodes(int level) const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].level == level) out.push_back(i);
  return out;
}

View fragment(const HistoryGraph& g, NodeId bottom) {
  std::vector<char> keep(g.size(), 0);
  keep[bottom] = 1;
  // Storage order is topological, so a reverse sweep closes over ancestors.
  for (NodeId i = static_cast<NodeId>(g.size()); i-- > 0;) {
    if (!keep[i]) continue;
    const HNode& n = g.node(i);
    if (n.parent != kNoNode) keep[n.parent] = 1;
    for (const RedEdge& e : n.red_in) keep[e.source] = 1;
  }
  View v;
  std::vector<NodeId> map(g.size(), kNoNode);
  map[0] = 0;
  for (NodeId i = 1; i < g.size(); ++i) {
    if (!keep[i]) continue;
    const HNode& n = g.node(i);
    std::vector<RedEdge> red = n.red_in;
    for (RedEdge& e : red) e.source = map[e.source];
    map[i] = v.graph.intern(map[n.parent], n.input, n.outdegree, std::move(red));
  }
  v.bottom = map[bottom];
  return v;
}

bool is_well_formed(const View& v) {
  const HistoryGraph& g = v.graph;
  if (g.size() == 0 || v.bottom >= g.size()) return false;
  if (g.node(0).level != -1) return false;
  std::vector<char> reaches(g.size(), 0);
  reaches[v.bottom] = 1;
  for (NodeId i = static_cast<NodeId>(g.size()); i-- > 1;) {
    const HNode& n = g.node(i);
    if (n.parent >= i) return false;
    if (n.level != g.node(n.parent).level + 1) return false;
    for (const RedEdge& e : n.red_in) {
      if (e.source >= i || e.multiplicity == 0) return false;
      if (e.source == 0) return false;
    }
    if (!reaches[i]) return false;
    reaches[n.parent] = 1;
    for (const RedEdge& e : n.red_in) reaches[e.source] = 1;
  }
  return true;
}

}  // namespace histree
