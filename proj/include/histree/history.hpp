#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "histree/schedule.hpp"

namespace histree {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

// Label of dummy nodes inserted by equalization and of inactive agents in ground truth.
// The leading unit separator keeps it outside any user alphabet.
inline const std::string kInactiveLabel = "\x1f" "inactive";
inline bool is_reserved_label(const std::string& s) { return !s.empty() && s[0] == '\x1f'; }

struct RedEdge {
  NodeId source = kNoNode;
  std::uint64_t multiplicity = 0;
  std::optional<std::uint32_t> port;
  std::optional<std::uint64_t> sender_outdegree;  // early outdegree awareness

  auto operator<=>(const RedEdge&) const = default;
};

struct HNode {
  int level = -1;
  NodeId parent = kNoNode;
  std::string input;
  std::optional<std::uint64_t> outdegree;  // annotation on the black edge from parent
  std::vector<RedEdge> red_in;             // sorted, one entry per (source, port, sender_outdegree)

  bool is_dummy() const { return input == kInactiveLabel; }
};

// Leveled graph of classes with hash-consed nodes: two children of the same parent with the
// same input, annotation and incoming red edges are the same node. Storage order is topological
// (parents and red sources precede their targets), root is node 0.
class HistoryGraph {
 public:
  HistoryGraph();

  NodeId root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }
  const HNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<NodeId>& children(NodeId id) const { return children_.at(id); }
  int max_level() const { return max_level_; }
  std::vector<NodeId> level_nodes(int level) const;

  // Returns the existing node with this key or appends a new one. red_in is normalized first.
  NodeId intern(NodeId parent, const std::string& input, std::optional<std::uint64_t> outdegree,
                std::vector<RedEdge> red_in);
  std::optional<NodeId> find(NodeId parent, const std::string& input, std::optional<std::uint64_t> outdegree,
                             std::vector<RedEdge> red_in) const;

  static void normalize_red(std::vector<RedEdge>& red);

 private:
  std::size_t key_hash(NodeId parent, const std::string& input, const std::optional<std::uint64_t>& outdegree,
                       const std::vector<RedEdge>& red) const;

  std::vector<HNode> nodes_;
  std::vector<std::vector<NodeId>> children_;
  std::unordered_multimap<std::size_t, NodeId> index_;
  int max_level_ = -1;
};

struct View {
  HistoryGraph graph;
  NodeId bottom = 0;

  int height() const { return graph.node(bottom).level; }
};

struct HistoryTree {
  HistoryGraph graph;
  std::vector<std::vector<NodeId>> agent_node;  // [time][agent]
  std::vector<std::uint64_t> anonymity;         // per node, agents in the class

  std::size_t horizon() const { return agent_node.size() - 1; }
};

struct GroundTruthOptions {
  InactiveDelivery inactive = InactiveDelivery::Queue;
};

HistoryTree build_ground_truth(const DynamicSchedule& s, std::size_t t, GroundTruthOptions opt = {});
View extract_view(const HistoryTree& ht, AgentId agent, std::size_t t);
// Ancestor-closed fragment of g spanned by paths into `bottom`, copied into a fresh graph.
View fragment(const HistoryGraph& g, NodeId bottom);

struct Received {
  std::shared_ptr<const View> view;
  std::uint64_t multiplicity = 1;
  std::optional<std::uint32_t> port;
  std::optional<std::uint64_t> sender_outdegree;
};

struct MergeOptions {
  std::optional<std::string> input;        // input of the new bottom; defaults to own bottom's input
  std::optional<std::uint64_t> outdegree;  // annotation on the new black edge
  bool strict = true;                      // received views must have own height
};

View merge_views(const View& own, std::span<const Received> received, const MergeOptions& opt = {});

// Longest-path level of every node (parent and red edges each advance one level).
std::vector<int> longest_path_levels(const View& v);
// Inserts dummy nodes so every black and red edge joins consecutive levels. Idempotent.
View equalize(const View& v);
// Only restores black-edge level discipline; red edges may still span several levels.
View equalize_black(const View& v);
bool is_equalized(const View& v);

View delete_level0_and_remerge(const View& v);

// Structural sanity check used by self-stabilization to detect corrupted state.
bool is_well_formed(const View& v);

struct CanonicalCode {
  std::string bytes;

  auto operator<=>(const CanonicalCode&) const = default;
  std::string digest() const;  // 16 hex chars
};

CanonicalCode canonical_code(const View& v);
CanonicalCode canonical_code(const HistoryGraph& g, NodeId node);
// Canonical rank of each node of the view (equal rank iff equal fragment within the view).
std::vector<std::uint32_t> canonical_ranks(const View& v);
std::size_t serialized_size(const View& v);

// Structure conversions.
struct Arc {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  std::uint64_t multiplicity = 0;
  auto operator<=>(const Arc&) const = default;
};

struct QuotientGraph {
  int level = 0;  // level of the history tree the classes come from
  std::vector<std::string> labels;
  std::vector<std::uint64_t> class_sizes;
  std::vector<Arc> arcs;  // from class to class, weight = messages each receiver gets per step
};

QuotientGraph minimum_base(const HistoryTree& ht);

struct FoldedView {
  std::vector<int> level;
  std::vector<std::string> input;
  std::vector<Arc> arcs;  // red edges, source -> target
  std::uint32_t sink = 0;
};

FoldedView folded_view(const View& v);

struct UnraveledTree {
  std::vector<std::uint32_t> parent;  // parent[0] is unused (root)
  std::vector<std::uint32_t> depth;
  std::vector<std::string> input;

  std::vector<std::size_t> count_per_depth() const;
};

UnraveledTree unravel(const FoldedView& f, std::size_t depth, std::size_t cap = 1'000'000);

std::string to_dot(const HistoryTree& ht, std::size_t up_to);
std::string to_dot(const View& v);

// Nodes whose anonymity differs from the sum of their children's.
std::size_t count_partition_violations(const HistoryTree& ht);

}  // namespace histree
