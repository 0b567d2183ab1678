#pragma once

#include <map>
#include <optional>
#include <vector>

#include "histree/history.hpp"
#include "histree/numeric.hpp"

namespace histree {

struct RatioAssignment {
  std::map<NodeId, Ratio> ratio;
  NodeId basis = kNoNode;
  int level = 0;
};

// Smallest level >= min_level (and below the view's deepest level) where every node present
// has exactly one child in the view.
std::optional<int> find_nonbranching_level(const View& v, int min_level);
// Same for every level of [first, last].
bool interval_nonbranching(const View& v, int first, int last);

// Ratio propagation over the red edges leaving levels first..last (a single level when
// first == last), then summed upward through parents. Basis = level node with the smallest canonical code.
RatioAssignment solve_ratios_undirected(const View& v, int level);
RatioAssignment solve_ratios_undirected(const View& v, int first, int last);

std::map<NodeId, BigInt> scale_with_leaders(const RatioAssignment& r, NodeId leader_node, const BigInt& ell);

using IntMatrix = std::vector<std::vector<BigInt>>;

struct DirectedSystem {
  IntMatrix a;                  // A = lambda I - P
  BigInt lambda;
  std::vector<NodeId> branches;  // nodes of the first level, one per row/column
};

DirectedSystem build_directed_system(const View& v, int first, int last);
// Positive integer null vector of a nullity-1 matrix, entries with gcd 1.
std::vector<BigInt> nullspace_rank1(const IntMatrix& a);
std::size_t matrix_rank(const IntMatrix& a);

// Guess on the anonymity of `target` from guesser `guesser` given exact anonymities `known`.
BigInt make_guess(const View& v, NodeId guesser, NodeId target, const std::map<NodeId, BigInt>& known);
bool is_guesser(const View& v, NodeId u, const std::map<NodeId, BigInt>& known);

struct GuessTable {
  std::map<NodeId, BigInt> guess;
  std::map<NodeId, std::uint64_t> weight;
  std::map<NodeId, BigInt> confirmed;
};

// Fills guesses.weight and returns the deepest heavy node with its now-confirmed anonymity.
std::optional<std::pair<NodeId, BigInt>> resolve_heavy(GuessTable& guesses, const View& v);

struct UpperBoundTable {
  enum class Status { Complete, NeedsMoreLevels };
  Status status = Status::NeedsMoreLevels;
  std::map<NodeId, BigInt> bound;   // branch (node of the first level) -> U
  std::map<NodeId, NodeId> anchor;  // branch -> node the bound applies to
};

UpperBoundTable propagate_upper_bounds(const View& v, int first, int last, const BigInt& ell);

// Node reached from `v` by following unique children down to `level`, if the path stays unique.
std::optional<NodeId> chain_descendant(const View& view, NodeId v, int level);

}  // namespace histree
