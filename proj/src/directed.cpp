#include <algorithm>
#include <map>

#include "histree/errors.hpp"
#include "histree/solver.hpp"

namespace histree {

DirectedSystem build_directed_system(const View& v, int first, int last) {
  const HistoryGraph& g = v.graph;
  if (!interval_nonbranching(v, first, last))
    throw ContractViolation("build_directed_system: interval is not non-branching in the view");
  const auto rank = canonical_ranks(v);
  DirectedSystem sys;
  sys.branches = g.level_nodes(first);
  std::sort(sys.branches.begin(), sys.branches.end(), [&](NodeId a, NodeId b) { return rank[a] < rank[b]; });
  const std::size_t k = sys.branches.size();

  std::map<NodeId, std::size_t> branch_of;
  for (std::size_t b = 0; b < k; ++b) {
    NodeId x = sys.branches[b];
    branch_of[x] = b;
    for (int l = first; l <= last; ++l) {
      x = g.children(x)[0];
      branch_of[x] = b;
    }
  }
  sys.a.assign(k, std::vector<BigInt>(k, 0));
  for (NodeId x = 0; x < g.size(); ++x) {
    const HNode& n = g.node(x);
    if (n.level <= first || n.level > last + 1) continue;
    // n is the child of a sender at level n.level - 1: its annotation is that sender's outdegree.
    if (!n.outdegree) throw ModelError("build_directed_system: missing outdegree annotation");
    const std::size_t self = branch_of.at(x);
    sys.a[self][self] += *n.outdegree;
    for (const RedEdge& e : n.red_in) {
      auto src = branch_of.find(e.source);
      if (src == branch_of.end()) continue;
      // Every agent of x received e.multiplicity messages from the sender class.
      sys.a[src->second][self] -= e.multiplicity;
    }
  }
  sys.lambda = 1;
  for (std::size_t i = 0; i < k; ++i) sys.lambda = std::max(sys.lambda, sys.a[i][i]);
  return sys;
}

namespace {

void reduce_row(std::vector<BigInt>& row) {
  BigInt g = 0;
  for (const BigInt& x : row) g = gcd(g, abs(x));
  if (g > 1)
    for (BigInt& x : row) x /= g;
}

// Fraction-free reduced row echelon form; returns pivot columns.
std::vector<std::size_t> echelon(IntMatrix& m) {
  std::vector<std::size_t> pivots;
  if (m.empty()) return pivots;
  const std::size_t rows = m.size(), cols = m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      const BigInt f = m[i][c], piv = m[r][c];
      for (std::size_t j = 0; j < cols; ++j) m[i][j] = m[i][j] * piv - m[r][j] * f;
      reduce_row(m[i]);
    }
    reduce_row(m[r]);
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

std::size_t matrix_rank(const IntMatrix& a) {
  IntMatrix m = a;
  return echelon(m).size();
}

std::vector<BigInt> nullspace_rank1(const IntMatrix& a) {
  if (a.empty() || a[0].empty()) throw StructureError("nullspace_rank1: empty matrix");
  IntMatrix m = a;
  const std::size_t cols = m[0].size();
  const auto pivots = echelon(m);
  if (cols - pivots.size() != 1)
    throw StructureError("nullspace_rank1: nullity is " + std::to_string(cols - pivots.size()) + ", expected 1");
  std::size_t free_col = 0;
  for (std::size_t c = 0, p = 0; c < cols; ++c) {
    if (p < pivots.size() && pivots[p] == c) {
      ++p;
      continue;
    }
    free_col = c;
  }
  // Row r reads m[r][pivot] * x_pivot + m[r][free] * x_free = 0.
  std::vector<Ratio> x(cols, 0);
  x[free_col] = 1;
  for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = Ratio(-m[r][free_col]) / Ratio(m[r][pivots[r]]);
  BigInt l = 1;
  for (const Ratio& q : x) l = lcm(l, boost::multiprecision::denominator(q));
  std::vector<BigInt> out(cols);
  BigInt g = 0;
  for (std::size_t i = 0; i < cols; ++i) {
    out[i] = boost::multiprecision::numerator(x[i] * Ratio(l));
    g = gcd(g, abs(out[i]));
  }
  for (BigInt& y : out) y /= g;
  if (out[0] < 0)
    for (BigInt& y : out) y = -y;
  for (const BigInt& y : out)
    if (y <= 0) throw StructureError("nullspace_rank1: null vector is not positive");
  return out;
}

}  // namespace histree
