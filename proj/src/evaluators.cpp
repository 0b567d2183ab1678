#include <algorithm>
#include <set>

#include "histree/errors.hpp"
#include "histree/protocol.hpp"

namespace histree {

namespace {

std::optional<LevelSolution> solve_from(const View& v, int first, int max_last) {
  for (int last = first; last <= max_last && interval_nonbranching(v, first, last); ++last) {
    RatioAssignment r;
    try {
      r = solve_ratios_undirected(v, first, last);
    } catch (const PartialAssignmentError&) {
      continue;  // a longer interval may join the remaining branches
    } catch (const InconsistencyError&) {
      return std::nullopt;
    }
    LevelSolution s;
    s.first = first;
    s.last = last;
    s.eval_level = std::max(first, 0);
    for (NodeId b : v.graph.level_nodes(first)) {
      const auto below = chain_descendant(v, b, s.eval_level);
      s.at_level[*below] = r.ratio.at(b);
    }
    s.ratios = std::move(r);
    return s;
  }
  return std::nullopt;
}

bool level_has_children(const View& v, int level) { return interval_nonbranching(v, level, level); }

std::optional<Ratio> leader_total(const View& v, const std::map<NodeId, Ratio>& at_level) {
  Ratio sum = 0;
  bool any = false;
  for (const auto& [x, r] : at_level)
    if (v.graph.node(x).input == kLeaderLabel) {
      sum += r;
      any = true;
    }
  if (!any) return std::nullopt;
  return sum;
}

// Integral class sizes from relative sizes and a known leader count, or nullopt.
std::optional<BigInt> scaled_total(const View& v, const std::map<NodeId, Ratio>& at_level, std::size_t leaders) {
  const auto lt = leader_total(v, at_level);
  if (!lt || *lt == 0) return std::nullopt;
  const Ratio factor = Ratio(BigInt(leaders)) / *lt;
  Ratio total = 0;
  for (const auto& [x, r] : at_level) {
    const Ratio size = r * factor;
    if (boost::multiprecision::denominator(size) != 1 || size <= 0) return std::nullopt;
    total += size;
  }
  return boost::multiprecision::numerator(total);
}

std::optional<Ratio> mean_of(const View& v, const std::map<NodeId, Ratio>& at_level) {
  Ratio weighted = 0, total = 0;
  for (const auto& [x, r] : at_level) {
    Ratio value;
    if (!parse_ratio(v.graph.node(x).input, value)) return std::nullopt;
    weighted += r * value;
    total += r;
  }
  if (total == 0) return std::nullopt;
  return weighted / total;
}

bool strongly_connected(const std::vector<std::vector<char>>& adj) {
  const std::size_t k = adj.size();
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<char> seen(k, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < k; ++j) {
        const bool edge = pass == 0 ? adj[i][j] : adj[j][i];
        if (edge && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return false;
  }
  return true;
}

std::optional<BigInt> scaled_branches(const View& v, const std::vector<NodeId>& branches, const std::vector<BigInt>& x,
                                      std::size_t leaders) {
  std::map<NodeId, Ratio> at_level;
  for (std::size_t b = 0; b < branches.size(); ++b) at_level[branches[b]] = Ratio(x[b]);
  return scaled_total(v, at_level, leaders);
}

}  // namespace

std::optional<LevelSolution> find_ratio_solution(const View& v, int min_level) {
  for (int f = std::max(min_level, -1); f < v.graph.max_level(); ++f) {
    if (!level_has_children(v, f)) continue;
    if (auto s = solve_from(v, f, v.graph.max_level() - 1)) return s;
  }
  return std::nullopt;
}

std::optional<LevelSolution> find_deepest_ratio_solution(const View& v, int max_level) {
  for (int f = std::min(max_level, v.graph.max_level() - 1); f >= -1; --f) {
    if (!level_has_children(v, f)) continue;
    if (auto s = solve_from(v, f, max_level)) return s;
  }
  return std::nullopt;
}

Output evaluate_mean(const View& v) {
  const auto s = find_ratio_solution(v);
  if (!s) return Output::none();
  const auto m = mean_of(v, s->at_level);
  return m ? Output::number(*m) : Output::none();
}

Output evaluate_count(const View& v, std::size_t leaders) {
  const auto s = find_ratio_solution(v);
  if (!s) return Output::none();
  const auto n = scaled_total(v, s->at_level, leaders);
  return n ? Output::number(Ratio(*n)) : Output::none();
}

Output evaluate_streaming_mean(const View& v) {
  // A level l is in every view once l + k - 1 steps have passed, where k bounds the number of
  // classes; the widest level seen so far stands in for k.
  std::size_t width = 1;
  for (int l = 0; l <= v.graph.max_level(); ++l) width = std::max(width, v.graph.level_nodes(l).size());
  const int bound = v.height() - static_cast<int>(width) + 1;
  auto s = find_deepest_ratio_solution(v, bound);
  if (!s) s = find_ratio_solution(v);
  if (!s) return Output::none();
  const auto m = mean_of(v, s->at_level);
  if (!m) return Output::none();
  return Output::number(*m, static_cast<std::size_t>(s->eval_level));
}

Output evaluate_directed_count(const View& v, std::size_t leaders) {
  const HistoryGraph& g = v.graph;
  for (int f = 0; f < g.max_level(); ++f) {
    if (!level_has_children(v, f)) continue;
    for (int last = f; interval_nonbranching(v, f, last); ++last) {
      DirectedSystem sys;
      try {
        sys = build_directed_system(v, f, last);
      } catch (const ModelError&) {
        return Output::none();
      }
      std::vector<BigInt> x;
      try {
        x = nullspace_rank1(sys.a);
      } catch (const StructureError&) {
        continue;
      }
      const auto n = scaled_branches(v, sys.branches, x, leaders);
      if (n) return Output::number(Ratio(*n));
      break;
    }
  }
  return Output::none();
}

Output evaluate_async_count(const View& v, std::size_t leaders) {
  const HistoryGraph& g = v.graph;
  std::vector<std::uint32_t> rank;
  for (int f = 0; f < g.max_level(); ++f) {
    if (!level_has_children(v, f)) continue;
    int end = f;
    while (interval_nonbranching(v, f, end + 1)) ++end;
    if (rank.empty()) rank = canonical_ranks(v);
    std::vector<NodeId> branches = g.level_nodes(f);
    std::sort(branches.begin(), branches.end(), [&](NodeId a, NodeId b) { return rank[a] < rank[b]; });
    const std::size_t k = branches.size();
    std::map<NodeId, std::pair<std::size_t, int>> pos;  // node -> (branch, level)
    std::vector<std::vector<NodeId>> chain(k);
    for (std::size_t b = 0; b < k; ++b) {
      NodeId x = branches[b];
      for (int l = f; l <= end + 1; ++l) {
        chain[b].push_back(x);
        pos[x] = {b, l};
        if (l <= end) x = g.children(x)[0];
      }
    }
    std::map<NodeId, std::vector<std::pair<NodeId, std::uint64_t>>> out;
    for (NodeId y = 0; y < g.size(); ++y)
      for (const RedEdge& e : g.node(y).red_in)
        if (pos.count(e.source)) out[e.source].emplace_back(y, e.multiplicity);

    // One balance equation per class and sending level whose messages landed in the region:
    // outdegree * a(sender) = sum of multiplicity * a(receiver). Shallow levels go first since
    // deeper sends may still be in flight.
    IntMatrix a;
    std::vector<std::vector<char>> adj(k, std::vector<char>(k, 0));
    for (int l = f; l <= end; ++l) {
      for (std::size_t b = 0; b < k; ++b) {
        const NodeId sender = chain[b][static_cast<std::size_t>(l - f)];
        const NodeId child = chain[b][static_cast<std::size_t>(l - f + 1)];
        if (g.node(child).is_dummy() || !g.node(child).outdegree || out[sender].empty()) continue;
        std::vector<BigInt> row(k, 0);
        row[b] += *g.node(child).outdegree;
        bool landed = true;
        for (const auto& [y, m] : out[sender]) {
          auto it = pos.find(y);
          if (it == pos.end()) {
            landed = false;
            break;
          }
          row[it->second.first] -= m;
        }
        if (!landed) continue;
        for (const auto& [y, m] : out[sender]) adj[b][pos.at(y).first] = 1;
        a.push_back(std::move(row));
      }
      if (a.empty() || !strongly_connected(adj)) continue;
      const std::size_t rank = matrix_rank(a);
      if (rank == k) break;  // inconsistent: some counted send is incomplete
      if (rank + 1 != k) continue;
      std::vector<BigInt> x;
      try {
        x = nullspace_rank1(a);
      } catch (const StructureError&) {
        break;
      }
      if (const auto n = scaled_branches(v, branches, x, leaders)) return Output::number(Ratio(*n));
      break;
    }
  }
  return Output::none();
}

namespace {

// Highest ancestor of x (below the root) whose class has the same size as x's.
NodeId birth_node(const HistoryGraph& g, NodeId x, const std::function<std::optional<Ratio>(NodeId)>& size) {
  const auto sx = size(x);
  while (true) {
    const NodeId p = g.node(x).parent;
    if (p == g.root()) return x;
    const auto sp = size(p);
    if (!sp || !sx || *sp != *sx) return x;
    x = p;
  }
}

}  // namespace

Output evaluate_election(const View& v) {
  // Level t/2 - 1 is the deepest one whose children can all be in a view at time t = 2n - 2.
  auto s = find_ratio_solution(v, v.height() / 2 - 1);
  if (!s) s = find_ratio_solution(v);
  if (!s) return Output::none();
  const HistoryGraph& g = v.graph;
  auto size = [&](NodeId x) -> std::optional<Ratio> {
    if (auto it = s->at_level.find(x); it != s->at_level.end()) return it->second;
    if (auto it = s->ratios.ratio.find(x); it != s->ratios.ratio.end()) return it->second;
    return std::nullopt;
  };
  Ratio low = s->at_level.begin()->second;
  for (const auto& [x, r] : s->at_level) low = std::min(low, r);
  std::optional<std::string> best;
  for (const auto& [x, r] : s->at_level) {
    if (r != low) continue;
    const std::string code = canonical_code(g, birth_node(g, x, size)).bytes;
    if (!best || code < *best) best = code;
  }
  return Output::node_code(CanonicalCode{*best}.digest());
}

std::map<NodeId, BigInt> confirm_anonymities(const View& v) {
  const HistoryGraph& g = v.graph;
  std::map<NodeId, BigInt> known;
  for (NodeId x = 1; x < g.size(); ++x)
    if (g.node(x).input == kLeaderLabel) known[x] = 1;
  const auto rank = canonical_ranks(v);
  while (true) {
    // A class of one agent has exactly one child class.
    for (NodeId x = 1; x < g.size(); ++x) {
      auto it = known.find(g.node(x).parent);
      if (it != known.end() && it->second == 1) known[x] = 1;
    }
    std::map<NodeId, BigInt> best;
    for (NodeId target = 1; target < g.size(); ++target) {
      if (known.count(target)) continue;
      for (const RedEdge& e : g.node(target).red_in) {
        if (!is_guesser(v, e.source, known)) continue;
        const BigInt guess = make_guess(v, e.source, target, known);
        if (guess <= 0) continue;
        auto it = best.find(target);
        if (it == best.end() || guess < it->second) best[target] = guess;
      }
    }
    if (best.empty()) break;
    std::vector<NodeId> order;
    for (const auto& [x, guess] : best) order.push_back(x);
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      return std::make_pair(g.node(a).level, rank[a]) < std::make_pair(g.node(b).level, rank[b]);
    });
    GuessTable table;
    for (NodeId x : order) {
      bool sibling = false;
      for (NodeId s : g.children(g.node(x).parent))
        if (table.guess.count(s)) sibling = true;
      if (!sibling) table.guess[x] = best.at(x);
    }
    const auto confirmed = resolve_heavy(table, v);
    if (!confirmed) break;
    known[confirmed->first] = confirmed->second;
  }
  return known;
}

std::vector<std::pair<int, BigInt>> level_estimates(const View& v, const std::map<NodeId, BigInt>& known) {
  const HistoryGraph& g = v.graph;
  std::vector<std::pair<int, BigInt>> out;
  for (int l = 0; l <= g.max_level(); ++l) {
    std::set<NodeId> cover;
    bool covered = true;
    for (NodeId x : g.level_nodes(l)) {
      NodeId y = x;
      while (y != g.root() && !known.count(y)) y = g.node(y).parent;
      if (y == g.root()) {
        covered = false;
        break;
      }
      cover.insert(y);
    }
    if (!covered || cover.empty()) continue;
    BigInt sum = 0;
    for (NodeId y : cover) {
      bool nested = false;
      for (NodeId z = g.node(y).parent; z != g.root() && !nested; z = g.node(z).parent) nested = cover.count(z) > 0;
      if (!nested) sum += known.at(y);
    }
    out.emplace_back(l, sum);
  }
  return out;
}

BigInt size_estimate(const View& v, const std::map<NodeId, BigInt>& known) {
  BigInt best = 0;
  for (const auto& [l, sum] : level_estimates(v, known)) best = std::max(best, sum);
  return best;
}

std::optional<int> shallowest_suitable_level(const View& v) {
  const HistoryGraph& g = v.graph;
  for (int i = 0; i <= g.max_level(); ++i) {
    const auto above = g.level_nodes(i - 1);
    bool unique = true;
    for (NodeId p : above)
      if (g.children(p).size() != 1) unique = false;
    if (!unique) continue;
    std::map<NodeId, std::size_t> index;
    for (std::size_t k = 0; k < above.size(); ++k) index[above[k]] = k;
    const std::size_t k = above.size();
    std::vector<std::vector<char>> adj(k, std::vector<char>(k, 0));
    for (NodeId p : above) {
      const NodeId c = g.children(p)[0];
      for (const RedEdge& e : g.node(c).red_in) {
        auto it = index.find(e.source);
        if (it != index.end()) adj[it->second][index.at(p)] = 1;
      }
    }
    bool symmetric = true;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        if (adj[a][b] != adj[b][a]) symmetric = false;
    if (symmetric && (k == 1 || strongly_connected(adj))) return i;
  }
  return std::nullopt;
}

}  // namespace histree
