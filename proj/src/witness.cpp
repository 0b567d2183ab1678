#include "histree/witness.hpp"

#include <map>

#include "histree/errors.hpp"
#include "histree/history.hpp"

namespace histree {

namespace {

const char* kPlain = "0";

// Connected simple graphs where any agent may also message itself. Without self-loops no
// pair of sizes n, n+1 stays indistinguishable through 2n-2 steps for n <= 4.
std::vector<DynamicSchedule> connected_graphs(std::size_t n, std::size_t t, std::size_t& budget, bool& capped) {
  std::vector<std::pair<AgentId, AgentId>> pairs;
  for (AgentId a = 0; a < n; ++a)
    for (AgentId b = a; b < n; ++b) pairs.emplace_back(a, b);
  std::vector<DynamicSchedule> out;
  const std::uint64_t total = 1ULL << pairs.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    if (budget == 0) {
      capped = true;
      return out;
    }
    --budget;
    std::vector<std::pair<AgentId, AgentId>> links;
    for (std::size_t k = 0; k < pairs.size(); ++k)
      if (mask >> k & 1) links.push_back(pairs[k]);
    DynamicSchedule s = gen_static(n, links, t, false);
    if (!is_connected(n, s.steps.at(0).edges, false)) continue;
    s.inputs[0][0] = kLeaderLabel;
    out.push_back(std::move(s));
  }
  return out;
}

CanonicalCode leader_code(const DynamicSchedule& s, std::size_t t) {
  const HistoryTree ht = build_ground_truth(s, t);
  return canonical_code(extract_view(ht, 0, t));
}

DynamicSchedule recolored(DynamicSchedule s) {
  s.inputs[0][0] = kPlain;
  return s;
}

}  // namespace

WitnessResult search_lower_bound_witness(std::size_t n, std::size_t cap) {
  if (n < 1) throw ParameterError("witness search needs n >= 1");
  WitnessResult r;
  r.steps = 2 * n - 2;
  const std::size_t horizon = 4 * n + 2;
  std::size_t budget = cap;
  bool capped = false;
  auto small = connected_graphs(n, horizon, budget, capped);
  auto large = capped ? std::vector<DynamicSchedule>{} : connected_graphs(n + 1, horizon, budget, capped);
  r.graphs_examined = cap - budget;
  if (capped) {
    r.status = WitnessResult::Status::CapExceeded;
    return r;
  }

  std::map<CanonicalCode, std::vector<std::size_t>> by_code;
  for (std::size_t i = 0; i < small.size(); ++i) by_code[leader_code(small[i], r.steps)].push_back(i);

  bool have = false;
  for (const DynamicSchedule& big : large) {
    auto it = by_code.find(leader_code(big, r.steps));
    if (it == by_code.end()) continue;
    for (std::size_t i : it->second) {
      const bool extends = leader_code(recolored(small[i]), r.steps + 1) == leader_code(recolored(big), r.steps + 1);
      if (have && (r.recolor_extends || !extends)) continue;
      have = true;
      r.small = small[i];
      r.large = big;
      r.recolor_extends = extends;
    }
    if (have && r.recolor_extends) break;
  }
  if (!have) return r;
  r.status = WitnessResult::Status::Found;
  for (std::size_t t = r.steps + 1; t <= horizon; ++t)
    if (leader_code(r.small, t) != leader_code(r.large, t)) {
      r.diverge_step = t;
      break;
    }
  return r;
}

}  // namespace histree
