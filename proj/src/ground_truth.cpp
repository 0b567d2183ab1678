#include <algorithm>
#include <map>

#include "histree/errors.hpp"
#include "histree/history.hpp"

namespace histree {

DeliveryPlan plan_deliveries(const DynamicSchedule& s, std::size_t t, InactiveDelivery mode) {
  if (t > s.horizon()) throw RangeError("time " + std::to_string(t) + " exceeds schedule horizon " +
                                        std::to_string(s.horizon()));
  DeliveryPlan plan;
  plan.delivered.resize(t + 1);
  plan.active.assign(t + 1, std::vector<char>(s.n, 0));
  plan.outdegree.assign(t + 1, std::vector<std::uint64_t>(s.n, 0));

  // Messages in flight, keyed by the step in which they are due.
  std::map<std::size_t, std::vector<Delivery>> due;
  for (std::size_t step = 1; step <= t; ++step) {
    const auto& edges = s.step(step).edges;
    auto& active = plan.active[step];
    if (s.activation) {
      for (AgentId a : s.activation->at(step - 1)) active[a] = 1;
    } else if (!s.delays) {
      std::fill(active.begin(), active.end(), 1);
    }
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const Edge& e = edges[k];
      if (s.activation && !active[e.src]) continue;
      const std::size_t delay = s.delays ? (*s.delays)[step - 1][k] : 0;
      due[step + delay].push_back(Delivery{e.src, e.dst, step, e.multiplicity, e.port});
      plan.outdegree[step][e.src] += e.multiplicity;
      if (s.delays && !s.activation) active[e.src] = 1;
    }
    auto it = due.find(step);
    if (it == due.end()) continue;
    std::vector<Delivery> arriving = std::move(it->second);
    due.erase(it);
    if (s.delays && !s.activation)
      for (const Delivery& d : arriving) active[d.dst] = 1;
    for (Delivery& d : arriving) {
      if (active[d.dst]) {
        plan.delivered[step].push_back(d);
      } else if (mode == InactiveDelivery::Queue) {
        due[step + 1].push_back(d);
      }
    }
  }
  return plan;
}

HistoryTree build_ground_truth(const DynamicSchedule& s, std::size_t t, GroundTruthOptions opt) {
  check_well_formed(s);
  const DeliveryPlan plan = plan_deliveries(s, t, opt.inactive);
  const bool annotate = s.awareness != Awareness::None;
  const bool early = s.awareness == Awareness::EarlyOutdegree;

  HistoryTree ht;
  ht.agent_node.assign(t + 1, std::vector<NodeId>(s.n, 0));
  for (AgentId a = 0; a < s.n; ++a) ht.agent_node[0][a] = ht.graph.intern(ht.graph.root(), s.input(a, 0), {}, {});

  for (std::size_t step = 1; step <= t; ++step) {
    std::vector<std::vector<RedEdge>> red(s.n);
    for (const Delivery& d : plan.delivered[step]) {
      RedEdge e;
      e.source = ht.agent_node[d.sent_at - 1][d.src];
      e.multiplicity = d.multiplicity;
      e.port = d.port;
      if (early) e.sender_outdegree = plan.outdegree[d.sent_at][d.src];
      red[d.dst].push_back(e);
    }
    const auto& prev = ht.agent_node[step - 1];
    auto& cur = ht.agent_node[step];
    for (AgentId a = 0; a < s.n; ++a) {
      if (!plan.active[step][a]) {
        cur[a] = ht.graph.intern(prev[a], kInactiveLabel, {}, {});
        continue;
      }
      std::optional<std::uint64_t> outdeg;
      if (annotate) outdeg = plan.outdegree[step][a];
      cur[a] = ht.graph.intern(prev[a], s.input(a, step), outdeg, std::move(red[a]));
    }
  }

  ht.anonymity.assign(ht.graph.size(), 0);
  for (const auto& row : ht.agent_node)
    for (NodeId v : row) ++ht.anonymity[v];
  ht.anonymity[0] = s.n;
  return ht;
}

View extract_view(const HistoryTree& ht, AgentId agent, std::size_t t) {
  if (t >= ht.agent_node.size()) throw RangeError("time beyond ground-truth horizon");
  if (agent >= ht.agent_node[t].size()) throw RangeError("agent " + std::to_string(agent) + " out of range");
  return fragment(ht.graph, ht.agent_node[t][agent]);
}

std::size_t count_partition_violations(const HistoryTree& ht) {
  std::size_t bad = 0;
  for (NodeId v = 0; v < ht.graph.size(); ++v) {
    const auto& ch = ht.graph.children(v);
    if (ch.empty()) continue;
    std::uint64_t sum = 0;
    for (NodeId c : ch) sum += ht.anonymity[c];
    if (sum != ht.anonymity[v]) ++bad;
  }
  return bad;
}

}  // namespace histree
