#include <algorithm>
#include <deque>
#include <set>

#include "json.hpp"

#include "histree/engine.hpp"
#include "histree/errors.hpp"

namespace histree {

namespace {

using Snapshot = std::vector<std::shared_ptr<const View>>;

std::size_t max_lag(const DeliveryPlan& plan) {
  std::size_t lag = 0;
  for (std::size_t step = 1; step < plan.delivered.size(); ++step)
    for (const Delivery& d : plan.delivered[step]) lag = std::max(lag, step - d.sent_at);
  return lag;
}

}  // namespace

RunTrace run(const DynamicSchedule& s0, const std::string& protocol, const ExecutorConfig& cfg) {
  const ProtocolInfo info = protocol_info(protocol);
  check_well_formed(s0);
  check_requirements(info, s0, cfg.model);
  if (cfg.max_steps < 1) throw ParameterError("max_steps must be at least 1");
  const DynamicSchedule s =
      cfg.model == ExecModel::Asynchronous && !s0.delays ? with_uniform_delay(s0, 0) : s0;
  const std::size_t horizon = std::min(cfg.max_steps, s.horizon());
  const DeliveryPlan plan = plan_deliveries(s, horizon, cfg.inactive);
  const bool annotate = s.awareness != Awareness::None;
  const bool early = s.awareness == Awareness::EarlyOutdegree;

  std::vector<std::unique_ptr<Agent>> agents;
  for (AgentId a = 0; a < s.n; ++a) {
    agents.push_back(make_agent(protocol, s.input(a, 0), cfg.params));
    if (cfg.corrupt_seed) agents.back()->corrupt(*cfg.corrupt_seed * 1'000'003ULL + a);
  }

  RunTrace trace;
  trace.protocol = protocol;
  trace.model = cfg.model;
  trace.n = s.n;
  trace.termination.assign(s.n, std::nullopt);
  std::vector<Output> frozen(s.n);

  auto record = [&](std::size_t t, const std::vector<char>& updated) {
    StepRecord r;
    r.time = t;
    r.active = updated;
    for (AgentId a = 0; a < s.n; ++a) {
      const Agent& ag = *agents[a];
      if (!trace.termination[a] && ag.terminated()) {
        trace.termination[a] = t;
        frozen[a] = ag.output();
        trace.events.push_back(TraceEvent{t, a, "terminate", frozen[a].to_string()});
      }
      r.outputs.push_back(trace.termination[a] ? frozen[a] : ag.output());
      r.terminated.push_back(trace.termination[a] ? 1 : 0);
      r.heights.push_back(ag.view().height());
      if (cfg.record_digests) r.digests.push_back(ag.state_digest());
      if (cfg.record_sizes)
        r.bytes.push_back(t == 0 ? 0 : plan.outdegree[t][a] * serialized_size(*ag.message()));
    }
    trace.steps.push_back(std::move(r));
  };

  const std::size_t lag = max_lag(plan);
  std::deque<Snapshot> window;  // window.back() is the state at the current time
  auto snapshot = [&] {
    Snapshot snap;
    for (const auto& ag : agents) snap.push_back(ag->message());
    window.push_back(std::move(snap));
    while (window.size() > lag + 1) window.pop_front();
  };
  snapshot();
  record(0, std::vector<char>(s.n, 1));

  for (std::size_t step = 1; step <= horizon; ++step) {
    std::vector<std::vector<Received>> inbox(s.n);
    for (const Delivery& d : plan.delivered[step]) {
      // Sent in step d.sent_at, so it carries the sender's state at time sent_at - 1.
      const std::size_t back = (step - 1) - (d.sent_at - 1);
      const Snapshot& snap = window[window.size() - 1 - back];
      Received r;
      r.view = snap[d.src];
      r.multiplicity = d.multiplicity;
      r.port = d.port;
      if (early) r.sender_outdegree = plan.outdegree[d.sent_at][d.src];
      inbox[d.dst].push_back(std::move(r));
    }
    std::vector<char> updated(s.n, 0);
    for (AgentId a = 0; a < s.n; ++a) {
      if (!plan.active[step][a]) continue;
      const std::size_t resets = agents[a]->resets();
      StepContext ctx;
      ctx.received = inbox[a];
      if (annotate) ctx.outdegree = plan.outdegree[step][a];
      ctx.input = s.input(a, step);
      agents[a]->step(ctx);
      updated[a] = agents[a]->skipped_last_step() ? 0 : 1;
      if (agents[a]->resets() != resets) trace.events.push_back(TraceEvent{step, a, "reset", ""});
    }
    snapshot();
    record(step, updated);
    if (cfg.stop_when_terminated && info.terminating &&
        std::all_of(trace.termination.begin(), trace.termination.end(), [](const auto& x) { return x.has_value(); }))
      break;
  }
  if (cfg.model == ExecModel::Asynchronous) trace.rounds = detect_rounds(s, trace.final_time(), cfg.inactive);
  return trace;
}

std::string RunTrace::to_jsonl() const {
  using nlohmann::json;
  std::string out;
  for (const StepRecord& r : steps) {
    json j;
    j["t"] = r.time;
    json outs = json::array();
    for (const Output& o : r.outputs) outs.push_back(o.to_string());
    j["outputs"] = outs;
    j["active"] = r.active;
    j["terminated"] = r.terminated;
    j["heights"] = r.heights;
    if (!r.digests.empty()) j["digests"] = r.digests;
    if (!r.bytes.empty()) j["bytes"] = r.bytes;
    out += j.dump() + "\n";
  }
  for (const TraceEvent& e : events) {
    json j{{"event", e.kind}, {"t", e.time}, {"agent", e.agent}};
    if (!e.detail.empty()) j["detail"] = e.detail;
    out += j.dump() + "\n";
  }
  return out;
}

Checker make_checker(const DynamicSchedule& s, const std::string& protocol, const ExecutorConfig& cfg) {
  const ProtocolInfo info = protocol_info(protocol);
  switch (info.answer) {
    case Answer::None:
      return [](const StepRecord&, AgentId) { return true; };
    case Answer::Count: {
      const Output want = Output::number(Ratio(BigInt(s.n)));
      return [want](const StepRecord& r, AgentId a) { return r.outputs[a] == want; };
    }
    case Answer::Mean:
    case Answer::StreamingMean: {
      // Mean of the inputs at each time; non-numeric inputs make the answer undefined.
      std::vector<std::optional<Ratio>> mean;
      const std::size_t rows = s.varying_inputs() ? s.inputs.size() : 1;
      for (std::size_t t = 0; t < rows; ++t) {
        Ratio sum = 0;
        bool ok = true;
        for (AgentId a = 0; a < s.n; ++a) {
          Ratio x;
          if (!parse_ratio(s.input(a, t), x)) ok = false;
          sum += x;
        }
        mean.push_back(ok ? std::optional<Ratio>(sum / Ratio(BigInt(s.n))) : std::nullopt);
      }
      const bool streaming = info.answer == Answer::StreamingMean;
      return [mean, streaming](const StepRecord& r, AgentId a) {
        const Output& o = r.outputs[a];
        if (o.kind != Output::Kind::Number) return false;
        std::size_t t = streaming ? o.as_of.value_or(r.time) : 0;
        t = std::min(t, mean.size() - 1);
        return mean[t] && o.value == *mean[t];
      };
    }
    case Answer::Election: {
      const std::size_t horizon = std::min(cfg.max_steps, s.horizon());
      const HistoryTree ht = build_ground_truth(s, horizon, GroundTruthOptions{cfg.inactive});
      std::set<std::string> singles;
      for (NodeId x = 1; x < ht.graph.size(); ++x)
        if (ht.anonymity[x] == 1 && ht.anonymity[ht.graph.node(x).parent] != 1)
          singles.insert(canonical_code(ht.graph, x).digest());
      return [singles](const StepRecord& r, AgentId a) {
        const Output& o = r.outputs[a];
        return o.kind == Output::Kind::Code && singles.count(o.code) && o == r.outputs[0];
      };
    }
    case Answer::ViewDigest: {
      const std::size_t horizon = std::min(cfg.max_steps, s.horizon());
      const HistoryTree ht = build_ground_truth(s, horizon, GroundTruthOptions{cfg.inactive});
      std::vector<std::vector<std::string>> want(horizon + 1);
      for (std::size_t t = 0; t <= horizon; ++t)
        for (AgentId a = 0; a < s.n; ++a) want[t].push_back(canonical_code(extract_view(ht, a, t)).digest());
      return [want](const StepRecord& r, AgentId a) { return r.outputs[a].code == want[r.time][a]; };
    }
  }
  return [](const StepRecord&, AgentId) { return true; };
}

Stabilization measure_stabilization(const RunTrace& trace, const Checker& ok) {
  std::optional<std::size_t> last_wrong;
  for (const StepRecord& r : trace.steps)
    for (AgentId a = 0; a < trace.n; ++a)
      if (!ok(r, a)) last_wrong = r.time;
  Stabilization st;
  st.step = last_wrong ? *last_wrong + 1 : 0;
  st.stabilized = !last_wrong || *last_wrong < trace.final_time();
  return st;
}

std::vector<std::pair<std::size_t, std::size_t>> detect_rounds(const DynamicSchedule& s, std::size_t t,
                                                               InactiveDelivery mode) {
  const DeliveryPlan plan = plan_deliveries(s, t, mode);
  std::vector<std::pair<std::size_t, std::size_t>> rounds;
  std::size_t start = 1;
  while (start <= t) {
    std::vector<Edge> edges;
    std::optional<std::size_t> end;
    for (std::size_t b = start; b <= t; ++b) {
      for (const Delivery& d : plan.delivered[b])
        if (d.sent_at >= start && d.src != d.dst) edges.push_back(Edge{d.src, d.dst, 1, std::nullopt});
      if (is_connected(s.n, edges, true)) {
        end = b;
        break;
      }
    }
    if (!end) break;
    rounds.emplace_back(start, *end);
    start = *end + 1;
  }
  return rounds;
}

std::optional<std::size_t> rounds_until(const std::vector<std::pair<std::size_t, std::size_t>>& rounds,
                                        std::size_t time) {
  if (time == 0) return 0;
  for (std::size_t r = 0; r < rounds.size(); ++r)
    if (rounds[r].second >= time) return r + 1;
  return std::nullopt;
}

std::vector<std::vector<std::string>> differential_oracle(const DynamicSchedule& s, std::size_t t,
                                                          InactiveDelivery mode) {
  const HistoryTree ht = build_ground_truth(s, t, GroundTruthOptions{mode});
  std::vector<std::vector<std::string>> out(t + 1);
  for (std::size_t k = 0; k <= t; ++k)
    for (AgentId a = 0; a < s.n; ++a) out[k].push_back(canonical_code(extract_view(ht, a, k)).digest());
  return out;
}

}  // namespace histree
