#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "histree/protocol.hpp"

namespace histree {

struct ExecutorConfig {
  ExecModel model = ExecModel::Synchronous;
  std::size_t max_steps = 100;
  bool record_digests = true;
  bool record_sizes = false;
  InactiveDelivery inactive = InactiveDelivery::Queue;
  ProtocolParams params;
  bool stop_when_terminated = true;
  std::optional<std::uint64_t> corrupt_seed;  // start every agent from corrupted state
};

struct StepRecord {
  std::size_t time = 0;
  std::vector<Output> outputs;
  std::vector<std::string> digests;  // state digests, when recorded
  std::vector<std::uint64_t> bytes;  // bytes sent in the step leading here, when recorded
  std::vector<char> active;          // the agent updated its state in this step
  std::vector<char> terminated;
  std::vector<int> heights;
};

struct TraceEvent {
  std::size_t time = 0;
  AgentId agent = 0;
  std::string kind;  // "terminate", "reset"
  std::string detail;
};

struct RunTrace {
  std::string protocol;
  ExecModel model = ExecModel::Synchronous;
  std::size_t n = 0;
  std::vector<StepRecord> steps;  // steps[t] describes time t
  std::vector<TraceEvent> events;
  std::vector<std::optional<std::size_t>> termination;  // per agent
  std::vector<std::pair<std::size_t, std::size_t>> rounds;  // asynchronous runs

  std::size_t final_time() const { return steps.back().time; }
  std::string to_jsonl() const;
};

RunTrace run(const DynamicSchedule& s, const std::string& protocol, const ExecutorConfig& cfg);

// Judges one agent's output at one time.
using Checker = std::function<bool(const StepRecord& rec, AgentId agent)>;

// Correct answers for the protocol's answer kind from ground truth of the schedule.
Checker make_checker(const DynamicSchedule& s, const std::string& protocol, const ExecutorConfig& cfg);

struct Stabilization {
  std::size_t step = 0;  // first time from which every output stays correct
  bool stabilized = false;
};

// 1 + the last time some agent is wrong, or 0 if no agent is ever wrong.
Stabilization measure_stabilization(const RunTrace& trace, const Checker& ok);

// Greedy round boundaries: each round is a minimal step interval whose delivered messages
// (sent and received inside it) form a (strongly) connected graph.
std::vector<std::pair<std::size_t, std::size_t>> detect_rounds(const DynamicSchedule& s, std::size_t t,
                                                               InactiveDelivery mode = InactiveDelivery::Queue);
// Rounds completed before the given time, i.e. the least r whose round ends at or after it.
std::optional<std::size_t> rounds_until(const std::vector<std::pair<std::size_t, std::size_t>>& rounds,
                                        std::size_t time);

// Ground-truth view digests [time][agent] up to time t.
std::vector<std::vector<std::string>> differential_oracle(const DynamicSchedule& s, std::size_t t,
                                                          InactiveDelivery mode = InactiveDelivery::Queue);

}  // namespace histree
