#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace histree {

using AgentId = std::uint32_t;

enum class Awareness { None, LateOutdegree, EarlyOutdegree, OutputPort };

const char* to_string(Awareness a);
Awareness awareness_from_string(const std::string& s);

inline constexpr const char* kLeaderLabel = "LEADER";

struct Edge {
  AgentId src = 0;
  AgentId dst = 0;
  std::uint64_t multiplicity = 1;
  std::optional<std::uint32_t> port;

  auto operator<=>(const Edge&) const = default;
};

struct StepGraph {
  std::vector<Edge> edges;

  bool operator==(const StepGraph&) const = default;
};

struct DynamicSchedule {
  std::size_t n = 0;
  bool directed = false;
  Awareness awareness = Awareness::None;
  // inputs[0] holds the time-0 labels. With varying inputs there is one row per time 0..T.
  std::vector<std::vector<std::string>> inputs;
  std::vector<StepGraph> steps;
  // activation[s] lists the agents active in step s+1 (semi-synchronous).
  std::optional<std::vector<std::vector<AgentId>>> activation;
  // delays[s][k] belongs to steps[s].edges[k] (asynchronous).
  std::optional<std::vector<std::vector<std::uint32_t>>> delays;

  std::size_t horizon() const { return steps.size(); }
  bool varying_inputs() const { return inputs.size() > 1; }
  const std::string& input(AgentId a, std::size_t t) const;
  // Step numbers are 1-based: step s turns time s-1 into time s.
  const StepGraph& step(std::size_t s) const { return steps.at(s - 1); }
  bool active(AgentId a, std::size_t s) const;
  std::uint64_t outdegree(AgentId a, std::size_t s) const;

  bool operator==(const DynamicSchedule&) const = default;
};

struct ConnectivityReport {
  std::vector<bool> connected;  // per step
  std::optional<std::size_t> tau;
  std::optional<std::size_t> dynamic_diameter;
  bool diameter_horizon_limited = false;
};

enum class InactiveDelivery { Queue, Vanish };

struct Delivery {
  AgentId src = 0;
  AgentId dst = 0;
  std::size_t sent_at = 0;  // step in which the message left src
  std::uint64_t multiplicity = 1;
  std::optional<std::uint32_t> port;
};

// Which agents act in each step and which messages arrive when. Shared by the ground-truth
// builder and the executors so both use one delivery semantics.
struct DeliveryPlan {
  std::vector<std::vector<Delivery>> delivered;      // [step], index 0 unused
  std::vector<std::vector<char>> active;             // [step][agent]
  std::vector<std::vector<std::uint64_t>> outdegree;  // [step][agent], messages sent
};

DeliveryPlan plan_deliveries(const DynamicSchedule& s, std::size_t t, InactiveDelivery mode);

// Checks type invariants; throws ValidationError naming the offending step.
void check_well_formed(const DynamicSchedule& s);
ConnectivityReport validate(const DynamicSchedule& s);

// (Strong) connectivity of a set of edges over n agents.
bool is_connected(std::size_t n, const std::vector<Edge>& edges, bool directed);

// Sorts edges and merges unported duplicates by summing multiplicity.
void normalize_edges(std::vector<Edge>& edges);

// Serialization (schedule_io.cpp).
std::string to_json(const DynamicSchedule& s);
DynamicSchedule schedule_from_json(const std::string& text);
DynamicSchedule load_schedule(const std::string& path);
void save_schedule(const DynamicSchedule& s, const std::string& path);

// Generators (generators.cpp). All are pure functions of their arguments.
DynamicSchedule gen_random_connected(std::size_t n, std::size_t t, std::uint64_t seed, bool directed);
// Directed, output-port aware, strongly connected every step, multiplicity 1 per port.
DynamicSchedule gen_random_ported(std::size_t n, std::size_t t, std::uint64_t seed);
// Links only in steps that are multiples of tau, connected there.
DynamicSchedule gen_tau_sparse(std::size_t n, std::size_t t, std::size_t tau, std::uint64_t seed, bool directed);
// Same connected graph at every step.
DynamicSchedule gen_static(std::size_t n, const std::vector<std::pair<AgentId, AgentId>>& links, std::size_t t,
                           bool directed);
DynamicSchedule gen_random_static(std::size_t n, std::size_t t, std::uint64_t seed, bool directed);
// Every agent is active with probability ~p in each step, and each agent is active at least
// once every `max_gap` steps.
DynamicSchedule with_random_activation(DynamicSchedule s, std::uint64_t seed, std::size_t max_gap);
DynamicSchedule with_random_delays(DynamicSchedule s, std::uint64_t seed, std::uint32_t max_delay);
DynamicSchedule with_uniform_delay(DynamicSchedule s, std::uint32_t delay);
// Relabels the first k agents as leaders.
DynamicSchedule with_leaders(DynamicSchedule s, std::size_t k);
DynamicSchedule with_inputs(DynamicSchedule s, const std::vector<std::string>& labels);
// Converts an undirected schedule into the equivalent directed one with late outdegree.
DynamicSchedule as_directed(DynamicSchedule s, Awareness awareness = Awareness::LateOutdegree);
// Permutes agent ids: agent a becomes perm[a].
DynamicSchedule permute_agents(const DynamicSchedule& s, const std::vector<AgentId>& perm);
// Truncates to the first t steps.
DynamicSchedule prefix(const DynamicSchedule& s, std::size_t t);

// Hand-encoded schedules reproducing figure communication patterns (fixtures.cpp).
std::map<std::string, DynamicSchedule> gen_figure_fixtures();

}  // namespace histree
