#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "histree/history.hpp"
#include "histree/numeric.hpp"
#include "histree/schedule.hpp"
#include "histree/solver.hpp"

namespace histree {

enum class ExecModel { Synchronous, SemiSynchronous, Asynchronous };
std::string to_string(ExecModel m);
ExecModel exec_model_from_string(const std::string& s);

struct Output {
  enum class Kind { None, Number, Code };
  Kind kind = Kind::None;
  Ratio value = 0;
  std::string code;                  // digest of an elected node or of a view
  std::optional<std::size_t> as_of;  // streaming outputs: the time the value describes

  static Output none() { return {}; }
  static Output number(const Ratio& x, std::optional<std::size_t> as_of = std::nullopt);
  static Output node_code(std::string c);

  bool is_none() const { return kind == Kind::None; }
  bool operator==(const Output&) const = default;
  std::string to_string() const;  // "⊥", "8", "3/2", "2@5", or the code
};

struct Requirements {
  enum class Topology { Any, Undirected, Directed };
  Topology topology = Topology::Any;
  bool outdegree = false;  // needs outdegree annotations (any awareness but None)
  bool ports = false;      // needs output port awareness
  bool synchronous = true;
  bool semi_synchronous = false;
  bool asynchronous = false;
};

struct ProtocolParams {
  std::size_t leaders = 1;
  std::optional<std::size_t> n_known;
  std::size_t tau = 1;
};

struct StepContext {
  std::span<const Received> received;
  std::optional<std::uint64_t> outdegree;
  std::string input;
};

// One agent's state machine. The engine calls step() only in steps where the agent is active,
// after collecting every agent's message() from the end of the previous step.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::shared_ptr<const View> message() const = 0;
  virtual void step(const StepContext& ctx) = 0;
  virtual Output output() const = 0;
  virtual bool terminated() const { return false; }
  virtual const View& view() const = 0;
  virtual std::string state_digest() const;
  // Replaces the state with arbitrary content; used to start self-stabilization runs.
  virtual void corrupt(std::uint64_t seed);
  virtual std::size_t resets() const { return 0; }
  virtual bool skipped_last_step() const { return false; }
};

// Output logic over a usable view (red edges between consecutive levels, except in the
// asynchronous case where only black edges are equalized).
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual void observe(const View& v) = 0;
  virtual Output output() const = 0;
  virtual bool terminated() const { return false; }
  virtual std::string state() const { return {}; }
};

enum class Answer { None, Count, Mean, StreamingMean, Election, ViewDigest };

struct ProtocolInfo {
  std::string name;
  Requirements requirements;
  bool terminating = false;
  Answer answer = Answer::None;
};

ProtocolInfo protocol_info(const std::string& name);
std::vector<std::string> protocol_names();
std::unique_ptr<Agent> make_agent(const std::string& name, const std::string& input0, const ProtocolParams& params);
// Throws ConfigurationError when the schedule or model violates the protocol's requirements.
void check_requirements(const ProtocolInfo& info, const DynamicSchedule& s, ExecModel model);

// View-level computations shared by the protocols.

struct LevelSolution {
  int first = 0;
  int last = 0;
  int eval_level = 0;                // max(first, 0)
  std::map<NodeId, Ratio> at_level;  // ratio of each node at eval_level
  RatioAssignment ratios;
};

// Shallowest interval of non-branching levels starting at or after min_level whose red edges
// determine all ratios (undirected propagation).
std::optional<LevelSolution> find_ratio_solution(const View& v, int min_level = -1);
std::optional<LevelSolution> find_deepest_ratio_solution(const View& v, int max_level);

Output evaluate_mean(const View& v);
Output evaluate_count(const View& v, std::size_t leaders);
Output evaluate_streaming_mean(const View& v);
Output evaluate_directed_count(const View& v, std::size_t leaders);
Output evaluate_async_count(const View& v, std::size_t leaders);
Output evaluate_election(const View& v);

// Anonymities confirmed by the guess / weight / heavy pipeline with a unique leader.
std::map<NodeId, BigInt> confirm_anonymities(const View& v);
// Per level fully covered by confirmed nodes (or confirmed ancestors): the covered agent count.
std::vector<std::pair<int, BigInt>> level_estimates(const View& v, const std::map<NodeId, BigInt>& known);
// Largest of those estimates n'; 0 if none.
BigInt size_estimate(const View& v, const std::map<NodeId, BigInt>& known);

// Level i is suitable when every node on level i-1 has exactly one child and the red edges
// between the two levels join all of level i-1 symmetrically.
std::optional<int> shallowest_suitable_level(const View& v);
// Code of the part of the view at levels <= level.
std::string prefix_code(const View& v, int level);

std::unique_ptr<Evaluator> make_evaluator(const std::string& name, const ProtocolParams& params);

}  // namespace histree
