#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "histree/engine.hpp"

namespace histree {

// Schedule families used by sweeps and the acceptance run.
//   undirected, directed, ported, static, tau (undirected tau-sparse), tau-directed, async
struct CorpusSpec {
  std::string family = "undirected";
  std::vector<std::size_t> sizes;
  std::size_t seeds = 0;
  std::uint64_t first_seed = 0;
  std::size_t steps_per_agent = 4;  // horizon is steps_per_agent * n (times tau for tau families)
  std::size_t tau = 3;
  std::uint32_t max_delay = 2;
  std::size_t leaders = 1;
  bool known_n = false;  // pass n to the protocol (election-terminating, self-stab)
  bool corrupt = false;  // start from corrupted states, seeded by the schedule seed
};

// "family=undirected;n=2..8;seeds=50;t=4;tau=3;delay=2;leaders=1;seed=0;known-n;corrupt"; any key
// may be omitted. n also accepts lists such as "2,3,5".
CorpusSpec parse_corpus_spec(const std::string& text);

struct CorpusEntry {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  DynamicSchedule schedule;
};

// Schedules for a protocol: numeric inputs for mean protocols, leaders otherwise.
std::vector<CorpusEntry> build_corpus(const CorpusSpec& corpus, const std::string& protocol);

struct RunMetrics {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  bool asynchronous = false;
  bool correct = false;                      // stabilized, or every agent terminated correctly
  std::optional<std::size_t> stabilization;  // stabilizing protocols
  std::optional<std::size_t> termination;    // terminating protocols: last agent to terminate
  std::optional<std::size_t> rounds;         // asynchronous runs: detected rounds to stabilization
  // The metric named by the protocol kind: rounds, termination or stabilization.
  std::optional<std::size_t> measured() const;
};

ExecutorConfig corpus_config(const CorpusSpec& corpus, const CorpusEntry& e, const std::string& protocol);
RunMetrics measure_run(const DynamicSchedule& s, const std::string& protocol, const ExecutorConfig& cfg);

// Bound expressions such as "stabilization <= 2*n-2" or "termination <= tau*(3*n-2)".
// Variables: n, tau, stabilization, termination, rounds, measured. Operators: + - * / ( ) and
// one comparison among <= < >= > == !=. A missing metric makes the assertion fail.
bool eval_assertion(const std::string& expr, const std::map<std::string, std::optional<long long>>& vars);

}  // namespace histree
