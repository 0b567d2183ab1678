#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

#include "histree/engine.hpp"
#include "histree/errors.hpp"
#include "oracles.hpp"

using namespace histree;

namespace {

const DynamicSchedule& fig(const std::string& name) {
  static const auto all = gen_figure_fixtures();
  return all.at(name);
}

RunTrace run_for(const DynamicSchedule& s, const std::string& proto, std::size_t steps, ProtocolParams params = {}) {
  ExecutorConfig cfg;
  cfg.max_steps = steps;
  cfg.params = params;
  return run(s, proto, cfg);
}

// First time from which every agent outputs `want` for the rest of the trace, if any.
std::optional<std::size_t> correct_from(const RunTrace& tr, const Output& want) {
  std::optional<std::size_t> from;
  for (const StepRecord& r : tr.steps) {
    const bool all = std::all_of(r.outputs.begin(), r.outputs.end(), [&](const Output& o) { return o == want; });
    if (!all) from.reset();
    else if (!from) from = r.time;
  }
  return from;
}

std::vector<std::string> numeric_labels(std::size_t n, std::uint64_t seed) {
  std::vector<std::string> v;
  for (std::size_t a = 0; a < n; ++a) v.push_back(std::to_string((a * 5 + seed * 3) % 7));
  return v;
}

Ratio plain_mean(const std::vector<std::string>& labels) {
  Ratio sum = 0;
  for (const auto& l : labels) sum += Ratio(BigInt(std::stoll(l)));
  return sum / Ratio(BigInt(labels.size()));
}

std::vector<std::pair<AgentId, AgentId>> ring(std::size_t n) {
  std::vector<std::pair<AgentId, AgentId>> r;
  for (AgentId a = 0; a < n; ++a) r.emplace_back(a, (a + 1) % n);
  return r;
}

}  // namespace

TEST_CASE("registry") {
  const auto names = protocol_names();
  for (const char* p : {"view-builder", "avg-consensus", "counting-stabilizing", "counting-terminating",
                        "election-stabilizing", "election-terminating", "directed-counting-stabilizing",
                        "directed-counting-terminating", "port-counting", "streaming-avg-consensus",
                        "async-counting"})
    CHECK(std::find(names.begin(), names.end(), p) != names.end());
  CHECK(protocol_info("self-stab:counting").requirements.topology == Requirements::Topology::Undirected);
  CHECK(protocol_info("tau-batch:counting-terminating").terminating);
  CHECK_THROWS_AS(protocol_info("no-such-protocol"), ConfigurationError);
  CHECK_THROWS_AS(protocol_info("self-stab:counting-terminating"), ConfigurationError);
  CHECK_THROWS_AS(protocol_info("finite-state:port-counting"), ConfigurationError);
  CHECK_THROWS_AS(make_agent("counting-terminating", "x", ProtocolParams{2, std::nullopt, 1}), ConfigurationError);
  CHECK_THROWS_AS(make_agent("election-terminating", "x", ProtocolParams{}), ConfigurationError);
}

TEST_CASE("average consensus") {
  SUBCASE("two-class fixture with inputs 0 and 3 settles on 2") {
    const auto s = with_inputs(fig("fig1"), {"0", "0", "3", "3", "3", "3"});
    const auto tr = run_for(s, "avg-consensus", 12);
    const auto from = correct_from(tr, Output::number(2));
    REQUIRE(from);
    CHECK(*from <= 2 * 6 - 2);
  }
  SUBCASE("equal inputs are output from step 0") {
    const auto s = with_inputs(gen_random_connected(5, 6, 2, false), std::vector<std::string>(5, "7/2"));
    CHECK(correct_from(run_for(s, "avg-consensus", 6), Output::number(Ratio(7, 2))) == std::optional<std::size_t>(0));
  }
  SUBCASE("random networks: correct from 2n-2 against the plain mean") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const std::size_t n = 2 + seed % 7;
      const auto labels = numeric_labels(n, seed);
      const auto s = with_inputs(gen_random_connected(n, 3 * n, seed, false), labels);
      const auto from = correct_from(run_for(s, "avg-consensus", 3 * n), Output::number(plain_mean(labels)));
      REQUIRE(from);
      CHECK(*from <= 2 * n - 2);
    }
  }
  SUBCASE("non-numeric inputs give no answer") {
    const auto s = with_inputs(gen_static(2, {{0, 1}}, 4, false), {"a", "b"});
    CHECK(run_for(s, "avg-consensus", 4).steps.back().outputs[0].is_none());
  }
}

TEST_CASE("stabilizing counting") {
  SUBCASE("distinguished-agent fixture counts 8") {
    const auto tr = run_for(fig("fig3"), "counting-stabilizing", 14);
    CHECK(correct_from(tr, Output::number(8)) == std::optional<std::size_t>(7));
  }
  SUBCASE("leader and one agent: 2 after at most 2 steps") {
    const auto tr = run_for(with_leaders(gen_static(2, {{0, 1}}, 5, false), 1), "counting", 5);
    const auto from = correct_from(tr, Output::number(2));
    REQUIRE(from);
    CHECK(*from <= 2);
  }
  SUBCASE("no leader in the view gives no answer") {
    const auto tr = run_for(gen_static(3, ring(3), 6, false), "counting", 6);
    for (const Output& o : tr.steps.back().outputs) CHECK(o.is_none());
  }
  SUBCASE("several leaders scale the count") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const std::size_t n = 4 + seed % 4;
      const auto s = with_leaders(gen_random_connected(n, 3 * n, seed, false), 2);
      const auto from = correct_from(run_for(s, "counting", 3 * n, ProtocolParams{2, std::nullopt, 1}),
                                     Output::number(Ratio(BigInt(n))));
      REQUIRE(from);
      CHECK(*from <= 2 * n - 2);
    }
  }
}

TEST_CASE("terminating counting") {
  SUBCASE("leader and follower on a static edge") {
    const auto tr = run_for(with_leaders(gen_static(2, {{0, 1}}, 8, false), 1), "counting-terminating", 8);
    for (AgentId a = 0; a < 2; ++a) {
      REQUIRE(tr.termination[a]);
      CHECK(*tr.termination[a] <= 4);
    }
    CHECK(tr.steps.back().outputs == std::vector<Output>(2, Output::number(2)));
  }
  SUBCASE("random networks: output n by 3n-2") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const std::size_t n = 2 + seed % 7;
      const auto tr = run_for(with_leaders(gen_random_connected(n, 4 * n, seed, false), 1), "counting-terminating", 4 * n);
      for (AgentId a = 0; a < n; ++a) {
        REQUIRE(tr.termination[a]);
        CHECK(*tr.termination[a] <= 3 * n - 2);
        CHECK(tr.steps.back().outputs[a] == Output::number(Ratio(BigInt(n))));
      }
    }
  }
  SUBCASE("a branch hidden behind a long path is not undercounted") {
    // Leader at one end of a path; the far agents stay unseen for n-1 steps.
    for (std::size_t n = 3; n <= 7; ++n) {
      std::vector<std::pair<AgentId, AgentId>> path;
      for (AgentId a = 0; a + 1 < n; ++a) path.emplace_back(a, a + 1);
      const auto tr = run_for(with_leaders(gen_static(n, path, 4 * n, false), 1), "counting-terminating", 4 * n);
      for (const StepRecord& r : tr.steps)
        for (AgentId a = 0; a < n; ++a)
          if (r.terminated[a]) CHECK(r.outputs[a] == Output::number(Ratio(BigInt(n))));
      REQUIRE(tr.termination[0]);
      CHECK(*tr.termination[0] <= 3 * n - 2);
    }
  }
  SUBCASE("outputs are frozen after termination") {
    const auto s = with_leaders(gen_random_connected(5, 30, 4, false), 1);
    ExecutorConfig cfg;
    cfg.max_steps = 30;
    cfg.stop_when_terminated = false;
    const auto tr = run(s, "counting-terminating", cfg);
    REQUIRE(tr.final_time() == 30);
    for (AgentId a = 0; a < 5; ++a) {
      REQUIRE(tr.termination[a]);
      for (std::size_t t = *tr.termination[a]; t <= 30; ++t) CHECK(tr.steps[t].outputs[a] == Output::number(5));
    }
  }
}

TEST_CASE("leader election") {
  SUBCASE("a star with a distinguished centre elects the centre") {
    std::vector<std::pair<AgentId, AgentId>> star;
    for (AgentId a = 1; a < 5; ++a) star.emplace_back(0, a);
    const auto s = with_leaders(gen_static(5, star, 12, false), 1);
    const auto ht = build_ground_truth(s, 12);
    const std::string centre = canonical_code(ht.graph, ht.agent_node[0][0]).digest();
    const auto tr = run_for(s, "election-stabilizing", 12);
    const auto from = correct_from(tr, Output::node_code(centre));
    REQUIRE(from);
    CHECK(*from <= 2 * 5 - 2);
  }
  SUBCASE("symmetric ring never elects a single agent") {
    const auto s = gen_static(5, ring(5), 12, false);
    const auto ht = build_ground_truth(s, 12);
    std::set<std::string> singles;
    for (NodeId x = 1; x < ht.graph.size(); ++x)
      if (ht.anonymity[x] == 1) singles.insert(canonical_code(ht.graph, x).digest());
    CHECK(singles.empty());
    const auto tr = run_for(s, "election-stabilizing", 12);
    for (const StepRecord& r : tr.steps)
      for (const Output& o : r.outputs) CHECK(o == r.outputs[0]);
    ProtocolParams p;
    p.n_known = 5;
    const auto term = run_for(s, "election-terminating", 12, p);
    for (const auto& x : term.termination) CHECK_FALSE(x.has_value());
  }
  SUBCASE("symmetry broken by one asymmetric step") {
    // A 5-ring where agent 0 gets two extra links at step 3 and nowhere else.
    DynamicSchedule s = gen_static(5, ring(5), 20, false);
    std::vector<Edge> extra = s.steps[2].edges;
    for (AgentId b : {2u, 3u}) {
      extra.push_back(Edge{0, b, 1, std::nullopt});
      extra.push_back(Edge{b, 0, 1, std::nullopt});
    }
    normalize_edges(extra);
    s.steps[2].edges = extra;
    ExecutorConfig cfg;
    cfg.max_steps = 20;
    const auto tr = run(s, "election-stabilizing", cfg);
    const auto st = measure_stabilization(tr, make_checker(s, "election-stabilizing", cfg));
    CHECK(st.stabilized);
    CHECK(st.step <= 3 + 2 * 5 - 2);
  }
  SUBCASE("random networks with a leader: stabilizing by 2n-2, terminating agrees") {
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
      const std::size_t n = 2 + seed % 6;
      const auto s = with_leaders(gen_random_connected(n, 4 * n, seed, false), 1);
      ExecutorConfig cfg;
      cfg.max_steps = 4 * n;
      const auto tr = run(s, "election-stabilizing", cfg);
      const auto st = measure_stabilization(tr, make_checker(s, "election-stabilizing", cfg));
      CHECK(st.stabilized);
      CHECK(st.step <= 2 * n - 2);

      cfg.params.n_known = n;
      cfg.max_steps = 6 * n;
      const auto term = run(s, "election-terminating", cfg);
      const auto ok = make_checker(s, "election-terminating", cfg);
      for (AgentId a = 0; a < n; ++a) {
        REQUIRE(term.termination[a]);
        CHECK(ok(term.steps.back(), a));
      }
    }
  }
}

TEST_CASE("directed counting") {
  SUBCASE("directed fixture: anonymities 1,3,2,2 give 8") {
    const auto tr = run_for(fig("fig7-level"), "directed-counting-stabilizing", 12);
    const auto from = correct_from(tr, Output::number(8));
    REQUIRE(from);
    CHECK(*from <= 2 * 8 - 2);
  }
  SUBCASE("two-agent cycle with a leader is counted by step 2") {
    auto s = as_directed(with_leaders(gen_static(2, {{0, 1}}, 4, false), 1));
    s.steps.assign(4, StepGraph{{{0, 1, 1, std::nullopt}, {1, 0, 1, std::nullopt}}});
    CHECK(correct_from(run_for(s, "directed-counting-stabilizing", 4), Output::number(2)) ==
          std::optional<std::size_t>(2));
  }
  SUBCASE("random strongly connected networks") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const std::size_t n = 2 + seed % 5;
      const auto s = with_leaders(gen_random_connected(n, 4 * n, seed, true), 1);
      const auto from = correct_from(run_for(s, "directed-counting-stabilizing", 4 * n), Output::number(Ratio(BigInt(n))));
      REQUIRE(from);
      CHECK(*from <= 2 * n - 2);
    }
  }
  SUBCASE("terminating variant outputs n") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      const std::size_t n = 2 + seed % 4;
      const auto s = with_leaders(gen_random_connected(n, 30 * n, seed, true), 1);
      const auto tr = run_for(s, "directed-counting-terminating", 30 * n);
      for (AgentId a = 0; a < n; ++a) {
        REQUIRE(tr.termination[a]);
        CHECK(tr.steps.back().outputs[a] == Output::number(Ratio(BigInt(n))));
      }
    }
  }
  SUBCASE("no outdegree awareness is rejected") {
    auto s = with_leaders(gen_random_connected(3, 6, 1, true), 1);
    s.awareness = Awareness::None;
    CHECK_THROWS_AS(run_for(s, "directed-counting-stabilizing", 6), ConfigurationError);
  }
}

TEST_CASE("port-aware counting") {
  SUBCASE("leader alone with a self-loop") {
    DynamicSchedule s;
    s.n = 1;
    s.directed = true;
    s.awareness = Awareness::OutputPort;
    s.inputs = {{kLeaderLabel}};
    s.steps.assign(3, StepGraph{{{0, 0, 1, 0}}});
    const auto tr = run_for(s, "port-counting", 3);
    REQUIRE(tr.termination[0]);
    CHECK(*tr.termination[0] == 1);
    CHECK(tr.steps.back().outputs[0] == Output::number(1));
  }
  SUBCASE("star from the leader, then a cycle") {
    DynamicSchedule s;
    s.n = 3;
    s.directed = true;
    s.awareness = Awareness::OutputPort;
    s.inputs = {{kLeaderLabel, "x", "x"}};
    s.steps.push_back(StepGraph{{{0, 1, 1, 0}, {0, 2, 1, 1}, {1, 0, 1, 0}, {2, 0, 1, 0}}});
    for (int k = 0; k < 6; ++k) s.steps.push_back(StepGraph{{{0, 1, 1, 0}, {1, 2, 1, 0}, {2, 0, 1, 0}}});
    const auto tr = run_for(s, "port-counting", 7);
    for (AgentId a = 0; a < 3; ++a) {
      REQUIRE(tr.termination[a]);
      CHECK(*tr.termination[a] <= 2 * 3 - 1);
      CHECK(tr.steps.back().outputs[a] == Output::number(3));
    }
  }
  SUBCASE("random ported networks terminate by 2n-1") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const std::size_t n = 2 + seed % 5;
      const auto tr = run_for(with_leaders(gen_random_ported(n, 3 * n, seed), 1), "port-counting", 3 * n);
      for (AgentId a = 0; a < n; ++a) {
        REQUIRE(tr.termination[a]);
        CHECK(*tr.termination[a] <= 2 * n - 1);
        CHECK(tr.steps.back().outputs[a] == Output::number(Ratio(BigInt(n))));
      }
    }
  }
}

TEST_CASE("streaming average") {
  auto varying = [](DynamicSchedule s, const std::function<std::string(AgentId, std::size_t)>& f) {
    s.inputs.clear();
    for (std::size_t t = 0; t <= s.horizon(); ++t) {
      std::vector<std::string> row;
      for (AgentId a = 0; a < s.n; ++a) row.push_back(f(a, t));
      s.inputs.push_back(row);
    }
    return s;
  };
  auto mean_at = [](const DynamicSchedule& s, std::size_t t) {
    Ratio sum = 0;
    for (AgentId a = 0; a < s.n; ++a) sum += Ratio(BigInt(std::stoll(s.input(a, t))));
    return sum / Ratio(BigInt(s.n));
  };
  // From 2n-2 on, every output is the mean at the time it describes; returns the mean lag.
  auto check_trace = [&](const DynamicSchedule& s, const RunTrace& tr) {
    std::size_t lag = 0, count = 0;
    for (const StepRecord& r : tr.steps)
      for (const Output& o : r.outputs) {
        if (r.time < 2 * s.n - 2) continue;
        REQUIRE(o.as_of);
        CHECK(*o.as_of <= r.time);
        CHECK(o.value == mean_at(s, *o.as_of));
        lag += r.time - *o.as_of;
        ++count;
      }
    return count ? static_cast<double>(lag) / static_cast<double>(count) : 0.0;
  };

  SUBCASE("constant inputs reduce to the plain average") {
    const auto labels = numeric_labels(5, 1);
    const auto s = with_inputs(gen_random_connected(5, 15, 1, false), labels);
    const auto tr = run_for(s, "streaming-avg-consensus", 15);
    for (const Output& o : tr.steps.back().outputs) CHECK(o.value == plain_mean(labels));
  }
  SUBCASE("one input flip is reflected with mean delay at most n") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const std::size_t n = 3 + seed % 4, k = 2 * n;
      const auto s = varying(gen_random_connected(n, 6 * n, seed, false),
                             [&](AgentId a, std::size_t t) { return a == 0 && t >= k ? "9" : std::to_string(a % 3); });
      const auto tr = run_for(s, "streaming-avg-consensus", 6 * n);
      CHECK(check_trace(s, tr) <= static_cast<double>(n));
      std::size_t seen = 0;
      for (const StepRecord& r : tr.steps)
        if (!seen && r.outputs[0].as_of && *r.outputs[0].as_of >= k) seen = r.time;
      CHECK(seen >= k);
      CHECK(seen <= k + n);
    }
  }
  SUBCASE("periodic inputs are tracked with bounded lag") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const std::size_t n = 3 + seed % 4;
      const auto s = varying(gen_random_connected(n, 8 * n, seed, false),
                             [&](AgentId a, std::size_t t) { return std::to_string((a + t / n) % 4); });
      CHECK(check_trace(s, run_for(s, "streaming-avg-consensus", 8 * n)) <= static_cast<double>(n));
    }
  }
}

TEST_CASE("tau batching") {
  SUBCASE("tau = 1 matches the inner protocol step for step") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const std::size_t n = 3 + seed % 4;
      const auto s = with_leaders(gen_random_connected(n, 3 * n, seed, false), 1);
      const auto a = run_for(s, "tau-batch:counting", 3 * n), b = run_for(s, "counting", 3 * n);
      for (std::size_t t = 0; t <= 3 * n; ++t) CHECK(a.steps[t].outputs == b.steps[t].outputs);
    }
  }
  SUBCASE("links every third step: counting by 3(2n-2)") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      const std::size_t n = 2 + seed % 5, tau = 3;
      const auto s = with_leaders(gen_tau_sparse(n, tau * 4 * n, tau, seed, false), 1);
      const auto tr = run_for(s, "tau-batch:counting", tau * 4 * n, ProtocolParams{1, std::nullopt, tau});
      const auto from = correct_from(tr, Output::number(Ratio(BigInt(n))));
      REQUIRE(from);
      CHECK(*from <= tau * (2 * n - 2));
    }
  }
  SUBCASE("unknown tau: unbatched consensus still converges") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const std::size_t n = 2 + seed % 5;
      const auto labels = numeric_labels(n, seed);
      const auto s = with_inputs(gen_tau_sparse(n, 12 * n, 3, seed, false), labels);
      CHECK(correct_from(run_for(s, "avg-consensus", 12 * n), Output::number(plain_mean(labels))).has_value());
    }
  }
}

TEST_CASE("asynchronous counting") {
  auto rounds_to_correct = [](const DynamicSchedule& s) {
    ExecutorConfig cfg;
    cfg.model = ExecModel::Asynchronous;
    cfg.max_steps = s.horizon();
    const auto tr = run(s, "async-counting", cfg);
    const auto st = measure_stabilization(tr, make_checker(s, "async-counting", cfg));
    return st.stabilized ? rounds_until(tr.rounds, st.step) : std::nullopt;
  };
  SUBCASE("zero delay behaves like the synchronous directed protocol") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const std::size_t n = 2 + seed % 4;
      const auto s = with_uniform_delay(with_leaders(gen_random_connected(n, 4 * n, seed, true), 1), 0);
      const auto r = rounds_to_correct(s);
      REQUIRE(r);
      CHECK(*r <= 2 * n - 2);
    }
  }
  SUBCASE("fixed delay 2") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const std::size_t n = 2 + seed % 4;
      const auto s = with_uniform_delay(with_leaders(gen_random_connected(n, 12 * n, seed, true), 1), 2);
      const auto r = rounds_to_correct(s);
      REQUIRE(r);
      CHECK(*r <= 2 * n - 2);
    }
  }
  SUBCASE("heterogeneous delays, n <= 5") {
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
      const std::size_t n = 2 + seed % 4;
      const auto s = with_random_delays(with_leaders(gen_random_connected(n, 12 * n, seed, true), 1), seed, 3);
      const auto r = rounds_to_correct(s);
      REQUIRE(r);
      CHECK(*r <= 2 * n - 2);
    }
  }
}

TEST_CASE("self-stabilization") {
  SUBCASE("clean start behaves like the inner protocol") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const std::size_t n = 2 + seed % 4;
      const auto s = with_leaders(gen_random_connected(n, 5 * n, seed, false), 1);
      ProtocolParams p;
      p.n_known = n;
      const auto a = run_for(s, "self-stab:counting", 5 * n, p), b = run_for(s, "counting", 5 * n);
      for (std::size_t t = 0; t <= 5 * n; ++t) CHECK(a.steps[t].outputs == b.steps[t].outputs);
    }
  }
  SUBCASE("known n: garbage states are repaired within 4n steps") {
    std::size_t resets = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const std::size_t n = 2 + seed % 5;
      const auto s = with_leaders(gen_random_connected(n, 8 * n, seed, false), 1);
      ExecutorConfig cfg;
      cfg.max_steps = 8 * n;
      cfg.params.n_known = n;
      cfg.corrupt_seed = seed;
      const auto tr = run(s, "self-stab:counting", cfg);
      for (const auto& e : tr.events) resets += e.kind == "reset";
      const auto st = measure_stabilization(tr, make_checker(s, "self-stab:counting", cfg));
      CHECK(st.stabilized);
      CHECK(st.step <= 4 * n);
    }
    CHECK(resets > 0);
  }
  SUBCASE("unknown n: heights equalize within 4n steps, then outputs settle") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const std::size_t n = 2 + seed % 5;
      const auto s = with_leaders(gen_random_connected(n, 14 * n, seed, false), 1);
      ExecutorConfig cfg;
      cfg.max_steps = 14 * n;
      cfg.corrupt_seed = seed + 100;
      const auto tr = run(s, "self-stab:counting", cfg);
      std::size_t equal_from = 0;
      for (const StepRecord& r : tr.steps)
        if (std::count(r.heights.begin(), r.heights.end(), r.heights[0]) != static_cast<long>(n))
          equal_from = r.time + 1;
      CHECK(equal_from <= 4 * n);
      const auto st = measure_stabilization(tr, make_checker(s, "self-stab:counting", cfg));
      CHECK(st.stabilized);
      CHECK(st.step <= 12 * n);
    }
  }
  SUBCASE("unknown n keeps views short") {
    const auto s = with_leaders(gen_random_connected(4, 80, 3, false), 1);
    const auto tr = run_for(s, "self-stab:counting", 80);
    for (int h : tr.steps.back().heights) CHECK(h < 60);
  }
}

TEST_CASE("finite-state wrapper") {
  SUBCASE("symmetric static network: every agent goes quiet") {
    const auto labels = numeric_labels(5, 2);
    const auto s = with_inputs(gen_static(5, ring(5), 200, false), labels);
    const auto tr = run_for(s, "finite-state:avg-consensus", 200);
    std::size_t last_active = 0;
    for (const StepRecord& r : tr.steps)
      for (char c : r.active)
        if (c) last_active = r.time;
    CHECK(last_active <= 2 * 5 * 5);
    CHECK(correct_from(tr, Output::number(plain_mean(labels))).has_value());
  }
  SUBCASE("asymmetric network: same final outputs as the unwrapped protocol") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const std::size_t n = 2 + seed % 5;
      const auto s = with_leaders(gen_random_static(n, 4 * n * n, seed, false), 1);
      const auto a = run_for(s, "finite-state:counting", 4 * n * n), b = run_for(s, "counting", 4 * n * n);
      CHECK(a.steps.back().outputs == b.steps.back().outputs);
    }
  }
  SUBCASE("suitable level of a ground-truth view") {
    const auto s = with_leaders(gen_static(3, {{0, 1}, {1, 2}}, 6, false), 1);
    const auto ht = build_ground_truth(s, 6);
    const View v = extract_view(ht, 0, 6);
    const auto level = shallowest_suitable_level(v);
    REQUIRE(level);
    CHECK(*level <= v.height());
  }
}

TEST_CASE("agents with equal views give equal outputs") {
  const char* protos[] = {"avg-consensus", "counting", "election-stabilizing", "counting-terminating"};
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const std::size_t n = 3 + seed % 5;
    for (const char* p : protos) {
      auto s = gen_random_connected(n, 3 * n, seed, false);
      s = std::string(p) == "avg-consensus" ? with_inputs(s, numeric_labels(n, seed)) : with_leaders(s, 1);
      const auto tr = run_for(s, p, 3 * n);
      for (const StepRecord& r : tr.steps)
        for (AgentId a = 0; a < n; ++a)
          for (AgentId b = a + 1; b < n; ++b)
            if (r.digests[a] == r.digests[b]) CHECK(r.outputs[a] == r.outputs[b]);
    }
  }
}

TEST_CASE("renumbering agents permutes the traces") {
  const char* protos[] = {"counting", "counting-terminating", "directed-counting-stabilizing", "port-counting"};
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const std::size_t n = 3 + seed % 4;
    std::vector<AgentId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (const char* p : protos) {
      const std::string name = p;
      DynamicSchedule s = name == "port-counting"      ? gen_random_ported(n, 3 * n, seed)
                          : name.rfind("directed", 0) == 0 ? gen_random_connected(n, 3 * n, seed, true)
                                                           : gen_random_connected(n, 3 * n, seed, false);
      s = with_leaders(s, 1);
      const auto a = run_for(s, name, 3 * n), b = run_for(permute_agents(s, perm), name, 3 * n);
      REQUIRE(a.steps.size() == b.steps.size());
      for (std::size_t t = 0; t < a.steps.size(); ++t)
        for (AgentId x = 0; x < n; ++x) {
          CHECK(a.steps[t].outputs[x] == b.steps[t].outputs[perm[x]]);
          CHECK(a.steps[t].digests[x] == b.steps[t].digests[perm[x]]);
        }
    }
  }
}
