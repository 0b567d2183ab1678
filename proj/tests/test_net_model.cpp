#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "histree/errors.hpp"
#include "histree/history.hpp"
#include "histree/schedule.hpp"
#include "histree/witness.hpp"

using namespace histree;

TEST_CASE("fig1 fixture is connected at every step with tau 1") {
  const auto fx = gen_figure_fixtures();
  const auto r = validate(fx.at("fig1"));
  for (bool c : r.connected) CHECK(c);
  REQUIRE(r.tau);
  CHECK(*r.tau == 1);
}

TEST_CASE("links only at even steps give tau 2") {
  auto s = gen_tau_sparse(5, 12, 2, 3, false);
  const auto r = validate(s);
  REQUIRE(r.tau);
  CHECK(*r.tau == 2);
  for (std::size_t k = 0; k < r.connected.size(); ++k) CHECK(r.connected[k] == ((k + 1) % 2 == 0));
}

TEST_CASE("two disjoint static components are never union-connected") {
  auto s = gen_static(7, {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {5, 6}}, 6, false);
  const auto r = validate(s);
  CHECK_FALSE(r.tau.has_value());
  CHECK_FALSE(r.dynamic_diameter.has_value());
}

TEST_CASE("out-of-range agent is reported with its step") {
  auto s = gen_static(3, {{0, 1}, {1, 2}}, 3, false);
  s.steps[1].edges.push_back(Edge{0, 9, 1, std::nullopt});
  try {
    validate(s);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("step 2") != std::string::npos);
  }
}

TEST_CASE("asymmetric undirected schedule is rejected") {
  auto s = gen_static(3, {{0, 1}, {1, 2}}, 1, false);
  s.steps[0].edges.push_back(Edge{0, 2, 1, std::nullopt});
  CHECK_THROWS_AS(check_well_formed(s), ValidationError);
}

TEST_CASE("port invariants") {
  auto s = gen_random_ported(4, 3, 1);
  CHECK_NOTHROW(check_well_formed(s));
  auto dup = s;
  dup.steps[0].edges[1].port = dup.steps[0].edges[0].port;
  dup.steps[0].edges[1].src = dup.steps[0].edges[0].src;
  CHECK_THROWS_AS(check_well_formed(dup), ValidationError);
  auto undirected = s;
  undirected.directed = false;
  CHECK_THROWS_AS(check_well_formed(undirected), ValidationError);
}

TEST_CASE("gen_random_connected postconditions") {
  auto s = gen_random_connected(6, 4, 7, false);
  const auto r = validate(s);
  for (bool c : r.connected) CHECK(c);
  for (const auto& label : s.inputs[0]) CHECK((label == "0" || label == "1"));

  auto two = gen_random_connected(2, 1, 0, false);
  REQUIRE(two.steps.size() == 1);
  CHECK(two.steps[0].edges == std::vector<Edge>{{0, 1, 1, std::nullopt}, {1, 0, 1, std::nullopt}});

  CHECK(gen_random_connected(6, 4, 7, false) == s);
  CHECK(gen_random_connected(5, 9, 11, true) == gen_random_connected(5, 9, 11, true));
  CHECK_THROWS_AS(gen_random_connected(1, 3, 0, false), ParameterError);
}

TEST_CASE("validate reproduces generator guarantees") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 2 + seed % 7;
    for (bool directed : {false, true}) {
      auto r = validate(gen_random_connected(n, 10, seed, directed));
      for (bool c : r.connected) CHECK(c);
      CHECK(r.tau == std::optional<std::size_t>(1));
    }
    const std::size_t tau = 1 + seed % 4;
    auto r = validate(gen_tau_sparse(n, 12 * tau, tau, seed, seed % 2 == 1));
    CHECK(r.tau == std::optional<std::size_t>(tau));
  }
}

TEST_CASE("tau <= d <= tau(n-1) on periodic schedules") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 2 + seed % 6, tau = 1 + seed % 3;
    auto r = validate(gen_tau_sparse(n, 6 * n * tau, tau, seed, seed % 2 == 0));
    REQUIRE(r.tau);
    REQUIRE(r.dynamic_diameter);
    CHECK(*r.tau <= *r.dynamic_diameter);
    CHECK(*r.dynamic_diameter <= *r.tau * (n - 1));
  }
}

TEST_CASE("serialization round-trips bit-exactly") {
  std::vector<DynamicSchedule> all;
  for (auto& [name, s] : gen_figure_fixtures()) all.push_back(s);
  all.push_back(gen_random_ported(4, 3, 2));
  all.push_back(with_random_delays(gen_random_connected(4, 5, 3, true), 3, 2));
  all.push_back(with_random_activation(gen_random_connected(5, 6, 4, false), 4, 3));
  auto varying = gen_random_connected(3, 2, 5, false);
  varying.inputs = {{"1", "2", "3"}, {"1", "1", "3"}, {"4", "2", "3"}};
  all.push_back(varying);
  for (const auto& s : all) {
    const std::string text = to_json(s);
    const DynamicSchedule back = schedule_from_json(text);
    CHECK(back == s);
    CHECK(to_json(back) == text);
  }
}

TEST_CASE("schedule parser rejects bad documents") {
  CHECK_THROWS_AS(schedule_from_json(R"({"n":2,"directed":false,"inputs":["a","b"],"steps":[],"extra":1})"),
                  ValidationError);
  try {
    schedule_from_json("{\n  \"n\": 2,\n  \"directed\": fals }");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
  CHECK_THROWS_AS(schedule_from_json(R"({"n":2,"directed":false,"inputs":["a"],"steps":[]})"), ValidationError);
  CHECK_THROWS_AS(load_schedule("/nonexistent/file.json"), ParseError);
}

TEST_CASE("delivery plan: queue versus vanish") {
  DynamicSchedule s = gen_static(2, {{0, 1}}, 3, false);
  s.activation = std::vector<std::vector<AgentId>>{{0}, {0, 1}, {0, 1}};
  const auto queued = plan_deliveries(s, 3, InactiveDelivery::Queue);
  const auto vanished = plan_deliveries(s, 3, InactiveDelivery::Vanish);
  // Step 1: agent 0 sends to the sleeping agent 1.
  CHECK(queued.delivered[1].empty());
  CHECK(queued.delivered[2].size() == 3);  // the queued message plus both step-2 messages
  CHECK(vanished.delivered[2].size() == 2);
  CHECK(queued.outdegree[1][0] == 1);
  CHECK(queued.outdegree[1][1] == 0);
}

TEST_CASE("lower-bound witness search") {
  SUBCASE("n = 3") {
    const auto w = search_lower_bound_witness(3);
    REQUIRE(w.status == WitnessResult::Status::Found);
    CHECK(w.small.n == 3);
    CHECK(w.large.n == 4);
    CHECK(w.steps == 4);
    const auto a = build_ground_truth(w.small, 4), b = build_ground_truth(w.large, 4);
    CHECK(canonical_code(extract_view(a, 0, 4)) == canonical_code(extract_view(b, 0, 4)));
    CHECK(w.recolor_extends);
    REQUIRE(w.diverge_step);
    CHECK(*w.diverge_step > 4);
  }
  SUBCASE("n = 1 is the degenerate check at step 0") {
    const auto w = search_lower_bound_witness(1);
    REQUIRE(w.status == WitnessResult::Status::Found);
    CHECK(w.steps == 0);
    CHECK(w.small.n == 1);
    CHECK(w.large.n == 2);
  }
  SUBCASE("cap exceeded is explicit") {
    const auto w = search_lower_bound_witness(4, 10);
    CHECK(w.status == WitnessResult::Status::CapExceeded);
  }
}
