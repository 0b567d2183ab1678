#pragma once

#include <cstddef>

#include "histree/schedule.hpp"

namespace histree {

struct WitnessResult {
  enum class Status { Found, NoneFound, CapExceeded };
  Status status = Status::NoneFound;
  DynamicSchedule small;  // n agents, leader is agent 0
  DynamicSchedule large;  // n+1 agents, leader is agent 0
  std::size_t steps = 0;  // leaders' views agree through this step (2n-2)
  // Leaders relabelled to the common label still agree at steps+1.
  bool recolor_extends = false;
  // First step at which the leaders' views differ, if it happens within the searched horizon.
  std::optional<std::size_t> diverge_step;
  std::size_t graphs_examined = 0;
};

// Exhaustive search over labelled connected graphs (simple plus optional self-loops) of sizes
// n and n+1.
WitnessResult search_lower_bound_witness(std::size_t n, std::size_t cap = 200000);

}  // namespace histree
