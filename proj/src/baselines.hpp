#pragma once

// Reference schemes the joint planner is measured against.
//
// - proportional: block sizes fixed in proportion to compute speed, radio
//   side (ownership, rates, deadline) still optimized.
// - greedy full-model exchange: sample-parallel training where every worker
//   uploads the whole model each round; subcarriers go one at a time to
//   whichever worker is currently slowest.

#include <cstddef>
#include <vector>

#include "scenario.hpp"
#include "solver.hpp"

namespace partel {

// Whole-parameter split of `model_size` proportional to compute speed
// (largest-remainder rounding, so the parts sum exactly).
std::vector<double> proportional_loads(const Scenario& s, double model_size);

SolveResult proportional_baseline(const Scenario& s, double model_size,
                                  const SolverOptions& opts = {});

struct GreedyStep {
  std::size_t subcarrier = 0;
  std::size_t worker = 0;
  double latency_after = 0.0;  // that worker's finish time with the new cell
};

// Greedy full-model scheme. Compute is sample-sharded (each worker trains
// the whole model on 1/K of the data), upload is the full parameter vector.
// With fewer subcarriers than workers the round never finishes and the plan
// records infinite latency.
SolveResult greedy_feel(const Scenario& s, double model_size,
                        const SolverOptions& opts = {},
                        std::vector<GreedyStep>* trace = nullptr);

}  // namespace partel
