#pragma once

// Independent brute-force reference for tiny instances.
//
// Everything here is written against the problem statement only: no code or
// closed forms are shared with the production solver, so agreement between
// the two is evidence, not tautology. Ownership patterns are enumerated
// exhaustively, block-size splits walk a uniform grid, and each worker's
// minimum finish time comes from its own bisection over the deadline with a
// water-level search for the cheapest rates.

#include <cstdint>
#include <vector>

#include "cost_model.hpp"
#include "scenario.hpp"

namespace partel {

struct OracleGrids {
  std::size_t load_resolution = 64;  // grid steps for splitting the model
  std::size_t rate_resolution = 64;  // initial water-level grid points
  double bisection_tolerance = 1e-9; // relative width, all bisections
  // Enumeration guards: K^N ownership patterns must stay enumerable.
  std::size_t max_workers = 3;
  std::size_t max_subcarriers = 4;

  void validate() const;
};

struct OracleResult {
  double latency = 0.0;
  AllocationPlan witness;
  std::size_t evaluations = 0;  // distinct worker subproblems solved
};

// Minimum deadline for `model_size` over all binary ownership patterns and
// grid block splits.
OracleResult brute_force_min_latency(const Scenario& s, double model_size,
                                     const OracleGrids& grids = {});

// Doubles both grid resolutions until the latency moves less than
// `relative_change`, starting from `grids`.
OracleResult refined_min_latency(const Scenario& s, double model_size,
                                 const OracleGrids& grids = {},
                                 double relative_change = 0.01,
                                 std::size_t max_rounds = 6);

// Largest total model size any binary ownership pattern supports at a fixed
// deadline (each worker maxes its own block by bisection).
OracleResult brute_force_max_model_size(const Scenario& s, double deadline,
                                        const OracleGrids& grids = {});

// Numeric convexity check of the energy perspective W * (2^(x/W) - 1) that
// the relaxation rests on. `power_sign` flips the exponent so tests can
// confirm the probe notices a corrupted model; leave it at +1.0 otherwise.
struct ConvexityProbeResult {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_violation = 0.0;  // most negative midpoint slack seen
};

ConvexityProbeResult convexity_probe(std::uint64_t seed, std::size_t samples,
                                     double tolerance = 1e-9,
                                     double power_sign = 1.0);

}  // namespace partel
