#pragma once

// Per-round cost model. An AllocationPlan says who computes which share of
// the model and how the upload is spread over subcarriers; this module prices
// plans (latency, energy) and checks them against the round constraints.

#include <optional>
#include <vector>

#include "scenario.hpp"
#include "util.hpp"

namespace partel {

// Rates are stored as the effective throughput a worker gets on a subcarrier,
// i.e. already scaled by a fractional share where the assignment is relaxed.
// For binary assignments this is just the physical signalling rate.
struct AllocationPlan {
  Grid assignment;                   // C, K x N, entries in [0, 1]
  std::vector<double> worker_loads;  // L_k, parameters
  Grid subcarrier_loads;             // L_kn, parameters
  Grid rates;                        // R_kn, bits/s, 0 wherever C is 0
  double latency = 0.0;              // T, seconds

  std::size_t num_workers() const { return assignment.rows; }
  std::size_t num_subcarriers() const { return assignment.cols; }
};

struct WorkerLatency {
  double compute = 0.0;                      // L_k / f_k
  std::vector<double> upload_per_subcarrier; // L_kn tau / R_kn
  double upload = 0.0;                       // max over assigned subcarriers
  double total = 0.0;                        // compute + upload
};

struct WorkerEnergy {
  double compute = 0.0;                      // g f^2 L_k
  std::vector<double> power_per_subcarrier;  // share-weighted transmit power, W
  double upload = 0.0;                       // J
  double total = 0.0;                        // compute + upload + circuit
};

WorkerLatency worker_latency(const AllocationPlan& plan, const Scenario& s,
                             std::size_t k);
WorkerEnergy worker_energy(const AllocationPlan& plan, const Scenario& s,
                           std::size_t k);

// One slack per constraint family; feasible means value >= -tol * scale.
struct ConstraintSlack {
  double value = 0.0;  // worst slack, negative = violated
  double scale = 1.0;  // magnitude the tolerance is relative to
};

struct ConstraintReport {
  ConstraintSlack assignment;              // every subcarrier fully assigned
  ConstraintSlack latency;                 // compute + upload within T
  ConstraintSlack total_load;              // loads cover the model
  ConstraintSlack upload;                  // each worker uploads its own load
  ConstraintSlack power;                   // round energy within P_k * T
  std::optional<ConstraintSlack> granularity;  // loads on the subproblem grid
  double tolerance = 1e-6;
  bool feasible = false;
  double worst_violation = 0.0;  // max over constraints of -slack/scale
};

// Infeasibility is a reported outcome, not an exception; only malformed
// plans (dimension mismatches, rate 0 with load > 0) throw.
ConstraintReport validate_plan(const AllocationPlan& plan, const Scenario& s,
                               std::optional<double> granularity = std::nullopt,
                               double tolerance = 1e-6);

// Total model parameters the plan commits to compute.
double plan_total_load(const AllocationPlan& plan);

}  // namespace partel
