#pragma once

// Joint subcarrier / load / power solver.
//
// The round planner works on a convex relaxation: binary subcarrier
// ownership is relaxed to shares, rates are variable-substituted so the
// feasible set is convex, and a projected dual ascent prices the two coupled
// resources per worker (upload capacity, energy budget). Primal variables
// have closed forms at fixed prices; the assignment is the pointwise
// minimizer of a per-cell indicator. Feasible latency is then found by
// bisection on the round deadline, since the updatable model size grows
// monotonically with it.

#include <cstdint>
#include <optional>
#include <vector>

#include "cost_model.hpp"
#include "scenario.hpp"
#include "util.hpp"

namespace partel {

struct SolverOptions {
  double step_scale_lambda = 0.5;  // dual step numerators, relative to init
  double step_scale_nu = 0.5;
  std::size_t max_inner_iterations = 100'000;
  double inner_tolerance = 1e-6;  // relative change of the inner objective
  std::size_t patience = 20;      // consecutive quiet iterations to converge
  double bisection_tolerance = 1e-6;  // relative width on the deadline
  double bracket_growth = 2.0;
  std::size_t max_bracket_doublings = 60;
  double nu_floor = 1e-12;    // keeps the water level defined
  double window_floor = 1e-6; // min upload window, relative to T
  // Fixed-load feasibility probes (baseline assignment search).
  std::size_t probe_max_iterations = 4000;
  std::size_t probe_check_interval = 25;

  void validate() const;
};

struct DualState {
  std::vector<double> lambda;  // upload price per worker, >= 0
  std::vector<double> nu;      // energy price per worker, >= nu_floor
  std::vector<double> mu;      // per-subcarrier assignment score (min indicator)
  std::vector<double> phi;     // 1 / (T - L_k / f_k)
  Grid rtilde;                 // effective rates at the dual point
};

struct SolveResult {
  AllocationPlan plan;
  DualState duals;
  double achieved_model_size = 0.0;  // total load the plan supports
  std::size_t iterations = 0;        // inner iterations spent (all deadlines)
  bool converged = false;
};

// --- closed forms at a fixed dual point ------------------------------------

// Optimal signalling rate on one subcarrier; 0 when the channel is priced out.
double optimal_rate(double lambda, double nu, double h, double B, double tau,
                    double sigma2);

// Matching transmit power (water level minus noise floor, clamped at 0).
double optimal_power(double lambda, double nu, double h, double B, double tau,
                     double sigma2);

// Optimal block size for one worker at deadline T; clamped to [0, f*T).
double optimal_worker_load(double T, double lambda, double nu,
                           const WorkerProfile& worker, double xi);

// Parameters the worker would push through one subcarrier it owns.
double optimal_subcarrier_load(double T, double lambda, double nu,
                               const WorkerProfile& worker, double h, double B,
                               double tau, double sigma2, double xi);

// Per-cell assignment score; always <= 0, and 0 exactly when the rate is 0.
double subcarrier_indicator(double nu, double h, double sigma2, double B,
                            double rate);

// Relaxed ownership: each column goes to its lowest indicator, exact ties
// split evenly.
Grid assign_subcarriers(const Grid& indicators);

// Everything the inner loop derives from (lambda, nu) at a deadline T.
struct PrimalState {
  Grid rate;        // physical per-cell rate R*
  Grid indicator;   // assignment scores
  Grid assignment;  // relaxed ownership C
  Grid rtilde;      // effective rates C * R*
  std::vector<double> load;        // stationary block sizes (clamped)
  std::vector<double> window;     // T - load/f
  std::vector<double> phi;
  std::vector<double> upload_capacity;  // sum_n rtilde / tau, params/s
  std::vector<double> tx_power;         // share-weighted transmit power, W
};

PrimalState recover_primal(const Scenario& s, double T,
                           const std::vector<double>& lambda,
                           const std::vector<double>& nu,
                           const SolverOptions& opts = {});

struct DualResiduals {
  std::vector<double> upload;  // constraint slack gradient for lambda
  std::vector<double> power;   // constraint slack gradient for nu
};

// Residuals of both relaxed constraints at the closed-form primal point;
// positive entries mean the corresponding constraint is violated there.
DualResiduals dual_residuals(const std::vector<double>& lambda,
                             const std::vector<double>& nu, const Scenario& s,
                             double T, const SolverOptions& opts = {});

// --- solvers ----------------------------------------------------------------

// Largest total model the workers can compute and upload within deadline T
// (projected dual ascent; the returned plan is feasible by construction).
// The ascent is a heuristic on a repaired primal, so it can stall short of
// the true maximum. With force_pinned_leg the solver always also runs a
// second ascent with ownership pinned to a balanced partition and keeps the
// better outcome; otherwise that leg only fires when the free run carries
// nothing.
SolveResult max_model_size(const Scenario& s, double T,
                           const SolverOptions& opts = {},
                           const DualState* warm_start = nullptr,
                           bool force_pinned_leg = false);

// Smallest deadline that fits `model_size` parameters (bisection on T).
SolveResult min_latency(const Scenario& s, double model_size,
                        const SolverOptions& opts = {});

// Commit fractional ownership to binary and re-optimize everything else.
SolveResult round_subcarriers(const SolveResult& relaxed, const Scenario& s,
                              double model_size,
                              const SolverOptions& opts = {});

// Re-optimize loads, rates and deadline with ownership frozen.
SolveResult resolve_with_fixed_assignment(const Scenario& s,
                                          const Grid& assignment,
                                          double model_size,
                                          const SolverOptions& opts = {});

// Min deadline with block sizes frozen; ownership optimized unless given.
SolveResult resolve_with_fixed_loads(const Scenario& s,
                                     const std::vector<double>& loads,
                                     const SolverOptions& opts = {},
                                     const Grid* assignment = nullptr);

// Whole-parameter loads: floor each worker's block, hand the global remainder
// to the largest fractional parts (ties to the lower worker index), then split
// every block across that worker's live subcarriers so cell loads sum to it.
AllocationPlan integerize_loads(const AllocationPlan& plan, const Scenario& s,
                                std::uint64_t model_size);

// Minimum total transmit power for one worker to push `throughput` bits/s
// across the given channel gains (water-filling); also returns per-cell rates.
double waterfill_min_power(const std::vector<double>& gains, double sigma2,
                           double B, double throughput,
                           std::vector<double>* rates = nullptr);

// Smallest deadline one worker needs to upload `upload_params` over the given
// subcarrier gains after `compute_seconds` of compute, spending at most
// power_cap * T joules overall. Returns +inf if the set is empty.
double worker_min_latency(const Scenario& s, std::size_t k,
                          const std::vector<std::size_t>& subcarriers,
                          double upload_params, double compute_seconds,
                          double compute_energy,
                          std::vector<double>* rates = nullptr);

bool assignment_is_binary(const Grid& assignment);

}  // namespace partel
