#pragma once

// Model-parallel training simulation over the planned rounds.
//
// The model is a decomposable regularized regression: prediction phi(w; x)
// through a linear or logistic link, squared-error data term, L1 or L2
// penalty handled proximally. Workers update disjoint coordinate blocks in
// Jacobi fashion from the same iterate, which reproduces a centralized
// full-gradient proximal step exactly; what differs between planning schemes
// is how much wall-clock time every round costs.

#include <cstdint>
#include <string>
#include <vector>

#include "scenario.hpp"
#include "solver.hpp"

namespace partel {

enum class InferenceKind { linear, logistic };
enum class Regularizer { l1, l2 };
enum class PlannerKind { joint, proportional, greedy };

const char* planner_name(PlannerKind p);

struct SyntheticDataset {
  Grid features;                     // samples x coordinates
  std::vector<double> targets;
  std::vector<double> ground_truth;  // weights the targets were drawn from

  std::size_t num_samples() const { return features.rows; }
  std::size_t num_features() const { return features.cols; }
};

SyntheticDataset make_synthetic_dataset(std::size_t num_samples,
                                        std::size_t num_features,
                                        InferenceKind kind, double sparsity,
                                        double noise, std::uint64_t seed);

struct SimOptions {
  std::size_t rounds = 50;
  InferenceKind kind = InferenceKind::linear;
  Regularizer reg = Regularizer::l2;
  double reg_strength = 1e-3;
  // Redraw channel gains before every round and re-plan; otherwise the
  // round plan is computed once and reused.
  bool redraw_channels = false;
  SolverOptions solver;
};

struct RoundRecord {
  std::size_t round = 0;           // 1-based
  double round_latency = 0.0;      // planned wall-clock cost of this round
  double cumulative_latency = 0.0;
  double loss = 0.0;               // objective after the round's update
};

struct RoundTrace {
  std::string scheme;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rounds;
};

struct SimResult {
  std::vector<double> weights;
  RoundTrace trace;
};

// Regularized objective at the given weights.
double objective(const SyntheticDataset& data, const std::vector<double>& w,
                 InferenceKind kind, Regularizer reg, double reg_strength);

// Train for opts.rounds rounds with per-round cost taken from the chosen
// planning scheme on `s`. The model dimension is data.num_features().
SimResult run_partel(const Scenario& s, const SyntheticDataset& data,
                     PlannerKind planner, const SimOptions& opts);

// Same updates with no partition at all; the reference the parallel runs
// must match coordinate-for-coordinate.
std::vector<double> centralized_reference(const SyntheticDataset& data,
                                          const SimOptions& opts);

}  // namespace partel
