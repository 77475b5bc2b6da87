#pragma once

// Granularity-constrained round planning for convolutional models.
//
// Convolutional blocks cannot be split at arbitrary parameter boundaries:
// a worker either owns a whole filter / neuron group or none of it. The
// planner therefore solves the relaxed round first, then snaps every block
// size to a multiple of the stage's indivisible unit, choosing the cheapest
// set of workers to round up so the total still covers the model.

#include <cstdint>
#include <vector>

#include "cost_model.hpp"
#include "scenario.hpp"
#include "solver.hpp"

namespace partel {

struct CnnShape {
  // Indivisible output groups per trainable layer (filters or neuron
  // columns). Their count fixes how finely the parameter vector may split.
  std::vector<std::uint64_t> group_counts;
  std::uint64_t total_parameters = 0;

  std::uint64_t num_groups() const;
  void validate() const;

  // Small reference shape: 6 + 16 + 120 + 84 = 226 groups.
  static CnnShape lenet_like(std::uint64_t total_parameters = 60'000);
};

// Which tensor a round ships.
enum class CnnStage {
  weights,      // parameter blocks, unit = total / num_groups
  activations,  // per-sample features, unit = num_groups
};

struct GranularitySpec {
  double unit = 0.0;   // indivisible block size, in parameters
  double total = 0.0;  // stage payload a round must cover

  void validate() const;
};

GranularitySpec stage_granularity(const CnnShape& shape, CnnStage stage,
                                  std::uint64_t batch_size);

// Per-worker distances from a relaxed block size to the two nearest unit
// multiples, plus the relative latency cost of taking the larger one.
struct RoundingDeltas {
  std::vector<double> up;         // parameters added by rounding up
  std::vector<double> down;       // parameters shed by rounding down
  std::vector<double> indicator;  // up / load; +inf for idle workers
};

RoundingDeltas compute_rounding_deltas(const std::vector<double>& loads,
                                       double unit);

// Smallest prefix of the indicator-sorted workers whose combined round-up
// surplus covers everyone else's round-down loss. Returns the prefix size;
// `order` (optional) receives the sorted worker indices.
std::size_t select_roundup_set(const RoundingDeltas& deltas,
                               std::vector<std::size_t>* order = nullptr);

// Snap block sizes to unit multiples per the round-up choice, rescaling each
// worker's per-subcarrier loads so its schedule stretches proportionally.
AllocationPlan apply_cnn_rounding(const AllocationPlan& relaxed, double unit,
                                  const std::vector<bool>& round_up);

struct CnnRoundingPlan {
  AllocationPlan plan;              // granular plan, loads = units * unit
  std::vector<std::uint64_t> units; // multiples each worker carries
  RoundingDeltas deltas;
  std::size_t roundup_count = 0;
  double cutoff = 0.0;          // largest indicator among rounded-up workers
  double relaxed_latency = 0.0; // deadline of the relaxed binary plan
  double latency_bound = 0.0;   // relaxed_latency * (1 + cutoff)
  bool single_worker_fallback = false;  // unit exceeded every relaxed block
  SolveResult relaxed;          // binary-ownership solver output
};

// Full pipeline: relaxed min-latency round, binary ownership, granularity
// rounding. The returned plan is feasible at `latency_bound`.
CnnRoundingPlan plan_cnn_round(const Scenario& s, const GranularitySpec& g,
                               const SolverOptions& opts = {});

}  // namespace partel
