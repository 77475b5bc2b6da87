#include "cnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace partel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Split a block size into whole units plus a fractional tail, snapping
// near-exact multiples so float noise never manufactures a phantom unit.
void split_units(double load, double unit, std::uint64_t* whole,
                 double* fraction) {
  const double ratio = load / unit;
  double down = std::floor(ratio);
  double frac = ratio - down;
  if (frac > 1.0 - 1e-9) {
    down += 1.0;
    frac = 0.0;
  } else if (frac < 1e-9) {
    frac = 0.0;
  }
  *whole = static_cast<std::uint64_t>(down);
  *fraction = frac;
}

}  // namespace

std::uint64_t CnnShape::num_groups() const {
  std::uint64_t n = 0;
  for (std::uint64_t g : group_counts) n += g;
  return n;
}

void CnnShape::validate() const {
  if (group_counts.empty())
    fail(ErrorCode::invalid_argument, "shape needs at least one layer");
  for (std::uint64_t g : group_counts)
    if (g == 0)
      fail(ErrorCode::invalid_argument, "every layer needs at least one group");
  if (total_parameters == 0)
    fail(ErrorCode::invalid_argument, "shape needs a positive parameter count");
}

CnnShape CnnShape::lenet_like(std::uint64_t total_parameters) {
  CnnShape s;
  s.group_counts = {6, 16, 120, 84};
  s.total_parameters = total_parameters;
  return s;
}

void GranularitySpec::validate() const {
  if (!(unit > 0.0) || !std::isfinite(unit))
    fail(ErrorCode::invalid_argument, "granularity unit must be positive");
  if (!(total >= 0.0) || !std::isfinite(total))
    fail(ErrorCode::invalid_argument, "granularity total must be >= 0");
}

GranularitySpec stage_granularity(const CnnShape& shape, CnnStage stage,
                                  std::uint64_t batch_size) {
  shape.validate();
  const double groups = static_cast<double>(shape.num_groups());
  GranularitySpec g;
  switch (stage) {
    case CnnStage::weights:
      g.unit = static_cast<double>(shape.total_parameters) / groups;
      g.total = static_cast<double>(shape.total_parameters);
      break;
    case CnnStage::activations:
      if (batch_size == 0)
        fail(ErrorCode::invalid_argument,
             "activation rounds need a positive batch size");
      g.unit = groups;
      g.total = static_cast<double>(batch_size) * groups;
      break;
  }
  return g;
}

RoundingDeltas compute_rounding_deltas(const std::vector<double>& loads,
                                       double unit) {
  if (!(unit > 0.0))
    fail(ErrorCode::invalid_argument, "granularity unit must be positive");
  RoundingDeltas d;
  d.up.resize(loads.size());
  d.down.resize(loads.size());
  d.indicator.resize(loads.size());
  for (std::size_t k = 0; k < loads.size(); ++k) {
    if (!(loads[k] >= 0.0))
      fail(ErrorCode::invalid_argument, "block sizes must be >= 0");
    std::uint64_t whole = 0;
    double frac = 0.0;
    split_units(loads[k], unit, &whole, &frac);
    d.down[k] = frac * unit;
    d.up[k] = frac > 0.0 ? (1.0 - frac) * unit : 0.0;
    d.indicator[k] = loads[k] > 0.0 ? d.up[k] / loads[k] : kInf;
  }
  return d;
}

std::size_t select_roundup_set(const RoundingDeltas& deltas,
                               std::vector<std::size_t>* order) {
  const std::size_t K = deltas.up.size();
  std::vector<std::size_t> idx(K);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return deltas.indicator[a] < deltas.indicator[b];
  });

  double down_total = 0.0;
  for (double d : deltas.down) down_total += d;

  // Walk the cheapest-first order until the surplus covers the loss.
  double up_sum = 0.0;
  double down_kept = down_total;
  std::size_t count = 0;
  while (count < K && up_sum < down_kept) {
    const std::size_t k = idx[count];
    up_sum += deltas.up[k];
    down_kept -= deltas.down[k];
    ++count;
  }
  if (order) *order = std::move(idx);
  return count;
}

AllocationPlan apply_cnn_rounding(const AllocationPlan& relaxed, double unit,
                                  const std::vector<bool>& round_up) {
  if (round_up.size() != relaxed.num_workers())
    fail(ErrorCode::invalid_argument, "need one rounding choice per worker");
  if (!(unit > 0.0))
    fail(ErrorCode::invalid_argument, "granularity unit must be positive");

  AllocationPlan out = relaxed;
  double worst_stretch = 1.0;
  for (std::size_t k = 0; k < relaxed.num_workers(); ++k) {
    const double load = relaxed.worker_loads[k];
    std::uint64_t whole = 0;
    double frac = 0.0;
    split_units(load, unit, &whole, &frac);
    const std::uint64_t units = whole + ((round_up[k] && frac > 0.0) ? 1 : 0);
    const double snapped = static_cast<double>(units) * unit;
    out.worker_loads[k] = snapped;
    if (load <= 0.0) continue;
    const double factor = snapped / load;
    for (std::size_t n = 0; n < relaxed.num_subcarriers(); ++n)
      out.subcarrier_loads(k, n) = relaxed.subcarrier_loads(k, n) * factor;
    worst_stretch = std::max(worst_stretch, factor);
  }
  out.latency = relaxed.latency * worst_stretch;
  return out;
}

CnnRoundingPlan plan_cnn_round(const Scenario& s, const GranularitySpec& g,
                               const SolverOptions& opts) {
  g.validate();
  CnnRoundingPlan out;

  SolveResult relaxed = min_latency(s, g.total, opts);
  out.relaxed = round_subcarriers(relaxed, s, g.total, opts);
  out.relaxed_latency = out.relaxed.plan.latency;

  const std::vector<double>& loads = out.relaxed.plan.worker_loads;
  out.deltas = compute_rounding_deltas(loads, g.unit);

  std::vector<std::size_t> order;
  out.roundup_count = select_roundup_set(out.deltas, &order);

  std::vector<bool> round_up(loads.size(), false);
  out.cutoff = 0.0;
  for (std::size_t i = 0; i < out.roundup_count; ++i) {
    const std::size_t k = order[i];
    round_up[k] = true;
    if (out.deltas.up[k] > 0.0)
      out.cutoff = std::max(out.cutoff, out.deltas.indicator[k]);
  }

  out.plan = apply_cnn_rounding(out.relaxed.plan, g.unit, round_up);
  out.latency_bound = out.relaxed_latency * (1.0 + out.cutoff);
  out.plan.latency = out.latency_bound;

  out.units.resize(loads.size());
  double covered = 0.0;
  double largest = 0.0;
  for (std::size_t k = 0; k < loads.size(); ++k) {
    out.units[k] =
        static_cast<std::uint64_t>(std::llround(out.plan.worker_loads[k] / g.unit));
    covered += out.plan.worker_loads[k];
    largest = std::max(largest, loads[k]);
  }
  out.single_worker_fallback = g.unit > largest;
  if (covered + 1e-6 * std::max(g.total, 1.0) < g.total)
    fail(ErrorCode::infeasible,
         "granularity rounding lost coverage of the payload");
  return out;
}

}  // namespace partel
