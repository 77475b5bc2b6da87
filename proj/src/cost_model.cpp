#include "cost_model.hpp"

#include <algorithm>
#include <cmath>

namespace partel {

namespace {

void check_dims(const AllocationPlan& p, const Scenario& s) {
  const std::size_t K = s.num_workers();
  const std::size_t N = s.num_subcarriers();
  if (p.assignment.rows != K || p.assignment.cols != N ||
      !p.assignment.same_shape(p.subcarrier_loads) ||
      !p.assignment.same_shape(p.rates) || p.worker_loads.size() != K)
    fail(ErrorCode::invalid_argument,
         "plan dimensions do not match the scenario");
  // +inf is a legal latency (a plan that never finishes); NaN is not.
  if (!(p.latency >= 0.0))
    fail(ErrorCode::invalid_argument, "plan latency must be >= 0");
}

}  // namespace

double plan_total_load(const AllocationPlan& plan) {
  double sum = 0.0;
  for (double l : plan.worker_loads) sum += l;
  return sum;
}

WorkerLatency worker_latency(const AllocationPlan& plan, const Scenario& s,
                             std::size_t k) {
  check_dims(plan, s);
  if (k >= s.num_workers())
    fail(ErrorCode::invalid_argument, "worker index out of range");

  const double tau = s.config.bits_per_parameter;
  WorkerLatency out;
  out.compute = plan.worker_loads[k] / s.workers[k].compute_speed;
  out.upload_per_subcarrier.assign(s.num_subcarriers(), 0.0);
  for (std::size_t n = 0; n < s.num_subcarriers(); ++n) {
    if (plan.assignment(k, n) <= 0.0) continue;
    const double load = plan.subcarrier_loads(k, n);
    const double rate = plan.rates(k, n);
    if (load > 0.0 && rate <= 0.0)
      fail(ErrorCode::undefined_latency,
           "worker " + std::to_string(k) + " carries load on subcarrier " +
               std::to_string(n) + " at zero rate");
    if (load > 0.0) out.upload_per_subcarrier[n] = load * tau / rate;
    // Assigned but idle subcarriers upload nothing and take no time.
  }
  out.upload = 0.0;
  for (double t : out.upload_per_subcarrier) out.upload = std::max(out.upload, t);
  out.total = out.compute + out.upload;
  return out;
}

WorkerEnergy worker_energy(const AllocationPlan& plan, const Scenario& s,
                           std::size_t k) {
  check_dims(plan, s);
  if (k >= s.num_workers())
    fail(ErrorCode::invalid_argument, "worker index out of range");

  const auto& w = s.workers[k];
  const double B = s.config.subcarrier_bandwidth;
  const double tau = s.config.bits_per_parameter;
  const double sigma2 = s.config.noise_power;

  WorkerEnergy out;
  out.compute = w.power_factor * w.compute_speed * w.compute_speed *
                plan.worker_loads[k];
  out.power_per_subcarrier.assign(s.num_subcarriers(), 0.0);
  out.upload = 0.0;
  for (std::size_t n = 0; n < s.num_subcarriers(); ++n) {
    const double c = plan.assignment(k, n);
    const double load = plan.subcarrier_loads(k, n);
    const double rate = plan.rates(k, n);
    if (c <= 0.0 || rate <= 0.0 || load <= 0.0) continue;
    // Stored rates are effective (share-scaled); the radio itself signals at
    // rate/c for a c-fraction of the subcarrier, so the share-weighted
    // transmit power uses the physical rate. For binary assignments the two
    // coincide.
    const double physical_rate = rate / c;
    const double power =
        (std::exp2(physical_rate / B) - 1.0) * sigma2 / s.channels(k, n);
    const double upload_time = load * tau / rate;
    out.power_per_subcarrier[n] = c * power;
    out.upload += c * power * upload_time;
  }
  out.total = out.compute + out.upload + s.config.circuit_energy;
  return out;
}

ConstraintReport validate_plan(const AllocationPlan& plan, const Scenario& s,
                               std::optional<double> granularity,
                               double tolerance) {
  check_dims(plan, s);
  const std::size_t K = s.num_workers();
  const std::size_t N = s.num_subcarriers();
  const double T = plan.latency;

  ConstraintReport rep;
  rep.tolerance = tolerance;

  // Every subcarrier split exactly once, shares within [0, 1].
  double worst_assign = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    double col = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double c = plan.assignment(k, n);
      worst_assign = std::max(worst_assign, std::max(-c, c - 1.0));
      col += c;
    }
    worst_assign = std::max(worst_assign, std::abs(col - 1.0));
  }
  rep.assignment = {-worst_assign, 1.0};

  // Compute + upload finishes within the round on every used subcarrier.
  double worst_latency = 0.0;
  double worst_power = 0.0;
  double worst_upload = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const WorkerLatency lat = worker_latency(plan, s, k);
    for (std::size_t n = 0; n < N; ++n) {
      if (plan.assignment(k, n) <= 0.0 || plan.subcarrier_loads(k, n) <= 0.0)
        continue;
      worst_latency = std::max(
          worst_latency, lat.compute + lat.upload_per_subcarrier[n] - T);
    }
    if (plan.worker_loads[k] > 0.0)
      worst_latency = std::max(worst_latency, lat.compute - T);

    const WorkerEnergy en = worker_energy(plan, s, k);
    worst_power = std::max(worst_power,
                           en.total - s.workers[k].power_cap * T);

    double uploaded = 0.0;
    for (std::size_t n = 0; n < N; ++n)
      if (plan.assignment(k, n) > 0.0) uploaded += plan.subcarrier_loads(k, n);
    worst_upload = std::max(worst_upload, plan.worker_loads[k] - uploaded);
  }
  rep.latency = {-worst_latency, std::max(T, 1e-300)};

  const double L = static_cast<double>(s.config.model_size);
  rep.total_load = {plan_total_load(plan) - L, std::max(L, 1.0)};

  double load_scale = 1.0;
  for (double l : plan.worker_loads) load_scale = std::max(load_scale, l);
  rep.upload = {-worst_upload, load_scale};

  double power_scale = 0.0;
  for (const auto& w : s.workers)
    power_scale = std::max(power_scale, w.power_cap * std::max(T, 1e-300));
  rep.power = {-worst_power, std::max(power_scale, 1e-300)};

  if (granularity) {
    const double unit = *granularity;
    if (!(unit > 0.0))
      fail(ErrorCode::invalid_argument, "granularity must be positive");
    double worst = 0.0;
    for (double l : plan.worker_loads) {
      const double m = std::round(l / unit);
      worst = std::max(worst, std::abs(l - m * unit));
    }
    rep.granularity = ConstraintSlack{-worst, unit};
  }

  rep.worst_violation = 0.0;
  auto fold = [&rep](const ConstraintSlack& c) {
    rep.worst_violation = std::max(rep.worst_violation, -c.value / c.scale);
  };
  fold(rep.assignment);
  fold(rep.latency);
  fold(rep.total_load);
  fold(rep.upload);
  fold(rep.power);
  if (rep.granularity) fold(*rep.granularity);
  rep.feasible = rep.worst_violation <= tolerance;
  return rep;
}

}  // namespace partel
