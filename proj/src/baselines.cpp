#include "baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace partel {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<double> proportional_loads(const Scenario& s, double model_size) {
  s.validate();
  if (!(model_size >= 0.0) || !std::isfinite(model_size))
    fail(ErrorCode::invalid_argument, "model size must be finite and >= 0");
  const std::size_t K = s.num_workers();
  const double target = std::round(model_size);

  double speed_sum = 0.0;
  for (const auto& w : s.workers) speed_sum += w.compute_speed;

  std::vector<double> loads(K, 0.0);
  std::vector<std::pair<double, std::size_t>> fractions(K);
  double floor_sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double share = target * s.workers[k].compute_speed / speed_sum;
    loads[k] = std::floor(share);
    floor_sum += loads[k];
    fractions[k] = {share - loads[k], k};
  }
  // Largest remainders take the leftover parameters; ties to the lower index.
  std::stable_sort(fractions.begin(), fractions.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::size_t leftover = static_cast<std::size_t>(target - floor_sum);
  for (std::size_t i = 0; i < leftover; ++i) loads[fractions[i % K].second] += 1.0;
  return loads;
}

SolveResult proportional_baseline(const Scenario& s, double model_size,
                                  const SolverOptions& opts) {
  return resolve_with_fixed_loads(s, proportional_loads(s, model_size), opts);
}

SolveResult greedy_feel(const Scenario& s, double model_size,
                        const SolverOptions& opts, std::vector<GreedyStep>* trace) {
  s.validate();
  opts.validate();
  if (!(model_size > 0.0) || !std::isfinite(model_size))
    fail(ErrorCode::invalid_argument, "model size must be finite and positive");
  if (trace) trace->clear();

  const std::size_t K = s.num_workers();
  const std::size_t N = s.num_subcarriers();
  const double L = model_size;
  const double tau = s.config.bits_per_parameter;

  std::vector<double> compute_s(K), compute_e(K), latency(K, kInf);
  std::vector<std::vector<std::size_t>> owned(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& w = s.workers[k];
    const double shard = L / static_cast<double>(K);
    compute_s[k] = shard / w.compute_speed;
    compute_e[k] = w.power_factor * w.compute_speed * w.compute_speed * shard;
  }

  // Hand each subcarrier to whichever worker currently finishes last.
  for (std::size_t n = 0; n < N; ++n) {
    std::size_t pick = 0;
    for (std::size_t k = 1; k < K; ++k)
      if (latency[k] > latency[pick]) pick = k;
    owned[pick].push_back(n);
    latency[pick] = worker_min_latency(s, pick, owned[pick], L, compute_s[pick],
                                       compute_e[pick]);
    if (trace) trace->push_back({n, pick, latency[pick]});
  }

  SolveResult out;
  out.plan.assignment = Grid(K, N);
  out.plan.subcarrier_loads = Grid(K, N);
  out.plan.rates = Grid(K, N);
  out.plan.worker_loads.assign(K, L / static_cast<double>(K));
  out.plan.latency = *std::max_element(latency.begin(), latency.end());

  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t n : owned[k]) out.plan.assignment(k, n) = 1.0;
    if (!std::isfinite(latency[k])) continue;
    std::vector<double> rates;
    worker_min_latency(s, k, owned[k], L, compute_s[k], compute_e[k], &rates);
    const double window = latency[k] - compute_s[k];
    for (std::size_t i = 0; i < owned[k].size(); ++i) {
      if (rates[i] <= 0.0) continue;
      out.plan.rates(k, owned[k][i]) = rates[i];
      out.plan.subcarrier_loads(k, owned[k][i]) = rates[i] * window / tau;
    }
  }

  out.achieved_model_size = L;
  out.converged = std::isfinite(out.plan.latency);
  out.duals.lambda.assign(K, 0.0);
  out.duals.nu.assign(K, 0.0);
  out.duals.mu.assign(N, 0.0);
  out.duals.phi.assign(K, 0.0);
  out.duals.rtilde = out.plan.rates;
  return out;
}

}  // namespace partel
