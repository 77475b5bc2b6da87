#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "util.hpp"

namespace partel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct WorkerProblem {
  std::vector<double> gains;  // channels of the owned subcarriers
  double tau, B, sigma2, xi;
  const WorkerProfile* w;
};

// Total throughput and transmit power as functions of the water level.
double level_throughput(const std::vector<double>& gains, double sigma2,
                        double B, double level) {
  double thr = 0.0;
  for (double h : gains) {
    const double x = level * h / sigma2;
    if (x > 1.0) thr += B * std::log2(x);
  }
  return thr;
}

double level_power(const std::vector<double>& gains, double sigma2,
                   double level) {
  double p = 0.0;
  for (double h : gains) p += std::max(0.0, level - sigma2 / h);
  return p;
}

// Cheapest total power delivering `target` bits/s: walk a log grid of water
// levels until the throughput crosses the target, then bisect the bracket.
double oracle_min_power(const WorkerProblem& wp, double target,
                        const OracleGrids& grids,
                        std::vector<double>* rates = nullptr) {
  if (rates) rates->assign(wp.gains.size(), 0.0);
  if (target <= 0.0) return 0.0;
  if (wp.gains.empty()) return kInf;

  double best_floor = kInf;
  for (double h : wp.gains) best_floor = std::min(best_floor, wp.sigma2 / h);
  double lo = best_floor;
  double hi = best_floor * std::exp2(std::min(target / wp.B, 1020.0));
  if (!std::isfinite(hi)) return kInf;

  const std::size_t R = std::max<std::size_t>(grids.rate_resolution, 2);
  const double step = std::pow(hi / lo, 1.0 / static_cast<double>(R - 1));
  double prev = lo;
  for (std::size_t i = 1; i < R; ++i) {
    const double w = lo * std::pow(step, static_cast<double>(i));
    if (level_throughput(wp.gains, wp.sigma2, wp.B, w) >= target || i == R - 1) {
      lo = prev;
      hi = w;
      break;
    }
    prev = w;
  }
  while (hi - lo > grids.bisection_tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    (level_throughput(wp.gains, wp.sigma2, wp.B, mid) >= target ? hi : lo) =
        mid;
  }
  if (rates)
    for (std::size_t i = 0; i < wp.gains.size(); ++i) {
      const double x = hi * wp.gains[i] / wp.sigma2;
      (*rates)[i] = x > 1.0 ? wp.B * std::log2(x) : 0.0;
    }
  return level_power(wp.gains, wp.sigma2, hi);
}

bool worker_feasible(const WorkerProblem& wp, double load, double T,
                     const OracleGrids& grids) {
  const double f = wp.w->compute_speed;
  const double compute_e = wp.w->power_factor * f * f * load;
  if (load <= 0.0) return wp.xi <= wp.w->power_cap * T;
  const double window = T - load / f;
  if (window <= 0.0) return false;
  const double power =
      oracle_min_power(wp, load * wp.tau / window, grids, nullptr);
  if (!std::isfinite(power)) return false;
  return compute_e + power * window + wp.xi <= wp.w->power_cap * T;
}

double oracle_worker_min_time(const WorkerProblem& wp, double load,
                              const OracleGrids& grids) {
  const double f = wp.w->compute_speed;
  const double compute_e = wp.w->power_factor * f * f * load;
  double lo = std::max((compute_e + wp.xi) / wp.w->power_cap, load / f);
  if (load <= 0.0) return lo;
  if (wp.gains.empty()) return kInf;

  double hi = std::max(lo * 1.0625, lo + 1e-9);
  std::size_t guard = 0;
  while (!worker_feasible(wp, load, hi, grids)) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 300 || !std::isfinite(hi)) return kInf;
  }
  while (hi - lo > grids.bisection_tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    (worker_feasible(wp, load, mid, grids) ? hi : lo) = mid;
  }
  return hi;
}

double oracle_worker_max_load(const WorkerProblem& wp, double T,
                              const OracleGrids& grids) {
  if (!worker_feasible(wp, 0.0, T, grids)) return -kInf;  // deadline unusable
  if (wp.gains.empty()) return 0.0;
  double lo = 0.0;
  double hi = wp.w->compute_speed * T;
  if (worker_feasible(wp, hi, T, grids)) return hi;  // cannot happen: W = 0
  while (hi - lo > grids.bisection_tolerance * std::max(hi, 1.0)) {
    const double mid = 0.5 * (lo + hi);
    (worker_feasible(wp, mid, T, grids) ? lo : hi) = mid;
  }
  return lo;
}

WorkerProblem make_problem(const Scenario& s, std::size_t k,
                           std::uint32_t mask) {
  WorkerProblem wp;
  wp.tau = s.config.bits_per_parameter;
  wp.B = s.config.subcarrier_bandwidth;
  wp.sigma2 = s.config.noise_power;
  wp.xi = s.config.circuit_energy;
  wp.w = &s.workers[k];
  for (std::size_t n = 0; n < s.num_subcarriers(); ++n)
    if (mask & (1u << n)) wp.gains.push_back(s.channels(k, n));
  return wp;
}

void check_enumerable(const Scenario& s, const OracleGrids& grids) {
  s.validate();
  grids.validate();
  if (s.num_workers() > grids.max_workers ||
      s.num_subcarriers() > grids.max_subcarriers)
    fail(ErrorCode::enumeration_bound,
         "instance too large for exhaustive enumeration");
}

// All ways to hand N columns to K workers, as per-worker column masks.
std::vector<std::vector<std::uint32_t>> all_assignments(std::size_t K,
                                                        std::size_t N) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::size_t> owner(N, 0);
  while (true) {
    std::vector<std::uint32_t> masks(K, 0);
    for (std::size_t n = 0; n < N; ++n)
      masks[owner[n]] |= (1u << n);
    out.push_back(std::move(masks));
    std::size_t n = 0;
    while (n < N && ++owner[n] == K) owner[n++] = 0;
    if (n == N) break;
  }
  return out;
}

// All splits of `resolution` grid steps over K workers.
void for_each_split(std::size_t K, std::size_t resolution,
                    std::vector<std::size_t>& parts, std::size_t at,
                    std::size_t left, const auto& visit) {
  if (at + 1 == K) {
    parts[at] = left;
    visit(parts);
    return;
  }
  for (std::size_t m = 0; m <= left; ++m) {
    parts[at] = m;
    for_each_split(K, resolution, parts, at + 1, left - m, visit);
  }
}

AllocationPlan witness_plan(const Scenario& s,
                            const std::vector<std::uint32_t>& masks,
                            const std::vector<double>& loads, double T,
                            const OracleGrids& grids) {
  const std::size_t K = s.num_workers(), N = s.num_subcarriers();
  AllocationPlan plan;
  plan.assignment = Grid(K, N);
  plan.subcarrier_loads = Grid(K, N);
  plan.rates = Grid(K, N);
  plan.worker_loads = loads;
  plan.latency = T;
  for (std::size_t k = 0; k < K; ++k) {
    WorkerProblem wp = make_problem(s, k, masks[k]);
    std::vector<std::size_t> cols;
    for (std::size_t n = 0; n < N; ++n)
      if (masks[k] & (1u << n)) plan.assignment(k, n) = 1.0, cols.push_back(n);
    if (loads[k] <= 0.0) continue;
    const double t_k = oracle_worker_min_time(wp, loads[k], grids);
    const double window = t_k - loads[k] / s.workers[k].compute_speed;
    std::vector<double> rates;
    oracle_min_power(wp, loads[k] * wp.tau / window, grids, &rates);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (rates[i] <= 0.0) continue;
      plan.rates(k, cols[i]) = rates[i];
      plan.subcarrier_loads(k, cols[i]) = rates[i] * window / wp.tau;
    }
  }
  return plan;
}

}  // namespace

void OracleGrids::validate() const {
  if (load_resolution < 1 || rate_resolution < 2 ||
      !(bisection_tolerance > 0.0) || max_workers == 0 ||
      max_subcarriers == 0 || max_subcarriers > 30)
    fail(ErrorCode::invalid_argument, "oracle grids out of range");
}

OracleResult brute_force_min_latency(const Scenario& s, double model_size,
                                     const OracleGrids& grids) {
  check_enumerable(s, grids);
  if (!(model_size > 0.0))
    fail(ErrorCode::invalid_argument, "model size must be positive");

  const std::size_t K = s.num_workers(), N = s.num_subcarriers();
  const std::size_t R = grids.load_resolution;

  // Worker subproblems depend only on (worker, mask, load step); cache them.
  std::vector<double> memo(K * (1u << N) * (R + 1),
                           std::numeric_limits<double>::quiet_NaN());
  OracleResult out;
  out.latency = kInf;
  auto lookup = [&](std::size_t k, std::uint32_t mask,
                    std::size_t m) -> double {
    double& slot = memo[(k * (1u << N) + mask) * (R + 1) + m];
    if (std::isnan(slot)) {
      WorkerProblem wp = make_problem(s, k, mask);
      slot = oracle_worker_min_time(
          wp, model_size * static_cast<double>(m) / static_cast<double>(R),
          grids);
      ++out.evaluations;
    }
    return slot;
  };

  std::vector<std::uint32_t> best_masks;
  std::vector<std::size_t> best_split;
  std::vector<std::size_t> parts(K, 0);
  for (const auto& masks : all_assignments(K, N)) {
    for_each_split(K, R, parts, 0, R, [&](const std::vector<std::size_t>& m) {
      double t = 0.0;
      for (std::size_t k = 0; k < K && t < out.latency; ++k)
        t = std::max(t, lookup(k, masks[k], m[k]));
      if (t < out.latency) {
        out.latency = t;
        best_masks = masks;
        best_split = m;
      }
    });
  }
  if (!std::isfinite(out.latency))
    fail(ErrorCode::infeasible, "no enumerated plan meets the constraints");

  std::vector<double> loads(K, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    loads[k] = model_size * static_cast<double>(best_split[k]) /
               static_cast<double>(R);
  out.witness = witness_plan(s, best_masks, loads, out.latency, grids);
  return out;
}

OracleResult refined_min_latency(const Scenario& s, double model_size,
                                 const OracleGrids& grids,
                                 double relative_change,
                                 std::size_t max_rounds) {
  OracleGrids g = grids;
  OracleResult prev = brute_force_min_latency(s, model_size, g);
  for (std::size_t round = 1; round < max_rounds; ++round) {
    g.load_resolution *= 2;
    g.rate_resolution *= 2;
    OracleResult next = brute_force_min_latency(s, model_size, g);
    next.evaluations += prev.evaluations;
    const double change =
        std::abs(next.latency - prev.latency) / std::max(prev.latency, 1e-300);
    prev = std::move(next);
    if (change < relative_change) break;
  }
  return prev;
}

OracleResult brute_force_max_model_size(const Scenario& s, double deadline,
                                        const OracleGrids& grids) {
  check_enumerable(s, grids);
  if (!(deadline > 0.0))
    fail(ErrorCode::invalid_argument, "deadline must be positive");

  const std::size_t K = s.num_workers(), N = s.num_subcarriers();
  std::vector<double> memo(K * (1u << N),
                           std::numeric_limits<double>::quiet_NaN());
  OracleResult out;
  auto lookup = [&](std::size_t k, std::uint32_t mask) -> double {
    double& slot = memo[k * (1u << N) + mask];
    if (std::isnan(slot)) {
      WorkerProblem wp = make_problem(s, k, mask);
      slot = oracle_worker_max_load(wp, deadline, grids);
      ++out.evaluations;
    }
    return slot;
  };

  double best = -kInf;
  std::vector<std::uint32_t> best_masks;
  for (const auto& masks : all_assignments(K, N)) {
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double l = lookup(k, masks[k]);
      if (!std::isfinite(l)) {
        total = -kInf;
        break;
      }
      total += l;
    }
    if (total > best) {
      best = total;
      best_masks = masks;
    }
  }
  if (!std::isfinite(best))
    fail(ErrorCode::infeasible, "deadline infeasible for every assignment");

  std::vector<double> loads(K, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    loads[k] = lookup(k, best_masks[k]);
  out.latency = deadline;
  out.witness = witness_plan(s, best_masks, loads, deadline, grids);
  // Achieved size is what the witness actually carries.
  return out;
}

ConvexityProbeResult convexity_probe(std::uint64_t seed, std::size_t samples,
                                     double tolerance, double power_sign) {
  RandomStream rng(seed, 0x434f4e56 /* "CONV" */);
  ConvexityProbeResult out;
  out.samples = samples;

  for (std::size_t i = 0; i < samples; ++i) {
    // One random bits-per-second-per-Hz coefficient and noise floor, two
    // points in (load, window) space, one midpoint.
    const double coeff =
        std::exp(rng.next_uniform(std::log(1e-5), std::log(8.0)));
    const double invq = std::exp(rng.next_uniform(std::log(1e-4),
                                                  std::log(10.0)));
    auto draw_point = [&](double* load, double* window) {
      *window = std::exp(rng.next_uniform(std::log(1e-3), std::log(1e2)));
      const double exponent = rng.next_uniform(0.0, 30.0);
      *load = exponent * *window / coeff;
    };
    double la, wa, lb, wb;
    draw_point(&la, &wa);
    draw_point(&lb, &wb);
    const double t = rng.next_uniform(0.05, 0.95);

    auto energy = [&](double l, double w) {
      return power_sign * w * (std::exp2(l * coeff / w) - 1.0) * invq;
    };
    const double chord = t * energy(la, wa) + (1.0 - t) * energy(lb, wb);
    const double mid =
        energy(t * la + (1.0 - t) * lb, t * wa + (1.0 - t) * wb);
    const double slack = chord - mid;  // >= 0 when convex
    const double scale = std::max(1.0, std::abs(chord));
    if (slack < -tolerance * scale) {
      ++out.violations;
      out.worst_violation = std::min(out.worst_violation, slack / scale);
    }
  }
  return out;
}

}  // namespace partel
