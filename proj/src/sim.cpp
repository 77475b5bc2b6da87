#include "sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "baselines.hpp"

namespace partel {

namespace {

constexpr std::uint64_t kTagTruth = 0x54525554;    // "TRUT"
constexpr std::uint64_t kTagFeatures = 0x46454154; // "FEAT"
constexpr std::uint64_t kTagNoise = 0x4e4f4953;    // "NOIS"
constexpr std::uint64_t kTagRedraw = 0x52445257;   // "RDRW"

double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Per-sample chain factor: d(loss_m)/d(z_m) for the squared-error data term.
void residual_factors(const SyntheticDataset& data,
                      const std::vector<double>& w, InferenceKind kind,
                      std::vector<double>* factors, double* data_loss) {
  const std::size_t M = data.num_samples();
  const std::size_t L = data.num_features();
  factors->resize(M);
  double loss = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    double z = 0.0;
    const double* row = &data.features.v[m * L];
    for (std::size_t j = 0; j < L; ++j) z += row[j] * w[j];
    double phi = z, slope = 1.0;
    if (kind == InferenceKind::logistic) {
      phi = sigmoid(z);
      slope = phi * (1.0 - phi);
    }
    const double err = phi - data.targets[m];
    loss += err * err;
    (*factors)[m] = err * slope / static_cast<double>(M);
  }
  if (data_loss) *data_loss = 0.5 * loss / static_cast<double>(M);
}

// Gradient restricted to coordinates [begin, end); accumulation order over
// samples matches the centralized pass coordinate for coordinate.
void block_gradient(const SyntheticDataset& data,
                    const std::vector<double>& factors, std::size_t begin,
                    std::size_t end, std::vector<double>* grad) {
  const std::size_t L = data.num_features();
  for (std::size_t m = 0; m < data.num_samples(); ++m) {
    const double f = factors[m];
    const double* row = &data.features.v[m * L];
    for (std::size_t j = begin; j < end; ++j) (*grad)[j] += f * row[j];
  }
}

void prox_step(std::vector<double>* w, const std::vector<double>& grad,
               double step, Regularizer reg, double rho) {
  for (std::size_t j = 0; j < w->size(); ++j) {
    const double v = (*w)[j] - step * grad[j];
    if (reg == Regularizer::l1) {
      const double shrink = step * rho;
      (*w)[j] = std::copysign(std::max(0.0, std::abs(v) - shrink), v);
    } else {
      (*w)[j] = v / (1.0 + step * rho);
    }
  }
}

double penalty(const std::vector<double>& w, Regularizer reg, double rho) {
  double p = 0.0;
  for (double x : w) p += reg == Regularizer::l1 ? std::abs(x) : 0.5 * x * x;
  return rho * p;
}

double step_size(const SyntheticDataset& data) {
  double worst = 0.0;
  const std::size_t L = data.num_features();
  for (std::size_t m = 0; m < data.num_samples(); ++m) {
    double norm2 = 0.0;
    const double* row = &data.features.v[m * L];
    for (std::size_t j = 0; j < L; ++j) norm2 += row[j] * row[j];
    worst = std::max(worst, norm2);
  }
  return 0.1 / std::max(worst, 1e-12);
}

// Contiguous coordinate blocks with the given sizes (sum <= L; the tail,
// if any, joins the last block so every coordinate has an owner).
std::vector<std::pair<std::size_t, std::size_t>> coordinate_blocks(
    const std::vector<double>& sizes, std::size_t L) {
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  std::size_t at = 0;
  for (double s : sizes) {
    const std::size_t len = std::min(
        static_cast<std::size_t>(std::llround(std::max(s, 0.0))), L - at);
    blocks.push_back({at, at + len});
    at += len;
  }
  if (!blocks.empty()) blocks.back().second = L;
  return blocks;
}

// Even sample shards, remainder to the earlier workers.
std::vector<std::pair<std::size_t, std::size_t>> sample_shards(std::size_t M,
                                                               std::size_t K) {
  std::vector<std::pair<std::size_t, std::size_t>> shards;
  const std::size_t base = M / K, extra = M % K;
  std::size_t at = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t len = base + (k < extra ? 1 : 0);
    shards.push_back({at, at + len});
    at += len;
  }
  return shards;
}

Scenario redraw_scenario(const Scenario& s, std::size_t round) {
  Scenario fresh = s;
  const double mean = DistributionSpec::defaults().path_loss;
  for (std::size_t k = 0; k < s.num_workers(); ++k)
    for (std::size_t n = 0; n < s.num_subcarriers(); ++n) {
      const double u = uniform01(
          mix_key(s.seed ^ (kTagRedraw + round), kTagRedraw, k, n));
      double h = -mean * std::log1p(-u);
      if (h <= 0.0) h = mean * 0x1.0p-54;
      fresh.channels(k, n) = h;
    }
  return fresh;
}

double plan_round_cost(const Scenario& s, double model_size,
                       PlannerKind planner, const SolverOptions& opts) {
  switch (planner) {
    case PlannerKind::joint: {
      SolveResult relaxed = min_latency(s, model_size, opts);
      SolveResult binary = round_subcarriers(relaxed, s, model_size, opts);
      AllocationPlan whole = integerize_loads(
          binary.plan, s, static_cast<std::uint64_t>(std::llround(model_size)));
      return whole.latency;
    }
    case PlannerKind::proportional:
      return proportional_baseline(s, model_size, opts).plan.latency;
    case PlannerKind::greedy:
      return greedy_feel(s, model_size, opts).plan.latency;
  }
  fail(ErrorCode::invalid_argument, "unknown planner");
}

// Block layout the planner implies; greedy has none (it shards samples).
std::vector<double> planner_block_sizes(const Scenario& s, double model_size,
                                        PlannerKind planner,
                                        const SolverOptions& opts) {
  switch (planner) {
    case PlannerKind::joint: {
      SolveResult relaxed = min_latency(s, model_size, opts);
      SolveResult binary = round_subcarriers(relaxed, s, model_size, opts);
      AllocationPlan whole = integerize_loads(
          binary.plan, s, static_cast<std::uint64_t>(std::llround(model_size)));
      return whole.worker_loads;
    }
    case PlannerKind::proportional:
      return proportional_loads(s, model_size);
    case PlannerKind::greedy:
      return {};
  }
  fail(ErrorCode::invalid_argument, "unknown planner");
}

}  // namespace

const char* planner_name(PlannerKind p) {
  switch (p) {
    case PlannerKind::joint: return "joint";
    case PlannerKind::proportional: return "proportional";
    case PlannerKind::greedy: return "greedy";
  }
  return "unknown";
}

SyntheticDataset make_synthetic_dataset(std::size_t num_samples,
                                        std::size_t num_features,
                                        InferenceKind kind, double sparsity,
                                        double noise, std::uint64_t seed) {
  if (num_samples == 0 || num_features == 0)
    fail(ErrorCode::invalid_argument, "dataset dimensions must be positive");
  if (!(sparsity >= 0.0) || sparsity > 1.0)
    fail(ErrorCode::invalid_argument, "sparsity must lie in [0, 1]");

  SyntheticDataset data;
  data.features = Grid(num_samples, num_features);
  data.targets.resize(num_samples);
  data.ground_truth.assign(num_features, 0.0);

  RandomStream truth(seed, kTagTruth);
  for (std::size_t j = 0; j < num_features; ++j)
    if (truth.next_uniform01() < sparsity)
      data.ground_truth[j] = truth.next_gaussian();

  // Rows scaled so squared norms hover near 1 and the step near 0.1.
  RandomStream feat(seed, kTagFeatures);
  const double scale = 1.0 / std::sqrt(static_cast<double>(num_features));
  for (double& x : data.features.v) x = scale * feat.next_gaussian();

  RandomStream noise_stream(seed, kTagNoise);
  for (std::size_t m = 0; m < num_samples; ++m) {
    double z = 0.0;
    const double* row = &data.features.v[m * num_features];
    for (std::size_t j = 0; j < num_features; ++j)
      z += row[j] * data.ground_truth[j];
    const double clean = kind == InferenceKind::logistic ? sigmoid(z) : z;
    data.targets[m] = clean + noise * noise_stream.next_gaussian();
  }
  return data;
}

double objective(const SyntheticDataset& data, const std::vector<double>& w,
                 InferenceKind kind, Regularizer reg, double reg_strength) {
  std::vector<double> factors;
  double data_loss = 0.0;
  residual_factors(data, w, kind, &factors, &data_loss);
  return data_loss + penalty(w, reg, reg_strength);
}

SimResult run_partel(const Scenario& s, const SyntheticDataset& data,
                     PlannerKind planner, const SimOptions& opts) {
  s.validate();
  opts.solver.validate();
  const std::size_t L = data.num_features();
  const std::size_t M = data.num_samples();
  const double model_size = static_cast<double>(L);

  double fixed_cost = 0.0;
  std::vector<double> block_sizes;
  if (!opts.redraw_channels) {
    fixed_cost = plan_round_cost(s, model_size, planner, opts.solver);
    block_sizes = planner_block_sizes(s, model_size, planner, opts.solver);
  }

  SimResult out;
  out.trace.scheme = planner_name(planner);
  out.trace.seed = s.seed;
  out.weights.assign(L, 0.0);

  const double step = step_size(data);
  std::vector<double> factors, grad(L, 0.0);
  double cumulative = 0.0;

  for (std::size_t round = 1; round <= opts.rounds; ++round) {
    double cost = fixed_cost;
    std::vector<double> sizes = block_sizes;
    if (opts.redraw_channels) {
      const Scenario fresh = redraw_scenario(s, round);
      cost = plan_round_cost(fresh, model_size, planner, opts.solver);
      sizes = planner_block_sizes(fresh, model_size, planner, opts.solver);
    }

    residual_factors(data, out.weights, opts.kind, &factors, nullptr);
    std::fill(grad.begin(), grad.end(), 0.0);
    if (planner == PlannerKind::greedy) {
      // Sample-parallel: shard partial gradients, then reduce.
      for (const auto& [lo, hi] : sample_shards(M, s.num_workers())) {
        std::vector<double> partial(L, 0.0);
        for (std::size_t m = lo; m < hi; ++m) {
          const double f = factors[m];
          const double* row = &data.features.v[m * L];
          for (std::size_t j = 0; j < L; ++j) partial[j] += f * row[j];
        }
        for (std::size_t j = 0; j < L; ++j) grad[j] += partial[j];
      }
    } else {
      // Coordinate-parallel: every block from the same iterate.
      for (const auto& [lo, hi] : coordinate_blocks(sizes, L))
        block_gradient(data, factors, lo, hi, &grad);
    }

    prox_step(&out.weights, grad, step, opts.reg, opts.reg_strength);
    cumulative += cost;
    out.trace.rounds.push_back(
        {round, cost, cumulative,
         objective(data, out.weights, opts.kind, opts.reg,
                   opts.reg_strength)});
  }
  return out;
}

std::vector<double> centralized_reference(const SyntheticDataset& data,
                                          const SimOptions& opts) {
  const std::size_t L = data.num_features();
  std::vector<double> w(L, 0.0), factors, grad(L, 0.0);
  const double step = step_size(data);
  for (std::size_t round = 1; round <= opts.rounds; ++round) {
    residual_factors(data, w, opts.kind, &factors, nullptr);
    std::fill(grad.begin(), grad.end(), 0.0);
    block_gradient(data, factors, 0, L, &grad);
    prox_step(&w, grad, step, opts.reg, opts.reg_strength);
  }
  return w;
}

}  // namespace partel
