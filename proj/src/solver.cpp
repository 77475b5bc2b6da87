#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace partel {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Dual-ascent rates halve on stalled phases down to initial/kRateHalvings.
constexpr double kRateHalvings = 16.0;

double circuit_floor(const Scenario& s) {
  double t = 0.0;
  for (const auto& w : s.workers)
    t = std::max(t, s.config.circuit_energy / w.power_cap);
  return t;
}

// Per-scenario constants the inner loop reads every iteration.
struct CellTables {
  std::size_t K = 0, N = 0;
  std::vector<double> q;       // h / sigma2, 1/W
  std::vector<double> log2q;
  std::vector<double> invq;    // sigma2 / h, W

  explicit CellTables(const Scenario& s)
      : K(s.num_workers()), N(s.num_subcarriers()) {
    q.resize(K * N);
    log2q.resize(K * N);
    invq.resize(K * N);
    for (std::size_t i = 0; i < K * N; ++i) {
      q[i] = s.channels.v[i] / s.config.noise_power;
      log2q[i] = std::log2(q[i]);
      invq[i] = 1.0 / q[i];
    }
  }
};

// Scratch reused across iterations of one ascent.
struct Workspace {
  std::vector<double> rate;       // physical R*, per cell
  std::vector<double> indicator;  // per cell
  std::vector<double> share;      // ownership C, per cell
  std::vector<double> capacity;   // A_k = sum rtilde / tau
  std::vector<double> tx_power;   // Q_k = share-weighted transmit power
  std::vector<double> load;       // stationary block size at current prices
  std::vector<double> window;
  std::vector<double> phi;
  std::vector<double> mu;         // column-min indicator

  void resize(std::size_t K, std::size_t N) {
    rate.assign(K * N, 0.0);
    indicator.assign(K * N, 0.0);
    share.assign(K * N, 0.0);
    capacity.assign(K, 0.0);
    tx_power.assign(K, 0.0);
    load.assign(K, 0.0);
    window.assign(K, 0.0);
    phi.assign(K, 0.0);
    mu.assign(N, 0.0);
  }
};

// Stationary block size and upload window for one worker at prices
// (lambda, nu). The discriminant collects the marginal prices of deadline,
// compute energy and the energy budget refund; a negative value means the
// prices do not bound the load yet, which the ascent treats as load 0 and
// lets the price updates recover.
void stationary_load(double T, double lambda, double nu,
                     const WorkerProfile& w, double xi, double window_floor,
                     double* load, double* window) {
  const double f = w.compute_speed;
  const double disc = lambda * T + nu * w.power_factor * f * f * T -
                      nu * (w.power_cap * T - xi) / f;
  if (disc < 0.0) {
    *load = 0.0;
    *window = T;
    return;
  }
  double win = std::sqrt(disc);
  if (win >= T) {
    *load = 0.0;
    *window = T;
    return;
  }
  win = std::max(win, window_floor * T);
  *window = win;
  *load = f * (T - win);
}

// Rates, scores and ownership for all cells at the current prices, plus the
// stationary loads and windows the rates hang off (frozen windows can be
// supplied instead, for probes that pin the block sizes). Rows with a fixed
// assignment skip the ownership step.
//
// When a worker's energy price sits on its projection floor, the stationary
// water level is fictitious (the projection is active), and its implied bid
// would be an unbounded score the feasibility repair always rejects. Those
// ghost bids can capture every column and wedge the ascent when workers
// contend for scarce spectrum. For exactly that case the cell's operating
// point is ceilinged at the power the worker's whole budget could pour into
// the one channel over its window; away from the floor the stationary bid is
// the exact dual derivative and is left alone.
void price_cells(const Scenario& s, const CellTables& tab, double T,
                 const std::vector<double>& lambda,
                 const std::vector<double>& nu, const Grid* fixed_assignment,
                 const std::vector<double>* frozen_windows,
                 const SolverOptions& opts, Workspace* ws) {
  const std::size_t K = tab.K, N = tab.N;
  const double B = s.config.subcarrier_bandwidth;
  const double tau = s.config.bits_per_parameter;
  const double xi = s.config.circuit_energy;

  for (std::size_t k = 0; k < K; ++k) {
    double window = T;
    if (frozen_windows) {
      window = (*frozen_windows)[k];
    } else {
      stationary_load(T, lambda[k], nu[k], s.workers[k], xi, opts.window_floor,
                      &ws->load[k], &ws->window[k]);
      window = ws->window[k];
      ws->phi[k] = 1.0 / window;
    }
    const double power_ceiling = (s.workers[k].power_cap * T - xi) / window;
    const bool cap_bids = nu[k] <= opts.nu_floor * (1.0 + 1e-9);

    const double level = lambda[k] * B / (nu[k] * tau * kLn2);
    const double log2level = level > 0.0 ? std::log2(level) : -kInf;
    const std::size_t row = k * N;
    for (std::size_t n = 0; n < N; ++n) {
      double x = level * tab.q[row + n];
      const double x_cap = 1.0 + power_ceiling * tab.q[row + n];
      const bool capped = cap_bids && x > x_cap;
      if (capped) x = x_cap;
      if (x <= 1.0) {
        ws->rate[row + n] = 0.0;
        ws->indicator[row + n] = 0.0;
      } else if (capped) {
        // Off the stationary point the score must keep its general form,
        // energy cost minus deadline value; the stationary simplification
        // below would drop the value term and the bid with it.
        const double log2x = std::log2(x);
        ws->rate[row + n] = B * log2x;
        ws->indicator[row + n] = nu[k] * tab.invq[row + n] * (x - 1.0) -
                                 lambda[k] * B * log2x / tau;
      } else {
        const double log2x = log2level + tab.log2q[row + n];
        ws->rate[row + n] = B * log2x;
        ws->indicator[row + n] =
            nu[k] * tab.invq[row + n] * ((x - 1.0) - x * (kLn2 * log2x));
      }
    }
  }

  if (fixed_assignment) {
    std::copy(fixed_assignment->v.begin(), fixed_assignment->v.end(),
              ws->share.begin());
    for (std::size_t n = 0; n < N; ++n) {
      double m = 0.0;
      for (std::size_t k = 0; k < K; ++k)
        m = std::min(m, ws->indicator[k * N + n]);
      ws->mu[n] = m;
    }
  } else {
    // Each column goes to its lowest score; exact ties share evenly.
    for (std::size_t n = 0; n < N; ++n) {
      double best = kInf;
      std::size_t ties = 0;
      for (std::size_t k = 0; k < K; ++k) {
        const double v = ws->indicator[k * N + n];
        if (v < best) {
          best = v;
          ties = 1;
        } else if (v == best) {
          ++ties;
        }
      }
      ws->mu[n] = best;
      const double share = 1.0 / static_cast<double>(ties);
      for (std::size_t k = 0; k < K; ++k)
        ws->share[k * N + n] = (ws->indicator[k * N + n] == best) ? share : 0.0;
    }
  }

  for (std::size_t k = 0; k < K; ++k) {
    double cap = 0.0, power = 0.0;
    const std::size_t row = k * N;
    for (std::size_t n = 0; n < N; ++n) {
      const double c = ws->share[row + n];
      if (c <= 0.0 || ws->rate[row + n] <= 0.0) continue;
      cap += c * ws->rate[row + n];
      // (x - 1) * sigma2 / h is the physical transmit power on the cell.
      const double x_minus_1 =
          std::exp2(ws->rate[row + n] / B) - 1.0;
      power += c * x_minus_1 * tab.invq[row + n];
    }
    ws->capacity[k] = cap / tau;
    ws->tx_power[k] = power;
  }
}

// Largest block a worker can actually finish at deadline T given the rates it
// currently holds: the binding caps are the upload identity and the energy
// budget, both linear in the load once the rates are frozen. Returns 0 and
// sets *usable=false when even an empty block cannot pay for the radio time.
double feasible_load_cap(const WorkerProfile& w, double T, double xi,
                         double capacity, double tx_power, double window_floor,
                         bool* usable) {
  *usable = true;
  if (capacity <= 0.0) return 0.0;
  const double f = w.compute_speed;
  const double upload_cap = capacity * T * f / (f + capacity);
  const double window_cap = f * T * (1.0 - window_floor);
  double cap = std::min(upload_cap, window_cap);

  // Energy: g f^2 L + Q (T - L/f) + xi <= P T.
  const double a = w.power_factor * f * f - tx_power / f;
  const double rhs = w.power_cap * T - xi - tx_power * T;
  if (a > 0.0) {
    if (rhs < 0.0) {
      *usable = false;
      return 0.0;
    }
    cap = std::min(cap, rhs / a);
  } else if (rhs < 0.0) {
    // Budget only met at large loads (cheap compute, hot radio).
    const double need = rhs / a;  // a <= 0, rhs < 0: positive lower bound
    if (a == 0.0 || cap < need) {
      *usable = false;
      return 0.0;
    }
  }
  return std::max(cap, 0.0);
}

// The ascent can leave a worker holding rate-bearing columns while its own
// repaired load is zero, typically because its water level would spend the
// whole power budget on radio time. Those columns are pure waste, so at plan
// assembly each one is handed to the worker whose feasible load grows most
// from taking it; accepting only strict gains keeps the repaired total
// monotone. Donors are re-checked after each move since shedding radio cost
// can make their remaining columns affordable.
void polish_columns(const Scenario& s, const CellTables& tab, double T,
                    const SolverOptions& opts, Workspace* ws) {
  const std::size_t K = tab.K, N = tab.N;
  const double xi = s.config.circuit_energy;
  const double tau = s.config.bits_per_parameter;
  const double B = s.config.subcarrier_bandwidth;

  std::vector<double> cap(K);
  auto recap = [&](std::size_t k) {
    bool usable = true;
    cap[k] = feasible_load_cap(s.workers[k], T, xi, ws->capacity[k],
                               ws->tx_power[k], opts.window_floor, &usable);
  };
  for (std::size_t k = 0; k < K; ++k) recap(k);

  for (std::size_t pass = 0; pass < K; ++pass) {
    bool moved = false;
    for (std::size_t k = 0; k < K; ++k) {
      if (cap[k] > 0.0 || ws->capacity[k] <= 0.0) continue;
      for (std::size_t n = 0; n < N && cap[k] <= 0.0; ++n) {
        const double share = ws->share[k * N + n];
        const double donor_rate = ws->rate[k * N + n];
        if (share <= 0.0 || donor_rate <= 0.0) continue;
        std::size_t to = K;
        double gain = 0.0, to_cap = 0.0, to_capacity = 0.0, to_power = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
          if (j == k || cap[j] <= 0.0) continue;
          const double r = ws->rate[j * N + n];
          if (r <= 0.0) continue;
          const double c2 = ws->capacity[j] + share * r / tau;
          const double q2 =
              ws->tx_power[j] +
              share * (std::exp2(r / B) - 1.0) * tab.invq[j * N + n];
          bool usable = true;
          const double c_new = feasible_load_cap(s.workers[j], T, xi, c2, q2,
                                                 opts.window_floor, &usable);
          if (c_new - cap[j] > gain) {
            gain = c_new - cap[j];
            to = j;
            to_cap = c_new;
            to_capacity = c2;
            to_power = q2;
          }
        }
        if (to == K) continue;
        ws->share[to * N + n] += share;
        ws->share[k * N + n] = 0.0;
        ws->capacity[to] = to_capacity;
        ws->tx_power[to] = to_power;
        cap[to] = to_cap;
        ws->capacity[k] -= share * donor_rate / tau;
        ws->tx_power[k] -=
            share * (std::exp2(donor_rate / B) - 1.0) * tab.invq[k * N + n];
        recap(k);
        moved = true;
      }
    }
    if (!moved) break;
  }
}

struct AscentExit {
  std::size_t iterations = 0;
  bool converged = false;
};

// Price update shared by every ascent: exponentiated gradient with a
// diminishing rate. Multiplicative moves cross the decades between a rough
// init and the optimum quickly, keep both prices positive, and need no
// per-run normalization, so warm starts behave. The clamp caps any single
// move at about a factor of two.
void nudge_price(double* price, double residual, double scale, double rate,
                 double floor) {
  const double z = std::clamp(rate * residual / scale, -0.7, 0.7);
  *price = std::max(*price * std::exp(z), floor);
}

// Projected dual ascent at a fixed deadline, maximizing the feasible total
// load. Every iterate yields a feasible repaired total, so the running best
// climbs toward the optimum from below. A subgradient method never sits
// still, so per-iteration change is the wrong thing to watch; instead the
// rate runs in phases: when the best stops improving for a stall window, the
// prices rewind to the incumbent and the rate halves. Large early phases
// cross the decades between a rough init and the right region; small late
// phases calm the assignment churn that large multiplicative moves cause
// when many workers contend for the same subcarriers. Converged means the
// finest phase ran out its window without improving the incumbent.
AscentExit run_ascent(const Scenario& s, const CellTables& tab, double T,
                      const SolverOptions& opts, const Grid* fixed_assignment,
                      std::vector<double>* lambda, std::vector<double>* nu,
                      Workspace* ws) {
  const std::size_t K = tab.K;
  const double xi = s.config.circuit_energy;
  const std::size_t stall_window = 25 * opts.patience;

  double best_total = -1.0;
  std::size_t best_iter = 0;
  std::vector<double> best_lambda, best_nu;
  AscentExit exit;

  double rate_l = opts.step_scale_lambda;
  double rate_n = opts.step_scale_nu;
  const double rate_l_floor = opts.step_scale_lambda / kRateHalvings;
  const double rate_n_floor = opts.step_scale_nu / kRateHalvings;
  std::size_t phase_start = 1;
  bool phase_improved = false;

  for (std::size_t t = 1; t <= opts.max_inner_iterations; ++t) {
    exit.iterations = t;
    price_cells(s, tab, T, *lambda, *nu, fixed_assignment, nullptr, opts, ws);

    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      bool usable = true;
      total += feasible_load_cap(s.workers[k], T, xi, ws->capacity[k],
                                 ws->tx_power[k], opts.window_floor, &usable);
    }

    if (total > best_total + opts.inner_tolerance * std::max(best_total, 0.0)) {
      best_total = total;
      best_iter = t;
      best_lambda = *lambda;
      best_nu = *nu;
      phase_improved = true;
    } else if (t - std::max(best_iter, phase_start) >= stall_window) {
      if (!phase_improved && rate_l <= rate_l_floor * (1.0 + 1e-12)) {
        exit.converged = true;
        break;
      }
      rate_l = std::max(rate_l * 0.5, rate_l_floor);
      rate_n = std::max(rate_n * 0.5, rate_n_floor);
      phase_start = t;
      phase_improved = false;
      // A zero incumbent is not worth returning to: rewinding there would
      // pin the search at a dead point, so keep walking from the current
      // prices instead and only rewind once something feasible exists.
      if (best_total > 0.0) {
        *lambda = best_lambda;
        *nu = best_nu;
        continue;  // re-price at the incumbent before moving again
      }
    }

    for (std::size_t k = 0; k < K; ++k) {
      const auto& w = s.workers[k];
      // Scale each residual by the larger side of its balance so the move
      // tracks the relative violation regardless of unit magnitudes.
      const double demand = ws->load[k] * ws->phi[k];
      const double r_l = demand - ws->capacity[k];
      const double s_l = std::max({demand, ws->capacity[k], 1e-300});
      const double spend = ws->tx_power[k] +
                           w.power_factor * w.compute_speed * w.compute_speed *
                               demand;
      const double budget = (w.power_cap * T - xi) * ws->phi[k];
      const double r_n = spend - budget;
      const double s_n = std::max({spend, budget, 1e-300});
      nudge_price(&(*lambda)[k], r_l, s_l, rate_l, 1e-300);
      nudge_price(&(*nu)[k], r_n, s_n, rate_n, opts.nu_floor);
    }
  }
  if (best_total > 0.0) {
    *lambda = std::move(best_lambda);
    *nu = std::move(best_nu);
  }
  return exit;
}

// Starting prices: deadline price 1/T, energy price chosen so the implied
// water level spreads roughly the whole power budget over a worker's
// expected share of the spectrum.
void init_duals(const Scenario& s, const CellTables& tab, double T,
                const SolverOptions& opts, std::vector<double>* lambda,
                std::vector<double>* nu) {
  double invq_sum = 0.0;
  for (double v : tab.invq) invq_sum += v;
  const double invq_mean = invq_sum / static_cast<double>(tab.invq.size());
  const double share = static_cast<double>(tab.N) /
                       std::max<double>(1.0, static_cast<double>(tab.K));
  const double B = s.config.subcarrier_bandwidth;
  const double tau = s.config.bits_per_parameter;

  lambda->assign(tab.K, 1.0 / T);
  nu->assign(tab.K, 0.0);
  for (std::size_t k = 0; k < tab.K; ++k) {
    const double level =
        invq_mean + s.workers[k].power_cap / std::max(share, 1.0);
    (*nu)[k] = std::max((*lambda)[k] * B / (level * tau * kLn2),
                        opts.nu_floor);
  }
}

// Assemble the feasible plan and dual snapshot at the current prices.
SolveResult finish_solve(const Scenario& s, const CellTables& tab, double T,
                         const SolverOptions& opts,
                         const Grid* fixed_assignment,
                         std::vector<double> lambda, std::vector<double> nu,
                         Workspace* ws, const AscentExit& exit) {
  const std::size_t K = tab.K, N = tab.N;
  const double xi = s.config.circuit_energy;
  const double tau = s.config.bits_per_parameter;

  price_cells(s, tab, T, lambda, nu, fixed_assignment, nullptr, opts, ws);
  if (!fixed_assignment) polish_columns(s, tab, T, opts, ws);

  SolveResult out;
  out.iterations = exit.iterations;
  out.converged = exit.converged;
  out.plan.assignment = Grid(K, N);
  out.plan.subcarrier_loads = Grid(K, N);
  out.plan.rates = Grid(K, N);
  out.plan.worker_loads.assign(K, 0.0);
  out.plan.latency = T;
  std::copy(ws->share.begin(), ws->share.end(), out.plan.assignment.v.begin());

  out.duals.lambda = std::move(lambda);
  out.duals.nu = std::move(nu);
  out.duals.mu = ws->mu;
  out.duals.phi.assign(K, 0.0);
  out.duals.rtilde = Grid(K, N);

  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    bool usable = true;
    double load = feasible_load_cap(s.workers[k], T, xi, ws->capacity[k],
                                    ws->tx_power[k], opts.window_floor,
                                    &usable);
    const std::size_t row = k * N;
    if (!usable || load <= 0.0) {
      // Idle worker: keep its column shares for completeness but move no
      // traffic, so it spends only circuit energy.
      out.plan.worker_loads[k] = 0.0;
      out.duals.phi[k] = 1.0 / T;
      continue;
    }
    const double window = T - load / s.workers[k].compute_speed;
    out.plan.worker_loads[k] = load;
    out.duals.phi[k] = 1.0 / window;
    for (std::size_t n = 0; n < N; ++n) {
      const double c = ws->share[row + n];
      const double r = ws->rate[row + n];
      if (c <= 0.0 || r <= 0.0) continue;
      const double eff = c * r;  // effective (share-scaled) rate
      out.plan.rates(k, n) = eff;
      out.duals.rtilde(k, n) = eff;
      out.plan.subcarrier_loads(k, n) = eff * window / tau;
    }
    total += load;
  }
  out.achieved_model_size = total;
  return out;
}

std::vector<std::size_t> owned_columns(const Grid& assignment, std::size_t k) {
  std::vector<std::size_t> cols;
  for (std::size_t n = 0; n < assignment.cols; ++n)
    if (assignment(k, n) > 0.0) cols.push_back(n);
  return cols;
}

// Gain-greedy balanced binary ownership: each column goes to its best
// channel, discounted by how many columns that worker already holds so
// nobody is starved. Used as a deterministic fallback partition.
Grid balanced_assignment(const CellTables& tab) {
  Grid c(tab.K, tab.N, 0.0);
  std::vector<std::size_t> count(tab.K, 0);
  for (std::size_t n = 0; n < tab.N; ++n) {
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < tab.K; ++k) {
      const double v =
          tab.q[k * tab.N + n] / (1.0 + static_cast<double>(count[k]));
      if (v > best) {
        best = v;
        pick = k;
      }
    }
    c(pick, n) = 1.0;
    ++count[pick];
  }
  return c;
}

// Largest block one worker can carry by deadline T with its subcarrier set
// frozen. All three budgets (compute time, window throughput, energy)
// tighten monotonically with the block size, so bisection against the
// min-power waterfill is exact. `rates` comes back aligned with `gains`.
double worker_capacity(const Scenario& s, std::size_t k,
                       const std::vector<double>& gains, double T,
                       std::vector<double>* rates) {
  const auto& w = s.workers[k];
  const double xi = s.config.circuit_energy;
  const double tau = s.config.bits_per_parameter;
  const double B = s.config.subcarrier_bandwidth;
  const double sigma2 = s.config.noise_power;
  if (rates) rates->assign(gains.size(), 0.0);
  if (gains.empty() || w.power_cap * T <= xi) return 0.0;

  auto feasible = [&](double load, std::vector<double>* r) {
    const double window = T - load / w.compute_speed;
    if (window <= 0.0) return false;
    const double power =
        waterfill_min_power(gains, sigma2, B, load * tau / window, r);
    if (!std::isfinite(power)) return false;
    const double compute =
        w.power_factor * w.compute_speed * w.compute_speed * load;
    return compute + power * window + xi <= w.power_cap * T;
  };

  double lo = 0.0;
  double hi = w.compute_speed * T;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid, nullptr)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (lo > 0.0) feasible(lo, rates);
  return lo;
}

// Commit shared columns to whoever pushes the most parameters through them,
// ties to the lower index; columns nobody uses go to their best channel.
Grid commit_shares(const CellTables& tab, const AllocationPlan& plan) {
  Grid binary(tab.K, tab.N, 0.0);
  for (std::size_t n = 0; n < tab.N; ++n) {
    std::size_t pick = tab.K;
    double best = 0.0;
    for (std::size_t k = 0; k < tab.K; ++k) {
      const double carried = plan.subcarrier_loads(k, n);
      if (carried > best) {
        best = carried;
        pick = k;
      }
    }
    if (pick == tab.K) {
      double bq = -1.0;
      for (std::size_t k = 0; k < tab.K; ++k) {
        if (tab.q[k * tab.N + n] > bq) {
          bq = tab.q[k * tab.N + n];
          pick = k;
        }
      }
    }
    binary(pick, n) = 1.0;
  }
  return binary;
}

// Exact plan for a frozen binary partition: with ownership fixed the
// constraints decouple, so every block size is a worker_capacity optimum.
// Spreading each upload across the whole window is the cheapest way to send
// it, so loaded workers finish exactly at the deadline and the equal-finish
// structure of interior optima carries over. The supplied duals are kept as
// representative prices; the plan itself is purely primal.
SolveResult evaluate_partition(const Scenario& s, const CellTables& tab,
                               double T, const Grid& binary,
                               const DualState& price_hint) {
  const std::size_t K = tab.K, N = tab.N;
  const double tau = s.config.bits_per_parameter;

  SolveResult out;
  out.converged = true;
  out.plan.assignment = binary;
  out.plan.subcarrier_loads = Grid(K, N);
  out.plan.rates = Grid(K, N);
  out.plan.worker_loads.assign(K, 0.0);
  out.plan.latency = T;
  out.duals = price_hint;
  out.duals.mu.assign(N, 0.0);
  out.duals.phi.assign(K, 1.0 / T);
  out.duals.rtilde = Grid(K, N);

  double total = 0.0;
  std::vector<std::size_t> cols;
  std::vector<double> gains, rates;
  for (std::size_t k = 0; k < K; ++k) {
    cols.clear();
    gains.clear();
    for (std::size_t n = 0; n < N; ++n) {
      if (binary(k, n) > 0.0) {
        cols.push_back(n);
        gains.push_back(s.channels(k, n));
      }
    }
    const double cap = worker_capacity(s, k, gains, T, &rates);
    if (cap <= 0.0) continue;
    const double window = T - cap / s.workers[k].compute_speed;
    out.plan.worker_loads[k] = cap;
    out.duals.phi[k] = 1.0 / window;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (rates[i] <= 0.0) continue;
      out.plan.rates(k, cols[i]) = rates[i];
      out.duals.rtilde(k, cols[i]) = rates[i];
      out.plan.subcarrier_loads(k, cols[i]) = rates[i] * window / tau;
    }
    total += cap;
  }
  out.achieved_model_size = total;
  return out;
}

void check_binary_partition(const Grid& c, const Scenario& s) {
  if (c.rows != s.num_workers() || c.cols != s.num_subcarriers())
    fail(ErrorCode::invalid_argument,
         "assignment dimensions do not match the scenario");
  for (std::size_t n = 0; n < c.cols; ++n) {
    double col = 0.0;
    for (std::size_t k = 0; k < c.rows; ++k) {
      if (c(k, n) != 0.0 && c(k, n) != 1.0)
        fail(ErrorCode::invalid_argument, "assignment must be binary");
      col += c(k, n);
    }
    if (col != 1.0)
      fail(ErrorCode::invalid_argument,
           "assignment must give every subcarrier to exactly one worker");
  }
}

}  // namespace

void SolverOptions::validate() const {
  if (!(step_scale_lambda > 0.0) || !(step_scale_nu > 0.0) ||
      max_inner_iterations == 0 || !(inner_tolerance > 0.0) || patience == 0 ||
      !(bisection_tolerance > 0.0) || !(bracket_growth > 1.0) ||
      max_bracket_doublings == 0 || !(nu_floor > 0.0) ||
      !(window_floor > 0.0) || window_floor >= 1.0)
    fail(ErrorCode::invalid_argument, "solver options out of range");
}

double optimal_rate(double lambda, double nu, double h, double B, double tau,
                    double sigma2) {
  if (!(nu > 0.0))
    fail(ErrorCode::degenerate_dual,
         "energy price must be positive to define a rate");
  if (lambda <= 0.0) return 0.0;
  const double level = lambda * B / (nu * tau * kLn2);
  const double x = level * h / sigma2;
  return x > 1.0 ? B * std::log2(x) : 0.0;
}

double optimal_power(double lambda, double nu, double h, double B, double tau,
                     double sigma2) {
  if (!(nu > 0.0))
    fail(ErrorCode::degenerate_dual,
         "energy price must be positive to define a power");
  if (lambda <= 0.0) return 0.0;
  const double level = lambda * B / (nu * tau * kLn2);
  return std::max(0.0, level - sigma2 / h);
}

double optimal_worker_load(double T, double lambda, double nu,
                           const WorkerProfile& worker, double xi) {
  if (!(T > 0.0)) fail(ErrorCode::invalid_argument, "deadline must be positive");
  double load = 0.0, window = T;
  stationary_load(T, lambda, nu, worker, xi, 0.0, &load, &window);
  return load;
}

double optimal_subcarrier_load(double T, double lambda, double nu,
                               const WorkerProfile& worker, double h, double B,
                               double tau, double sigma2, double xi) {
  double load = 0.0, window = T;
  stationary_load(T, lambda, nu, worker, xi, 0.0, &load, &window);
  if (load <= 0.0 && window >= T) {
    // Not interior: fall back to the definition with the full window.
    window = T;
  }
  return optimal_rate(lambda, nu, h, B, tau, sigma2) * window / tau;
}

double subcarrier_indicator(double nu, double h, double sigma2, double B,
                            double rate) {
  if (rate <= 0.0) return 0.0;
  const double x = std::exp2(rate / B);
  return nu * (sigma2 / h) * ((x - 1.0) - x * (rate / B) * kLn2);
}

Grid assign_subcarriers(const Grid& indicators) {
  Grid c(indicators.rows, indicators.cols, 0.0);
  for (std::size_t n = 0; n < indicators.cols; ++n) {
    double best = kInf;
    std::size_t ties = 0;
    for (std::size_t k = 0; k < indicators.rows; ++k) {
      const double v = indicators(k, n);
      if (v < best) {
        best = v;
        ties = 1;
      } else if (v == best) {
        ++ties;
      }
    }
    for (std::size_t k = 0; k < indicators.rows; ++k)
      if (indicators(k, n) == best)
        c(k, n) = 1.0 / static_cast<double>(ties);
  }
  return c;
}

PrimalState recover_primal(const Scenario& s, double T,
                           const std::vector<double>& lambda,
                           const std::vector<double>& nu,
                           const SolverOptions& opts) {
  s.validate();
  opts.validate();
  if (lambda.size() != s.num_workers() || nu.size() != s.num_workers())
    fail(ErrorCode::invalid_argument, "dual vectors must have one entry per worker");
  if (!(T > 0.0)) fail(ErrorCode::invalid_argument, "deadline must be positive");

  CellTables tab(s);
  Workspace ws;
  ws.resize(tab.K, tab.N);
  price_cells(s, tab, T, lambda, nu, nullptr, nullptr, opts, &ws);

  PrimalState p;
  p.rate = Grid(tab.K, tab.N);
  p.indicator = Grid(tab.K, tab.N);
  p.assignment = Grid(tab.K, tab.N);
  p.rtilde = Grid(tab.K, tab.N);
  p.rate.v = ws.rate;
  p.indicator.v = ws.indicator;
  p.assignment.v = ws.share;
  for (std::size_t i = 0; i < ws.share.size(); ++i)
    p.rtilde.v[i] = ws.share[i] * ws.rate[i];
  p.load = ws.load;
  p.window = ws.window;
  p.phi = ws.phi;
  p.upload_capacity = ws.capacity;
  p.tx_power = ws.tx_power;
  return p;
}

DualResiduals dual_residuals(const std::vector<double>& lambda,
                             const std::vector<double>& nu, const Scenario& s,
                             double T, const SolverOptions& opts) {
  PrimalState p = recover_primal(s, T, lambda, nu, opts);
  const double xi = s.config.circuit_energy;
  DualResiduals r;
  r.upload.assign(s.num_workers(), 0.0);
  r.power.assign(s.num_workers(), 0.0);
  for (std::size_t k = 0; k < s.num_workers(); ++k) {
    const auto& w = s.workers[k];
    r.upload[k] = p.load[k] * p.phi[k] - p.upload_capacity[k];
    r.power[k] = p.tx_power[k] +
                 w.power_factor * w.compute_speed * w.compute_speed *
                     p.load[k] * p.phi[k] -
                 (w.power_cap * T - xi) * p.phi[k];
  }
  return r;
}

SolveResult max_model_size(const Scenario& s, double T,
                           const SolverOptions& opts,
                           const DualState* warm_start, bool force_pinned_leg) {
  s.validate();
  opts.validate();
  if (!(T > 0.0)) fail(ErrorCode::invalid_argument, "deadline must be positive");
  if (T <= circuit_floor(s))
    fail(ErrorCode::infeasible,
         "deadline cannot cover circuit energy at the power caps");

  const std::size_t K = s.num_workers();
  CellTables tab(s);
  Workspace ws;
  ws.resize(tab.K, tab.N);

  std::vector<double> lambda, nu;
  init_duals(s, tab, T, opts, &lambda, &nu);
  if (warm_start && warm_start->lambda.size() == K &&
      warm_start->nu.size() == K) {
    for (std::size_t k = 0; k < K; ++k) {
      lambda[k] = std::max(warm_start->lambda[k], 1e-300);
      nu[k] = std::max(warm_start->nu[k], opts.nu_floor);
    }
  }

  AscentExit exit = run_ascent(s, tab, T, opts, nullptr, &lambda, &nu, &ws);
  SolveResult out = finish_solve(s, tab, T, opts, nullptr, std::move(lambda),
                                 std::move(nu), &ws, exit);
  if (out.achieved_model_size <= 0.0 || force_pinned_leg) {
    // Heavy spectrum contention (workers on the order of subcarriers or
    // more) can wedge the free-ownership market at an all-idle point where
    // every winning bid is unpayable, and even off that cliff the free run
    // can stall in a poor basin. Ownership is the churning variable, so
    // retry with it pinned to a balanced gain-greedy partition; the
    // per-worker subproblems then decouple and the ascent behaves. By
    // default this only fires when the free run produced nothing, so it
    // costs healthy runs nothing; callers that must not under-report
    // capacity ask for the leg unconditionally.
    Grid pinned = balanced_assignment(tab);
    std::vector<double> lambda2, nu2;
    init_duals(s, tab, T, opts, &lambda2, &nu2);
    AscentExit exit2 =
        run_ascent(s, tab, T, opts, &pinned, &lambda2, &nu2, &ws);
    exit2.iterations += exit.iterations;
    SolveResult alt = finish_solve(s, tab, T, opts, &pinned,
                                   std::move(lambda2), std::move(nu2), &ws,
                                   exit2);
    if (alt.achieved_model_size > out.achieved_model_size) {
      out = std::move(alt);
    } else {
      out.iterations = exit2.iterations;
    }
  }

  // Final exact pass. The ascent prices global contention but can stall at a
  // repaired point that leaves whole workers idle; with ownership frozen the
  // problem decouples per worker and solves exactly, so committing the
  // ascent's partition (and the balanced one as a floor) and re-deriving
  // every block never hands back less than those partitions support.
  for (const Grid& partition :
       {commit_shares(tab, out.plan), balanced_assignment(tab)}) {
    SolveResult exact = evaluate_partition(s, tab, T, partition, out.duals);
    if (exact.achieved_model_size > out.achieved_model_size) {
      exact.iterations = out.iterations;
      out = std::move(exact);
    }
  }
  return out;
}

namespace {

// Shared bisection driver: min T such that solve_at(T) reaches the target.
// solve_at(T, warm, hard) probes one deadline; the true capacity is monotone
// nondecreasing in T but the probe is a heuristic that can under-report, so
// successes are proofs while failures are only confirmed after a retry at
// full strength (hard = fresh start plus any extra legs the probe has).
// Prices from the last successful deadline warm-start the next probe after
// rescaling to the probed deadline.
template <typename SolveAt>
SolveResult bisect_deadline(const Scenario& s, double model_size,
                            const SolverOptions& opts, double floor_hint,
                            SolveAt&& solve_at) {
  const double L = model_size;
  double lo = std::max(circuit_floor(s), floor_hint);

  if (L <= 0.0) {
    // Point target: nothing to compute. Report the floor deadline.
    const double T = lo > 0.0 ? lo * (1.0 + 1e-9) : 1e-12;
    SolveResult r = solve_at(T, nullptr, false);
    r.plan.worker_loads.assign(s.num_workers(), 0.0);
    r.plan.subcarrier_loads = Grid(s.num_workers(), s.num_subcarriers());
    r.plan.rates = Grid(s.num_workers(), s.num_subcarriers());
    r.achieved_model_size = 0.0;
    r.converged = true;
    return r;
  }

  double speed_sum = 0.0;
  for (const auto& w : s.workers) speed_sum += w.compute_speed;

  double hi = std::max(lo * (1.0 + 1e-3), L / speed_sum);
  if (!(hi > 0.0)) hi = 1e-9;

  SolveResult best;
  double best_T = 0.0;
  DualState warm;
  bool have_warm = false;
  // Optimal prices grow proportionally with the deadline (loads scale with T
  // at fixed rates and water levels, which pins the lambda/nu ratio), so a
  // warm start from the incumbent rescales both by T/best_T.
  auto warmed = [&](double T) -> const DualState* {
    if (!have_warm) return nullptr;
    warm = best.duals;
    const double ratio = T / best_T;
    for (double& v : warm.lambda) v *= ratio;
    for (double& v : warm.nu) v *= ratio;
    return &warm;
  };

  std::size_t spent = 0;
  // Every failure below moves the bracket for good, so none is taken on the
  // heuristic's word alone: a probe that misses the target is rerun at full
  // strength and only the better of the two attempts counts.
  auto probe = [&](double T, const DualState* warm) {
    SolveResult r = solve_at(T, warm, false);
    spent += r.iterations;
    if (r.achieved_model_size < L) {
      SolveResult confirm = solve_at(T, nullptr, true);
      spent += confirm.iterations;
      if (confirm.achieved_model_size > r.achieved_model_size)
        return confirm;
    }
    return r;
  };

  bool bracketed = false;
  for (std::size_t i = 0; i <= opts.max_bracket_doublings; ++i) {
    SolveResult r = probe(hi, nullptr);
    if (r.achieved_model_size >= L) {
      best = std::move(r);
      best_T = hi;
      have_warm = true;
      bracketed = true;
      break;
    }
    lo = hi;
    hi *= opts.bracket_growth;
  }
  if (!bracketed)
    fail(ErrorCode::infeasible,
         "no deadline within the bracket growth budget fits the target size");

  while (hi - lo > opts.bisection_tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    SolveResult r = probe(mid, warmed(mid));
    if (r.achieved_model_size >= L) {
      hi = mid;
      best = std::move(r);
      best_T = mid;
    } else {
      lo = mid;
    }
  }
  best.iterations = spent;
  return best;
}

}  // namespace

SolveResult min_latency(const Scenario& s, double model_size,
                        const SolverOptions& opts) {
  s.validate();
  opts.validate();
  auto solve_at = [&](double T, const DualState* warm, bool hard) {
    return max_model_size(s, T, opts, warm, hard);
  };
  return bisect_deadline(s, model_size, opts, 0.0, solve_at);
}

SolveResult resolve_with_fixed_assignment(const Scenario& s,
                                          const Grid& assignment,
                                          double model_size,
                                          const SolverOptions& opts) {
  s.validate();
  opts.validate();
  check_binary_partition(assignment, s);

  CellTables tab(s);
  // `hard` only strips the warm start here: ownership is already pinned, so
  // there is no second leg to escalate to.
  auto solve_at = [&](double T, const DualState* warm, bool) {
    if (T <= circuit_floor(s))
      fail(ErrorCode::infeasible,
           "deadline cannot cover circuit energy at the power caps");
    const std::size_t K = s.num_workers();
    Workspace ws;
    ws.resize(tab.K, tab.N);
    std::vector<double> lambda, nu;
    init_duals(s, tab, T, opts, &lambda, &nu);
    if (warm && warm->lambda.size() == K) {
      for (std::size_t k = 0; k < K; ++k) {
        lambda[k] = std::max(warm->lambda[k], 1e-300);
        nu[k] = std::max(warm->nu[k], opts.nu_floor);
      }
    }
    AscentExit exit =
        run_ascent(s, tab, T, opts, &assignment, &lambda, &nu, &ws);
    return finish_solve(s, tab, T, opts, &assignment, std::move(lambda),
                        std::move(nu), &ws, exit);
  };
  return bisect_deadline(s, model_size, opts, 0.0, solve_at);
}

bool assignment_is_binary(const Grid& assignment) {
  for (double c : assignment.v)
    if (c != 0.0 && c != 1.0) return false;
  return true;
}

SolveResult round_subcarriers(const SolveResult& relaxed, const Scenario& s,
                              double model_size, const SolverOptions& opts) {
  s.validate();
  opts.validate();
  const Grid& c = relaxed.plan.assignment;
  if (c.rows != s.num_workers() || c.cols != s.num_subcarriers())
    fail(ErrorCode::invalid_argument,
         "relaxed result does not match the scenario");
  if (assignment_is_binary(c)) return relaxed;

  // Commit each shared column to the holder that would push the most
  // parameters through it. Ties go to the least-loaded holder so that
  // symmetric instances stay balanced, then to the lower index.
  const std::size_t K = c.rows, N = c.cols;
  Grid binary(K, N, 0.0);
  std::vector<double> committed(K, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    double best = -1.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (c(k, n) <= 0.0) continue;
      const double full = relaxed.plan.subcarrier_loads(k, n) / c(k, n);
      if (full > best) best = full;
    }
    std::size_t pick = K;
    for (std::size_t k = 0; k < K; ++k) {
      if (c(k, n) <= 0.0) continue;
      const double full = relaxed.plan.subcarrier_loads(k, n) / c(k, n);
      if (full < best) continue;
      if (pick == K || committed[k] < committed[pick]) pick = k;
    }
    if (pick == K) pick = 0;  // nobody held the column; owner is arbitrary
    binary(pick, n) = 1.0;
    committed[pick] += std::max(best, 0.0);
  }
  return resolve_with_fixed_assignment(s, binary, model_size, opts);
}

// --- fixed loads -------------------------------------------------------------

double waterfill_min_power(const std::vector<double>& gains, double sigma2,
                           double B, double throughput,
                           std::vector<double>* rates) {
  if (rates) rates->assign(gains.size(), 0.0);
  if (throughput <= 0.0) return 0.0;
  if (gains.empty()) return kInf;

  const std::size_t n = gains.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gains[a] > gains[b];
  });

  double sum_log2q = 0.0;
  for (std::size_t m = 1; m <= n; ++m) {
    const double q_m = gains[order[m - 1]] / sigma2;
    sum_log2q += std::log2(q_m);
    const double log2w = (throughput / B - sum_log2q) / static_cast<double>(m);
    const double w = std::exp2(log2w);
    const bool weakest_active = w * q_m > 1.0 - 1e-12;
    const bool next_inactive =
        m == n || w * (gains[order[m]] / sigma2) <= 1.0 + 1e-12;
    if (!weakest_active || !next_inactive) continue;

    double power = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double qi = gains[order[i]] / sigma2;
      power += std::max(0.0, w - 1.0 / qi);
      if (rates)
        (*rates)[order[i]] = std::max(0.0, B * (log2w + std::log2(qi)));
    }
    return power;
  }

  // Numerical corner: fall back to all cells active.
  const double log2w = (throughput / B - sum_log2q) / static_cast<double>(n);
  const double w = std::exp2(log2w);
  double power = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double qi = gains[order[i]] / sigma2;
    power += std::max(0.0, w - 1.0 / qi);
    if (rates)
      (*rates)[order[i]] = std::max(0.0, B * (log2w + std::log2(qi)));
  }
  return power;
}

double worker_min_latency(const Scenario& s, std::size_t k,
                          const std::vector<std::size_t>& subcarriers,
                          double upload_params, double compute_seconds,
                          double compute_energy,
                          std::vector<double>* rates) {
  const auto& w = s.workers[k];
  const double xi = s.config.circuit_energy;
  const double tau = s.config.bits_per_parameter;
  const double B = s.config.subcarrier_bandwidth;
  const double sigma2 = s.config.noise_power;

  if (rates) rates->assign(subcarriers.size(), 0.0);
  const double idle_floor =
      std::max(compute_seconds, (compute_energy + xi) / w.power_cap);
  if (upload_params <= 0.0) return idle_floor;
  if (subcarriers.empty()) return kInf;

  std::vector<double> gains;
  gains.reserve(subcarriers.size());
  for (std::size_t n : subcarriers) gains.push_back(s.channels(k, n));

  auto feasible = [&](double T, std::vector<double>* r) {
    const double window = T - compute_seconds;
    if (window <= 0.0) return false;
    const double thr = upload_params * tau / window;
    const double power = waterfill_min_power(gains, sigma2, B, thr, r);
    if (!std::isfinite(power)) return false;
    return compute_energy + power * window + xi <= w.power_cap * T;
  };

  double lo = idle_floor;
  double hi = std::max(lo * 1.0625, lo + 1e-9);
  std::size_t guard = 0;
  while (!feasible(hi, nullptr)) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 400 || !std::isfinite(hi)) return kInf;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid, nullptr) ? hi : lo) = mid;
  }
  if (rates) feasible(hi, rates);
  return hi;
}

namespace {

// Feasibility of frozen block sizes at deadline T, searching over ownership
// with the same pricing rules; verdicts come from an exact water-filling
// check on the binarized assignment, so "feasible" always carries a witness.
bool fixed_load_probe(const Scenario& s, const CellTables& tab, double T,
                      const std::vector<double>& loads,
                      const SolverOptions& opts, const Grid* forced,
                      AllocationPlan* witness, DualState* duals,
                      std::size_t* iterations) {
  const std::size_t K = tab.K, N = tab.N;
  const double xi = s.config.circuit_energy;
  const double tau = s.config.bits_per_parameter;

  std::vector<double> window(K), phi(K), compute_e(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& w = s.workers[k];
    if (loads[k] > 0.0) {
      window[k] = T - loads[k] / w.compute_speed;
      if (window[k] <= 0.0) return false;
    } else {
      window[k] = T;
    }
    phi[k] = 1.0 / window[k];
    compute_e[k] =
        w.power_factor * w.compute_speed * w.compute_speed * loads[k];
    if (compute_e[k] + xi > w.power_cap * T) return false;
  }

  auto exact_check = [&](const Grid& binary) -> bool {
    AllocationPlan plan;
    plan.assignment = binary;
    plan.worker_loads = loads;
    plan.subcarrier_loads = Grid(K, N);
    plan.rates = Grid(K, N);
    plan.latency = T;
    for (std::size_t k = 0; k < K; ++k) {
      if (loads[k] <= 0.0) continue;
      const auto cols = owned_columns(binary, k);
      if (cols.empty()) return false;
      std::vector<double> gains;
      gains.reserve(cols.size());
      for (std::size_t n : cols) gains.push_back(s.channels(k, n));
      // Cheapest rates that finish the upload exactly at T.
      const double thr = loads[k] * tau / window[k];
      std::vector<double> cell_rates;
      const double power = waterfill_min_power(
          gains, s.config.noise_power, s.config.subcarrier_bandwidth, thr,
          &cell_rates);
      if (!std::isfinite(power) ||
          compute_e[k] + power * window[k] + xi >
              s.workers[k].power_cap * T * (1.0 + 1e-9))
        return false;
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cell_rates[i] <= 0.0) continue;
        plan.rates(k, cols[i]) = cell_rates[i];
        plan.subcarrier_loads(k, cols[i]) = cell_rates[i] * window[k] / tau;
      }
    }
    *witness = std::move(plan);
    return true;
  };

  if (forced) {
    duals->lambda.assign(K, 0.0);
    duals->nu.assign(K, 0.0);
    duals->mu.assign(N, 0.0);
    duals->phi = phi;
    duals->rtilde = Grid(K, N);
    const bool ok = exact_check(*forced);
    if (ok) duals->rtilde = witness->rates;
    return ok;
  }

  Workspace ws;
  ws.resize(K, N);
  std::vector<double> lambda, nu;
  init_duals(s, tab, T, opts, &lambda, &nu);

  for (std::size_t t = 1; t <= opts.probe_max_iterations; ++t) {
    ++*iterations;
    price_cells(s, tab, T, lambda, nu, nullptr, &window, opts, &ws);

    if (t % opts.probe_check_interval == 0 ||
        t == opts.probe_max_iterations) {
      // Binarize the current shares; balance exact ties by committed load.
      Grid binary(K, N, 0.0);
      std::vector<double> committed(K, 0.0);
      std::vector<std::size_t> owner(N, K), count(K, 0);
      for (std::size_t n = 0; n < N; ++n) {
        double best = kInf;
        for (std::size_t k = 0; k < K; ++k)
          best = std::min(best, ws.indicator[k * N + n]);
        std::size_t pick = K;
        for (std::size_t k = 0; k < K; ++k) {
          if (ws.indicator[k * N + n] != best) continue;
          if (pick == K || committed[k] < committed[pick]) pick = k;
        }
        binary(pick, n) = 1.0;
        committed[pick] += 1.0;
        owner[n] = pick;
        ++count[pick];
      }
      // Cover every frozen load: a loaded worker with no column can never
      // pass the exact check, so hand it the column it prices best among
      // those whose owner can spare one. When loaded workers outnumber
      // columns no cover exists at any deadline, so give up outright.
      for (std::size_t k = 0; k < K; ++k) {
        if (loads[k] <= 0.0 || count[k] > 0) continue;
        std::size_t pick_n = N;
        double best = kInf;
        for (std::size_t n = 0; n < N; ++n) {
          const std::size_t o = owner[n];
          if (count[o] <= 1 && loads[o] > 0.0) continue;
          const double v = ws.indicator[k * N + n];
          if (v < best) {
            best = v;
            pick_n = n;
          }
        }
        if (pick_n == N) return false;
        binary(owner[pick_n], pick_n) = 0.0;
        --count[owner[pick_n]];
        binary(k, pick_n) = 1.0;
        owner[pick_n] = k;
        count[k] = 1;
      }
      if (exact_check(binary)) {
        duals->lambda = lambda;
        duals->nu = nu;
        duals->mu = ws.mu;
        duals->phi = phi;
        duals->rtilde = witness->rates;
        return true;
      }
    }

    // No incumbent to rewind to here, so anneal smoothly instead of in
    // phases; the witness check tolerates a still-moving dual state.
    const double rate_l = opts.step_scale_lambda / std::sqrt(double(t));
    const double rate_n = opts.step_scale_nu / std::sqrt(double(t));
    for (std::size_t k = 0; k < K; ++k) {
      const auto& w = s.workers[k];
      const double demand = loads[k] * phi[k];
      const double r_l = demand - ws.capacity[k];
      const double s_l = std::max({demand, ws.capacity[k], 1e-300});
      const double spend = ws.tx_power[k] + compute_e[k] * phi[k];
      const double budget = (w.power_cap * T - xi) * phi[k];
      const double r_n = spend - budget;
      const double s_n = std::max({spend, budget, 1e-300});
      nudge_price(&lambda[k], r_l, s_l, rate_l, 1e-300);
      nudge_price(&nu[k], r_n, s_n, rate_n, opts.nu_floor);
    }
  }
  return false;
}

}  // namespace

SolveResult resolve_with_fixed_loads(const Scenario& s,
                                     const std::vector<double>& loads,
                                     const SolverOptions& opts,
                                     const Grid* assignment) {
  s.validate();
  opts.validate();
  if (loads.size() != s.num_workers())
    fail(ErrorCode::invalid_argument, "need one load per worker");
  for (double l : loads)
    if (!(l >= 0.0) || !std::isfinite(l))
      fail(ErrorCode::invalid_argument, "loads must be finite and >= 0");
  if (assignment) {
    check_binary_partition(*assignment, s);
    for (std::size_t k = 0; k < s.num_workers(); ++k)
      if (loads[k] > 0.0 && owned_columns(*assignment, k).empty())
        fail(ErrorCode::infeasible,
             "worker " + std::to_string(k) +
                 " carries load but owns no subcarriers");
  }

  CellTables tab(s);
  double lo = circuit_floor(s);
  for (std::size_t k = 0; k < s.num_workers(); ++k) {
    const auto& w = s.workers[k];
    lo = std::max(lo, loads[k] / w.compute_speed);
    lo = std::max(lo, (w.power_factor * w.compute_speed * w.compute_speed *
                           loads[k] +
                       s.config.circuit_energy) /
                          w.power_cap);
  }

  SolveResult best;
  std::size_t spent = 0;
  auto probe = [&](double T, SolveResult* out) {
    AllocationPlan witness;
    DualState duals;
    std::size_t iters = 0;
    const bool ok = fixed_load_probe(s, tab, T, loads, opts, assignment,
                                     &witness, &duals, &iters);
    spent += std::max<std::size_t>(iters, 1);
    if (ok && out) {
      out->plan = std::move(witness);
      out->duals = std::move(duals);
      out->achieved_model_size = 0.0;
      for (double l : loads) out->achieved_model_size += l;
      out->converged = true;
    }
    return ok;
  };

  double hi = std::max(lo * (1.0 + 1e-3), 1e-9);
  bool bracketed = false;
  for (std::size_t i = 0; i <= opts.max_bracket_doublings; ++i) {
    SolveResult r;
    if (probe(hi, &r)) {
      best = std::move(r);
      bracketed = true;
      break;
    }
    lo = hi;
    hi *= opts.bracket_growth;
  }
  if (!bracketed)
    fail(ErrorCode::infeasible,
         "frozen loads do not fit any deadline within the bracket budget");

  while (hi - lo > opts.bisection_tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    SolveResult r;
    if (probe(mid, &r)) {
      hi = mid;
      best = std::move(r);
    } else {
      lo = mid;
    }
  }
  best.iterations = spent;
  return best;
}

AllocationPlan integerize_loads(const AllocationPlan& plan, const Scenario& s,
                                std::uint64_t model_size) {
  AllocationPlan out = plan;
  const std::size_t K = out.num_workers();
  const std::size_t N = out.num_subcarriers();

  // Whole-parameter blocks by largest remainder. A worker only absorbs an
  // extra parameter if it moves traffic (some positive rate); the relaxed
  // cell loads may carry more than the block, so blocks are what get fixed
  // and cells are re-split afterwards.
  struct Item {
    double fraction;
    std::size_t idx;
  };
  std::vector<Item> eligible;
  double floor_sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double l = plan.worker_loads[k];
    const double fl = std::floor(l);
    out.worker_loads[k] = fl;
    floor_sum += fl;
    for (std::size_t n = 0; n < N; ++n)
      if (plan.rates(k, n) > 0.0) {
        eligible.push_back({l - fl, k});
        break;
      }
  }

  double remainder =
      std::max(0.0, static_cast<double>(model_size) - floor_sum);
  if (remainder > 0.0) {
    if (eligible.empty())
      fail(ErrorCode::infeasible,
           "no worker can absorb the integer remainder");
    std::sort(eligible.begin(), eligible.end(),
              [](const Item& a, const Item& b) {
                if (a.fraction != b.fraction) return a.fraction > b.fraction;
                return a.idx < b.idx;
              });
    const double each = std::floor(remainder / eligible.size());
    double leftover = remainder - each * eligible.size();
    for (const Item& it : eligible) {
      double add = each;
      if (leftover > 0.0) {
        add += 1.0;
        leftover -= 1.0;
      }
      if (add > 0.0) out.worker_loads[it.idx] += add;
    }
  }

  // Split each block across the worker's cells in proportion to the
  // effective rates, again by largest remainder, so cell loads sum to the
  // block exactly and the fastest cells carry the rounding slack.
  for (std::size_t k = 0; k < K; ++k) {
    double rate_sum = 0.0;
    for (std::size_t n = 0; n < N; ++n) rate_sum += plan.rates(k, n);
    if (out.worker_loads[k] <= 0.0 || rate_sum <= 0.0) {
      for (std::size_t n = 0; n < N; ++n) out.subcarrier_loads(k, n) = 0.0;
      if (out.worker_loads[k] > 0.0)
        fail(ErrorCode::infeasible,
             "a loaded worker holds no usable subcarrier");
      continue;
    }
    double cell_floor_sum = 0.0;
    std::vector<Item> cells;
    for (std::size_t n = 0; n < N; ++n) {
      if (plan.rates(k, n) <= 0.0) {
        out.subcarrier_loads(k, n) = 0.0;
        continue;
      }
      const double share = out.worker_loads[k] * plan.rates(k, n) / rate_sum;
      const double fl = std::floor(share);
      out.subcarrier_loads(k, n) = fl;
      cell_floor_sum += fl;
      cells.push_back({share - fl, n});
    }
    double rem = out.worker_loads[k] - cell_floor_sum;
    std::sort(cells.begin(), cells.end(), [](const Item& a, const Item& b) {
      if (a.fraction != b.fraction) return a.fraction > b.fraction;
      return a.idx < b.idx;
    });
    for (const Item& c : cells) {
      if (rem <= 0.0) break;
      out.subcarrier_loads(k, c.idx) += 1.0;
      rem -= 1.0;
    }
  }

  // Whole-parameter cells can run a hair past the relaxed deadline.
  double realized = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    realized = std::max(realized, worker_latency(out, s, k).total);
  out.latency = std::max(out.latency, realized);
  return out;
}

}  // namespace partel
