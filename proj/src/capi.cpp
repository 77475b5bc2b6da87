#include "partel/support.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "baselines.hpp"
#include "cnn.hpp"
#include "cost_model.hpp"
#include "report.hpp"
#include "scenario.hpp"
#include "sim.hpp"
#include "solver.hpp"

namespace {

thread_local std::string g_last_error = "no error";

partel_status map_code(partel::ErrorCode code) {
  using partel::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return PARTEL_ERR_INVALID_ARGUMENT;
    case ErrorCode::parse: return PARTEL_ERR_PARSE;
    case ErrorCode::io: return PARTEL_ERR_IO;
    case ErrorCode::infeasible: return PARTEL_ERR_INFEASIBLE;
    case ErrorCode::degenerate_dual: return PARTEL_ERR_DEGENERATE_DUAL;
    case ErrorCode::undefined_latency: return PARTEL_ERR_UNDEFINED_LATENCY;
    case ErrorCode::enumeration_bound: return PARTEL_ERR_ENUMERATION_BOUND;
  }
  return PARTEL_ERR_UNKNOWN;
}

template <typename Fn>
partel_status guarded(Fn&& fn) {
  try {
    fn();
    return PARTEL_OK;
  } catch (const partel::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PARTEL_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown failure";
    return PARTEL_ERR_UNKNOWN;
  }
}

partel_status need(bool ok, const char* what) {
  if (ok) return PARTEL_OK;
  g_last_error = what;
  return PARTEL_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct partel_scenario {
  partel::Scenario s;
};

struct partel_result {
  partel::SolveResult r;
};

struct partel_cnn_plan {
  partel::CnnRoundingPlan p;
};

struct partel_trace {
  partel::RoundTrace t;
};

extern "C" {

const char* partel_last_error(void) { return g_last_error.c_str(); }

const char* partel_version(void) { return "1.0.0"; }

void partel_gen_params_defaults(partel_gen_params* params) {
  if (!params) return;
  const partel::SystemConfig config;
  const partel::DistributionSpec dist = partel::DistributionSpec::defaults();
  params->num_workers = 10;
  params->num_subcarriers = config.num_subcarriers;
  params->subcarrier_bandwidth = config.subcarrier_bandwidth;
  params->noise_density = config.noise_power / config.subcarrier_bandwidth;
  params->bits_per_parameter = config.bits_per_parameter;
  params->circuit_energy = config.circuit_energy;
  params->power_cap = dist.power_cap;
  params->path_loss = dist.path_loss;
  params->model_size = config.model_size;
}

partel_status partel_scenario_generate(const partel_gen_params* params,
                                       uint64_t seed, partel_scenario** out) {
  if (auto st = need(params && out, "generate needs params and an out pointer"))
    return st;
  return guarded([&] {
    partel::SystemConfig config;
    config.num_subcarriers = params->num_subcarriers;
    config.subcarrier_bandwidth = params->subcarrier_bandwidth;
    config.noise_power = params->noise_density * params->subcarrier_bandwidth;
    config.bits_per_parameter = params->bits_per_parameter;
    config.circuit_energy = params->circuit_energy;
    config.model_size = params->model_size;
    partel::DistributionSpec dist = partel::DistributionSpec::defaults();
    dist.power_cap = params->power_cap;
    dist.path_loss = params->path_loss;
    auto owned = std::make_unique<partel_scenario>();
    owned->s =
        partel::generate_scenario(params->num_workers, config, dist, seed);
    *out = owned.release();
  });
}

partel_status partel_scenario_load(const char* path, partel_scenario** out) {
  if (auto st = need(path && out, "load needs a path and an out pointer"))
    return st;
  return guarded([&] {
    auto owned = std::make_unique<partel_scenario>();
    owned->s = partel::load_scenario(path);
    *out = owned.release();
  });
}

partel_status partel_scenario_save(const partel_scenario* s,
                                   const char* path) {
  if (auto st = need(s && path, "save needs a scenario and a path")) return st;
  return guarded([&] { partel::save_scenario(s->s, path); });
}

void partel_scenario_free(partel_scenario* s) { delete s; }

size_t partel_scenario_workers(const partel_scenario* s) {
  return s ? s->s.num_workers() : 0;
}

size_t partel_scenario_subcarriers(const partel_scenario* s) {
  return s ? s->s.num_subcarriers() : 0;
}

uint64_t partel_scenario_model_size(const partel_scenario* s) {
  return s ? s->s.config.model_size : 0;
}

partel_status partel_scenario_set_model_size(partel_scenario* s,
                                             uint64_t model_size) {
  if (auto st = need(s && model_size > 0,
                     "set model size needs a scenario and a positive size"))
    return st;
  s->s.config.model_size = model_size;
  return PARTEL_OK;
}

partel_status partel_min_latency(const partel_scenario* s,
                                 partel_scheme scheme, double model_size,
                                 partel_result** out) {
  if (auto st = need(s && out, "min latency needs a scenario and out pointer"))
    return st;
  return guarded([&] {
    const double L = model_size > 0.0
                         ? model_size
                         : static_cast<double>(s->s.config.model_size);
    partel::SolverOptions opts;
    auto owned = std::make_unique<partel_result>();
    switch (scheme) {
      case PARTEL_SCHEME_JOINT: {
        partel::SolveResult relaxed = partel::min_latency(s->s, L, opts);
        partel::SolveResult binary =
            partel::round_subcarriers(relaxed, s->s, L, opts);
        partel::AllocationPlan whole = partel::integerize_loads(
            binary.plan, s->s, static_cast<std::uint64_t>(std::llround(L)));
        owned->r = std::move(binary);
        owned->r.plan = std::move(whole);
        owned->r.achieved_model_size =
            partel::plan_total_load(owned->r.plan);
        break;
      }
      case PARTEL_SCHEME_PROPORTIONAL:
        owned->r = partel::proportional_baseline(s->s, L, opts);
        break;
      case PARTEL_SCHEME_GREEDY:
        owned->r = partel::greedy_feel(s->s, L, opts);
        break;
      default:
        partel::fail(partel::ErrorCode::invalid_argument, "unknown scheme");
    }
    *out = owned.release();
  });
}

partel_status partel_max_model_size(const partel_scenario* s, double deadline,
                                    partel_result** out) {
  if (auto st = need(s && out, "max size needs a scenario and out pointer"))
    return st;
  return guarded([&] {
    auto owned = std::make_unique<partel_result>();
    owned->r = partel::max_model_size(s->s, deadline);
    *out = owned.release();
  });
}

void partel_result_free(partel_result* r) { delete r; }

double partel_result_latency(const partel_result* r) {
  return r ? r->r.plan.latency : 0.0;
}

double partel_result_model_size(const partel_result* r) {
  return r ? r->r.achieved_model_size : 0.0;
}

int partel_result_converged(const partel_result* r) {
  return r && r->r.converged ? 1 : 0;
}

uint64_t partel_result_iterations(const partel_result* r) {
  return r ? r->r.iterations : 0;
}

partel_status partel_result_worker_loads(const partel_result* r, double* out,
                                         size_t len) {
  if (auto st = need(r && out, "worker loads need a result and a buffer"))
    return st;
  if (auto st = need(len >= r->r.plan.worker_loads.size(),
                     "worker loads buffer too small"))
    return st;
  std::memcpy(out, r->r.plan.worker_loads.data(),
              r->r.plan.worker_loads.size() * sizeof(double));
  return PARTEL_OK;
}

partel_status partel_result_feasibility(const partel_result* r,
                                        const partel_scenario* s,
                                        double tolerance, double granularity,
                                        double* worst_violation) {
  if (auto st =
          need(r && s && worst_violation, "feasibility needs result+scenario"))
    return st;
  return guarded([&] {
    std::optional<double> unit;
    if (granularity > 0.0) unit = granularity;
    const partel::ConstraintReport rep = partel::validate_plan(
        r->r.plan, s->s, unit, tolerance > 0.0 ? tolerance : 1e-6);
    *worst_violation = rep.worst_violation;
  });
}

partel_status partel_result_save(const partel_result* r, const char* path) {
  if (auto st = need(r && path, "save needs a result and a path")) return st;
  return guarded(
      [&] { partel::save_json(path, partel::solve_result_to_json(r->r)); });
}

partel_status partel_plan_cnn(const partel_scenario* s,
                              partel_cnn_stage stage, uint64_t batch_size,
                              uint64_t total_parameters,
                              partel_cnn_plan** out) {
  if (auto st = need(s && out, "cnn planning needs a scenario and out pointer"))
    return st;
  return guarded([&] {
    partel::CnnShape shape = partel::CnnShape::lenet_like(
        total_parameters ? total_parameters : 60'000);
    const partel::GranularitySpec g = partel::stage_granularity(
        shape,
        stage == PARTEL_CNN_ACTIVATIONS ? partel::CnnStage::activations
                                        : partel::CnnStage::weights,
        batch_size);
    auto owned = std::make_unique<partel_cnn_plan>();
    owned->p = partel::plan_cnn_round(s->s, g);
    *out = owned.release();
  });
}

void partel_cnn_free(partel_cnn_plan* p) { delete p; }

double partel_cnn_unit(const partel_cnn_plan* p) {
  if (!p || p->p.units.empty()) return 0.0;
  for (std::size_t k = 0; k < p->p.units.size(); ++k)
    if (p->p.units[k] > 0)
      return p->p.plan.worker_loads[k] / static_cast<double>(p->p.units[k]);
  return 0.0;
}

double partel_cnn_relaxed_latency(const partel_cnn_plan* p) {
  return p ? p->p.relaxed_latency : 0.0;
}

double partel_cnn_latency_bound(const partel_cnn_plan* p) {
  return p ? p->p.latency_bound : 0.0;
}

size_t partel_cnn_roundup_count(const partel_cnn_plan* p) {
  return p ? p->p.roundup_count : 0;
}

int partel_cnn_single_worker_fallback(const partel_cnn_plan* p) {
  return p && p->p.single_worker_fallback ? 1 : 0;
}

partel_status partel_cnn_units(const partel_cnn_plan* p, uint64_t* out,
                               size_t len) {
  if (auto st = need(p && out, "cnn units need a plan and a buffer")) return st;
  if (auto st = need(len >= p->p.units.size(), "cnn units buffer too small"))
    return st;
  std::memcpy(out, p->p.units.data(), p->p.units.size() * sizeof(uint64_t));
  return PARTEL_OK;
}

partel_status partel_cnn_save(const partel_cnn_plan* p, const char* path) {
  if (auto st = need(p && path, "save needs a plan and a path")) return st;
  return guarded([&] {
    nlohmann::json j;
    j["plan"] = partel::plan_to_json(p->p.plan);
    j["units"] = p->p.units;
    j["roundup_count"] = p->p.roundup_count;
    j["cutoff"] = p->p.cutoff;
    j["relaxed_latency"] = p->p.relaxed_latency;
    j["latency_bound"] = p->p.latency_bound;
    j["single_worker_fallback"] = p->p.single_worker_fallback;
    partel::save_json(path, j);
  });
}

void partel_sim_params_defaults(partel_sim_params* params) {
  if (!params) return;
  params->rounds = 50;
  params->num_samples = 1000;
  params->num_features = 2000;
  params->logistic = 0;
  params->l1 = 0;
  params->reg_strength = 1e-3;
  params->sparsity = 0.1;
  params->noise = 0.05;
  params->redraw_channels = 0;
  params->data_seed = 1;
}

partel_status partel_simulate(const partel_scenario* s, partel_scheme scheme,
                              const partel_sim_params* params,
                              partel_trace** out) {
  if (auto st = need(s && params && out, "simulate needs scenario and params"))
    return st;
  return guarded([&] {
    const partel::SyntheticDataset data = partel::make_synthetic_dataset(
        params->num_samples, params->num_features,
        params->logistic ? partel::InferenceKind::logistic
                         : partel::InferenceKind::linear,
        params->sparsity, params->noise, params->data_seed);
    partel::SimOptions opts;
    opts.rounds = params->rounds;
    opts.kind = params->logistic ? partel::InferenceKind::logistic
                                 : partel::InferenceKind::linear;
    opts.reg = params->l1 ? partel::Regularizer::l1 : partel::Regularizer::l2;
    opts.reg_strength = params->reg_strength;
    opts.redraw_channels = params->redraw_channels != 0;

    partel::PlannerKind planner = partel::PlannerKind::joint;
    if (scheme == PARTEL_SCHEME_PROPORTIONAL)
      planner = partel::PlannerKind::proportional;
    else if (scheme == PARTEL_SCHEME_GREEDY)
      planner = partel::PlannerKind::greedy;

    partel::SimResult sim = partel::run_partel(s->s, data, planner, opts);
    auto owned = std::make_unique<partel_trace>();
    owned->t = std::move(sim.trace);
    *out = owned.release();
  });
}

void partel_trace_free(partel_trace* t) { delete t; }

size_t partel_trace_rounds(const partel_trace* t) {
  return t ? t->t.rounds.size() : 0;
}

const char* partel_trace_scheme(const partel_trace* t) {
  return t ? t->t.scheme.c_str() : "";
}

partel_status partel_trace_row(const partel_trace* t, size_t index,
                               uint64_t* round, double* latency,
                               double* cumulative, double* loss) {
  if (auto st = need(t && round && latency && cumulative && loss,
                     "trace row needs a trace and out pointers"))
    return st;
  if (auto st = need(index < t->t.rounds.size(), "trace row out of range"))
    return st;
  const partel::RoundRecord& r = t->t.rounds[index];
  *round = r.round;
  *latency = r.round_latency;
  *cumulative = r.cumulative_latency;
  *loss = r.loss;
  return PARTEL_OK;
}

partel_status partel_trace_save(const partel_trace* t, const char* path) {
  if (auto st = need(t && path, "save needs a trace and a path")) return st;
  return guarded([&] {
    std::vector<std::vector<std::string>> rows;
    for (const partel::RoundRecord& r : t->t.rounds)
      rows.push_back({std::to_string(r.round),
                      partel::format_double(r.round_latency),
                      partel::format_double(r.cumulative_latency),
                      partel::format_double(r.loss), t->t.scheme,
                      std::to_string(t->t.seed)});
    partel::write_table(
        path, {"round", "latency", "cumulative_latency", "loss", "scheme",
               "seed"},
        rows);
  });
}

}  // extern "C"
