/* Shared-library interface for the partitioned-edge-learning round planner.
 *
 * All functions are thread-compatible: handles are not shared state, and the
 * last-error message is thread local. Every fallible call returns a
 * partel_status; on failure the out-parameters are untouched and
 * partel_last_error() describes what went wrong.
 */

#ifndef PARTEL_SUPPORT_H
#define PARTEL_SUPPORT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct partel_scenario partel_scenario;
typedef struct partel_result partel_result;
typedef struct partel_cnn_plan partel_cnn_plan;
typedef struct partel_trace partel_trace;

typedef enum partel_status {
  PARTEL_OK = 0,
  PARTEL_ERR_INVALID_ARGUMENT = 1,
  PARTEL_ERR_PARSE = 2,
  PARTEL_ERR_IO = 3,
  PARTEL_ERR_INFEASIBLE = 4,
  PARTEL_ERR_DEGENERATE_DUAL = 5,
  PARTEL_ERR_UNDEFINED_LATENCY = 6,
  PARTEL_ERR_ENUMERATION_BOUND = 7,
  PARTEL_ERR_UNKNOWN = 8
} partel_status;

/* Message for the most recent failure on this thread; never NULL. */
const char* partel_last_error(void);

const char* partel_version(void);

/* ---- scenarios ---------------------------------------------------------- */

typedef struct partel_gen_params {
  size_t num_workers;
  size_t num_subcarriers;
  double subcarrier_bandwidth; /* Hz */
  double noise_density;        /* W/Hz, thermal floor per Hz */
  double bits_per_parameter;
  double circuit_energy;       /* J per round, radio bring-up cost */
  double power_cap;            /* W, per worker */
  double path_loss;            /* mean channel gain */
  uint64_t model_size;         /* parameters to train per round */
} partel_gen_params;

void partel_gen_params_defaults(partel_gen_params* params);

partel_status partel_scenario_generate(const partel_gen_params* params,
                                       uint64_t seed, partel_scenario** out);
partel_status partel_scenario_load(const char* path, partel_scenario** out);
partel_status partel_scenario_save(const partel_scenario* s, const char* path);
void partel_scenario_free(partel_scenario* s);

size_t partel_scenario_workers(const partel_scenario* s);
size_t partel_scenario_subcarriers(const partel_scenario* s);
uint64_t partel_scenario_model_size(const partel_scenario* s);
/* Retargets the parameters trained per round; the file it came from is
 * untouched. Planning, validation, and reports all follow this value. */
partel_status partel_scenario_set_model_size(partel_scenario* s,
                                             uint64_t model_size);

/* ---- round planning ----------------------------------------------------- */

typedef enum partel_scheme {
  /* Joint subcarrier/load/power optimization, ownership rounded to binary,
   * block sizes rounded to whole parameters. */
  PARTEL_SCHEME_JOINT = 0,
  /* Block sizes proportional to compute speed, radio side optimized. */
  PARTEL_SCHEME_PROPORTIONAL = 1,
  /* Full-model upload per worker, subcarriers granted to the slowest. */
  PARTEL_SCHEME_GREEDY = 2
} partel_scheme;

/* Smallest round deadline that trains `model_size` parameters. Pass
 * model_size = 0 to use the scenario's own. */
partel_status partel_min_latency(const partel_scenario* s,
                                 partel_scheme scheme, double model_size,
                                 partel_result** out);

/* Largest trainable model at a fixed deadline (joint scheme, relaxed
 * ownership). */
partel_status partel_max_model_size(const partel_scenario* s, double deadline,
                                    partel_result** out);

void partel_result_free(partel_result* r);
double partel_result_latency(const partel_result* r);
double partel_result_model_size(const partel_result* r);
int partel_result_converged(const partel_result* r);
uint64_t partel_result_iterations(const partel_result* r);
partel_status partel_result_worker_loads(const partel_result* r, double* out,
                                         size_t len);
/* Worst constraint violation of the result's plan, as a fraction of each
 * constraint's scale; feasible plans stay below `tolerance`. Pass
 * granularity > 0 to also require block sizes on that grid. */
partel_status partel_result_feasibility(const partel_result* r,
                                        const partel_scenario* s,
                                        double tolerance, double granularity,
                                        double* worst_violation);
/* Deterministic JSON file (plan, duals, achieved size). */
partel_status partel_result_save(const partel_result* r, const char* path);

/* ---- granularity-constrained rounds ------------------------------------- */

typedef enum partel_cnn_stage {
  PARTEL_CNN_WEIGHTS = 0,     /* parameter blocks, whole filter groups */
  PARTEL_CNN_ACTIVATIONS = 1  /* per-sample features, whole samples */
} partel_cnn_stage;

/* Plans one round for a convolutional model with the reference layer shape
 * (226 indivisible groups). `total_parameters` = 0 keeps the default model;
 * `batch_size` only matters for the activation stage. */
partel_status partel_plan_cnn(const partel_scenario* s,
                              partel_cnn_stage stage, uint64_t batch_size,
                              uint64_t total_parameters,
                              partel_cnn_plan** out);

void partel_cnn_free(partel_cnn_plan* p);
double partel_cnn_unit(const partel_cnn_plan* p);
double partel_cnn_relaxed_latency(const partel_cnn_plan* p);
double partel_cnn_latency_bound(const partel_cnn_plan* p);
size_t partel_cnn_roundup_count(const partel_cnn_plan* p);
int partel_cnn_single_worker_fallback(const partel_cnn_plan* p);
partel_status partel_cnn_units(const partel_cnn_plan* p, uint64_t* out,
                               size_t len);
partel_status partel_cnn_save(const partel_cnn_plan* p, const char* path);

/* ---- training simulation ------------------------------------------------ */

typedef struct partel_sim_params {
  size_t rounds;
  size_t num_samples;
  size_t num_features;   /* model dimension the rounds train */
  int logistic;          /* 0 = linear link, 1 = logistic link */
  int l1;                /* 0 = ridge penalty, 1 = lasso penalty */
  double reg_strength;
  double sparsity;       /* fraction of nonzero ground-truth weights */
  double noise;          /* target noise level */
  int redraw_channels;   /* re-plan every round on fresh fading */
  uint64_t data_seed;
} partel_sim_params;

void partel_sim_params_defaults(partel_sim_params* params);

partel_status partel_simulate(const partel_scenario* s, partel_scheme scheme,
                              const partel_sim_params* params,
                              partel_trace** out);

void partel_trace_free(partel_trace* t);
size_t partel_trace_rounds(const partel_trace* t);
const char* partel_trace_scheme(const partel_trace* t);
partel_status partel_trace_row(const partel_trace* t, size_t index,
                               uint64_t* round, double* latency,
                               double* cumulative, double* loss);
/* Delimited table: round,latency,cumulative_latency,loss,scheme,seed. */
partel_status partel_trace_save(const partel_trace* t, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* PARTEL_SUPPORT_H */
