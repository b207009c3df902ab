/* C interface to the beam-splitter QRNG model library.
 *
 * Conventions: every fallible call returns a qrng_status; results travel
 * through out-parameters. On failure the out-parameters are untouched and
 * qrng_error_message() holds a thread-local description. Opaque handles are
 * released with their matching destroy function; destroy accepts NULL.
 */
#ifndef QRNG_H
#define QRNG_H

#include <stddef.h>
#include <stdint.h>

#if defined(QRNG_BUILDING)
#define QRNG_API __attribute__((visibility("default")))
#else
#define QRNG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qrng_status {
  QRNG_OK = 0,
  QRNG_E_ARGUMENT = 1, /* parameter outside its domain */
  QRNG_E_CONFIG = 2,   /* invalid configuration */
  QRNG_E_MODEL = 3,    /* model consistency or grid resolution failure */
  QRNG_E_DATA = 4,     /* not enough simulated data */
  QRNG_E_INTERNAL = 5
} qrng_status;

QRNG_API const char* qrng_version(void);
QRNG_API const char* qrng_error_message(void);

typedef enum qrng_source_kind {
  QRNG_SOURCE_LASER = 0,
  QRNG_SOURCE_TWO_LEVEL = 1
} qrng_source_kind;

typedef enum qrng_mode {
  QRNG_MODE_DISCARD = 0, /* coincidences removed from the outcome stream */
  QRNG_MODE_KEEP = 1     /* coincidences kept as a third symbol */
} qrng_mode;

typedef struct qrng_source {
  qrng_source_kind kind;
  double photon_rate; /* mean emissions per second */
  double decay_rate;  /* two-level emitters only; ignored for lasers */
} qrng_source;

typedef struct qrng_chain {
  double eta_qe;     /* detector quantum efficiency, (0,1] */
  double p_a;        /* splitter probability toward detector a, (0,1) */
  double tau_dead;   /* dead time, seconds */
  double tau_cw;     /* coincidence window, seconds */
  double sigma_jitt; /* two-click timing spread, seconds */
} qrng_chain;

QRNG_API void qrng_chain_defaults(qrng_chain* chain);

typedef struct qrng_rates {
  double click_a, click_b;
  double bit_a, bit_b;
  double coincidence;
  double bit_total;
} qrng_rates;

typedef struct qrng_transition_model {
  int alphabet;         /* 2 (discard) or 3 (keep) */
  double stationary[3]; /* outcome distribution; [2] is 0 when discarding */
  double row[3][3];     /* row[y][x] = p(next outcome x | previous y) */
} qrng_transition_model;

typedef struct qrng_entropy_point {
  double lambda;
  double outcome_rate;
  double shannon_cond, min_cond;  /* bits per outcome */
  double shannon_rate, min_rate;  /* bits per second */
} qrng_entropy_point;

typedef struct qrng_optimum {
  double lambda_star;
  double pump_star; /* NaN for lasers */
  double min_rate_star;
  int unimodal; /* 0: several coarse maxima, argmax returned unrefined */
} qrng_optimum;

/* Scalar model functions. */
QRNG_API qrng_status qrng_emission_rate(double pump_rate, double decay_rate,
                                        double* out);
QRNG_API qrng_status qrng_pump_rate_for(double photon_rate, double decay_rate,
                                        double* out);
QRNG_API qrng_status qrng_excited_population(double pump_rate,
                                             double decay_rate, double tau,
                                             double* out);
QRNG_API qrng_status qrng_g2(const qrng_source* src, double tau, double* out);
QRNG_API qrng_status qrng_g2_integral(const qrng_source* src, double t1,
                                      double t2, double* out);
QRNG_API qrng_status qrng_next_photon_density(const qrng_source* src,
                                              double eta, double tau,
                                              double* out);
QRNG_API qrng_status qrng_next_photon_cdf(const qrng_source* src, double eta,
                                          double tau, double* out);
QRNG_API qrng_status qrng_survival_probability(const qrng_source* src,
                                               double eta, double tau,
                                               double* out);
QRNG_API qrng_status qrng_survival_ratio(const qrng_source* src, double eta,
                                         double t1, double t2, double* out);
QRNG_API qrng_status qrng_permutation_probability(double tau_cw,
                                                  double sigma_jitt,
                                                  double* out);
QRNG_API qrng_status qrng_blind_count(const qrng_source* src,
                                      const qrng_chain* chain, int detector,
                                      double* out);
QRNG_API qrng_status qrng_click_rate(const qrng_source* src,
                                     const qrng_chain* chain, int detector,
                                     double* out);
QRNG_API qrng_status qrng_coincidence_probability(const qrng_source* src,
                                                  const qrng_chain* chain,
                                                  int given_detector,
                                                  double* out);
QRNG_API qrng_status qrng_rate_bundle(const qrng_source* src,
                                      const qrng_chain* chain,
                                      qrng_rates* out);
QRNG_API qrng_status qrng_release_distribution(const qrng_source* src,
                                               const qrng_chain* chain,
                                               qrng_mode mode,
                                               double out[3]);
QRNG_API qrng_status qrng_transition_matrix(const qrng_source* src,
                                            const qrng_chain* chain,
                                            qrng_mode mode,
                                            qrng_transition_model* out);
QRNG_API qrng_status qrng_entropy_eval(const qrng_source* src,
                                       const qrng_chain* chain,
                                       qrng_mode mode,
                                       qrng_entropy_point* out);
QRNG_API qrng_status qrng_find_optimum(qrng_source_kind kind,
                                       double decay_rate,
                                       const qrng_chain* chain,
                                       qrng_mode mode, qrng_optimum* out);

/* Robustness sweep definition (one varied parameter per point). */
typedef struct qrng_robustness_point {
  const char* parameter; /* "lifetime_ns", "tau_dead_ns", "eta_qe", "p_a" */
  double value;
  qrng_chain chain;
  double decay_rate;
} qrng_robustness_point;

QRNG_API size_t qrng_robustness_count(void);
QRNG_API qrng_status qrng_robustness_point_get(size_t index,
                                               qrng_robustness_point* out);

/* Waiting-time grid. dt/t_max of 0 select rate-adaptive values; m_max of 0
 * selects the default (12). */
typedef struct qrng_grid qrng_grid;
QRNG_API qrng_status qrng_grid_create(const qrng_source* src, double eta,
                                      double dt, double t_max, int m_max,
                                      qrng_grid** out);
QRNG_API void qrng_grid_destroy(qrng_grid* grid);
QRNG_API qrng_status qrng_grid_info(const qrng_grid* grid, double* dt,
                                    double* t_max, size_t* points,
                                    int* m_max);
/* Borrowed views into the grid arrays; valid until the grid is destroyed. */
QRNG_API qrng_status qrng_grid_density(const qrng_grid* grid, int m,
                                       const double** data, size_t* count);
QRNG_API qrng_status qrng_grid_count_curve(const qrng_grid* grid, int m,
                                           const double** data, size_t* count);
QRNG_API qrng_status qrng_grid_count_probability(const qrng_grid* grid, int m,
                                                 double tau, double* out);
QRNG_API qrng_status qrng_grid_no_photon_interval(const qrng_grid* grid,
                                                  double t1, double t2,
                                                  double* out);

/* Event simulator. */
typedef struct qrng_sim qrng_sim;

typedef struct qrng_sim_config {
  qrng_source source;
  qrng_chain chain;
  double duration; /* simulated seconds */
  uint64_t seed;
  int jitter; /* nonzero applies timing jitter to recorded times */
} qrng_sim_config;

typedef struct qrng_click {
  double time;      /* recorded timestamp, seconds */
  uint8_t detector; /* 0 = a, 1 = b */
  uint8_t group;    /* 0 single, 1 first of a coincidence, 2 later member */
} qrng_click;

typedef struct qrng_sim_tallies {
  uint64_t emitted, transmitted;
  uint64_t incident_a, incident_b;
  uint64_t clicks_a, clicks_b;
  uint64_t dead_losses;
  uint64_t outcomes_a, outcomes_b, outcomes_ab;
  uint64_t order_swaps, window_escapes, window_entries;
  double duration;
} qrng_sim_tallies;

typedef struct qrng_sim_stats {
  qrng_sim_tallies tallies;
  uint64_t total_outcomes;
  uint64_t outcome_counts[3];
  uint64_t pair_counts[3][3];
  double stationary[3], stationary_se[3];
  qrng_transition_model matrix; /* empirical rows */
  double row_se[3][3];
  qrng_rates rates, rate_se;
} qrng_sim_stats;

/* Runs the full simulation and keeps clicks and outcomes in memory. */
QRNG_API qrng_status qrng_sim_run(const qrng_sim_config* cfg, qrng_sim** out);
QRNG_API void qrng_sim_destroy(qrng_sim* sim);
QRNG_API qrng_status qrng_sim_tallies_get(const qrng_sim* sim,
                                          qrng_sim_tallies* out);
QRNG_API qrng_status qrng_sim_clicks(const qrng_sim* sim,
                                     const qrng_click** data, size_t* count);
/* Keep-alphabet outcome symbols, 0/1/2 per entry. */
QRNG_API qrng_status qrng_sim_outcomes(const qrng_sim* sim,
                                       const uint8_t** data, size_t* count);
QRNG_API qrng_status qrng_sim_statistics(const qrng_sim* sim, qrng_mode mode,
                                         qrng_sim_stats* out);
QRNG_API const char* qrng_rng_algorithm(void);

/* Streaming run: clicks go to the callback in time order and are not
 * retained, so memory stays bounded on long runs. callback may be NULL. */
typedef void (*qrng_click_callback)(const qrng_click* click, void* user);
QRNG_API qrng_status qrng_sim_run_streamed(const qrng_sim_config* cfg,
                                           qrng_click_callback callback,
                                           void* user, qrng_mode mode,
                                           qrng_sim_stats* out);

/* Toeplitz extractor. */
typedef struct qrng_extractor qrng_extractor;
QRNG_API qrng_status qrng_extractor_create(qrng_mode mode,
                                           size_t block_outcomes, double h_min,
                                           double eps_log2, uint64_t seed,
                                           qrng_extractor** out);
QRNG_API void qrng_extractor_destroy(qrng_extractor* ext);
QRNG_API qrng_status qrng_extractor_sizes(const qrng_extractor* ext,
                                          size_t* input_bits,
                                          size_t* output_bits,
                                          size_t* seed_bits);
QRNG_API qrng_status qrng_extractor_seed_fingerprint(const qrng_extractor* ext,
                                                     uint64_t* out);
/* outcomes: exactly block_outcomes symbols (0/1/2). out receives the hashed
 * block packed MSB-first; out_capacity must be >= (output_bits+7)/8. */
QRNG_API qrng_status qrng_extractor_block(const qrng_extractor* ext,
                                          const uint8_t* outcomes,
                                          size_t count, uint8_t* out,
                                          size_t out_capacity,
                                          size_t* out_bits);

#ifdef __cplusplus
}
#endif

#endif /* QRNG_H */
