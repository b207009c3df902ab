// C ABI over the model library: exceptions become status codes, C++ objects
// hide behind opaque handles, and a thread-local buffer carries the last
// error text.
#include "qrng.h"

#include <array>
#include <cmath>
#include <cstring>
#include <exception>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "detection.hpp"
#include "entropy.hpp"
#include "errors.hpp"
#include "extract.hpp"
#include "simulate.hpp"
#include "source.hpp"
#include "transitions.hpp"
#include "waiting.hpp"

namespace {

thread_local std::string g_error;

void set_error(const char* what) { g_error = what ? what : ""; }

template <typename F>
qrng_status wrap(F&& body) {
  try {
    body();
    return QRNG_OK;
  } catch (const qrnglab::ConfigError& e) {
    set_error(e.what());
    return QRNG_E_CONFIG;
  } catch (const qrnglab::InsufficientDataError& e) {
    set_error(e.what());
    return QRNG_E_DATA;
  } catch (const qrnglab::ModelError& e) {  // includes resolution/numeric
    set_error(e.what());
    return QRNG_E_MODEL;
  } catch (const std::domain_error& e) {
    set_error(e.what());
    return QRNG_E_ARGUMENT;
  } catch (const std::out_of_range& e) {
    set_error(e.what());
    return QRNG_E_ARGUMENT;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return QRNG_E_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return QRNG_E_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return QRNG_E_INTERNAL;
  }
}

void require(const void* ptr, const char* name) {
  if (!ptr) throw std::invalid_argument(std::string(name) + " must not be null");
}

qrnglab::LightSource to_source(const qrng_source* src) {
  require(src, "source");
  switch (src->kind) {
    case QRNG_SOURCE_LASER:
      return qrnglab::LightSource::laser(src->photon_rate);
    case QRNG_SOURCE_TWO_LEVEL:
      return qrnglab::LightSource::two_level_for_rate(src->photon_rate,
                                                      src->decay_rate);
  }
  throw std::invalid_argument("unknown source kind");
}

qrnglab::SourceKind to_kind(qrng_source_kind kind) {
  switch (kind) {
    case QRNG_SOURCE_LASER:
      return qrnglab::SourceKind::Laser;
    case QRNG_SOURCE_TWO_LEVEL:
      return qrnglab::SourceKind::TwoLevelEmitter;
  }
  throw std::invalid_argument("unknown source kind");
}

qrnglab::DetectorChain to_chain(const qrng_chain* chain) {
  require(chain, "chain");
  qrnglab::DetectorChain c;
  c.eta_qe = chain->eta_qe;
  c.p_a = chain->p_a;
  c.tau_dead = chain->tau_dead;
  c.tau_cw = chain->tau_cw;
  c.sigma_jitt = chain->sigma_jitt;
  return c;
}

void from_chain(const qrnglab::DetectorChain& c, qrng_chain* out) {
  out->eta_qe = c.eta_qe;
  out->p_a = c.p_a;
  out->tau_dead = c.tau_dead;
  out->tau_cw = c.tau_cw;
  out->sigma_jitt = c.sigma_jitt;
}

qrnglab::OutcomeMode to_mode(qrng_mode mode) {
  switch (mode) {
    case QRNG_MODE_DISCARD:
      return qrnglab::OutcomeMode::Discard;
    case QRNG_MODE_KEEP:
      return qrnglab::OutcomeMode::Keep;
  }
  throw std::invalid_argument("unknown outcome mode");
}

qrnglab::Detector to_detector(int d) {
  if (d == 0) return qrnglab::Detector::A;
  if (d == 1) return qrnglab::Detector::B;
  throw std::invalid_argument("detector must be 0 (a) or 1 (b)");
}

void from_rates(const qrnglab::RateBundle& r, qrng_rates* out) {
  out->click_a = r.click_a;
  out->click_b = r.click_b;
  out->bit_a = r.bit_a;
  out->bit_b = r.bit_b;
  out->coincidence = r.coincidence;
  out->bit_total = r.bit_total;
}

void from_model(const qrnglab::TransitionModel& m, qrng_transition_model* out) {
  out->alphabet = m.alphabet;
  for (int y = 0; y < 3; ++y) {
    out->stationary[y] = m.stationary[static_cast<std::size_t>(y)];
    for (int x = 0; x < 3; ++x)
      out->row[y][x] =
          m.row[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
  }
}

const std::vector<qrnglab::RobustnessPoint>& robustness_table() {
  static const std::vector<qrnglab::RobustnessPoint> table =
      qrnglab::robustness_points();
  return table;
}

}  // namespace

extern "C" {

const char* qrng_version(void) { return "qrng 1.0.0"; }

const char* qrng_error_message(void) { return g_error.c_str(); }

void qrng_chain_defaults(qrng_chain* chain) {
  if (!chain) return;
  from_chain(qrnglab::DetectorChain{}, chain);
}

qrng_status qrng_emission_rate(double pump_rate, double decay_rate,
                               double* out) {
  return wrap([&] {
    require(out, "out");
    *out = qrnglab::emission_rate(pump_rate, decay_rate);
  });
}

qrng_status qrng_pump_rate_for(double photon_rate, double decay_rate,
                               double* out) {
  return wrap([&] {
    require(out, "out");
    *out = qrnglab::pump_rate_for(photon_rate, decay_rate);
  });
}

qrng_status qrng_excited_population(double pump_rate, double decay_rate,
                                    double tau, double* out) {
  return wrap([&] {
    require(out, "out");
    *out = qrnglab::excited_population(pump_rate, decay_rate, tau);
  });
}

qrng_status qrng_g2(const qrng_source* src, double tau, double* out) {
  return wrap([&] {
    require(out, "out");
    *out = to_source(src).g2(tau);
  });
}

qrng_status qrng_g2_integral(const qrng_source* src, double t1, double t2,
                             double* out) {
  return wrap([&] {
    require(out, "out");
    *out = to_source(src).g2_integral(t1, t2);
  });
}

qrng_status qrng_next_photon_density(const qrng_source* src, double eta,
                                     double tau, double* out) {
  return wrap([&] {
    require(out, "out");
    *out = qrnglab::next_photon_density(to_source(src), eta, tau);
  });
}

qrng_status qrng_next_photon_cdf(const qrng_source* src, double eta,
                                 double tau, double* out) {
  return wrap([&] {
    require(out, "out");
    *out = qrnglab::next_photon_cdf(to_source(src), eta, tau);
  });
}

qrng_status qrng_survival_probability(const qrng_source* src, double eta,
                                      double tau, double* out) {
  return wrap([&] {
    require(out, "out");
    *out = qrnglab::survival_probability(to_source(src), eta, tau);
  });
}

qrng_status qrng_survival_ratio(const qrng_source* src, double eta, double t1,
                                double t2, double* out) {
  return wrap([&] {
    require(out, "out");
    *out = qrnglab::survival_ratio(to_source(src), eta, t1, t2);
  });
}

qrng_status qrng_permutation_probability(double tau_cw, double sigma_jitt,
                                         double* out) {
  return wrap([&] {
    require(out, "out");
    *out = qrnglab::permutation_probability(tau_cw, sigma_jitt);
  });
}

qrng_status qrng_blind_count(const qrng_source* src, const qrng_chain* chain,
                             int detector, double* out) {
  return wrap([&] {
    require(out, "out");
    *out = qrnglab::blind_count(to_source(src), to_chain(chain),
                                to_detector(detector));
  });
}

qrng_status qrng_click_rate(const qrng_source* src, const qrng_chain* chain,
                            int detector, double* out) {
  return wrap([&] {
    require(out, "out");
    *out = qrnglab::click_rate(to_source(src), to_chain(chain),
                               to_detector(detector));
  });
}

qrng_status qrng_coincidence_probability(const qrng_source* src,
                                         const qrng_chain* chain,
                                         int given_detector, double* out) {
  return wrap([&] {
    require(out, "out");
    *out = qrnglab::coincidence_probability(to_source(src), to_chain(chain),
                                            to_detector(given_detector));
  });
}

qrng_status qrng_rate_bundle(const qrng_source* src, const qrng_chain* chain,
                             qrng_rates* out) {
  return wrap([&] {
    require(out, "out");
    from_rates(qrnglab::rate_bundle(to_source(src), to_chain(chain)), out);
  });
}

qrng_status qrng_release_distribution(const qrng_source* src,
                                      const qrng_chain* chain, qrng_mode mode,
                                      double out[3]) {
  return wrap([&] {
    require(out, "out");
    const auto rel = qrnglab::release_distribution(to_source(src),
                                                   to_chain(chain),
                                                   to_mode(mode));
    out[0] = rel[0];
    out[1] = rel[1];
    out[2] = rel[2];
  });
}

qrng_status qrng_transition_matrix(const qrng_source* src,
                                   const qrng_chain* chain, qrng_mode mode,
                                   qrng_transition_model* out) {
  return wrap([&] {
    require(out, "out");
    from_model(qrnglab::transition_matrix(to_source(src), to_chain(chain),
                                          to_mode(mode)),
               out);
  });
}

qrng_status qrng_entropy_eval(const qrng_source* src, const qrng_chain* chain,
                              qrng_mode mode, qrng_entropy_point* out) {
  return wrap([&] {
    require(out, "out");
    const auto pt = qrnglab::entropy_point(to_source(src), to_chain(chain),
                                           to_mode(mode));
    out->lambda = pt.lambda;
    out->outcome_rate = pt.outcome_rate;
    out->shannon_cond = pt.shannon_cond;
    out->min_cond = pt.min_cond;
    out->shannon_rate = pt.shannon_rate;
    out->min_rate = pt.min_rate;
  });
}

qrng_status qrng_find_optimum(qrng_source_kind kind, double decay_rate,
                              const qrng_chain* chain, qrng_mode mode,
                              qrng_optimum* out) {
  return wrap([&] {
    require(out, "out");
    qrnglab::SourceFamily family;
    family.kind = to_kind(kind);
    family.decay_rate = decay_rate;
    const auto report =
        qrnglab::find_optimum(family, to_chain(chain), to_mode(mode));
    out->lambda_star = report.lambda_star;
    out->pump_star = report.pump_star;
    out->min_rate_star = report.min_rate_star;
    out->unimodal = report.unimodal ? 1 : 0;
  });
}

size_t qrng_robustness_count(void) { return robustness_table().size(); }

qrng_status qrng_robustness_point_get(size_t index,
                                      qrng_robustness_point* out) {
  return wrap([&] {
    require(out, "out");
    const auto& table = robustness_table();
    if (index >= table.size())
      throw std::out_of_range("robustness point index out of range");
    const auto& pt = table[index];
    out->parameter = pt.parameter;
    out->value = pt.value;
    from_chain(pt.chain, &out->chain);
    out->decay_rate = pt.decay_rate;
  });
}

}  // extern "C"

struct qrng_grid {
  qrnglab::WaitingTimeGrid impl;
};

extern "C" {

qrng_status qrng_grid_create(const qrng_source* src, double eta, double dt,
                             double t_max, int m_max, qrng_grid** out) {
  return wrap([&] {
    require(out, "out");
    qrnglab::GridOptions opt;
    opt.dt = dt;
    opt.t_max = t_max;
    if (m_max != 0) opt.m_max = m_max;
    *out = new qrng_grid{qrnglab::WaitingTimeGrid(to_source(src), eta, opt)};
  });
}

void qrng_grid_destroy(qrng_grid* grid) { delete grid; }

qrng_status qrng_grid_info(const qrng_grid* grid, double* dt, double* t_max,
                           size_t* points, int* m_max) {
  return wrap([&] {
    require(grid, "grid");
    if (dt) *dt = grid->impl.dt();
    if (t_max) *t_max = grid->impl.t_max();
    if (points) *points = grid->impl.points();
    if (m_max) *m_max = grid->impl.m_max();
  });
}

qrng_status qrng_grid_density(const qrng_grid* grid, int m,
                              const double** data, size_t* count) {
  return wrap([&] {
    require(grid, "grid");
    require(data, "data");
    require(count, "count");
    const auto& curve = grid->impl.density(m);
    *data = curve.data();
    *count = curve.size();
  });
}

qrng_status qrng_grid_count_curve(const qrng_grid* grid, int m,
                                  const double** data, size_t* count) {
  return wrap([&] {
    require(grid, "grid");
    require(data, "data");
    require(count, "count");
    const auto& curve = grid->impl.count_curve(m);
    *data = curve.data();
    *count = curve.size();
  });
}

qrng_status qrng_grid_count_probability(const qrng_grid* grid, int m,
                                        double tau, double* out) {
  return wrap([&] {
    require(grid, "grid");
    require(out, "out");
    *out = grid->impl.count_probability(m, tau);
  });
}

qrng_status qrng_grid_no_photon_interval(const qrng_grid* grid, double t1,
                                         double t2, double* out) {
  return wrap([&] {
    require(grid, "grid");
    require(out, "out");
    *out = grid->impl.no_photon_in_interval(t1, t2);
  });
}

}  // extern "C"

struct qrng_sim {
  std::vector<qrng_click> clicks;
  std::vector<std::uint8_t> outcomes;
  qrnglab::EventStream stream;  // records released after conversion
};

namespace {

qrnglab::SimConfig to_sim_config(const qrng_sim_config* cfg) {
  require(cfg, "config");
  qrnglab::SimConfig c;
  c.source = to_source(&cfg->source);
  c.chain = to_chain(&cfg->chain);
  c.duration = cfg->duration;
  c.seed = cfg->seed;
  c.jitter = cfg->jitter != 0;
  return c;
}

qrng_click to_click(const qrnglab::ClickRecord& r) {
  qrng_click c;
  c.time = r.time;
  c.detector = r.detector;
  c.group = r.group;
  return c;
}

void from_tallies(const qrnglab::SimTallies& t, qrng_sim_tallies* out) {
  out->emitted = t.emitted;
  out->transmitted = t.transmitted;
  out->incident_a = t.incident_a;
  out->incident_b = t.incident_b;
  out->clicks_a = t.clicks_a;
  out->clicks_b = t.clicks_b;
  out->dead_losses = t.dead_losses;
  out->outcomes_a = t.outcomes_a;
  out->outcomes_b = t.outcomes_b;
  out->outcomes_ab = t.outcomes_ab;
  out->order_swaps = t.order_swaps;
  out->window_escapes = t.window_escapes;
  out->window_entries = t.window_entries;
  out->duration = t.duration;
}

void from_estimate(const qrnglab::EmpiricalEstimate& est, qrng_mode mode,
                   const qrnglab::SimTallies& tallies, qrng_sim_stats* out) {
  std::memset(out, 0, sizeof(*out));
  from_tallies(tallies, &out->tallies);
  out->total_outcomes = est.total_outcomes;
  for (int y = 0; y < 3; ++y) {
    out->outcome_counts[y] = est.outcome_counts[static_cast<std::size_t>(y)];
    out->stationary[y] = est.stationary[static_cast<std::size_t>(y)];
    out->stationary_se[y] = est.stationary_se[static_cast<std::size_t>(y)];
    for (int x = 0; x < 3; ++x) {
      out->pair_counts[y][x] =
          est.pair_counts[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
      out->matrix.row[y][x] =
          est.row[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
      out->row_se[y][x] =
          est.row_se[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
    }
    out->matrix.stationary[y] = est.stationary[static_cast<std::size_t>(y)];
  }
  out->matrix.alphabet = qrnglab::alphabet_size(est.mode);
  (void)mode;
  from_rates(est.rates, &out->rates);
  from_rates(est.rate_se, &out->rate_se);
}

}  // namespace

extern "C" {

qrng_status qrng_sim_run(const qrng_sim_config* cfg, qrng_sim** out) {
  return wrap([&] {
    require(out, "out");
    auto sim = std::make_unique<qrng_sim>();
    sim->stream = qrnglab::simulate_stream(to_sim_config(cfg));
    sim->clicks.reserve(sim->stream.records.size());
    for (const auto& r : sim->stream.records) sim->clicks.push_back(to_click(r));
    sim->stream.records.clear();
    sim->stream.records.shrink_to_fit();
    sim->outcomes.reserve(sim->stream.outcomes.size());
    for (auto o : sim->stream.outcomes)
      sim->outcomes.push_back(static_cast<std::uint8_t>(o));
    *out = sim.release();
  });
}

void qrng_sim_destroy(qrng_sim* sim) { delete sim; }

qrng_status qrng_sim_tallies_get(const qrng_sim* sim, qrng_sim_tallies* out) {
  return wrap([&] {
    require(sim, "sim");
    require(out, "out");
    from_tallies(sim->stream.tallies, out);
  });
}

qrng_status qrng_sim_clicks(const qrng_sim* sim, const qrng_click** data,
                            size_t* count) {
  return wrap([&] {
    require(sim, "sim");
    require(data, "data");
    require(count, "count");
    *data = sim->clicks.data();
    *count = sim->clicks.size();
  });
}

qrng_status qrng_sim_outcomes(const qrng_sim* sim, const uint8_t** data,
                              size_t* count) {
  return wrap([&] {
    require(sim, "sim");
    require(data, "data");
    require(count, "count");
    *data = sim->outcomes.data();
    *count = sim->outcomes.size();
  });
}

qrng_status qrng_sim_statistics(const qrng_sim* sim, qrng_mode mode,
                                qrng_sim_stats* out) {
  return wrap([&] {
    require(sim, "sim");
    require(out, "out");
    const auto est =
        qrnglab::estimate_statistics(sim->stream, to_mode(mode));
    from_estimate(est, mode, sim->stream.tallies, out);
  });
}

const char* qrng_rng_algorithm(void) {
  return qrnglab::Xoshiro256pp::kAlgorithm;
}

qrng_status qrng_sim_run_streamed(const qrng_sim_config* cfg,
                                  qrng_click_callback callback, void* user,
                                  qrng_mode mode, qrng_sim_stats* out) {
  return wrap([&] {
    const auto config = to_sim_config(cfg);
    std::function<void(const qrnglab::ClickRecord&)> sink;
    const std::function<void(const qrnglab::ClickRecord&)>* sink_ptr = nullptr;
    if (callback) {
      sink = [callback, user](const qrnglab::ClickRecord& r) {
        const qrng_click c = to_click(r);
        callback(&c, user);
      };
      sink_ptr = &sink;
    }
    const auto stats = qrnglab::simulate_counts(config, sink_ptr);
    if (out) {
      const auto est = qrnglab::estimate_statistics(stats, to_mode(mode));
      from_estimate(est, mode, stats.tallies, out);
    }
  });
}

}  // extern "C"

struct qrng_extractor {
  qrnglab::ToeplitzExtractor impl;
};

extern "C" {

qrng_status qrng_extractor_create(qrng_mode mode, size_t block_outcomes,
                                  double h_min, double eps_log2, uint64_t seed,
                                  qrng_extractor** out) {
  return wrap([&] {
    require(out, "out");
    qrnglab::ExtractorParams params;
    params.block_outcomes = block_outcomes;
    params.h_min = h_min;
    params.eps_log2 = eps_log2;
    params.mode = to_mode(mode);
    *out = new qrng_extractor{
        qrnglab::ToeplitzExtractor::from_seed(params, seed)};
  });
}

void qrng_extractor_destroy(qrng_extractor* ext) { delete ext; }

qrng_status qrng_extractor_sizes(const qrng_extractor* ext, size_t* input_bits,
                                 size_t* output_bits, size_t* seed_bits) {
  return wrap([&] {
    require(ext, "extractor");
    const auto& params = ext->impl.params();
    if (input_bits) *input_bits = params.input_bits();
    if (output_bits) *output_bits = params.output_bits();
    if (seed_bits) *seed_bits = params.seed_bits();
  });
}

qrng_status qrng_extractor_seed_fingerprint(const qrng_extractor* ext,
                                            uint64_t* out) {
  return wrap([&] {
    require(ext, "extractor");
    require(out, "out");
    *out = ext->impl.seed_fingerprint();
  });
}

qrng_status qrng_extractor_block(const qrng_extractor* ext,
                                 const uint8_t* outcomes, size_t count,
                                 uint8_t* out, size_t out_capacity,
                                 size_t* out_bits) {
  return wrap([&] {
    require(ext, "extractor");
    require(outcomes, "outcomes");
    require(out, "out");
    std::vector<qrnglab::Outcome> symbols;
    symbols.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      if (outcomes[i] > 2)
        throw std::domain_error("outcome symbols must be 0, 1 or 2");
      symbols.push_back(static_cast<qrnglab::Outcome>(outcomes[i]));
    }
    const auto hashed = ext->impl.extract_block(symbols);
    if (out_capacity < hashed.bytes.size())
      throw std::invalid_argument("output buffer too small for hashed block");
    std::memcpy(out, hashed.bytes.data(), hashed.bytes.size());
    if (out_bits) *out_bits = hashed.bit_count;
  });
}

}  // extern "C"
