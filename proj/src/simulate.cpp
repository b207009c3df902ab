#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "errors.hpp"

namespace qrnglab {

double sample_interarrival(const LightSource& src, Xoshiro256pp& rng) {
  if (src.is_laser()) return rng.exponential(src.photon_rate());
  // Pump excitation wait plus radiative decay wait; exact for the two-level
  // emission renewal process.
  return rng.exponential(src.pump_rate()) + rng.exponential(src.decay_rate());
}

namespace {

struct PendingClick {
  double time = 0.0;
  std::uint8_t detector = 0;
};

// Groups recorded clicks into outcomes. A group extends while the next click
// lands strictly inside tau_cw of the previous one on the opposite detector;
// with 2*tau_cw < tau_dead groups are always pairs.
template <typename RecordFn, typename OutcomeFn>
class Classifier {
 public:
  Classifier(double tau_cw, RecordFn& rec, OutcomeFn& out)
      : tau_cw_(tau_cw), rec_(rec), out_(out) {}

  void feed(double time, std::uint8_t det) {
    if (!has_pending_) {
      pending_ = {time, det};
      has_pending_ = true;
      return;
    }
    const bool joins =
        det != pending_.detector && time - pending_.time < tau_cw_;
    if (joins) {
      rec_(ClickRecord{pending_.time, pending_.detector,
                       static_cast<std::uint8_t>(group_open_ ? 2 : 1)});
      pending_ = {time, det};
      group_open_ = true;
      return;
    }
    close_pending();
    pending_ = {time, det};
  }

  void finish() {
    if (has_pending_) close_pending();
    has_pending_ = false;
  }

 private:
  void close_pending() {
    if (group_open_) {
      rec_(ClickRecord{pending_.time, pending_.detector, 2});
      out_(Outcome::AB);
      group_open_ = false;
    } else {
      rec_(ClickRecord{pending_.time, pending_.detector, 0});
      out_(pending_.detector == 0 ? Outcome::A : Outcome::B);
    }
  }

  double tau_cw_;
  RecordFn& rec_;
  OutcomeFn& out_;
  PendingClick pending_{};
  bool has_pending_ = false;
  bool group_open_ = false;
};

struct JitteredClick {
  double arrival;
  double recorded;
  std::uint8_t detector;
};

// Drives the full pipeline. Draw order per emission is fixed: interarrival,
// transmission uniform, routing uniform, then one gaussian per accepted click
// when jitter is on.
template <typename RecordFn, typename OutcomeFn>
void run_simulation(const SimConfig& cfg, SimTallies& tal, RecordFn rec,
                    OutcomeFn out) {
  cfg.chain.validate();
  if (!(std::isfinite(cfg.duration) && cfg.duration > 0.0))
    throw std::domain_error("duration must be finite and positive");
  tal.duration = cfg.duration;

  Xoshiro256pp rng(cfg.seed);
  const double jitter_sigma = cfg.chain.sigma_jitt / std::sqrt(2.0);
  const bool jitter = cfg.jitter && cfg.chain.sigma_jitt > 0.0;

  Classifier<RecordFn, OutcomeFn> classifier(cfg.chain.tau_cw, rec, out);
  std::vector<JitteredClick> buffered;

  double t = 0.0;
  double ready[2] = {0.0, 0.0};  // next instant each detector can fire
  for (;;) {
    t += sample_interarrival(cfg.source, rng);
    if (t > cfg.duration) break;
    ++tal.emitted;
    if (rng.uniform() >= cfg.chain.eta_qe) continue;
    ++tal.transmitted;
    const std::uint8_t det = rng.uniform() < cfg.chain.p_a ? 0 : 1;
    (det == 0 ? tal.incident_a : tal.incident_b)++;
    if (t < ready[det]) {
      ++tal.dead_losses;
      continue;
    }
    ready[det] = t + cfg.chain.tau_dead;
    (det == 0 ? tal.clicks_a : tal.clicks_b)++;
    if (jitter) {
      buffered.push_back({t, t + jitter_sigma * rng.gaussian(), det});
    } else {
      classifier.feed(t, det);
    }
  }

  if (jitter) {
    std::stable_sort(buffered.begin(), buffered.end(),
                     [](const JitteredClick& x, const JitteredClick& y) {
                       return x.recorded < y.recorded;
                     });
    for (std::size_t i = 0; i + 1 < buffered.size(); ++i) {
      const auto& c1 = buffered[i];
      const auto& c2 = buffered[i + 1];
      if (c1.arrival > c2.arrival) ++tal.order_swaps;
      if (c1.detector != c2.detector) {
        const bool arrival_in = std::fabs(c2.arrival - c1.arrival) < cfg.chain.tau_cw;
        const bool recorded_in = c2.recorded - c1.recorded < cfg.chain.tau_cw;
        if (arrival_in && !recorded_in) ++tal.window_escapes;
        if (!arrival_in && recorded_in) ++tal.window_entries;
      }
    }
    for (const auto& c : buffered) classifier.feed(c.recorded, c.detector);
  }
  classifier.finish();
}

struct PairCounter {
  SimTallies* tal;
  std::array<std::array<std::uint64_t, 3>, 3>* keep;
  std::array<std::array<std::uint64_t, 2>, 2>* discard;
  int prev_keep = -1;
  int prev_discard = -1;

  void operator()(Outcome o) {
    const int s = static_cast<int>(o);
    (s == 0 ? tal->outcomes_a : s == 1 ? tal->outcomes_b : tal->outcomes_ab)++;
    if (prev_keep >= 0) (*keep)[prev_keep][s]++;
    prev_keep = s;
    if (s != 2) {
      if (prev_discard >= 0) (*discard)[prev_discard][s]++;
      prev_discard = s;
    }
  }
};

}  // namespace

EventStream simulate_stream(const SimConfig& cfg) {
  EventStream stream;
  stream.seed = cfg.seed;
  StreamStats scratch;
  PairCounter counter{&stream.tallies, &scratch.pairs_keep,
                      &scratch.pairs_discard};
  auto rec = [&stream](const ClickRecord& r) { stream.records.push_back(r); };
  auto out = [&stream, &counter](Outcome o) {
    stream.outcomes.push_back(o);
    counter(o);
  };
  run_simulation(cfg, stream.tallies, rec, out);
  return stream;
}

StreamStats simulate_counts(const SimConfig& cfg,
                            const std::function<void(const ClickRecord&)>* sink) {
  StreamStats stats;
  PairCounter counter{&stats.tallies, &stats.pairs_keep, &stats.pairs_discard};
  auto rec = [sink](const ClickRecord& r) {
    if (sink && *sink) (*sink)(r);
  };
  auto out = [&counter](Outcome o) { counter(o); };
  run_simulation(cfg, stats.tallies, rec, out);
  return stats;
}

namespace {

EmpiricalEstimate estimate_from_counts(
    const SimTallies& tal,
    const std::array<std::array<std::uint64_t, 3>, 3>& keep,
    const std::array<std::array<std::uint64_t, 2>, 2>& discard,
    OutcomeMode mode) {
  EmpiricalEstimate est;
  est.mode = mode;
  const int n = alphabet_size(mode);
  est.outcome_counts = {tal.outcomes_a, tal.outcomes_b,
                        mode == OutcomeMode::Keep ? tal.outcomes_ab : 0};
  est.total_outcomes = 0;
  for (int x = 0; x < n; ++x) est.total_outcomes += est.outcome_counts[x];
  if (est.total_outcomes < 1000)
    throw InsufficientDataError(
        "need at least 1000 recorded outcomes; got " +
        std::to_string(est.total_outcomes));

  const double total = static_cast<double>(est.total_outcomes);
  for (int x = 0; x < n; ++x) {
    const double p = est.outcome_counts[x] / total;
    est.stationary[x] = p;
    est.stationary_se[x] = std::sqrt(p * (1.0 - p) / total);
  }

  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      est.pair_counts[y][x] = mode == OutcomeMode::Keep ? keep[y][x]
                                                        : discard[y][x];
  for (int y = 0; y < n; ++y) {
    std::uint64_t ny = 0;
    for (int x = 0; x < n; ++x) ny += est.pair_counts[y][x];
    if (ny == 0) continue;
    for (int x = 0; x < n; ++x) {
      const double p = est.pair_counts[y][x] / static_cast<double>(ny);
      est.row[y][x] = p;
      est.row_se[y][x] = std::sqrt(p * (1.0 - p) / static_cast<double>(ny));
    }
  }

  const double T = tal.duration;
  const auto rate = [T](std::uint64_t c) { return c / T; };
  const auto se = [T](std::uint64_t c) { return std::sqrt(static_cast<double>(c)) / T; };
  est.rates.click_a = rate(tal.clicks_a);
  est.rates.click_b = rate(tal.clicks_b);
  est.rates.bit_a = rate(tal.outcomes_a);
  est.rates.bit_b = rate(tal.outcomes_b);
  est.rates.coincidence = rate(tal.outcomes_ab);
  est.rates.bit_total = est.rates.bit_a + est.rates.bit_b;
  est.rate_se.click_a = se(tal.clicks_a);
  est.rate_se.click_b = se(tal.clicks_b);
  est.rate_se.bit_a = se(tal.outcomes_a);
  est.rate_se.bit_b = se(tal.outcomes_b);
  est.rate_se.coincidence = se(tal.outcomes_ab);
  est.rate_se.bit_total = se(tal.outcomes_a + tal.outcomes_b);
  return est;
}

}  // namespace

EmpiricalEstimate estimate_statistics(const StreamStats& stats,
                                      OutcomeMode mode) {
  return estimate_from_counts(stats.tallies, stats.pairs_keep,
                              stats.pairs_discard, mode);
}

EmpiricalEstimate estimate_statistics(const EventStream& stream,
                                      OutcomeMode mode) {
  // Rebuild the pair counts from the outcome sequence.
  std::array<std::array<std::uint64_t, 3>, 3> keep{};
  std::array<std::array<std::uint64_t, 2>, 2> discard{};
  int prev_keep = -1, prev_discard = -1;
  for (Outcome o : stream.outcomes) {
    const int s = static_cast<int>(o);
    if (prev_keep >= 0) keep[prev_keep][s]++;
    prev_keep = s;
    if (s != 2) {
      if (prev_discard >= 0) discard[prev_discard][s]++;
      prev_discard = s;
    }
  }
  return estimate_from_counts(stream.tallies, keep, discard, mode);
}

}  // namespace qrnglab
