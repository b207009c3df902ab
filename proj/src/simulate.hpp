// Event-level Monte Carlo of source, splitter, detectors and outcome
// classification. Everything is sampled microscopically and independently of
// the analytical chain; agreement between the two is a test, not an input.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "rng.hpp"
#include "transitions.hpp"

namespace qrnglab {

struct SimConfig {
  LightSource source = LightSource::laser(1e7);
  DetectorChain chain{};
  double duration = 1.0;  // simulated seconds
  std::uint64_t seed = 1;
  bool jitter = false;    // apply Gaussian timing jitter to recorded times
};

struct ClickRecord {
  double time = 0.0;          // recorded timestamp, seconds
  std::uint8_t detector = 0;  // 0 = a, 1 = b
  // 0 single, 1 first click of a coincidence group, 2 later group member.
  std::uint8_t group = 0;
};

struct SimTallies {
  std::uint64_t emitted = 0;      // photons leaving the source
  std::uint64_t transmitted = 0;  // photons surviving the efficiency draw
  std::uint64_t incident_a = 0, incident_b = 0;
  std::uint64_t clicks_a = 0, clicks_b = 0;
  std::uint64_t dead_losses = 0;  // photons arriving inside a dead interval
  std::uint64_t outcomes_a = 0, outcomes_b = 0, outcomes_ab = 0;
  // Jitter diagnostics over adjacent recorded clicks.
  std::uint64_t order_swaps = 0;     // recorded order differs from arrival order
  std::uint64_t window_escapes = 0;  // arrival pair inside tau_cw, recorded outside
  std::uint64_t window_entries = 0;  // arrival pair outside tau_cw, recorded inside
  double duration = 0.0;
};

struct StreamStats {
  SimTallies tallies;
  std::array<std::array<std::uint64_t, 3>, 3> pairs_keep{};
  std::array<std::array<std::uint64_t, 2>, 2> pairs_discard{};
};

struct EventStream {
  std::vector<ClickRecord> records;  // in recorded-time order
  std::vector<Outcome> outcomes;     // keep-alphabet outcome sequence
  SimTallies tallies;
  std::uint64_t seed = 0;
  const char* rng_name = Xoshiro256pp::kAlgorithm;
};

// Delay from one emission to the next.
double sample_interarrival(const LightSource& src, Xoshiro256pp& rng);

EventStream simulate_stream(const SimConfig& cfg);

// Counting variant: does not retain clicks, so memory stays O(1) for long
// runs. `sink`, when set, receives every record in time order.
StreamStats simulate_counts(const SimConfig& cfg,
                            const std::function<void(const ClickRecord&)>* sink = nullptr);

struct EmpiricalEstimate {
  OutcomeMode mode = OutcomeMode::Discard;
  std::uint64_t total_outcomes = 0;
  std::array<std::uint64_t, 3> outcome_counts{};
  std::array<std::array<std::uint64_t, 3>, 3> pair_counts{};
  std::array<double, 3> stationary{}, stationary_se{};
  std::array<std::array<double, 3>, 3> row{}, row_se{};  // binomial SE at p-hat
  RateBundle rates, rate_se;  // empirical rates with Poisson standard errors
};

// Requires at least 1000 outcomes in the chosen mode.
EmpiricalEstimate estimate_statistics(const StreamStats& stats, OutcomeMode mode);
EmpiricalEstimate estimate_statistics(const EventStream& stream, OutcomeMode mode);

}  // namespace qrnglab
