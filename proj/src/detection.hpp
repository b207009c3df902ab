// Detector pair behind a beam splitter: efficiencies, non-paralyzable dead
// time, coincidence window, timing jitter, and the stationary click, bit and
// coincidence rates.
#pragma once

#include "source.hpp"

namespace qrnglab {

enum class Detector { A = 0, B = 1 };

constexpr Detector other(Detector d) {
  return d == Detector::A ? Detector::B : Detector::A;
}

struct DetectorChain {
  double eta_qe = 0.6;          // quantum efficiency, shared by both detectors
  double p_a = 0.5;             // splitter probability toward detector a
  double tau_dead = 50e-9;      // dead time, seconds
  double tau_cw = 2e-9;         // coincidence window, seconds
  double sigma_jitt = 250e-12;  // total two-click timing spread, seconds

  double p_toward(Detector d) const {
    return d == Detector::A ? p_a : 1.0 - p_a;
  }
  double efficiency(Detector d) const { return eta_qe * p_toward(d); }

  void validate() const;
  // Additionally requires 2*tau_cw < tau_dead, the regime in which recorded
  // coincidences are always pairs and the transition model applies.
  void validate_for_transitions() const;
};

struct RateBundle {
  double click_a = 0.0, click_b = 0.0;  // recorded click rates
  double bit_a = 0.0, bit_b = 0.0;      // single-outcome rates
  double coincidence = 0.0;             // coincidence-outcome rate
  double bit_total = 0.0;               // bit_a + bit_b
};

// Probability that two clicks truly separated by tau_cw are recorded in
// swapped order given the jitter spread.
double permutation_probability(double tau_cw, double sigma_jitt);

// Mean photon number detector d sees during its own dead time.
double blind_count(const LightSource& src, const DetectorChain& chain,
                   Detector d);

// Stationary click rate of detector d including dead-time loss; bounded by
// 1/tau_dead.
double click_rate(const LightSource& src, const DetectorChain& chain,
                  Detector d);

// Probability that a click on `given` is accompanied by an opposite-detector
// click within the coincidence window.
double coincidence_probability(const LightSource& src,
                               const DetectorChain& chain, Detector given);

// Probability that detector d clicks during [t1, t2] measured from a click at
// 0 on the opposite detector; single-click regime, so t2 - t1 <= tau_dead.
double click_probability_interval(const LightSource& src,
                                  const DetectorChain& chain, Detector d,
                                  double t1, double t2);

RateBundle rate_bundle(const LightSource& src, const DetectorChain& chain);

}  // namespace qrnglab
