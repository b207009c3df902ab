#include "detection.hpp"

#include <cmath>
#include <stdexcept>

#include "errors.hpp"

namespace qrnglab {

void DetectorChain::validate() const {
  if (!(std::isfinite(eta_qe) && eta_qe > 0.0 && eta_qe <= 1.0))
    throw std::domain_error("eta_qe must lie in (0, 1]");
  if (!(std::isfinite(p_a) && p_a > 0.0 && p_a < 1.0))
    throw std::domain_error("p_a must lie in (0, 1)");
  if (!(std::isfinite(tau_dead) && tau_dead >= 0.0))
    throw std::domain_error("tau_dead must be finite and non-negative");
  if (!(std::isfinite(tau_cw) && tau_cw >= 0.0))
    throw std::domain_error("tau_cw must be finite and non-negative");
  if (!(std::isfinite(sigma_jitt) && sigma_jitt >= 0.0))
    throw std::domain_error("sigma_jitt must be finite and non-negative");
}

void DetectorChain::validate_for_transitions() const {
  validate();
  if (!(tau_dead > 0.0 && 2.0 * tau_cw < tau_dead))
    throw std::domain_error(
        "the transition model requires 2*tau_cw < tau_dead (coincidences must "
        "stay pairwise)");
}

double permutation_probability(double tau_cw, double sigma_jitt) {
  if (!(std::isfinite(tau_cw) && tau_cw >= 0.0))
    throw std::domain_error("tau_cw must be finite and non-negative");
  if (!(std::isfinite(sigma_jitt) && sigma_jitt >= 0.0))
    throw std::domain_error("sigma_jitt must be finite and non-negative");
  if (sigma_jitt == 0.0) return tau_cw == 0.0 ? 0.5 : 0.0;
  return 0.5 * std::erfc(tau_cw / (std::sqrt(2.0) * sigma_jitt));
}

double blind_count(const LightSource& src, const DetectorChain& chain,
                   Detector d) {
  chain.validate();
  return src.mean_detected(chain.efficiency(d), chain.tau_dead);
}

double click_rate(const LightSource& src, const DetectorChain& chain,
                  Detector d) {
  chain.validate();
  const double eta = chain.efficiency(d);
  return eta * src.photon_rate() / (1.0 + blind_count(src, chain, d));
}

double coincidence_probability(const LightSource& src,
                               const DetectorChain& chain, Detector given) {
  chain.validate();
  return 2.0 * click_rate(src, chain, other(given)) *
         src.g2_integral(0.0, chain.tau_cw);
}

double click_probability_interval(const LightSource& src,
                                  const DetectorChain& chain, Detector d,
                                  double t1, double t2) {
  chain.validate();
  if (!(std::isfinite(t1) && std::isfinite(t2) && t1 >= 0.0 && t2 >= t1))
    throw std::domain_error("click_probability_interval requires 0 <= t1 <= t2");
  if (t2 - t1 > chain.tau_dead * (1.0 + 1e-12))
    throw std::domain_error(
        "interval longer than tau_dead: more than one click could fall inside");
  return click_rate(src, chain, d) * src.g2_integral(t1, t2);
}

RateBundle rate_bundle(const LightSource& src, const DetectorChain& chain) {
  chain.validate();
  RateBundle out;
  out.click_a = click_rate(src, chain, Detector::A);
  out.click_b = click_rate(src, chain, Detector::B);
  const double pc_b = coincidence_probability(src, chain, Detector::A);
  const double pc_a = coincidence_probability(src, chain, Detector::B);
  out.coincidence = out.click_a * pc_b;  // equals click_b * pc_a
  out.bit_a = out.click_a * (1.0 - pc_b);
  out.bit_b = out.click_b * (1.0 - pc_a);
  out.bit_total = out.bit_a + out.bit_b;
  return out;
}

}  // namespace qrnglab
