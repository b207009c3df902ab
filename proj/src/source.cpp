#include "source.hpp"

#include <cmath>
#include <stdexcept>

#include "errors.hpp"

namespace qrnglab {

namespace {

void require_finite_positive(double v, const char* name) {
  if (!(std::isfinite(v) && v > 0.0))
    throw std::domain_error(std::string(name) + " must be finite and positive");
}

}  // namespace

double emission_rate(double pump_rate, double decay_rate) {
  require_finite_positive(pump_rate, "pump_rate");
  require_finite_positive(decay_rate, "decay_rate");
  return pump_rate * decay_rate / (pump_rate + decay_rate);
}

double pump_rate_for(double photon_rate, double decay_rate) {
  require_finite_positive(photon_rate, "photon_rate");
  require_finite_positive(decay_rate, "decay_rate");
  if (photon_rate >= decay_rate)
    throw std::domain_error(
        "photon_rate must stay below decay_rate; the emitter saturates at the "
        "decay rate");
  return photon_rate * decay_rate / (decay_rate - photon_rate);
}

double excited_population(double pump_rate, double decay_rate, double tau) {
  require_finite_positive(pump_rate, "pump_rate");
  require_finite_positive(decay_rate, "decay_rate");
  if (!(std::isfinite(tau) && tau >= 0.0))
    throw std::domain_error("tau must be finite and non-negative");
  const double r = pump_rate + decay_rate;
  return pump_rate / r * -std::expm1(-r * tau);
}

LightSource::LightSource(SourceKind kind, double lambda, double k, double gamma)
    : kind_(kind), lambda_(lambda), k_(k), gamma_(gamma) {}

LightSource LightSource::laser(double photon_rate) {
  require_finite_positive(photon_rate, "photon_rate");
  return LightSource(SourceKind::Laser, photon_rate, 0.0, 0.0);
}

LightSource LightSource::two_level(double pump_rate, double decay_rate) {
  const double lambda = emission_rate(pump_rate, decay_rate);
  return LightSource(SourceKind::TwoLevelEmitter, lambda, pump_rate, decay_rate);
}

LightSource LightSource::two_level_for_rate(double photon_rate,
                                            double decay_rate) {
  return two_level(pump_rate_for(photon_rate, decay_rate), decay_rate);
}

double LightSource::pump_rate() const {
  if (is_laser()) throw std::domain_error("a laser has no pump rate");
  return k_;
}

double LightSource::decay_rate() const {
  if (is_laser()) throw std::domain_error("a laser has no decay rate");
  return gamma_;
}

double LightSource::rate_sum() const {
  if (is_laser()) throw std::domain_error("a laser has no pump/decay rates");
  return k_ + gamma_;
}

double LightSource::g2(double tau) const {
  if (!std::isfinite(tau)) throw std::domain_error("tau must be finite");
  if (is_laser()) return 1.0;
  return -std::expm1(-(k_ + gamma_) * std::fabs(tau));
}

double LightSource::g2_integral(double t1, double t2) const {
  if (!(std::isfinite(t1) && std::isfinite(t2) && t1 >= 0.0 && t2 >= t1))
    throw std::domain_error("g2_integral requires 0 <= t1 <= t2");
  if (is_laser()) return t2 - t1;
  const double r = k_ + gamma_;
  return (t2 - t1) - (std::exp(-r * t1) - std::exp(-r * t2)) / r;
}

double LightSource::detected_density(double eta, double tau) const {
  if (!(std::isfinite(eta) && eta > 0.0 && eta <= 1.0))
    throw std::domain_error("eta must lie in (0, 1]");
  return eta * lambda_ * g2(tau);
}

double LightSource::mean_detected(double eta, double tau) const {
  if (!(std::isfinite(eta) && eta > 0.0 && eta <= 1.0))
    throw std::domain_error("eta must lie in (0, 1]");
  return eta * lambda_ * g2_integral(0.0, tau);
}

}  // namespace qrnglab
