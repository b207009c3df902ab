// Photon sources: a Poissonian laser and an incoherently pumped two-level
// emitter, with their second-order correlations and detected photon numbers.
#pragma once

namespace qrnglab {

enum class SourceKind { Laser, TwoLevelEmitter };

// Steady-state photon rate of the pumped two-level system, k*gamma/(k+gamma).
double emission_rate(double pump_rate, double decay_rate);

// Pump rate giving a requested steady-state photon rate; the photon rate must
// stay strictly below the decay rate.
double pump_rate_for(double photon_rate, double decay_rate);

// Excited-state population a delay tau after an emission (ground state at 0).
double excited_population(double pump_rate, double decay_rate, double tau);

class LightSource {
 public:
  static LightSource laser(double photon_rate);
  static LightSource two_level(double pump_rate, double decay_rate);
  // Chooses the pump so the emitter radiates photon_rate on average.
  static LightSource two_level_for_rate(double photon_rate, double decay_rate);

  SourceKind kind() const { return kind_; }
  bool is_laser() const { return kind_ == SourceKind::Laser; }
  double photon_rate() const { return lambda_; }
  double pump_rate() const;   // two-level only
  double decay_rate() const;  // two-level only
  double rate_sum() const;    // pump + decay, two-level only

  // Normalized second-order correlation at delay tau; even in tau.
  double g2(double tau) const;
  // Closed-form int_{t1}^{t2} g2(t) dt for 0 <= t1 <= t2.
  double g2_integral(double t1, double t2) const;
  // Detected photon rate density eta * lambda * g2(tau).
  double detected_density(double eta, double tau) const;
  // Mean number of detected photons in [0, tau] at efficiency eta, measured
  // from a detection at 0.
  double mean_detected(double eta, double tau) const;

 private:
  LightSource(SourceKind kind, double lambda, double k, double gamma);

  SourceKind kind_;
  double lambda_;
  double k_ = 0.0;      // pump rate
  double gamma_ = 0.0;  // radiative decay rate
};

}  // namespace qrnglab
