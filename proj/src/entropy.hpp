// Entropy measures over outcome distributions, conditional entropies of the
// transition model, entropy-rate curves, the rate optimizer, and the shared
// robustness sweep definition.
#pragma once

#include <span>
#include <vector>

#include "transitions.hpp"

namespace qrnglab {

double shannon_entropy(std::span<const double> p);
double renyi_entropy(std::span<const double> p, double alpha);
double min_entropy(std::span<const double> p);

struct ConditionalEntropy {
  double shannon = 0.0;  // H(X | previous outcome), bits per outcome
  double min = 0.0;      // worst-case single-guess entropy, bits per outcome
};
ConditionalEntropy conditional_entropy(const TransitionModel& model);

struct EntropyPoint {
  double lambda = 0.0;
  double outcome_rate = 0.0;  // outcomes per second entering the extractor
  double shannon_cond = 0.0;
  double min_cond = 0.0;
  double shannon_rate = 0.0;  // bits per second
  double min_rate = 0.0;
};

// A one-parameter source family scanned over the photon rate.
struct SourceFamily {
  SourceKind kind = SourceKind::Laser;
  double decay_rate = 1e8;  // two-level only

  LightSource at(double lambda) const;
  double lambda_min() const;  // default scan bounds
  double lambda_max() const;
};

EntropyPoint entropy_point(const LightSource& src, const DetectorChain& chain,
                           OutcomeMode mode);
std::vector<EntropyPoint> entropy_curve(const SourceFamily& family,
                                        const DetectorChain& chain,
                                        OutcomeMode mode,
                                        std::span<const double> lambdas);

struct OptimumReport {
  double lambda_star = 0.0;
  double pump_star = 0.0;     // NaN for lasers
  double min_rate_star = 0.0; // bits per second at the optimum
  bool unimodal = true;       // false: coarse-scan argmax returned unrefined
  // Prominent local maxima seen in the coarse scan; more than one within 10%
  // of the best disables refinement and clears `unimodal`.
  std::vector<double> coarse_maxima;
};

// Coarse 200-point log scan over the family range followed by golden-section
// refinement of the min-entropy rate; multiple local maxima disable the
// refinement and are reported.
OptimumReport find_optimum(const SourceFamily& family,
                           const DetectorChain& chain, OutcomeMode mode);

// Robustness sweep, one parameter varied at a time. Shared by the CLI and
// the end-to-end checks so both walk identical points.
struct RobustnessPoint {
  const char* parameter = "";  // "lifetime_ns" | "tau_dead_ns" | "eta_qe" | "p_a"
  double value = 0.0;          // varied value in its natural unit
  DetectorChain chain;         // chain with the variation applied
  double decay_rate = 1e8;     // emitter decay rate at this point
};
std::vector<RobustnessPoint> robustness_points();

struct RobustnessRow {
  RobustnessPoint point;
  OutcomeMode mode = OutcomeMode::Discard;
  double sps_rate = 0.0;    // optimal min-entropy rate, two-level emitter
  double laser_rate = 0.0;  // optimal min-entropy rate, laser
  double advantage = 0.0;   // sps_rate / laser_rate - 1
};
RobustnessRow robustness_eval(const RobustnessPoint& point, OutcomeMode mode);

}  // namespace qrnglab
