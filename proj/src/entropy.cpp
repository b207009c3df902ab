#include "entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "errors.hpp"

namespace qrnglab {

namespace {

constexpr double kLog2 = 0.69314718055994530941723212145817657;

void validate_distribution(std::span<const double> p) {
  if (p.empty()) throw std::domain_error("distribution is empty");
  double sum = 0.0;
  for (double v : p) {
    if (!(std::isfinite(v) && v >= 0.0))
      throw std::domain_error("distribution entries must be non-negative");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::domain_error("distribution does not sum to 1");
}

double shannon_unchecked(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h / kLog2;
}

}  // namespace

double shannon_entropy(std::span<const double> p) {
  validate_distribution(p);
  return shannon_unchecked(p);
}

double renyi_entropy(std::span<const double> p, double alpha) {
  validate_distribution(p);
  if (!(std::isfinite(alpha) && alpha > 0.0))
    throw std::domain_error("alpha must be finite and positive");
  if (alpha == 1.0) return shannon_unchecked(p);
  double s = 0.0;
  for (double v : p)
    if (v > 0.0) s += std::pow(v, alpha);
  return std::log(s) / ((1.0 - alpha) * kLog2);
}

double min_entropy(std::span<const double> p) {
  validate_distribution(p);
  double m = 0.0;
  for (double v : p) m = std::max(m, v);
  return -std::log(m) / kLog2;
}

ConditionalEntropy conditional_entropy(const TransitionModel& model) {
  ConditionalEntropy out;
  double worst = 0.0;
  for (int y = 0; y < model.alphabet; ++y) {
    const double py = model.stationary[y];
    if (py <= 0.0) continue;
    double h = 0.0, peak = 0.0;
    for (int x = 0; x < model.alphabet; ++x) {
      const double v = model.row[y][x];
      if (v > 0.0) h -= v * std::log(v);
      peak = std::max(peak, v);
    }
    out.shannon += py * h / kLog2;
    worst += py * peak;
  }
  out.min = -std::log(worst) / kLog2;
  return out;
}

LightSource SourceFamily::at(double lambda) const {
  if (kind == SourceKind::Laser) return LightSource::laser(lambda);
  return LightSource::two_level_for_rate(lambda, decay_rate);
}

double SourceFamily::lambda_min() const {
  return kind == SourceKind::Laser ? 1e5 : 1e-3 * decay_rate;
}

double SourceFamily::lambda_max() const {
  return kind == SourceKind::Laser ? 1e12 : 0.9999 * decay_rate;
}

EntropyPoint entropy_point(const LightSource& src, const DetectorChain& chain,
                           OutcomeMode mode) {
  const RateBundle rates = rate_bundle(src, chain);
  const TransitionModel model = transition_matrix(src, chain, mode);
  const ConditionalEntropy h = conditional_entropy(model);
  EntropyPoint out;
  out.lambda = src.photon_rate();
  out.outcome_rate = mode == OutcomeMode::Keep
                         ? rates.bit_total + rates.coincidence
                         : rates.bit_total;
  out.shannon_cond = h.shannon;
  out.min_cond = h.min;
  out.shannon_rate = h.shannon * out.outcome_rate;
  out.min_rate = h.min * out.outcome_rate;
  return out;
}

std::vector<EntropyPoint> entropy_curve(const SourceFamily& family,
                                        const DetectorChain& chain,
                                        OutcomeMode mode,
                                        std::span<const double> lambdas) {
  std::vector<EntropyPoint> out;
  out.reserve(lambdas.size());
  for (double l : lambdas)
    out.push_back(entropy_point(family.at(l), chain, mode));
  return out;
}

OptimumReport find_optimum(const SourceFamily& family,
                           const DetectorChain& chain, OutcomeMode mode) {
  const double lo = family.lambda_min();
  const double hi = family.lambda_max();
  constexpr int kCoarse = 200;
  const double llo = std::log(lo), lhi = std::log(hi);

  const auto rate_at = [&](double loglambda) {
    return entropy_point(family.at(std::exp(loglambda)), chain, mode).min_rate;
  };

  std::vector<double> f(kCoarse);
  std::vector<double> xs(kCoarse);
  for (int i = 0; i < kCoarse; ++i) {
    xs[i] = llo + (lhi - llo) * i / (kCoarse - 1);
    f[i] = rate_at(xs[i]);
  }

  int best = 0;
  for (int i = 1; i < kCoarse; ++i)
    if (f[i] > f[best]) best = i;

  OptimumReport out;
  // A local maximum counts as a separate peak only when the valley toward the
  // global best dips at least 0.1% below it; shallower ripple is numerical
  // texture on a slope. Peaks are listed for diagnostics above a loose floor,
  // but only peaks within 10% of the global best question the refinement: a
  // coarse secondary peak far below the best one cannot outgrow it.
  const double floor = 1e-9 * f[best];
  constexpr double kProminence = 1e-3;
  int contenders = 0;
  for (int i = 0; i < kCoarse; ++i) {
    const bool up = i == 0 || f[i] > f[i - 1];
    const bool down = i == kCoarse - 1 || f[i] > f[i + 1];
    if (!(up && down && f[i] > floor)) continue;
    if (i != best) {
      double valley = f[i];
      for (int k = std::min(i, best); k <= std::max(i, best); ++k)
        valley = std::min(valley, f[k]);
      if (valley >= (1.0 - kProminence) * f[i]) continue;
    }
    out.coarse_maxima.push_back(std::exp(xs[i]));
    if (f[i] >= 0.9 * f[best]) ++contenders;
  }

  double lstar, fstar;
  if (contenders > 1) {
    // Several local maxima: hand back the coarse argmax without refinement.
    out.unimodal = false;
    lstar = xs[best];
    fstar = f[best];
  } else {
    double a = xs[std::max(best - 1, 0)];
    double b = xs[std::min(best + 1, kCoarse - 1)];
    constexpr double kInvPhi = 0.61803398874989484820458683436563812;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = rate_at(x1), f2 = rate_at(x2);
    while (b - a > 1e-4) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kInvPhi * (b - a);
        f2 = rate_at(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - kInvPhi * (b - a);
        f1 = rate_at(x1);
      }
    }
    lstar = f1 > f2 ? x1 : x2;
    fstar = std::max(f1, f2);
  }

  out.lambda_star = std::exp(lstar);
  out.min_rate_star = fstar;
  out.pump_star = family.kind == SourceKind::Laser
                      ? std::numeric_limits<double>::quiet_NaN()
                      : pump_rate_for(out.lambda_star, family.decay_rate);
  return out;
}

std::vector<RobustnessPoint> robustness_points() {
  std::vector<RobustnessPoint> pts;
  const DetectorChain base{};
  for (int t1 = 1; t1 <= 20; ++t1) {
    RobustnessPoint p{"lifetime_ns", static_cast<double>(t1), base,
                      1.0 / (t1 * 1e-9)};
    pts.push_back(p);
  }
  for (int td = 20; td <= 60; td += 5) {
    RobustnessPoint p{"tau_dead_ns", static_cast<double>(td), base, 1e8};
    p.chain.tau_dead = td * 1e-9;
    pts.push_back(p);
  }
  // 0.37 inserted next to the regular 0.05 steps: the advantage is claimed to
  // persist down to that efficiency, so the boundary itself gets a row.
  const double etas[] = {0.30, 0.35, 0.37, 0.40, 0.45, 0.50,
                         0.55, 0.60, 0.65, 0.70};
  for (double e : etas) {
    RobustnessPoint p{"eta_qe", e, base, 1e8};
    p.chain.eta_qe = e;
    pts.push_back(p);
  }
  for (int i = 0; i <= 5; ++i) {
    const double pa = 0.50 + 0.05 * i;
    RobustnessPoint p{"p_a", pa, base, 1e8};
    p.chain.p_a = pa;
    pts.push_back(p);
  }
  return pts;
}

RobustnessRow robustness_eval(const RobustnessPoint& point, OutcomeMode mode) {
  RobustnessRow row;
  row.point = point;
  row.mode = mode;
  SourceFamily sps{SourceKind::TwoLevelEmitter, point.decay_rate};
  SourceFamily laser{SourceKind::Laser, point.decay_rate};
  row.sps_rate = find_optimum(sps, point.chain, mode).min_rate_star;
  row.laser_rate = find_optimum(laser, point.chain, mode).min_rate_star;
  row.advantage = row.sps_rate / row.laser_rate - 1.0;
  return row;
}

}  // namespace qrnglab
