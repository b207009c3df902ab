#include "transitions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "errors.hpp"
#include "waiting.hpp"

namespace qrnglab {

namespace detail {

const GaussLegendre& gauss_legendre_32() {
  static const GaussLegendre table = [] {
    GaussLegendre t{};
    constexpr int n = 32;
    constexpr double pi = 3.14159265358979323846264338327950288;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(pi * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
        }
        pp = n * (x * p0 - p1) / (x * x - 1.0);
        const double dx = p0 / pp;
        x -= dx;
        if (std::fabs(dx) < 1e-15) break;
      }
      t.node[i] = x;
      t.weight[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return t;
  }();
  return table;
}

}  // namespace detail

std::array<double, 3> release_distribution(const LightSource& src,
                                           const DetectorChain& chain,
                                           OutcomeMode mode) {
  chain.validate();
  const double quiet_b =
      survival_probability(src, chain.efficiency(Detector::B), chain.tau_cw);
  const double quiet_a =
      survival_probability(src, chain.efficiency(Detector::A), chain.tau_cw);
  const double wa = chain.p_a * quiet_b;
  const double wb = (1.0 - chain.p_a) * quiet_a;
  if (mode == OutcomeMode::Keep) return {wa, wb, 1.0 - wa - wb};
  return {wa / (wa + wb), wb / (wa + wb), 0.0};
}

std::array<double, 3> outcome_distribution(const RateBundle& rates,
                                           OutcomeMode mode) {
  if (!(rates.bit_a >= 0.0 && rates.bit_b >= 0.0 && rates.coincidence >= 0.0))
    throw std::domain_error("outcome rates must be non-negative");
  if (mode == OutcomeMode::Keep) {
    const double total = rates.bit_a + rates.bit_b + rates.coincidence;
    if (total <= 0.0) throw std::domain_error("total outcome rate is zero");
    return {rates.bit_a / total, rates.bit_b / total,
            rates.coincidence / total};
  }
  const double total = rates.bit_a + rates.bit_b;
  if (total <= 0.0) throw std::domain_error("total bit rate is zero");
  return {rates.bit_a / total, rates.bit_b / total, 0.0};
}

namespace {

// Transition row following a single-click outcome on detector u. v denotes
// the opposite detector; all windows are measured from the u click at 0.
std::array<double, 3> single_row(const LightSource& src,
                                 const DetectorChain& chain, Detector u,
                                 OutcomeMode mode,
                                 const std::array<double, 3>& release) {
  const Detector v = other(u);
  const double td = chain.tau_dead;
  const double cw = chain.tau_cw;
  const double pc_v = coincidence_probability(src, chain, u);
  const double live = 1.0 - pc_v;  // previous outcome was a single u

  // v clicks while u is dead and v's own window also closes inside: a single
  // v outcome happens before u comes back.
  const double term1 =
      click_probability_interval(src, chain, v, cw, td - cw) / live;
  // v stays quiet for the whole dead interval: both detectors release and
  // race from scratch.
  const double term2 =
      1.0 - click_probability_interval(src, chain, v, cw, td) / live;

  // v clicks inside the trailing window [td - cw, td]: its coincidence window
  // is still open when u releases, so u may join and upgrade the outcome to a
  // coincidence. tau parameterizes the v click as td - cw + tau.
  double term3 = 0.0, term4 = 0.0;
  if (cw > 0.0) {
    const auto& gl = detail::gauss_legendre_32();
    const double rate_v = click_rate(src, chain, v);
    const double eta_u = chain.efficiency(u);
    const double half = 0.5 * cw;
    for (int i = 0; i < 32; ++i) {
      const double tau = half * (gl.node[i] + 1.0);
      const double w = gl.weight[i] * half;
      const double density = rate_v * src.g2(td - cw + tau) / live;
      // u stays quiet over [cw - tau, cw] measured from the v click, given it
      // was silent (dead) up to cw - tau.
      const double quiet_u = survival_ratio(src, eta_u, cw - tau, cw);
      term3 += w * density * quiet_u;
      term4 += w * density * (1.0 - quiet_u);
    }
  }

  std::array<double, 3> row{};
  const int iu = static_cast<int>(u);
  const int iv = static_cast<int>(v);
  if (mode == OutcomeMode::Keep) {
    row[iv] = term1 + term2 * release[iv] + term3;
    row[iu] = term2 * release[iu];
    row[2] = term2 * release[2] + term4;
  } else {
    row[iv] = term1 + term3 + (term2 + term4) * release[iv];
    row[iu] = (term2 + term4) * release[iu];
    row[2] = 0.0;
  }
  return row;
}

void check_row(std::array<double, 3>& row, int alphabet, const char* name) {
  // The analytic sum is 1 by construction; a deviation means the terms are
  // inconsistent, not merely clipped.
  double sum = 0.0;
  for (int x = 0; x < alphabet; ++x) sum += row[x];
  if (std::fabs(sum - 1.0) > 1e-6)
    throw ModelError(std::string("transition row ") + name + " sums to " +
                     std::to_string(sum));
  // Far outside its click-rate regime the decomposition can push an entry
  // slightly below zero (the release term turns negative once the expected
  // dead-interval count passes 1). Magnitudes stay below ~2e-3 across the
  // supported sweeps; clip and renormalize so the row is exactly stochastic,
  // and treat anything larger as a genuine inconsistency.
  bool any_clip = false;
  double clipped = 0.0;
  for (int x = 0; x < alphabet; ++x) {
    if (row[x] < -1e-2)
      throw ModelError(std::string("transition row ") + name +
                       " entry below -1e-2; outside the model's regime");
    if (row[x] < 0.0) {
      row[x] = 0.0;
      any_clip = true;
    }
    clipped += row[x];
  }
  if (any_clip)
    for (int x = 0; x < alphabet; ++x) row[x] /= clipped;
}

}  // namespace

TransitionModel transition_matrix(const LightSource& src,
                                  const DetectorChain& chain,
                                  OutcomeMode mode) {
  chain.validate_for_transitions();
  TransitionModel out;
  out.mode = mode;
  out.alphabet = alphabet_size(mode);
  out.stationary = outcome_distribution(rate_bundle(src, chain), mode);

  const auto release = release_distribution(src, chain, mode);
  out.row[0] = single_row(src, chain, Detector::A, mode, release);
  out.row[1] = single_row(src, chain, Detector::B, mode, release);
  if (mode == OutcomeMode::Keep) out.row[2] = release;

  check_row(out.row[0], out.alphabet, "a");
  check_row(out.row[1], out.alphabet, "b");
  if (mode == OutcomeMode::Keep) check_row(out.row[2], out.alphabet, "ab");
  return out;
}

}  // namespace qrnglab
