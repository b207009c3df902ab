#include "waiting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "errors.hpp"
#include "fft.hpp"

namespace qrnglab {

namespace {

void require_eta(double eta) {
  if (!(std::isfinite(eta) && eta > 0.0 && eta <= 1.0))
    throw std::domain_error("eta must lie in (0, 1]");
}

void require_tau(double tau) {
  if (!(std::isfinite(tau) && tau >= 0.0))
    throw std::domain_error("tau must be finite and non-negative");
}

// Root structure of the detected two-level waiting density: decay constants
// s -/+ d with s = (k+gamma)/2 and d^2 = s^2 - eta*k*gamma. The discriminant
// is non-negative for every eta in (0,1] (AM-GM), zero only at eta=1, k=gamma.
struct SpsRoots {
  double s, d, c;  // c = eta*k*gamma
  double tail() const { return c / (s + d); }  // s - d without cancellation
};

SpsRoots sps_roots(const LightSource& src, double eta) {
  const double k = src.pump_rate();
  const double g = src.decay_rate();
  const double s = 0.5 * (k + g);
  const double c = eta * k * g;
  const double disc = s * s - c;
  return {s, disc > 0.0 ? std::sqrt(disc) : 0.0, c};
}

// P(Poisson(x) > k), evaluated without cancellation on either side of the
// mean. Used by the saturated-pump series of the waiting-time CDF.
double poisson_tail(int k, double x) {
  if (x <= 0.0) return 0.0;
  if (x < static_cast<double>(k + 1)) {
    double term = std::exp((k + 1) * std::log(x) - x - std::lgamma(k + 2.0));
    double sum = 0.0;
    for (int i = k + 1; term > sum * 1e-18 + 1e-300; ++i) {
      sum += term;
      term *= x / (i + 1);
    }
    return sum;
  }
  double term = std::exp(-x);
  double head = term;
  for (int i = 1; i <= k; ++i) {
    term *= x / i;
    head += term;
  }
  return 1.0 - head;
}

}  // namespace

double next_photon_density(const LightSource& src, double eta, double tau) {
  require_eta(eta);
  require_tau(tau);
  if (src.is_laser()) {
    const double r = eta * src.photon_rate();
    return r * std::exp(-r * tau);
  }
  const auto [s, d, c] = sps_roots(src, eta);
  const double dt = d * tau;
  if (dt < 1e-5) {
    // sinh(d*tau)/d by series; covers the degenerate root d = 0.
    const double sinhc = tau * (1.0 + dt * dt / 6.0 * (1.0 + dt * dt / 20.0));
    return c * sinhc * std::exp(-s * tau);
  }
  return c / (2.0 * d) * (std::exp(-(s - d) * tau) - std::exp(-(s + d) * tau));
}

double next_photon_cdf(const LightSource& src, double eta, double tau) {
  require_eta(eta);
  require_tau(tau);
  if (src.is_laser()) return -std::expm1(-eta * src.photon_rate() * tau);
  const auto [s, d, c] = sps_roots(src, eta);
  const double x = s * tau;
  if (x < 1e-4) return 0.5 * c * tau * tau * (1.0 - 2.0 * x / 3.0);
  const double q = d / s;
  if (q < 0.1) {
    // CDF as a series in (d/s)^2 around the saturated pump; each coefficient
    // is a Poisson tail, so no subtractive cancellation enters.
    const double q2 = q * q;
    return c / (s * s) *
           (poisson_tail(1, x) +
            q2 * (poisson_tail(3, x) +
                  q2 * (poisson_tail(5, x) + q2 * poisson_tail(7, x))));
  }
  const double a = -std::expm1(-(s - d) * tau) / (s - d);
  const double b = std::expm1(-(s + d) * tau) / (s + d);
  return c / (2.0 * d) * (a + b);
}

double survival_probability(const LightSource& src, double eta, double tau) {
  require_eta(eta);
  require_tau(tau);
  if (src.is_laser()) return std::exp(-eta * src.photon_rate() * tau);
  const auto roots = sps_roots(src, eta);
  const double s = roots.s, d = roots.d;
  const double dt = d * tau;
  if (dt < 1e-5) {
    const double st = s * tau;
    return std::exp(-st) *
           (1.0 + 0.5 * dt * dt + st * (1.0 + dt * dt / 6.0));
  }
  // Split into the two decay branches; avoids cosh/sinh overflow.
  const double hi = 0.5 * (1.0 + s / d) * std::exp(-(s - d) * tau);
  const double lo = 0.5 * (1.0 - s / d) * std::exp(-(s + d) * tau);
  return hi + lo;
}

double survival_ratio(const LightSource& src, double eta, double t1, double t2) {
  require_eta(eta);
  if (!(std::isfinite(t1) && std::isfinite(t2) && t1 >= 0.0 && t2 >= t1))
    throw std::domain_error("survival_ratio requires 0 <= t1 <= t2");
  const double delta = t2 - t1;
  if (delta == 0.0) return 1.0;
  if (src.is_laser()) return std::exp(-eta * src.photon_rate() * delta);
  const auto roots = sps_roots(src, eta);
  const double s = roots.s, d = roots.d;
  if (d * t2 < 1e-5) {
    const double n2 = 1.0 + 0.5 * d * t2 * d * t2 + s * t2 * (1.0 + d * t2 * d * t2 / 6.0);
    const double n1 = 1.0 + 0.5 * d * t1 * d * t1 + s * t1 * (1.0 + d * t1 * d * t1 / 6.0);
    return std::exp(-s * delta) * (n2 / n1);
  }
  // P0(t) = e^{-(s-d)t} (A + B e^{-2dt}) with A+B = 1; both window factors sit
  // in [1, A], so the ratio never degenerates to 0/0.
  const double a = 0.5 * (d + s) / d;
  const double b = 0.5 * (d - s) / d;
  const double tail = std::exp(-(s - d) * delta);
  return tail * (a + b * std::exp(-2.0 * d * t2)) /
         (a + b * std::exp(-2.0 * d * t1));
}

double erlang_density(int m, double rate, double tau) {
  if (m < 1) throw std::out_of_range("erlang order must be >= 1");
  if (!(std::isfinite(rate) && rate > 0.0))
    throw std::domain_error("rate must be finite and positive");
  require_tau(tau);
  if (tau == 0.0) return m == 1 ? rate : 0.0;
  return std::exp(m * std::log(rate) + (m - 1) * std::log(tau) - rate * tau -
                  std::lgamma(static_cast<double>(m)));
}

double poisson_pmf(int m, double mean) {
  if (m < 0) throw std::out_of_range("count must be >= 0");
  if (!(std::isfinite(mean) && mean >= 0.0))
    throw std::domain_error("mean must be finite and non-negative");
  if (mean == 0.0) return m == 0 ? 1.0 : 0.0;
  return std::exp(m * std::log(mean) - mean - std::lgamma(m + 1.0));
}

WaitingTimeGrid::WaitingTimeGrid(const LightSource& src, double eta,
                                 GridOptions opt)
    : src_(src), eta_(eta) {
  require_eta(eta);
  if (opt.m_max < 1 || opt.m_max > 64)
    throw std::out_of_range("m_max must lie in [1, 64]");
  if (!(std::isfinite(opt.dt) && opt.dt >= 0.0) ||
      !(std::isfinite(opt.t_max) && opt.t_max >= 0.0))
    throw std::domain_error("dt and t_max must be finite and non-negative");
  m_max_ = opt.m_max;

  double c_tail, c_fast;
  if (src_.is_laser()) {
    c_tail = c_fast = eta * src_.photon_rate();
  } else {
    const auto roots = sps_roots(src_, eta);
    c_tail = roots.tail();
    c_fast = roots.s + roots.d;
  }
  // Third bound: the composite-trapezoid deficit of the K norm is
  // (dt^2/12)*K'(0) to leading order, with K'(0) = c_tail*c_fast for both
  // source kinds; keep it an order of magnitude under the 1e-6 norm check.
  const double dt_quad = std::sqrt(12.0e-7 / (c_tail * c_fast));
  dt_ = opt.dt > 0.0 ? opt.dt
                     : std::min({1e-3 / c_tail, 2e-2 / c_fast, dt_quad});
  t_max_ = opt.t_max > 0.0 ? opt.t_max : 16.0 / c_tail;
  if (t_max_ < 8.0 * dt_)
    throw std::domain_error("t_max must cover at least a few steps of dt");
  build(opt);
}

void WaitingTimeGrid::build(GridOptions opt) {
  using detail::convolve_trapezoid_fft;
  using detail::cumulative_trapezoid;
  using detail::trapezoid_total;

  for (;; ++doublings_) {
    const double pts = t_max_ / dt_ + 1.5;
    if (pts > static_cast<double>(opt.max_points))
      throw ResolutionError(
          "grid needs " + std::to_string(static_cast<long long>(pts)) +
          " points at dt=" + std::to_string(dt_) +
          ", above the cap of " + std::to_string(opt.max_points));
    n_ = static_cast<std::size_t>(pts);
    if ((n_ - 1) * 8.0 * (2.0 * m_max_ + 4.0) > 2e9)
      throw ResolutionError("grid arrays would exceed the memory budget");

    l_.assign(1, std::vector<double>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      l_[0][i] = next_photon_density(src_, eta_, static_cast<double>(i) * dt_);

    const std::vector<double> cum = cumulative_trapezoid(l_[0], dt_);
    const double shortfall = 1.0 - cum.back();
    if (shortfall > 1e-6) {
      // Distinguish a truncated tail (fixable by extending the window) from a
      // step too coarse for the quadrature itself.
      const double true_tail = 1.0 - next_photon_cdf(src_, eta_, t_max_);
      if (true_tail > 0.5e-6) {
        t_max_ *= 2.0;
        continue;
      }
      throw ResolutionError(
          "dt=" + std::to_string(dt_) +
          " is too coarse: the next-detection density integrates to " +
          std::to_string(cum.back()));
    }

    p_.assign(1, std::vector<double>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      p_[0][i] = std::max(0.0, 1.0 - cum[i]);

    l_norm_.assign(1, trapezoid_total(l_[0], dt_));
    bool tail_short = false;
    int short_m = 0;
    for (int m = 2; m <= m_max_ && !tail_short; ++m) {
      l_.push_back(convolve_trapezoid_fft(l_[m - 2], l_[0], dt_));
      const double norm = trapezoid_total(l_.back(), dt_);
      l_norm_.push_back(norm);
      if (norm > 1.0 + 1e-4)
        throw ResolutionError("order-" + std::to_string(m) +
                              " waiting density integrates to " +
                              std::to_string(norm) + "; dt too coarse");
      if (norm < 1.0 - 1e-4) {
        tail_short = true;
        short_m = m;
      }
    }
    if (tail_short) {
      if (2.0 * (t_max_ / dt_) > static_cast<double>(opt.max_points))
        throw ResolutionError(
            "order-" + std::to_string(short_m) +
            " waiting density cannot be normalized within the point cap");
      t_max_ *= 2.0;
      continue;
    }

    for (int m = 1; m <= m_max_; ++m) {
      p_.push_back(convolve_trapezoid_fft(l_[m - 1], p_[0], dt_));
      for (double& v : p_.back()) v = std::max(0.0, v);
    }
    return;
  }
}

const std::vector<double>& WaitingTimeGrid::density(int m) const {
  if (m < 1 || m > m_max_)
    throw std::out_of_range("density order must lie in [1, m_max]");
  return l_[static_cast<std::size_t>(m) - 1];
}

double WaitingTimeGrid::density_norm(int m) const {
  if (m < 1 || m > m_max_)
    throw std::out_of_range("density order must lie in [1, m_max]");
  return l_norm_[static_cast<std::size_t>(m) - 1];
}

const std::vector<double>& WaitingTimeGrid::count_curve(int m) const {
  if (m < 0 || m > m_max_)
    throw std::out_of_range("count must lie in [0, m_max]");
  return p_[static_cast<std::size_t>(m)];
}

double WaitingTimeGrid::interp(const std::vector<double>& y, double tau) const {
  const double x = tau / dt_;
  std::size_t i = static_cast<std::size_t>(x);
  if (i >= n_ - 1) i = n_ - 2;
  const double f = x - static_cast<double>(i);
  return y[i] * (1.0 - f) + y[i + 1] * f;
}

double WaitingTimeGrid::count_probability(int m, double tau) const {
  if (m < 0 || m > m_max_)
    throw std::out_of_range("count must lie in [0, m_max]");
  if (!(std::isfinite(tau) && tau >= 0.0 && tau <= t_max_))
    throw std::domain_error("tau must lie in [0, t_max]");
  return interp(p_[static_cast<std::size_t>(m)], tau);
}

double WaitingTimeGrid::no_photon_in_interval(double t1, double t2) const {
  if (!(std::isfinite(t1) && std::isfinite(t2) && t1 >= 0.0 && t2 >= t1 &&
        t2 <= t_max_))
    throw std::domain_error(
        "no_photon_in_interval requires 0 <= t1 <= t2 <= t_max");
  const double base = interp(p_[0], t1);
  if (base < 1e-300)
    throw NumericError(
        "survival underflowed at t1; the interval probability is 0/0 on this "
        "grid");
  return interp(p_[0], t2) / base;
}

}  // namespace qrnglab
