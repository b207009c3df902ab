// Minimal iterative radix-2 complex FFT plus trapezoid-rule convolution on a
// uniform grid. The FFT-accelerated convolution must agree with the direct
// quadrature to 1e-10; a unit test enforces that on a smoke case.
#pragma once

#include <bit>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qrnglab::detail {

inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::domain_error("fft size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  constexpr double kTwoPi = 6.28318530717958647692528676655900577;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
    const std::complex<double> step = std::polar(1.0, ang);
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        // Re-anchor the twiddle periodically so recurrence error stays ~eps.
        if ((j & 63u) == 0u)
          w = std::polar(1.0, ang * static_cast<double>(j));
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= step;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

// S_i = sum_{j<=i} f_j g_{i-j} for i < n, computed with one zero-padded FFT
// (f and g packed into the real/imaginary parts of a single transform).
inline std::vector<double> convolution_sums_fft(const std::vector<double>& f,
                                                const std::vector<double>& g) {
  const std::size_t n = f.size();
  if (g.size() != n) throw std::domain_error("convolution inputs differ in length");
  if (n == 0) return {};
  const std::size_t m = std::bit_ceil(2 * n - 1);
  std::vector<std::complex<double>> a(m);
  for (std::size_t j = 0; j < n; ++j) a[j] = {f[j], g[j]};
  fft_inplace(a, false);
  std::vector<std::complex<double>> b(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t k2 = (m - k) & (m - 1);
    const std::complex<double> ff = 0.5 * (a[k] + std::conj(a[k2]));
    const std::complex<double> fg =
        std::complex<double>(0.0, -0.5) * (a[k] - std::conj(a[k2]));
    b[k] = ff * fg;
  }
  fft_inplace(b, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = b[i].real();
  return out;
}

// (f * g)(t_i) = int_0^{t_i} f(t) g(t_i - t) dt by the trapezoid rule:
// dt * (S_i - (f_0 g_i + f_i g_0) / 2).
inline std::vector<double> convolve_trapezoid_fft(const std::vector<double>& f,
                                                  const std::vector<double>& g,
                                                  double dt) {
  std::vector<double> out = convolution_sums_fft(f, g);
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i)
    out[i] = dt * (out[i] - 0.5 * (f[0] * g[i] + f[i] * g[0]));
  return out;
}

inline std::vector<double> convolve_trapezoid_direct(
    const std::vector<double>& f, const std::vector<double>& g, double dt) {
  const std::size_t n = f.size();
  if (g.size() != n) throw std::domain_error("convolution inputs differ in length");
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += f[j] * g[i - j];
    out[i] = dt * (s - 0.5 * (f[0] * g[i] + f[i] * g[0]));
  }
  return out;
}

// Cumulative trapezoid integral, out[0] = 0.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& f,
                                                double dt) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i)
    out[i] = out[i - 1] + 0.5 * dt * (f[i - 1] + f[i]);
  return out;
}

inline double trapezoid_total(const std::vector<double>& f, double dt) {
  if (f.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : f) s += v;
  return dt * (s - 0.5 * (f.front() + f.back()));
}

}  // namespace qrnglab::detail
