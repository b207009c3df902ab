// Waiting-time machinery: closed forms for the next-detection density K and
// the no-detection survival P0, plus a uniform grid carrying the m-photon
// densities L_m and the detection-count probabilities P_m.
#pragma once

#include <cstddef>
#include <vector>

#include "source.hpp"

namespace qrnglab {

struct GridOptions {
  // dt == 0 or t_max == 0 selects rate-adaptive values; see WaitingTimeGrid.
  double dt = 0.05e-9;
  double t_max = 2.0e-6;
  int m_max = 12;
  std::size_t max_points = std::size_t{1} << 22;
};

// Density of the delay to the next detection after a detection at 0, at
// detection efficiency eta.
double next_photon_density(const LightSource& src, double eta, double tau);
// int_0^tau of the density above.
double next_photon_cdf(const LightSource& src, double eta, double tau);
// Survival P0(tau): no detection in [0, tau] following a detection at 0.
double survival_probability(const LightSource& src, double eta, double tau);
// P0(t2)/P0(t1) in a cancellation-free form: the no-detection probability for
// [t1, t2] given none in [0, t1]. Underflow of the result is the correct
// limit and returns 0.
double survival_ratio(const LightSource& src, double eta, double t1, double t2);

// Laser closed forms, used as oracles and cross-checks.
double erlang_density(int m, double rate, double tau);
double poisson_pmf(int m, double mean);

class WaitingTimeGrid {
 public:
  WaitingTimeGrid(const LightSource& src, double eta, GridOptions opt = {});

  const LightSource& source() const { return src_; }
  double eta() const { return eta_; }
  double dt() const { return dt_; }
  double t_max() const { return t_max_; }
  std::size_t points() const { return n_; }
  int m_max() const { return m_max_; }
  int doublings() const { return doublings_; }

  // L_m sampled on the grid, 1 <= m <= m_max; L_1 is K itself.
  const std::vector<double>& density(int m) const;
  // int over the grid of density(m); within 1e-4 of 1 by construction.
  double density_norm(int m) const;
  // P_m sampled on the grid, 0 <= m <= m_max; P_0 is the survival function.
  const std::vector<double>& count_curve(int m) const;
  // Probability of exactly m detections within a window tau <= t_max,
  // linearly interpolated between grid nodes.
  double count_probability(int m, double tau) const;
  // Grid evaluation of P0(t2)/P0(t1); raises NumericError when P0(t1) has
  // underflowed on the grid.
  double no_photon_in_interval(double t1, double t2) const;

 private:
  void build(GridOptions opt);
  double interp(const std::vector<double>& y, double tau) const;

  LightSource src_;
  double eta_;
  double dt_ = 0.0;
  double t_max_ = 0.0;
  std::size_t n_ = 0;
  int m_max_ = 0;
  int doublings_ = 0;
  std::vector<std::vector<double>> l_;      // l_[m-1] = L_m
  std::vector<double> l_norm_;
  std::vector<std::vector<double>> p_;      // p_[m] = P_m
};

}  // namespace qrnglab
