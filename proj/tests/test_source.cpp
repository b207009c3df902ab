#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "source.hpp"

using namespace qrnglab;

TEST_SUITE("source") {

TEST_CASE("steady-state emission rate of the pumped emitter") {
  // k*gamma/(k+gamma); symmetric pumping gives half the decay rate.
  CHECK(emission_rate(1e8, 1e8) == doctest::Approx(5e7).epsilon(1e-14));
  CHECK(emission_rate(1e6, 1e8) ==
        doctest::Approx(1e6 * 1e8 / (1.01e8)).epsilon(1e-14));
  // Saturation: the photon rate never reaches the decay rate.
  CHECK(emission_rate(1e12, 1e8) < 1e8);
}

TEST_CASE("pump rate inversion") {
  CHECK(pump_rate_for(5.03e7, 1e8) ==
        doctest::Approx(101207243.46076459).epsilon(1e-12));
  // Round trip over a range of target rates.
  for (double lambda : {1e5, 1e6, 1e7, 5e7, 9.9e7}) {
    const double k = pump_rate_for(lambda, 1e8);
    CHECK(emission_rate(k, 1e8) == doctest::Approx(lambda).epsilon(1e-12));
  }
  // The inversion only exists below the decay rate.
  CHECK_THROWS_AS(pump_rate_for(1e8, 1e8), std::domain_error);
  CHECK_THROWS_AS(pump_rate_for(2e8, 1e8), std::domain_error);
  CHECK_THROWS_AS(pump_rate_for(-1.0, 1e8), std::domain_error);
}

TEST_CASE("excited-state population after an emission") {
  // (k/(k+gamma)) * (1 - exp(-(k+gamma) tau)), starting from the ground
  // state at tau = 0.
  CHECK(excited_population(1e8, 1e8, 5e-9) ==
        doctest::Approx(0.31606027941427883).epsilon(1e-12));
  CHECK(excited_population(1e8, 1e8, 0.0) == 0.0);
  // Long-time limit is the stationary population k/(k+gamma).
  CHECK(excited_population(3e7, 1e8, 1.0) ==
        doctest::Approx(3e7 / 1.3e8).epsilon(1e-12));
}

TEST_CASE("laser correlations are flat") {
  auto laser = LightSource::laser(5e7);
  CHECK(laser.is_laser());
  CHECK(laser.photon_rate() == 5e7);
  for (double tau : {0.0, 1e-12, 1e-9, 1e-6, 1.0}) {
    CHECK(laser.g2(tau) == 1.0);
    CHECK(laser.g2(-tau) == 1.0);
  }
  CHECK(laser.g2_integral(2e-9, 7e-9) == doctest::Approx(5e-9).epsilon(1e-14));
}

TEST_CASE("two-level emitter antibunching") {
  auto sps = LightSource::two_level(1e8, 1e8);
  CHECK_FALSE(sps.is_laser());
  CHECK(sps.photon_rate() == doctest::Approx(5e7).epsilon(1e-14));
  CHECK(sps.pump_rate() == 1e8);
  CHECK(sps.decay_rate() == 1e8);
  CHECK(sps.rate_sum() == 2e8);
  // g2(0) = 0, rising as 1 - exp(-(k+gamma)|tau|).
  CHECK(sps.g2(0.0) == 0.0);
  CHECK(sps.g2(10e-9) == doctest::Approx(0.8646647167633873).epsilon(1e-12));
  CHECK(sps.g2(-10e-9) == sps.g2(10e-9));
  CHECK(sps.g2(1e-3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("correlation integral matches numerical quadrature") {
  auto sps = LightSource::two_level(7e7, 1e8);
  for (auto [t1, t2] : {std::pair{0.0, 5e-9}, std::pair{1e-9, 30e-9},
                        std::pair{5e-8, 6e-8}}) {
    // Fine trapezoid reference on the closed-form g2.
    const int n = 20001;
    const double h = (t2 - t1) / (n - 1);
    double acc = 0.5 * (sps.g2(t1) + sps.g2(t2));
    for (int i = 1; i < n - 1; ++i) acc += sps.g2(t1 + i * h);
    acc *= h;
    CHECK(sps.g2_integral(t1, t2) == doctest::Approx(acc).epsilon(1e-9));
  }
  CHECK_THROWS_AS(sps.g2_integral(5e-9, 1e-9), std::domain_error);
}

TEST_CASE("detected densities scale with efficiency") {
  auto sps = LightSource::two_level_for_rate(5e7, 1e8);
  const double eta = 0.3;
  CHECK(sps.detected_density(eta, 10e-9) ==
        doctest::Approx(eta * 5e7 * sps.g2(10e-9)).epsilon(1e-12));
  CHECK(sps.mean_detected(eta, 50e-9) ==
        doctest::Approx(eta * 5e7 * sps.g2_integral(0.0, 50e-9))
            .epsilon(1e-12));
}

TEST_CASE("constructing an emitter for a target rate") {
  auto sps = LightSource::two_level_for_rate(5e7, 1e8);
  CHECK(sps.photon_rate() == doctest::Approx(5e7).epsilon(1e-12));
  CHECK(sps.pump_rate() == doctest::Approx(1e8).epsilon(1e-12));
  CHECK_THROWS_AS(LightSource::two_level_for_rate(1e8, 1e8),
                  std::domain_error);
}

TEST_CASE("argument domains") {
  CHECK_THROWS_AS(LightSource::laser(0.0), std::domain_error);
  CHECK_THROWS_AS(LightSource::laser(-5.0), std::domain_error);
  CHECK_THROWS_AS(LightSource::two_level(0.0, 1e8), std::domain_error);
  CHECK_THROWS_AS(LightSource::two_level(1e8, 0.0), std::domain_error);
  auto laser = LightSource::laser(1e7);
  CHECK_THROWS_AS(laser.pump_rate(), std::domain_error);
  CHECK_THROWS_AS(laser.decay_rate(), std::domain_error);
}

}  // TEST_SUITE
