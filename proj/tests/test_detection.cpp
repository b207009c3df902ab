#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "detection.hpp"

using namespace qrnglab;

TEST_SUITE("detection") {

TEST_CASE("chain defaults and validation") {
  DetectorChain chain;
  CHECK(chain.eta_qe == 0.6);
  CHECK(chain.p_a == 0.5);
  CHECK(chain.tau_dead == 50e-9);
  CHECK(chain.tau_cw == 2e-9);
  CHECK(chain.sigma_jitt == 250e-12);
  CHECK(chain.efficiency(Detector::A) == doctest::Approx(0.3));
  CHECK(chain.efficiency(Detector::B) == doctest::Approx(0.3));
  CHECK_NOTHROW(chain.validate());
  CHECK_NOTHROW(chain.validate_for_transitions());

  DetectorChain bad = chain;
  bad.eta_qe = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = chain;
  bad.p_a = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = chain;
  bad.tau_dead = -1e-9;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);

  // Pairwise coincidences need the window to fit twice into the dead time.
  DetectorChain wide = chain;
  wide.tau_cw = 25e-9;
  CHECK_NOTHROW(wide.validate());
  CHECK_THROWS_AS(wide.validate_for_transitions(), std::domain_error);
}

TEST_CASE("order-swap probability under timing jitter") {
  CHECK(permutation_probability(2e-9, 250e-12) ==
        doctest::Approx(6.220960574271829e-16).epsilon(1e-9).scale(0.0));
  // Window equal to the spread: 0.5*erfc(1/sqrt(2)).
  CHECK(permutation_probability(1e-9, 1e-9) ==
        doctest::Approx(0.15865525393145707).epsilon(1e-12));
  // No jitter: never swapped unless simultaneous, then a fair coin.
  CHECK(permutation_probability(2e-9, 0.0) == 0.0);
  CHECK(permutation_probability(0.0, 0.0) == 0.5);
  // Zero separation with jitter: a fair coin as well.
  CHECK(permutation_probability(0.0, 300e-12) == doctest::Approx(0.5));
  CHECK_THROWS_AS(permutation_probability(-1e-9, 1e-10), std::domain_error);
}

TEST_CASE("mean photon number seen during the dead time") {
  DetectorChain chain;  // eta_x = 0.3
  SUBCASE("laser is flux times window") {
    auto laser = LightSource::laser(5e7);
    CHECK(blind_count(laser, chain, Detector::A) ==
          doctest::Approx(0.3 * 5e7 * 50e-9).epsilon(1e-12));
  }
  SUBCASE("emitter sees fewer photons while antibunched") {
    auto sps = LightSource::two_level_for_rate(5e7, 1e8);
    CHECK(blind_count(sps, chain, Detector::A) ==
          doctest::Approx(0.6750034049947321).epsilon(1e-12));
    CHECK(blind_count(sps, chain, Detector::A) <
          blind_count(LightSource::laser(5e7), chain, Detector::A));
  }
}

TEST_CASE("stationary click rates") {
  DetectorChain chain;
  SUBCASE("laser closed form") {
    auto laser = LightSource::laser(5e7);
    CHECK(click_rate(laser, chain, Detector::A) ==
          doctest::Approx(1.5e7 / 1.75).epsilon(1e-12));
  }
  SUBCASE("antibunching raises the recorded rate at equal flux") {
    auto sps = LightSource::two_level_for_rate(5e7, 1e8);
    CHECK(click_rate(sps, chain, Detector::A) ==
          doctest::Approx(8955205.676162297).epsilon(1e-12));
    CHECK(click_rate(sps, chain, Detector::A) > 1.5e7 / 1.75);
  }
  SUBCASE("dead time caps the rate") {
    auto bright = LightSource::laser(1e12);
    const double rate = click_rate(bright, chain, Detector::A);
    CHECK(rate < 1.0 / chain.tau_dead);
    CHECK(rate == doctest::Approx(1.0 / chain.tau_dead).epsilon(1e-3));
  }
  SUBCASE("splitter asymmetry moves rate between detectors") {
    DetectorChain uneven;
    uneven.p_a = 0.7;
    auto laser = LightSource::laser(5e7);
    CHECK(click_rate(laser, uneven, Detector::A) >
          click_rate(laser, uneven, Detector::B));
  }
}

TEST_CASE("coincidence probability") {
  DetectorChain chain;
  auto sps = LightSource::two_level_for_rate(5e7, 1e8);
  CHECK(coincidence_probability(sps, chain, Detector::A) ==
        doctest::Approx(0.006297304754063515).epsilon(1e-12));
  // Two-sided window around the given click, weighted by g2.
  auto laser = LightSource::laser(5e7);
  CHECK(coincidence_probability(laser, chain, Detector::A) ==
        doctest::Approx(2.0 * click_rate(laser, chain, Detector::B) *
                        chain.tau_cw)
            .epsilon(1e-12));
  // Antibunching suppresses coincidences.
  CHECK(coincidence_probability(sps, chain, Detector::A) <
        coincidence_probability(laser, chain, Detector::A));
}

TEST_CASE("click probability over a bounded interval") {
  DetectorChain chain;
  auto laser = LightSource::laser(5e7);
  const double rate = click_rate(laser, chain, Detector::B);
  CHECK(click_probability_interval(laser, chain, Detector::B, 2e-9, 10e-9) ==
        doctest::Approx(rate * 8e-9).epsilon(1e-12));
  CHECK(click_probability_interval(laser, chain, Detector::B, 5e-9, 5e-9) ==
        0.0);
  // Wider than the dead time would allow several clicks inside.
  CHECK_THROWS_AS(
      click_probability_interval(laser, chain, Detector::B, 0.0, 60e-9),
      std::domain_error);
  CHECK_THROWS_AS(
      click_probability_interval(laser, chain, Detector::B, 5e-9, 2e-9),
      std::domain_error);
}

TEST_CASE("rate bundle is internally consistent") {
  DetectorChain chain;
  for (bool use_sps : {false, true}) {
    auto src = use_sps ? LightSource::two_level_for_rate(5e7, 1e8)
                       : LightSource::laser(5e7);
    CAPTURE(use_sps);
    const RateBundle r = rate_bundle(src, chain);
    // Every click is either a lone bit or part of a coincidence.
    CHECK(r.bit_a + r.coincidence == doctest::Approx(r.click_a).epsilon(1e-12));
    CHECK(r.bit_b + r.coincidence == doctest::Approx(r.click_b).epsilon(1e-12));
    CHECK(r.bit_total == doctest::Approx(r.bit_a + r.bit_b).epsilon(1e-14));
    // Symmetric splitter: detectors are exchangeable.
    CHECK(r.click_a == doctest::Approx(r.click_b).epsilon(1e-14));
    CHECK(r.coincidence > 0.0);
  }
}

}  // TEST_SUITE
