#include <array>
#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "entropy.hpp"
#include "rng.hpp"

using namespace qrnglab;

TEST_SUITE("entropy") {

TEST_CASE("entropy measures on simple distributions") {
  const std::array<double, 4> uniform = {0.25, 0.25, 0.25, 0.25};
  const std::array<double, 4> delta = {1.0, 0.0, 0.0, 0.0};
  const std::array<double, 2> biased = {0.9, 0.1};

  CHECK(shannon_entropy(uniform) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(shannon_entropy(delta) == 0.0);
  CHECK(min_entropy(uniform) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(min_entropy(biased) ==
        doctest::Approx(-std::log2(0.9)).epsilon(1e-14));
  CHECK(renyi_entropy(uniform, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
  // Collision entropy of the biased coin: -log2(0.81 + 0.01).
  CHECK(renyi_entropy(biased, 2.0) ==
        doctest::Approx(-std::log2(0.82)).epsilon(1e-14));
}

TEST_CASE("Renyi order limits") {
  const std::array<double, 3> p = {0.6, 0.3, 0.1};
  // alpha -> 1 recovers Shannon.
  CHECK(renyi_entropy(p, 1.0) ==
        doctest::Approx(shannon_entropy(p)).epsilon(1e-12));
  CHECK(renyi_entropy(p, 1.0 + 1e-9) ==
        doctest::Approx(shannon_entropy(p)).epsilon(1e-6));
  // Large alpha approaches min-entropy from above.
  CHECK(renyi_entropy(p, 512.0) ==
        doctest::Approx(min_entropy(p)).epsilon(1e-2));
  CHECK(renyi_entropy(p, 512.0) >= min_entropy(p));
}

TEST_CASE("entropy ordering on random distributions") {
  Xoshiro256pp rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 5> p{};
    double sum = 0.0;
    for (auto& v : p) sum += (v = -std::log(rng.uniform_pos()));
    for (auto& v : p) v /= sum;
    const double h_sh = shannon_entropy(p);
    const double h_2 = renyi_entropy(p, 2.0);
    const double h_16 = renyi_entropy(p, 16.0);
    const double h_min = min_entropy(p);
    CHECK(h_sh >= h_2 - 1e-12);
    CHECK(h_2 >= h_16 - 1e-12);
    CHECK(h_16 >= h_min - 1e-12);
  }
}

TEST_CASE("conditional entropies at the reference operating point") {
  DetectorChain chain;
  SUBCASE("laser, discard") {
    const auto p = entropy_point(LightSource::laser(5e7), chain,
                                 OutcomeMode::Discard);
    CHECK(p.shannon_cond == doctest::Approx(0.864964054870855).epsilon(1e-9));
    CHECK(p.min_cond == doctest::Approx(0.4882568338539828).epsilon(1e-9));
    CHECK(p.outcome_rate ==
          doctest::Approx(16555102.040816326).epsilon(1e-9));
    CHECK(p.shannon_rate ==
          doctest::Approx(p.shannon_cond * p.outcome_rate).epsilon(1e-12));
    CHECK(p.min_rate ==
          doctest::Approx(p.min_cond * p.outcome_rate).epsilon(1e-12));
  }
  SUBCASE("laser, keep") {
    const auto p =
        entropy_point(LightSource::laser(5e7), chain, OutcomeMode::Keep);
    CHECK(p.shannon_cond == doctest::Approx(0.9741223386489367).epsilon(1e-9));
    CHECK(p.min_cond == doctest::Approx(0.513642152273897).epsilon(1e-9));
    CHECK(p.outcome_rate ==
          doctest::Approx(16848979.591836736).epsilon(1e-9));
  }
  SUBCASE("emitter, discard") {
    const auto p = entropy_point(LightSource::two_level_for_rate(5e7, 1e8),
                                 chain, OutcomeMode::Discard);
    CHECK(p.shannon_cond == doctest::Approx(0.879874969664235).epsilon(1e-9));
    CHECK(p.min_cond == doctest::Approx(0.5121955563779094).epsilon(1e-9));
    CHECK(p.outcome_rate ==
          doctest::Approx(17797624.033768367).epsilon(1e-9));
  }
  SUBCASE("emitter, keep") {
    const auto p = entropy_point(LightSource::two_level_for_rate(5e7, 1e8),
                                 chain, OutcomeMode::Keep);
    CHECK(p.shannon_cond == doctest::Approx(0.907901261671902).epsilon(1e-9));
    CHECK(p.min_cond == doctest::Approx(0.5168206251179299).epsilon(1e-9));
    CHECK(p.outcome_rate == doctest::Approx(17854017.69304648).epsilon(1e-9));
  }
}

TEST_CASE("conditional entropy agrees with a direct computation") {
  DetectorChain chain;
  const auto m = transition_matrix(LightSource::laser(5e7), chain,
                                   OutcomeMode::Keep);
  const auto ce = conditional_entropy(m);
  double h_sh = 0.0, guess = 0.0;
  for (int y = 0; y < m.alphabet; ++y) {
    double row_h = 0.0, row_max = 0.0;
    for (int x = 0; x < m.alphabet; ++x) {
      if (m.row[y][x] > 0.0) row_h -= m.row[y][x] * std::log2(m.row[y][x]);
      row_max = std::max(row_max, m.row[y][x]);
    }
    h_sh += m.stationary[y] * row_h;
    guess += m.stationary[y] * row_max;
  }
  CHECK(ce.shannon == doctest::Approx(h_sh).epsilon(1e-12));
  CHECK(ce.min == doctest::Approx(-std::log2(guess)).epsilon(1e-12));
}

TEST_CASE("source families expose their scan ranges") {
  SourceFamily laser{SourceKind::Laser};
  CHECK(laser.lambda_min() == doctest::Approx(1e5));
  CHECK(laser.lambda_max() == doctest::Approx(1e12));
  CHECK(laser.at(5e7).is_laser());

  SourceFamily sps{SourceKind::TwoLevelEmitter, 1e8};
  CHECK(sps.lambda_max() < 1e8);
  CHECK(sps.at(5e7).photon_rate() == doctest::Approx(5e7).epsilon(1e-12));
}

TEST_CASE("entropy curve matches pointwise evaluation") {
  DetectorChain chain;
  SourceFamily family{SourceKind::TwoLevelEmitter, 1e8};
  const std::vector<double> lambdas = {1e6, 1e7, 5e7};
  const auto curve =
      entropy_curve(family, chain, OutcomeMode::Discard, lambdas);
  REQUIRE(curve.size() == lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto p = entropy_point(family.at(lambdas[i]), chain,
                                 OutcomeMode::Discard);
    CHECK(curve[i].lambda == doctest::Approx(lambdas[i]).epsilon(1e-12));
    CHECK(curve[i].min_rate == doctest::Approx(p.min_rate).epsilon(1e-12));
  }
}

TEST_CASE("optimizer finds the four reference optima") {
  DetectorChain chain;
  SUBCASE("laser") {
    SourceFamily family{SourceKind::Laser};
    const auto d = find_optimum(family, chain, OutcomeMode::Discard);
    CHECK(d.unimodal);
    CHECK(d.lambda_star == doctest::Approx(52900378.55733607).epsilon(5e-4));
    CHECK(d.min_rate_star ==
          doctest::Approx(8089889.089259853).epsilon(1e-6));
    CHECK(std::isnan(d.pump_star));
    const auto k = find_optimum(family, chain, OutcomeMode::Keep);
    CHECK(k.unimodal);
    CHECK(k.lambda_star == doctest::Approx(61422255.241816714).epsilon(5e-4));
    CHECK(k.min_rate_star == doctest::Approx(8738866.07689449).epsilon(1e-6));
    // Keeping coincidences is worth extra rate for the laser.
    CHECK(k.min_rate_star > d.min_rate_star);
  }
  SUBCASE("emitter") {
    SourceFamily family{SourceKind::TwoLevelEmitter, 1e8};
    const auto d = find_optimum(family, chain, OutcomeMode::Discard);
    CHECK(d.unimodal);
    CHECK(d.lambda_star == doctest::Approx(50348556.497237876).epsilon(5e-4));
    CHECK(d.min_rate_star ==
          doctest::Approx(9116021.524835095).epsilon(1e-6));
    CHECK(d.pump_star == doctest::Approx(101404013.54985173).epsilon(5e-4));
    const auto k = find_optimum(family, chain, OutcomeMode::Keep);
    CHECK(k.lambda_star == doctest::Approx(52116602.30076253).epsilon(5e-4));
    CHECK(k.min_rate_star ==
          doctest::Approx(9232547.305694558).epsilon(1e-6));
    CHECK(k.pump_star == doctest::Approx(108840652.09431133).epsilon(5e-4));
  }
  SUBCASE("the emitter outperforms the laser in both modes") {
    SourceFamily laser{SourceKind::Laser};
    SourceFamily sps{SourceKind::TwoLevelEmitter, 1e8};
    const double ratio_d =
        find_optimum(sps, chain, OutcomeMode::Discard).min_rate_star /
        find_optimum(laser, chain, OutcomeMode::Discard).min_rate_star;
    const double ratio_k =
        find_optimum(sps, chain, OutcomeMode::Keep).min_rate_star /
        find_optimum(laser, chain, OutcomeMode::Keep).min_rate_star;
    CHECK(ratio_d - 1.0 ==
          doctest::Approx(0.12684134779270795).epsilon(1e-6));
    CHECK(ratio_k - 1.0 ==
          doctest::Approx(0.056492595773421694).epsilon(1e-6));
  }
}

TEST_CASE("robustness sweep definition") {
  const auto points = robustness_points();
  CHECK(points.size() == 45);
  // Every point carries a valid chain and a named parameter.
  std::size_t lifetimes = 0;
  for (const auto& p : points) {
    CHECK_NOTHROW(p.chain.validate_for_transitions());
    CHECK(p.decay_rate > 0.0);
    CHECK(std::strlen(p.parameter) > 0);
    if (std::strcmp(p.parameter, "lifetime_ns") == 0) ++lifetimes;
  }
  CHECK(lifetimes == 20);
}

TEST_CASE("robustness evaluation at the baseline point") {
  // The lifetime sweep passes through the default 10 ns / 100 MHz emitter;
  // its advantage must equal the reference figure.
  const auto points = robustness_points();
  for (const auto& p : points) {
    if (std::strcmp(p.parameter, "lifetime_ns") != 0 || p.value != 10.0)
      continue;
    const auto row = robustness_eval(p, OutcomeMode::Discard);
    CHECK(row.advantage == doctest::Approx(0.12684134779270795).epsilon(1e-6));
    CHECK(row.sps_rate ==
          doctest::Approx(9116021.524835095).epsilon(1e-6));
    CHECK(row.laser_rate ==
          doctest::Approx(8089889.089259853).epsilon(1e-6));
    return;
  }
  FAIL("lifetime sweep does not include the 10 ns baseline");
}

}  // TEST_SUITE
