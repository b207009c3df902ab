// Conditional outcome model: the stationary distribution over recorded
// outcomes and the transition matrix between consecutive outcomes, including
// dead-time memory and coincidence handling.
#pragma once

#include <array>

#include "detection.hpp"

namespace qrnglab {

enum class OutcomeMode { Discard = 0, Keep = 1 };
enum class Outcome : int { A = 0, B = 1, AB = 2 };

constexpr int alphabet_size(OutcomeMode mode) {
  return mode == OutcomeMode::Keep ? 3 : 2;
}

struct TransitionModel {
  OutcomeMode mode = OutcomeMode::Discard;
  int alphabet = 2;
  std::array<double, 3> stationary{};              // p(y); AB entry 0 when discarding
  std::array<std::array<double, 3>, 3> row{};      // row[y][x] = p(x | y)
};

// Distribution of the next outcome when both detectors are live and the race
// restarts from scratch (the post-dead-time release race), per symbol.
std::array<double, 3> release_distribution(const LightSource& src,
                                           const DetectorChain& chain,
                                           OutcomeMode mode);

// Stationary outcome distribution from the rate bundle.
std::array<double, 3> outcome_distribution(const RateBundle& rates,
                                           OutcomeMode mode);

TransitionModel transition_matrix(const LightSource& src,
                                  const DetectorChain& chain,
                                  OutcomeMode mode);

namespace detail {
// Gauss-Legendre nodes/weights on [-1, 1], computed once per order by Newton
// iteration on the Legendre recurrence.
struct GaussLegendre {
  std::array<double, 32> node;
  std::array<double, 32> weight;
};
const GaussLegendre& gauss_legendre_32();
}  // namespace detail

}  // namespace qrnglab
