// Deterministic pseudo-random generator: xoshiro256++ state-advanced, seeded
// through SplitMix64. Implemented locally (including Box-Muller) so streams
// are bit-identical across platforms and standard-library versions.
#pragma once

#include <cmath>
#include <cstdint>

namespace qrnglab {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

class Xoshiro256pp {
 public:
  static constexpr const char* kAlgorithm = "xoshiro256++ (splitmix64 seeded)";

  explicit Xoshiro256pp(std::uint64_t seed) : seed_(seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  // Independent stream derived from the same base seed. Stream i is a fresh
  // generator seeded with splitmix64(seed XOR (i+1)*0x9e3779b97f4a7c15), so a
  // run is reproducible from the (seed, stream index) pair alone.
  Xoshiro256pp stream(std::uint64_t index) const {
    SplitMix64 sm(seed_ ^ ((index + 1) * 0x9e3779b97f4a7c15ull));
    return Xoshiro256pp(sm.next());
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0,1), 53 significant bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; never zero, so logarithms stay finite.
  double uniform_pos() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  // Box-Muller with the companion value cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.28318530717958647692528676655900577 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t base_seed() const { return seed_; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace qrnglab
