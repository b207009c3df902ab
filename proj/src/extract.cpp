#include "extract.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "errors.hpp"
#include "rng.hpp"

namespace qrnglab {

BitString encode_fixed(std::span<const Outcome> outcomes, OutcomeMode mode) {
  BitString out;
  if (mode == OutcomeMode::Discard) {
    for (Outcome o : outcomes) {
      if (o == Outcome::AB)
        throw std::domain_error(
            "discard-mode extractor input cannot contain coincidence symbols");
      out.push(o == Outcome::B);
    }
    return out;
  }
  for (Outcome o : outcomes) {
    const int s = static_cast<int>(o);
    out.push((s >> 1) & 1);
    out.push(s & 1);
  }
  return out;
}

BitString encode_prefix_free(std::span<const Outcome> outcomes) {
  BitString out;
  for (Outcome o : outcomes) {
    switch (o) {
      case Outcome::A:
        out.push(false);
        break;
      case Outcome::B:
        out.push(true);
        out.push(false);
        break;
      case Outcome::AB:
        out.push(true);
        out.push(true);
        break;
    }
  }
  return out;
}

std::vector<Outcome> decode_prefix_free(const BitString& bits) {
  std::vector<Outcome> out;
  std::size_t i = 0;
  while (i < bits.bit_count) {
    if (!bits.bit(i)) {
      out.push_back(Outcome::A);
      ++i;
      continue;
    }
    if (i + 1 >= bits.bit_count)
      throw std::domain_error("truncated prefix-free outcome stream");
    out.push_back(bits.bit(i + 1) ? Outcome::AB : Outcome::B);
    i += 2;
  }
  return out;
}

std::size_t ExtractorParams::output_bits() const {
  const double v =
      static_cast<double>(block_outcomes) * h_min + 2.0 * eps_log2;
  return v < 0.0 ? 0 : static_cast<std::size_t>(std::floor(v));
}

void ExtractorParams::validate() const {
  if (block_outcomes == 0)
    throw ConfigError("block_outcomes must be positive");
  if (!(std::isfinite(h_min) && h_min > 0.0))
    throw ConfigError(
        "h_min must be positive; compute it from the transition model first");
  if (h_min > static_cast<double>(bits_per_outcome()))
    throw ConfigError("h_min cannot exceed the bits carried per outcome");
  if (!(std::isfinite(eps_log2) && eps_log2 < 0.0))
    throw ConfigError("eps_log2 must be negative");
  if (output_bits() < 1)
    throw ConfigError(
        "entropy budget too small: block_outcomes * h_min must exceed "
        "2*log2(1/eps)");
}

namespace {

// LSB-first word packing of a BitString, padded with `extra` zero words.
std::vector<std::uint64_t> pack_lsb(const BitString& bits, std::size_t extra) {
  std::vector<std::uint64_t> words((bits.bit_count + 63) / 64 + extra, 0);
  for (std::size_t i = 0; i < bits.bit_count; ++i)
    if (bits.bit(i)) words[i >> 6] |= std::uint64_t{1} << (i & 63);
  return words;
}

std::uint64_t window64(const std::vector<std::uint64_t>& w, std::size_t off) {
  const std::size_t q = off >> 6;
  const unsigned r = off & 63;
  if (r == 0) return w[q];
  return (w[q] >> r) | (w[q + 1] << (64 - r));
}

}  // namespace

ToeplitzExtractor::ToeplitzExtractor(ExtractorParams params, BitString seed)
    : params_(params), seed_(std::move(seed)) {
  params_.validate();
  if (seed_.bit_count != params_.seed_bits())
    throw std::domain_error("seed must carry input_bits + output_bits - 1 = " +
                            std::to_string(params_.seed_bits()) + " bits");
  seed_words_ = pack_lsb(seed_, 2);
}

ToeplitzExtractor ToeplitzExtractor::from_seed(ExtractorParams params,
                                               std::uint64_t seed_value) {
  params.validate();
  Xoshiro256pp rng(seed_value);
  BitString seed;
  std::uint64_t buf = 0;
  for (std::size_t i = 0; i < params.seed_bits(); ++i) {
    if ((i & 63) == 0) buf = rng.next();
    seed.push((buf >> (i & 63)) & 1);
  }
  return ToeplitzExtractor(params, std::move(seed));
}

std::uint64_t ToeplitzExtractor::seed_fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : seed_.bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  h ^= seed_.bit_count;
  h *= 0x100000001b3ull;
  return h;
}

BitString ToeplitzExtractor::extract_bits(const BitString& input) const {
  const std::size_t n = params_.input_bits();
  const std::size_t m = params_.output_bits();
  if (input.bit_count != n)
    throw std::domain_error("extractor input must carry exactly " +
                            std::to_string(n) + " bits");
  // Row i dotted with x equals the correlation of the seed with the
  // bit-reversed input at offset i.
  BitString reversed;
  for (std::size_t j = 0; j < n; ++j) reversed.push(input.bit(n - 1 - j));
  const std::vector<std::uint64_t> xr = pack_lsb(reversed, 0);

  BitString out;
  for (std::size_t i = 0; i < m; ++i) {
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < xr.size(); ++w)
      acc ^= window64(seed_words_, i + 64 * w) & xr[w];
    out.push(std::popcount(acc) & 1);
  }
  return out;
}

BitString ToeplitzExtractor::extract_bits_naive(const BitString& input) const {
  const std::size_t n = params_.input_bits();
  const std::size_t m = params_.output_bits();
  if (input.bit_count != n)
    throw std::domain_error("extractor input must carry exactly " +
                            std::to_string(n) + " bits");
  BitString out;
  for (std::size_t i = 0; i < m; ++i) {
    bool parity = false;
    for (std::size_t j = 0; j < n; ++j)
      parity ^= seed_.bit(i + n - 1 - j) & input.bit(j);
    out.push(parity);
  }
  return out;
}

BitString ToeplitzExtractor::extract_block(
    std::span<const Outcome> outcomes) const {
  if (outcomes.size() != params_.block_outcomes)
    throw std::domain_error("block must carry exactly " +
                            std::to_string(params_.block_outcomes) +
                            " outcomes");
  return extract_bits(encode_fixed(outcomes, params_.mode));
}

}  // namespace qrnglab
