// Toeplitz-hashing randomness extractor over GF(2), plus the outcome bit
// encodings used for extractor input and for transport.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "transitions.hpp"

namespace qrnglab {

// Bit container packed MSB-first: bit i lives in bytes[i/8] at 1 << (7-i%8).
struct BitString {
  std::vector<std::uint8_t> bytes;
  std::size_t bit_count = 0;

  bool bit(std::size_t i) const {
    return (bytes[i >> 3] >> (7 - (i & 7))) & 1u;
  }
  void push(bool b) {
    if ((bit_count & 7) == 0) bytes.push_back(0);
    if (b) bytes[bit_count >> 3] |= static_cast<std::uint8_t>(1u << (7 - (bit_count & 7)));
    ++bit_count;
  }
  bool operator==(const BitString&) const = default;
};

// Fixed-width extractor input encoding. Discard: one bit per outcome, a=0,
// b=1. Keep: two-bit symbol index, a=00, b=01, ab=10.
BitString encode_fixed(std::span<const Outcome> outcomes, OutcomeMode mode);
// Prefix-free transport encoding for keep mode: a=0, b=10, ab=11.
BitString encode_prefix_free(std::span<const Outcome> outcomes);
std::vector<Outcome> decode_prefix_free(const BitString& bits);

struct ExtractorParams {
  std::size_t block_outcomes = 4096;  // outcomes hashed per block
  double h_min = 0.0;                 // min-entropy per outcome, bits
  double eps_log2 = -64.0;            // log2 of the security parameter
  OutcomeMode mode = OutcomeMode::Discard;

  std::size_t bits_per_outcome() const {
    return mode == OutcomeMode::Keep ? 2 : 1;
  }
  std::size_t input_bits() const { return block_outcomes * bits_per_outcome(); }
  // floor(block * h_min - 2 log2(1/eps)); must come out >= 1.
  std::size_t output_bits() const;
  std::size_t seed_bits() const { return input_bits() + output_bits() - 1; }
  void validate() const;
};

class ToeplitzExtractor {
 public:
  // seed must carry exactly seed_bits() bits. Row i of the implied matrix is
  // T[i][j] = seed[i - j + input_bits - 1].
  ToeplitzExtractor(ExtractorParams params, BitString seed);
  // Seed expanded deterministically from a 64-bit value.
  static ToeplitzExtractor from_seed(ExtractorParams params,
                                     std::uint64_t seed_value);

  const ExtractorParams& params() const { return params_; }
  const BitString& seed() const { return seed_; }
  std::uint64_t seed_fingerprint() const;  // FNV-1a over the seed bytes

  // Hash one block of exactly block_outcomes outcomes.
  BitString extract_block(std::span<const Outcome> outcomes) const;
  // Hash a packed input of exactly input_bits() bits.
  BitString extract_bits(const BitString& input) const;
  // Bit-by-bit reference path; cross-checks the word-level implementation.
  BitString extract_bits_naive(const BitString& input) const;

 private:
  ExtractorParams params_;
  BitString seed_;
  std::vector<std::uint64_t> seed_words_;  // LSB-first repacking for sliding reads
};

}  // namespace qrnglab
