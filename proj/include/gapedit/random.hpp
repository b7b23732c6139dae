#pragma once

#include <sodium.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>

#include "gapedit/text.hpp"

namespace gapedit {

inline void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

struct Seed {
  std::array<std::uint8_t, 32> bytes{};

  static Seed from_u64(std::uint64_t v) {
    Seed s;
    for (int i = 0; i < 8; ++i) s.bytes[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return s;
  }

  // Accepts up to 64 hex digits (zero-extended) or a decimal integer.
  static Seed parse(std::string_view text) {
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
      text.remove_prefix(2);
      if (text.empty() || text.size() > 64) throw UsageError("seed: expected 1..64 hex digits");
      Seed s;
      // little-endian nibble order from the right end of the string
      for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[text.size() - 1 - i];
        int v = c >= '0' && c <= '9' ? c - '0' : c >= 'a' && c <= 'f' ? c - 'a' + 10 : c >= 'A' && c <= 'F' ? c - 'A' + 10 : -1;
        if (v < 0) throw UsageError("seed: invalid hex digit");
        s.bytes[i / 2] |= static_cast<std::uint8_t>(v << (4 * (i % 2)));
      }
      return s;
    }
    if (text.empty()) throw UsageError("seed: empty");
    std::uint64_t v = 0;
    for (char c : text) {
      if (c < '0' || c > '9') throw UsageError("seed: expected decimal or 0x-prefixed hex");
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return from_u64(v);
  }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out = "0x";
    for (int i = 31; i >= 0; --i) {
      out += digits[bytes[i] >> 4];
      out += digits[bytes[i] & 15];
    }
    return out;
  }

  friend bool operator==(const Seed&, const Seed&) = default;
};

enum class Purpose : std::uint32_t {
  repetition = 1,
  tolerance = 2,
  sample_set = 3,
  hash_coefficient = 4,
  instance = 5,
  harness = 6,
};

// Keyed BLAKE2b over (node_id, purpose, block); each block yields 8 words, so
// outputs are a deterministic function of (seed, node_id, purpose, counter).
class RandomStream {
 public:
  RandomStream(const Seed& seed, std::uint64_t node_id, Purpose purpose) noexcept
      : seed_(&seed), node_(node_id), purpose_(purpose) {}

  std::uint64_t at(std::uint64_t counter) {
    const std::uint64_t block = counter / 8;
    if (block != block_) refill(block);
    return words_[counter % 8];
  }

  std::uint64_t next() { return at(pos_++); }

  // Uniform in (0, 1].
  double next_unit() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

 private:
  void refill(std::uint64_t block) {
    ensure_sodium();
    std::uint8_t in[20];
    std::memcpy(in, &node_, 8);
    const auto tag = static_cast<std::uint32_t>(purpose_);
    std::memcpy(in + 8, &tag, 4);
    std::memcpy(in + 12, &block, 8);
    std::uint8_t out[64];
    crypto_generichash_blake2b(out, sizeof out, in, sizeof in, seed_->bytes.data(), seed_->bytes.size());
    std::memcpy(words_.data(), out, sizeof out);
    block_ = block;
  }

  const Seed* seed_;
  std::uint64_t node_;
  Purpose purpose_;
  std::uint64_t block_ = ~std::uint64_t{0};
  std::uint64_t pos_ = 0;
  std::array<std::uint64_t, 8> words_{};
};

inline std::uint64_t derive_randomness(const Seed& seed, std::uint64_t node_id, Purpose purpose, std::uint64_t counter) {
  return RandomStream(seed, node_id, purpose).at(counter);
}

// Independent 256-bit seed for repetition r of a master seed.
inline Seed repetition_seed(const Seed& master, std::uint32_t repetition) {
  RandomStream rs(master, repetition, Purpose::repetition);
  Seed s;
  for (int i = 0; i < 4; ++i) {
    const std::uint64_t w = rs.at(i);
    std::memcpy(s.bytes.data() + 8 * i, &w, 8);
  }
  return s;
}

// Exp(lambda) conditioned on u >= u_min, by rejection.
inline double sample_exponential(double lambda, double u_min, RandomStream& rs) {
  if (!(lambda > 0)) throw UsageError("sample_exponential: lambda must be positive");
  for (;;) {
    const double u = -std::log(rs.next_unit()) / lambda;
    if (u >= u_min) return u;
  }
}

}  // namespace gapedit
