#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "gapedit/precision_tree.hpp"
#include "gapedit/random.hpp"
#include "gapedit/text.hpp"

namespace gapedit {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) noexcept {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

inline std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t p) noexcept {
  std::uint64_t r = 1;
  a %= p;
  while (e) {
    if (e & 1) r = mulmod(r, a, p);
    a = mulmod(a, a, p);
    e >>= 1;
  }
  return r;
}

// Deterministic Miller-Rabin for 64-bit inputs.
inline bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) return false;
  for (std::uint64_t q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % q == 0) return n == q;
  }
  std::uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) d >>= 1, ++r;
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r && composite; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) composite = false;
    }
    if (composite) return false;
  }
  return true;
}

// Largest prime <= n^4, kept within [2^31, 2^61 - 1].
inline std::uint64_t fingerprint_modulus(std::uint64_t n_padded) {
  const long double target = std::pow(static_cast<long double>(std::max<std::uint64_t>(n_padded, 1)), 4.0L);
  if (target >= 0x1.0p61L) return (std::uint64_t{1} << 61) - 1;
  std::uint64_t p = std::uint64_t{1} << 31;
  if (target <= 0x1.0p31L) {
    while (!is_prime(p)) ++p;  // least prime >= 2^31
    return p;
  }
  p = static_cast<std::uint64_t>(target);
  while (!is_prime(p)) --p;
  return p;
}

// Residue of a symbol; BOTTOM and PAD take the two reserved top residues.
inline std::uint64_t symbol_code(Symbol c, std::uint64_t p) noexcept {
  if (c == kBottom) return p - 1;
  if (c == kPad) return p - 2;
  return c;
}

inline double sample_rate(double c_h, std::uint64_t n_padded, double tolerance) {
  const double n = std::max<double>(static_cast<double>(n_padded), 2.0);
  return std::min(1.0, c_h * std::log(n) / tolerance);
}

// Sampled positions and hash coefficients of one node; both regenerate from
// the repetition seed, so the two preprocessing sides agree.
struct NodeHash {
  std::vector<std::uint32_t> sample;
  std::vector<std::uint64_t> coeff;
};

inline std::vector<std::uint32_t> sample_positions(const Seed& rep_seed, const PrecisionNode& v, double rate) {
  std::vector<std::uint32_t> out;
  if (rate >= 1) {
    out.resize(v.range_len);
    for (std::uint32_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }
  RandomStream rs(rep_seed, v.id, Purpose::sample_set);
  for (std::uint64_t i = 0; i < v.range_len; ++i)
    if (static_cast<double>(rs.at(i) >> 11) * 0x1.0p-53 < rate) out.push_back(static_cast<std::uint32_t>(i));
  return out;
}

inline NodeHash make_node_hash(const Seed& rep_seed, const PrecisionNode& v, double rate, std::uint64_t p) {
  NodeHash h;
  h.sample = sample_positions(rep_seed, v, rate);
  h.coeff.resize(h.sample.size());
  RandomStream rs(rep_seed, v.id, Purpose::hash_coefficient);
  for (std::size_t j = 0; j < h.coeff.size(); ++j)
    h.coeff[j] = static_cast<std::uint64_t>((static_cast<unsigned __int128>(rs.at(j)) * p) >> 64);
  return h;
}

template <SymbolSource S>
std::uint64_t fingerprint(const S& source, const NodeHash& h, std::uint64_t p) {
  std::uint64_t acc = 0;
  for (std::size_t j = 0; j < h.sample.size(); ++j) {
    acc += mulmod(h.coeff[j], symbol_code(source[h.sample[j]], p), p);
    if (acc >= p) acc -= p;
  }
  return acc;
}

struct FingerprintEntry {
  std::uint64_t fingerprint;
  std::int64_t shift;
};

struct MatchResult {
  bool close = false;
  std::int64_t shift = 0;
};

inline bool preferred_shift(std::int64_t a, std::int64_t b) noexcept {
  const std::int64_t ma = a < 0 ? -a : a, mb = b < 0 ? -b : b;
  return ma != mb ? ma < mb : a < b;
}

// Per-repetition hashing state shared by both sides.
class NodeHashes {
 public:
  NodeHashes() = default;
  NodeHashes(const PrecisionTree& tree, double c_h) : modulus_(fingerprint_modulus(tree.shape().n_padded)) {
    const Seed rep = repetition_seed(tree.config().master_seed, tree.config().repetition);
    hashes_.reserve(tree.size());
    for (const PrecisionNode& v : tree.nodes())
      hashes_.push_back(make_node_hash(rep, v, sample_rate(c_h, tree.shape().n_padded, v.tolerance), modulus_));
  }

  std::uint64_t modulus() const noexcept { return modulus_; }
  const NodeHash& operator[](std::uint64_t id) const { return hashes_[id]; }
  std::size_t size() const noexcept { return hashes_.size(); }

 private:
  std::uint64_t modulus_ = 0;
  std::vector<NodeHash> hashes_;
};

// Sorted occurrence lists of every symbol of a text.
class SymbolOccurrences {
 public:
  SymbolOccurrences() = default;
  explicit SymbolOccurrences(const Text& y) {
    std::vector<std::pair<Symbol, std::uint32_t>> all(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) all[i] = {y[i], static_cast<std::uint32_t>(i)};
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size();) {
      std::size_t j = i;
      std::vector<std::uint32_t> pos;
      while (j < all.size() && all[j].first == all[i].first) pos.push_back(all[j++].second);
      lists_.emplace_back(all[i].first, std::move(pos));
      i = j;
    }
  }
  const std::vector<std::pair<Symbol, std::vector<std::uint32_t>>>& lists() const noexcept { return lists_; }

 private:
  std::vector<std::pair<Symbol, std::vector<std::uint32_t>>> lists_;
};

// Fingerprints of Y_{v,s} for every node v and s in S, keyed by fingerprint.
// Colliding shifts keep the smallest |s|, then the negative one.
class MatchingIndex {
 public:
  MatchingIndex() = default;

  MatchingIndex(const Text& y_padded, const PrecisionTree& tree, const ShiftSet& shifts, double c_h)
      : hashes_(tree, c_h) {
    const SymbolOccurrences occ(y_padded);
    tables_.resize(tree.size());
    for (const PrecisionNode& v : tree.nodes())
      tables_[v.id] = build_table(y_padded, v, hashes_[v.id], shifts, modulus(), &occ);
  }

  // Reassembles an index from stored tables; hashing state is regenerated.
  MatchingIndex(NodeHashes hashes, std::vector<std::vector<FingerprintEntry>> tables)
      : hashes_(std::move(hashes)), tables_(std::move(tables)) {}

  const NodeHashes& hashes() const noexcept { return hashes_; }
  std::uint64_t modulus() const noexcept { return hashes_.modulus(); }
  const std::vector<FingerprintEntry>& table(std::uint64_t id) const { return tables_[id]; }
  std::size_t node_count() const noexcept { return tables_.size(); }

  MatchResult lookup(std::uint64_t id, std::uint64_t fp) const {
    const auto& t = tables_[id];
    auto it = std::lower_bound(t.begin(), t.end(), fp,
                               [](const FingerprintEntry& e, std::uint64_t f) { return e.fingerprint < f; });
    if (it == t.end() || it->fingerprint != fp) return {};
    return {true, it->shift};
  }

  // One-sided query: reads X_v at the sampled positions only.
  template <SymbolSource X>
  MatchResult query(std::uint64_t id, const X& x_v) const {
    return lookup(id, fingerprint(x_v, hashes_[id], modulus()));
  }

  static std::vector<FingerprintEntry> build_table(const Text& y, const PrecisionNode& v, const NodeHash& h,
                                                   const ShiftSet& shifts, std::uint64_t p,
                                                   const SymbolOccurrences* occ = nullptr) {
    std::vector<FingerprintEntry> raw;
    if (h.sample.empty()) {
      raw.push_back({0, 0});
    } else if (h.sample.size() == 1 && occ != nullptr && shifts.step == 1 &&
               occ->lists().size() * 24 < shifts.size()) {
      // single sampled position: the fingerprint is a function of one symbol,
      // so only the nearest occurrence of each symbol matters
      const std::int64_t q = static_cast<std::int64_t>(v.range_start + h.sample[0]);
      const std::int64_t bound = shifts.hi;
      auto consider = [&](Symbol c, std::int64_t best_s, bool found) {
        if (found) raw.push_back({mulmod(h.coeff[0], symbol_code(c, p), p), best_s});
      };
      for (const auto& [c, pos] : occ->lists()) {
        auto it = std::lower_bound(pos.begin(), pos.end(), static_cast<std::uint32_t>(std::max<std::int64_t>(q, 0)));
        std::int64_t best = 0;
        bool found = false;
        auto offer = [&](std::int64_t s) {
          if ((s < 0 ? -s : s) > bound) return;
          if (!found || preferred_shift(s, best)) best = s, found = true;
        };
        if (it != pos.end()) offer(static_cast<std::int64_t>(*it) - q);
        if (it != pos.begin()) offer(static_cast<std::int64_t>(*std::prev(it)) - q);
        consider(c, best, found);
      }
      std::int64_t best = 0;
      bool found = false;
      for (std::int64_t s : {std::int64_t{-1} - q, static_cast<std::int64_t>(y.size()) - q}) {
        if ((s < 0 ? -s : s) > bound) continue;
        if (!found || preferred_shift(s, best)) best = s, found = true;
      }
      consider(kBottom, best, found);
    } else {
      raw.reserve(shifts.size());
      const std::int64_t a = static_cast<std::int64_t>(v.range_start);
      for (std::size_t r = 0; r < shifts.size(); ++r) {
        const std::int64_t s = shifts.value(r);
        raw.push_back({fingerprint(Window(y, a + s, v.range_len), h, p), s});
      }
    }
    return finish(std::move(raw));
  }

 private:
  static std::vector<FingerprintEntry> finish(std::vector<FingerprintEntry> raw) {
    std::sort(raw.begin(), raw.end(), [](const FingerprintEntry& a, const FingerprintEntry& b) {
      if (a.fingerprint != b.fingerprint) return a.fingerprint < b.fingerprint;
      return preferred_shift(a.shift, b.shift);
    });
    raw.erase(std::unique(raw.begin(), raw.end(),
                          [](const FingerprintEntry& a, const FingerprintEntry& b) { return a.fingerprint == b.fingerprint; }),
              raw.end());
    raw.shrink_to_fit();
    return raw;
  }

  NodeHashes hashes_;
  std::vector<std::vector<FingerprintEntry>> tables_;
};

// Two-sided mirror: one fingerprint of X_v per node.
inline std::vector<std::uint64_t> x_fingerprints(const Text& x_padded, const PrecisionTree& tree, const NodeHashes& h) {
  std::vector<std::uint64_t> out(tree.size());
  for (const PrecisionNode& v : tree.nodes())
    out[v.id] = fingerprint(Window(x_padded, static_cast<std::int64_t>(v.range_start), v.range_len), h[v.id], h.modulus());
  return out;
}

}  // namespace gapedit
