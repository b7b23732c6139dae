#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gapedit/random.hpp"
#include "gapedit/text.hpp"

namespace gapedit {

inline std::uint64_t checked_pow(std::uint64_t base, std::uint32_t exp) {
  std::uint64_t r = 1;
  for (std::uint32_t i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<std::uint64_t>::max() / base) throw UsageError("tree size overflow");
    r *= base;
  }
  return r;
}

// B = max(2, ceil(2^sqrt(log2 n * log2 log2 n))).
inline std::uint32_t formula_branching(std::uint64_t n) {
  if (n <= 4) return 2;
  const double l = std::log2(static_cast<double>(n));
  return static_cast<std::uint32_t>(std::max(2.0, std::ceil(std::exp2(std::sqrt(l * std::log2(l))))));
}

struct TreeShape {
  std::uint64_t n_padded = 1;
  std::uint32_t branching = 2;
  std::uint32_t depth = 0;  // leaves live at this depth

  std::uint64_t level_size(std::uint32_t d) const { return checked_pow(branching, d); }
  std::uint64_t level_offset(std::uint32_t d) const {
    std::uint64_t off = 0;
    for (std::uint32_t i = 0; i < d; ++i) off += level_size(i);
    return off;
  }
  std::uint64_t node_count() const { return level_offset(depth + 1); }
  std::uint64_t range_len(std::uint32_t d) const { return n_padded / level_size(d); }

  friend bool operator==(const TreeShape&, const TreeShape&) = default;
};

// Smallest complete tree covering `length` leaves. With branching == 0 the depth
// comes from the formula and B is then lowered to the least value reaching that
// depth, which keeps the padding small.
inline TreeShape choose_shape(std::uint64_t length, std::uint32_t branching = 0) {
  TreeShape s;
  if (length <= 1) {
    s.branching = branching >= 2 ? branching : 2;
    return s;
  }
  const std::uint32_t b0 = branching >= 2 ? branching : formula_branching(length);
  std::uint32_t depth = 0;
  for (std::uint64_t cover = 1; cover < length; cover *= b0) ++depth;
  std::uint32_t b = b0;
  if (branching < 2) {
    b = static_cast<std::uint32_t>(std::max(2.0, std::floor(std::pow(static_cast<double>(length), 1.0 / depth))));
    while (b > 2) {
      long double p = 1;
      for (std::uint32_t i = 0; i < depth; ++i) p *= (b - 1);
      if (p >= static_cast<long double>(length)) --b; else break;
    }
    while (true) {
      long double p = 1;
      for (std::uint32_t i = 0; i < depth; ++i) p *= b;
      if (p >= static_cast<long double>(length)) break;
      ++b;
    }
  }
  s.branching = b;
  s.depth = depth;
  s.n_padded = checked_pow(b, depth);
  return s;
}

struct TreeConfig {
  TreeShape shape;
  std::uint64_t k = 1;  // root tolerance
  double lambda_const = 0.4;
  double u_min = 0;  // 0 selects n_padded^-3
  double shift_base = 3;
  Seed master_seed;
  std::uint32_t repetition = 0;

  double lambda() const { return lambda_const * std::log(std::max<double>(static_cast<double>(shape.n_padded), 4.0)); }
  double effective_u_min() const {
    return u_min > 0 ? u_min : std::pow(static_cast<double>(shape.n_padded), -3.0);
  }

  void validate() const {
    if (shape.branching < 2) throw UsageError("branching must be >= 2");
    if (checked_pow(shape.branching, shape.depth) != shape.n_padded) throw UsageError("n_padded must equal B^depth");
    if (k < 1) throw UsageError("k must be >= 1");
    if (!(lambda_const > 0)) throw UsageError("lambda constant must be positive");
    const double um = effective_u_min();
    if (!(um > 0 && um < 1)) throw UsageError("u_min must lie in (0, 1)");
    if (!(shift_base >= 1)) throw UsageError("shift base must be >= 1");
  }
};

struct PrecisionNode {
  std::uint64_t id = 0;
  std::uint32_t depth = 0;
  std::uint32_t height = 0;
  std::uint64_t range_start = 0;
  std::uint64_t range_len = 0;
  double tolerance = 0;
  double u = 1;  // 1 at the root, which has no sampled precision
};

class PrecisionTree {
 public:
  PrecisionTree() = default;

  explicit PrecisionTree(const TreeConfig& config) : config_(config) {
    config_.validate();
    const TreeShape& sh = config_.shape;
    const Seed rep = repetition_seed(config_.master_seed, config_.repetition);
    const double lambda = config_.lambda();
    const double u_min = config_.effective_u_min();
    nodes_.resize(sh.node_count());
    for (std::uint32_t d = 0; d <= sh.depth; ++d) {
      const std::uint64_t off = sh.level_offset(d), cnt = sh.level_size(d), len = sh.range_len(d);
      for (std::uint64_t i = 0; i < cnt; ++i) {
        PrecisionNode& v = nodes_[off + i];
        v.id = off + i;
        v.depth = d;
        v.height = sh.depth - d;
        v.range_start = i * len;
        v.range_len = len;
        if (d == 0) {
          v.tolerance = static_cast<double>(config_.k);
          v.u = 1;
        } else {
          RandomStream rs(rep, v.id, Purpose::tolerance);
          v.u = sample_exponential(lambda, u_min, rs);
          v.tolerance = nodes_[parent_of(v.id)].tolerance * v.u / 3;
        }
      }
    }
  }

  const TreeConfig& config() const noexcept { return config_; }
  const TreeShape& shape() const noexcept { return config_.shape; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const PrecisionNode& node(std::uint64_t id) const { return nodes_[id]; }
  const PrecisionNode& root() const { return nodes_.front(); }
  const std::vector<PrecisionNode>& nodes() const noexcept { return nodes_; }

  bool is_leaf(std::uint64_t id) const { return nodes_[id].depth == config_.shape.depth; }

  std::uint64_t first_child(std::uint64_t id) const {
    const PrecisionNode& v = nodes_[id];
    const TreeShape& sh = config_.shape;
    return sh.level_offset(v.depth + 1) + (id - sh.level_offset(v.depth)) * sh.branching;
  }

  std::uint64_t parent_of(std::uint64_t id) const {
    const std::uint32_t d = nodes_[id].depth;
    const TreeShape& sh = config_.shape;
    return sh.level_offset(d - 1) + (id - sh.level_offset(d)) / sh.branching;
  }

  friend bool operator==(const PrecisionTree& a, const PrecisionTree& b) {
    if (a.nodes_.size() != b.nodes_.size()) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
      const auto &x = a.nodes_[i], &y = b.nodes_[i];
      if (x.range_start != y.range_start || x.range_len != y.range_len || x.tolerance != y.tolerance || x.u != y.u)
        return false;
    }
    return true;
  }

 private:
  TreeConfig config_;
  std::vector<PrecisionNode> nodes_;
};

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// {lo, lo+step, ..., hi}; lo = -hi and both are multiples of step.
struct ShiftSet {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t step = 1;

  static ShiftSet symmetric(std::int64_t bound, std::int64_t step) {
    if (step < 1 || bound < 0) throw UsageError("invalid shift set");
    const std::int64_t h = bound / step * step;
    return {-h, h, step};
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>((hi - lo) / step + 1); }
  std::int64_t value(std::size_t rank) const noexcept { return lo + static_cast<std::int64_t>(rank) * step; }
  bool contains(std::int64_t s) const noexcept { return s >= lo && s <= hi && (s - lo) % step == 0; }
  std::size_t rank(std::int64_t s) const noexcept { return static_cast<std::size_t>((s - lo) / step); }

  // Closest member; ties go to the smaller magnitude, then to the negative one.
  std::int64_t nearest(std::int64_t s) const noexcept {
    std::int64_t below = floor_div(s, step) * step;
    std::int64_t above = below + step;
    below = std::clamp(below, lo, hi);
    above = std::clamp(above, lo, hi);
    const std::int64_t db = s > below ? s - below : below - s;
    const std::int64_t da = s > above ? s - above : above - s;
    if (db != da) return db < da ? below : above;
    const std::int64_t mb = below < 0 ? -below : below, ma = above < 0 ? -above : above;
    if (mb != ma) return mb < ma ? below : above;
    return std::min(below, above);
  }

  friend bool operator==(const ShiftSet&, const ShiftSet&) = default;
};

// +-k * ceil(base^ceil(log_B n_padded)), step 1.
inline ShiftSet shift_universe(std::uint64_t k, const TreeShape& shape, double shift_base = 3) {
  const double factor = std::ceil(std::pow(shift_base, static_cast<double>(shape.depth)) - 1e-9);
  const double bound = static_cast<double>(k) * factor;
  if (bound > 1e15) throw UsageError("shift universe too large");
  return ShiftSet::symmetric(static_cast<std::int64_t>(bound), 1);
}

inline std::int64_t shift_step(double tolerance) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(tolerance / 2)));
}

inline ShiftSet node_shifts(const PrecisionNode& v, const ShiftSet& universe) {
  return ShiftSet::symmetric(universe.hi, shift_step(v.tolerance));
}

}  // namespace gapedit
