#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "gapedit/text.hpp"

namespace gapedit {

// Exact Levenshtein distance, two-row DP.
template <SymbolSource A, SymbolSource B>
std::size_t edit_distance(const A& a, const B& b) {
  const std::size_t m = a.size(), n = b.size();
  if (m == 0) return n;
  if (n == 0) return m;
  std::vector<std::size_t> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = i;
    const Symbol ai = a[i - 1];
    for (std::size_t j = 1; j <= n; ++j) {
      std::size_t best = prev[j - 1] + (ai != b[j - 1]);
      best = std::min(best, prev[j] + 1);
      best = std::min(best, cur[j - 1] + 1);
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

// Exact when ED <= bound, nullopt otherwise. Cells with |i - j| > bound are
// never on a path of cost <= bound, so they are treated as infinite.
template <SymbolSource A, SymbolSource B>
std::optional<std::size_t> edit_distance_banded(const A& a, const B& b, std::size_t bound) {
  const std::size_t m = a.size(), n = b.size();
  if ((m > n ? m - n : n - m) > bound) return std::nullopt;
  constexpr std::size_t inf = std::numeric_limits<std::size_t>::max() / 2;
  const std::size_t width = 2 * bound + 1;
  // row i stores columns j in [i - bound, i + bound] at offset j - i + bound
  std::vector<std::size_t> prev(width, inf), cur(width, inf);
  for (std::size_t j = 0; j <= std::min(n, bound); ++j) prev[j + bound] = j;
  for (std::size_t i = 1; i <= m; ++i) {
    std::fill(cur.begin(), cur.end(), inf);
    const std::size_t jlo = i > bound ? i - bound : 0;
    const std::size_t jhi = std::min(n, i + bound);
    const Symbol ai = a[i - 1];
    for (std::size_t j = jlo; j <= jhi; ++j) {
      const std::size_t off = j + bound - i;
      std::size_t best = inf;
      if (j == 0) {
        best = i;
      } else {
        best = prev[off] + (ai != b[j - 1]);  // (i-1, j-1)
        best = std::min(best, cur[off - 1] + 1);  // (i, j-1)
      }
      if (off + 1 < width) best = std::min(best, prev[off + 1] + 1);  // (i-1, j)
      cur[off] = best;
    }
    std::swap(prev, cur);
  }
  const std::size_t d = prev[n + bound - m];
  if (d > bound) return std::nullopt;
  return d;
}

// Bit-vector form of a pattern for the blocked Myers/Hyyro recurrence.
class BlockPattern {
 public:
  BlockPattern() = default;

  template <SymbolSource P>
  explicit BlockPattern(const P& pattern) {
    assign(pattern);
  }

  template <SymbolSource P>
  void assign(const P& pattern) {
    m_ = pattern.size();
    w_ = (m_ + 63) / 64;
    direct_.clear();
    sparse_.clear();
    std::size_t distinct = 0;
    std::vector<std::uint32_t> row_of(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const Symbol c = pattern[i];
      std::uint32_t r;
      if (c < kDirectLimit) {
        if (direct_.size() <= c) direct_.resize(c + 1, kNone);
        if (direct_[c] == kNone) direct_[c] = static_cast<std::uint32_t>(distinct++);
        r = direct_[c];
      } else {
        auto [it, fresh] = sparse_.try_emplace(c, static_cast<std::uint32_t>(distinct));
        if (fresh) ++distinct;
        r = it->second;
      }
      row_of[i] = r;
    }
    zero_row_ = distinct;
    masks_.assign((distinct + 1) * w_, 0);
    for (std::size_t i = 0; i < m_; ++i) masks_[row_of[i] * w_ + i / 64] |= std::uint64_t{1} << (i % 64);
  }

  std::size_t size() const noexcept { return m_; }
  std::size_t blocks() const noexcept { return w_; }

  const std::uint64_t* eq(Symbol c) const noexcept {
    std::size_t r = zero_row_;
    if (c < direct_.size()) {
      if (direct_[c] != kNone) r = direct_[c];
    } else if (c >= kDirectLimit && !sparse_.empty()) {
      auto it = sparse_.find(c);
      if (it != sparse_.end()) r = it->second;
    }
    return masks_.data() + r * w_;
  }

 private:
  static constexpr Symbol kDirectLimit = 1u << 16;
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;
  std::size_t m_ = 0, w_ = 0, zero_row_ = 0;
  std::vector<std::uint64_t> masks_;
  std::vector<std::uint32_t> direct_;
  std::unordered_map<Symbol, std::uint32_t> sparse_;
};

namespace detail {

// One 64-row block step; hin, return value in {-1, 0, +1}.
inline int myers_block(std::uint64_t& pv, std::uint64_t& mv, std::uint64_t eq, int hin) noexcept {
  const std::uint64_t hin_neg = hin < 0 ? 1 : 0;
  const std::uint64_t hin_pos = hin > 0 ? 1 : 0;
  const std::uint64_t xv = eq | mv;
  eq |= hin_neg;
  const std::uint64_t xh = (((eq & pv) + pv) ^ pv) | eq;
  std::uint64_t ph = mv | ~(xh | pv);
  std::uint64_t mh = pv & xh;
  int hout = static_cast<int>(ph >> 63) - static_cast<int>(mh >> 63);
  ph = (ph << 1) | hin_pos;
  mh = (mh << 1) | hin_neg;
  pv = mh | ~(xv | ph);
  mv = ph & xv;
  return hout;
}

}  // namespace detail

// Banded bit-parallel distance between `pattern` and `text`. Cells outside the
// diagonal band implied by `bound` are overestimated, never underestimated, so
// the result is exact whenever ED <= bound and nullopt otherwise.
template <SymbolSource T>
std::optional<std::size_t> bounded_edit_distance(const BlockPattern& pattern, const T& text, std::size_t bound) {
  const std::int64_t m = static_cast<std::int64_t>(pattern.size());
  const std::int64_t n = static_cast<std::int64_t>(text.size());
  const std::int64_t diff = m - n;
  const std::int64_t b = static_cast<std::int64_t>(std::min<std::size_t>(bound, static_cast<std::size_t>(std::max(m, n))));
  if ((diff < 0 ? -diff : diff) > b) return std::nullopt;
  if (m == 0 || n == 0) return static_cast<std::size_t>(std::max(m, n));

  // rows i with d_lo <= i - j <= d_hi can lie on a path of cost <= b
  const std::int64_t slack = (b - (diff < 0 ? -diff : diff)) / 2;
  const std::int64_t d_lo = std::min<std::int64_t>(0, diff) - slack;
  const std::int64_t d_hi = std::max<std::int64_t>(0, diff) + slack;
  const std::int64_t w = static_cast<std::int64_t>(pattern.blocks());
  auto block_of_row = [&](std::int64_t row) {  // row >= 1
    return std::clamp<std::int64_t>((row - 1) / 64, 0, w - 1);
  };

  std::vector<std::uint64_t> pv(w, ~std::uint64_t{0}), mv(w, 0);
  std::vector<std::int64_t> score(w);
  score[0] = 64;
  std::int64_t last = 0;
  for (std::int64_t j = 1; j <= n; ++j) {
    const std::int64_t first = j + d_lo <= 1 ? 0 : block_of_row(j + d_lo);
    const std::int64_t want_last = block_of_row(std::max<std::int64_t>(1, j + d_hi));
    while (last < want_last) {
      ++last;
      pv[last] = ~std::uint64_t{0};
      mv[last] = 0;
      score[last] = score[last - 1] + 64;
    }
    const std::uint64_t* eq = pattern.eq(text[static_cast<std::size_t>(j - 1)]);
    int h = 1;
    for (std::int64_t bl = first; bl <= last; ++bl) {
      h = detail::myers_block(pv[bl], mv[bl], eq[bl], h);
      score[bl] += h;
    }
  }
  // score of the final block refers to row 64*w; strip the padding rows
  std::int64_t result = score[w - 1];
  const std::int64_t used = m - 64 * (w - 1);
  if (used < 64) {
    const std::uint64_t above = ~std::uint64_t{0} << used;
    result -= std::popcount(pv[w - 1] & above);
    result += std::popcount(mv[w - 1] & above);
  }
  if (last != w - 1 || result > b) return std::nullopt;
  return static_cast<std::size_t>(result);
}

template <SymbolSource A, SymbolSource B>
std::optional<std::size_t> bounded_edit_distance(const A& a, const B& b, std::size_t bound) {
  return bounded_edit_distance(BlockPattern(a), b, bound);
}

struct Alignment {
  std::vector<std::size_t> map;  // A(0..|X|)
};

// Backtraces one optimal DP path; A(i) is the smallest column the path visits
// in row i, with A(|X|) = |Y|.
template <SymbolSource A, SymbolSource B>
Alignment optimal_alignment(const A& a, const B& b) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<std::uint32_t> d((m + 1) * (n + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return d[i * (n + 1) + j]; };
  for (std::size_t j = 0; j <= n; ++j) at(0, j) = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    at(i, 0) = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= n; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (a[i - 1] != b[j - 1] ? 1u : 0u), at(i - 1, j) + 1, at(i, j - 1) + 1});
  }
  Alignment al;
  al.map.assign(m + 1, n);
  std::size_t i = m, j = n;
  al.map[i] = j;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (a[i - 1] != b[j - 1] ? 1u : 0u)) {
      --i, --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      --i;
    } else {
      --j;
    }
    al.map[i] = std::min(al.map[i], j);
  }
  al.map[m] = n;
  return al;
}

}  // namespace gapedit
