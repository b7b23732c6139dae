#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "gapedit/text.hpp"

namespace gapedit {

// a_s = min over s' in T' of b_{s'} + 2|s - s'|, for every s in T. Both shift
// lists ascending. Two sweeps: a<= takes candidates s' <= s, a>= the rest.
template <class V>
void range_min_transfer(std::span<const std::int64_t> t, std::span<const std::int64_t> tp, std::span<const V> b,
                        std::span<V> out) {
  static_assert(std::is_signed_v<V>, "transfer subtracts shifts; use a signed value type");
  if (tp.empty()) throw UsageError("range_min_transfer: empty source set");
  if (b.size() != tp.size() || out.size() != t.size()) throw UsageError("range_min_transfer: size mismatch");
  constexpr V inf = std::numeric_limits<V>::has_infinity ? std::numeric_limits<V>::infinity()
                                                         : std::numeric_limits<V>::max() / 4;
  // ascending sweep: best value of b_{s'} - 2 s' over s' <= s
  std::size_t j = 0;
  V best = inf;
  for (std::size_t i = 0; i < t.size(); ++i) {
    while (j < tp.size() && tp[j] <= t[i]) {
      best = std::min<V>(best, b[j] - V(2) * static_cast<V>(tp[j]));
      ++j;
    }
    out[i] = best == inf ? inf : best + V(2) * static_cast<V>(t[i]);
  }
  // descending sweep: best value of b_{s'} + 2 s' over s' >= s
  std::size_t k = tp.size();
  best = inf;
  for (std::size_t i = t.size(); i-- > 0;) {
    while (k > 0 && tp[k - 1] >= t[i]) {
      --k;
      best = std::min<V>(best, b[k] + V(2) * static_cast<V>(tp[k]));
    }
    if (best != inf) out[i] = std::min<V>(out[i], best - V(2) * static_cast<V>(t[i]));
  }
}

template <class V>
std::vector<V> range_min_transfer(const std::vector<std::int64_t>& t, const std::vector<std::int64_t>& tp,
                                  const std::vector<V>& b) {
  std::vector<V> out(t.size());
  range_min_transfer<V>(std::span<const std::int64_t>(t), std::span<const std::int64_t>(tp), std::span<const V>(b),
                        std::span<V>(out));
  return out;
}

}  // namespace gapedit
