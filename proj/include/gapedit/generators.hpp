#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gapedit/edit_distance.hpp"
#include "gapedit/random.hpp"
#include "gapedit/text.hpp"

namespace gapedit {

// Instance families. Symbols are printable bytes so instances round-trip
// through plain files: Y draws from 'a'.., and `far` draws X from 'A'.. so the
// two strings share no symbol and ED = n exactly.
enum class InstanceKind { random, planted, periodic, boundary, far };

inline std::string_view to_string(InstanceKind k) {
  switch (k) {
    case InstanceKind::random: return "random";
    case InstanceKind::planted: return "planted";
    case InstanceKind::periodic: return "periodic";
    case InstanceKind::boundary: return "adversarial-boundary";
    default: return "far";
  }
}

inline InstanceKind parse_instance_kind(std::string_view s) {
  for (InstanceKind k : {InstanceKind::random, InstanceKind::planted, InstanceKind::periodic, InstanceKind::boundary,
                         InstanceKind::far})
    if (s == to_string(k)) return k;
  if (s == "boundary") return InstanceKind::boundary;
  throw UsageError("unknown instance kind '" + std::string(s) + "'");
}

struct InstanceSpec {
  InstanceKind kind = InstanceKind::planted;
  std::uint64_t n = 1024;
  std::uint32_t alphabet = 4;  // at most 26
  std::uint64_t edits = 0;  // planted, periodic, boundary
  std::uint64_t period = 7;  // periodic
  std::uint64_t stride = 0;  // boundary: edit spacing; 0 spreads edits evenly
  Seed seed;
};

struct Instance {
  InstanceSpec spec;
  std::string x, y;
  // Oracle result. `ed` is exact when set; otherwise `ed_above` records a
  // verified strict lower bound (ED > ed_above), if any check was run.
  std::optional<std::uint64_t> ed;
  std::optional<std::uint64_t> ed_above;
  std::string oracle;  // which oracle produced the label
};

namespace detail {

class InstanceRng {
 public:
  explicit InstanceRng(const Seed& seed) : rs_(seed, 0, Purpose::instance) {}
  std::uint64_t below(std::uint64_t n) { return n ? static_cast<std::uint64_t>((static_cast<unsigned __int128>(rs_.next()) * n) >> 64) : 0; }

 private:
  RandomStream rs_;
};

inline char letter(std::uint64_t c) { return static_cast<char>('a' + c); }

// One edit at `pos` of kind 0 = substitution (always changes the symbol),
// 1 = deletion, 2 = insertion.
inline void apply_edit(std::string& s, std::uint64_t pos, int kind, std::uint32_t alphabet, InstanceRng& rng) {
  if (kind == 1 && s.empty()) kind = 2;
  if (kind == 0 && s.empty()) kind = 2;
  if (kind != 2) pos = std::min<std::uint64_t>(pos, s.size() - 1);
  else pos = std::min<std::uint64_t>(pos, s.size());
  if (kind == 0) {
    const auto cur = static_cast<std::uint64_t>(s[pos] - 'a');
    s[pos] = letter((cur + 1 + rng.below(alphabet - 1)) % alphabet);
  } else if (kind == 1) {
    s.erase(s.begin() + static_cast<std::ptrdiff_t>(pos));
  } else {
    s.insert(s.begin() + static_cast<std::ptrdiff_t>(pos), letter(rng.below(alphabet)));
  }
}

}  // namespace detail

// `edits` random edits of mixed kind; the result is within that ED of `y`.
inline std::string plant_edits(std::string y, std::uint64_t edits, std::uint32_t alphabet, const Seed& seed) {
  detail::InstanceRng rng(seed);
  for (std::uint64_t e = 0; e < edits; ++e)
    detail::apply_edit(y, rng.below(y.size() + 1), static_cast<int>(rng.below(3)), alphabet, rng);
  return y;
}

// Exact ED when affordable: bounded by the planted edit count, or full DP up
// to `oracle_cap` symbols. Far instances are checked against `far_bound`
// (ED > far_bound) with the banded oracle.
inline Instance generate_instance(const InstanceSpec& spec, std::uint64_t oracle_cap = 4096,
                                  std::uint64_t far_bound = 0) {
  if (spec.alphabet < 2 || spec.alphabet > 26) throw UsageError("alphabet must be in [2, 26]");
  if (spec.n == 0) throw UsageError("n must be positive");
  Instance inst;
  inst.spec = spec;
  detail::InstanceRng rng(spec.seed);
  std::string& y = inst.y;
  y.resize(spec.n);
  if (spec.kind == InstanceKind::periodic) {
    if (spec.period == 0) throw UsageError("period must be positive");
    std::string unit(spec.period, 'a');
    for (auto& c : unit) c = detail::letter(rng.below(spec.alphabet));
    for (std::uint64_t i = 0; i < spec.n; ++i) y[i] = unit[i % spec.period];
  } else {
    for (auto& c : y) c = detail::letter(rng.below(spec.alphabet));
  }
  std::string& x = inst.x;
  switch (spec.kind) {
    case InstanceKind::random:
      x.resize(spec.n);
      for (auto& c : x) c = detail::letter(rng.below(spec.alphabet));
      break;
    case InstanceKind::far:
      x.resize(spec.n);
      for (auto& c : x) c = static_cast<char>('A' + rng.below(spec.alphabet));
      break;
    case InstanceKind::planted:
    case InstanceKind::periodic:
      x = y;
      for (std::uint64_t e = 0; e < spec.edits; ++e)
        detail::apply_edit(x, rng.below(x.size() + 1), static_cast<int>(rng.below(3)), spec.alphabet, rng);
      break;
    case InstanceKind::boundary: {
      // indels alternating in sign, each at a stride boundary: every block
      // after an edit is misaligned by one, the worst case for shift drift
      x = y;
      const std::uint64_t stride = spec.stride ? spec.stride : std::max<std::uint64_t>(1, spec.n / (spec.edits + 1));
      for (std::uint64_t e = 0; e < spec.edits; ++e) {
        const std::uint64_t pos = std::min<std::uint64_t>((e + 1) * stride, x.size());
        detail::apply_edit(x, pos, e % 2 == 0 ? 1 : 2, spec.alphabet, rng);
      }
      break;
    }
  }
  const Text tx = Text::from_bytes(x), ty = Text::from_bytes(y);
  if (spec.kind == InstanceKind::planted || spec.kind == InstanceKind::periodic || spec.kind == InstanceKind::boundary) {
    // ED <= edits by construction, so the banded oracle at that bound is exact
    const auto r = bounded_edit_distance(tx, ty, std::max<std::uint64_t>(spec.edits, 1));
    if (!r) throw std::logic_error("planted instance exceeds its edit count");
    inst.ed = *r;
    inst.oracle = "banded";
  } else if (spec.kind == InstanceKind::far) {
    const std::uint64_t bound = far_bound ? far_bound : spec.n - 1;
    if (bounded_edit_distance(tx, ty, bound)) throw std::logic_error("far instance within its bound");
    inst.ed_above = bound;
    if (bound + 1 == spec.n) inst.ed = spec.n;
    inst.oracle = "banded";
  } else if (spec.n <= oracle_cap) {
    inst.ed = edit_distance(tx, ty);
    inst.oracle = "dp";
  }
  return inst;
}

}  // namespace gapedit
