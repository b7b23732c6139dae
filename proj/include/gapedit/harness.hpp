#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gapedit/engine.hpp"
#include "gapedit/generators.hpp"

namespace gapedit {

// Nearest-rank percentile of an ascending sample.
inline double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0;
  const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(r, 1, sorted.size()) - 1];
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::infinity();
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

// One (n, k) cell of the grid. Instances are split over `texts` independent Y
// strings so preprocessing is amortized.
struct CellSpec {
  std::uint64_t n = 1024;
  std::uint64_t k = 4;
  std::uint32_t branching = 0;
  std::uint64_t implicit_max_len = 0;
  std::uint32_t reps = 9;
  std::uint32_t alphabet = 4;
  std::uint32_t texts = 4;
};

inline EngineConfig cell_config(const CellSpec& c, const EngineConfig& base) {
  EngineConfig cfg = base;
  cfg.k = c.k;
  cfg.branching = c.branching;
  cfg.implicit_max_len = c.implicit_max_len;
  cfg.reps = c.reps;
  return cfg;
}

inline Seed mix_seed(const Seed& s, std::uint64_t a, std::uint64_t b) {
  return repetition_seed(repetition_seed(s, static_cast<std::uint32_t>(a)), static_cast<std::uint32_t>(b));
}

struct CellCalibration {
  CellSpec cell;
  TreeShape shape;
  std::uint32_t trials = 0;
  std::vector<double> ratios;  // per-instance median root estimate / k, ascending
  double p50 = 0, p90 = 0, p99 = 0, max = 0;
  double kappa = 0;  // 2 * p99, at least 1
  double fails_per_rep_max = 0;  // worst per-repetition FAIL count
  double c_eff = 0;  // fails_per_rep_max / (k log2 n)
  double preprocess_seconds = 0;
  double query_seconds = 0;
};

// Planted close instances (k random edits, so ED <= k); every repetition runs
// so the per-instance median is exact.
inline CellCalibration calibrate_cell(const CellSpec& c, const EngineConfig& base, std::uint32_t trials,
                                      const Seed& seed) {
  CellCalibration out;
  out.cell = c;
  out.trials = trials;
  const EngineConfig cfg = cell_config(c, base);
  QueryOptions opt;
  opt.early_stop = false;
  const std::uint32_t texts = std::max<std::uint32_t>(1, std::min(c.texts, trials));
  for (std::uint32_t t = 0; t < texts; ++t) {
    InstanceSpec ys{InstanceKind::planted, c.n, c.alphabet, 0, 7, 0, mix_seed(seed, t, 0)};
    const Instance yi = generate_instance(ys);
    auto t0 = std::chrono::steady_clock::now();
    const YIndex y = preprocess_y(Text::from_bytes(yi.y), cfg);
    out.shape = y.header.shape;
    out.preprocess_seconds += elapsed_nanos(t0) / 1e9;
    t0 = std::chrono::steady_clock::now();
    for (std::uint32_t i = t; i < trials; i += texts) {
      const std::string x = plant_edits(yi.y, c.k, c.alphabet, mix_seed(seed, t, i + 1));
      const QueryResult r = gap_query(Text::from_bytes(x), y, opt);
      std::vector<double> est;
      for (const auto& o : r.repetitions) {
        est.push_back(o.estimate / static_cast<double>(c.k));
        out.fails_per_rep_max = std::max(out.fails_per_rep_max, static_cast<double>(o.stats.prune_fails));
      }
      out.ratios.push_back(r.verdict.length_shortcut ? std::numeric_limits<double>::infinity() : median_of(est));
    }
    out.query_seconds += elapsed_nanos(t0) / 1e9;
  }
  std::sort(out.ratios.begin(), out.ratios.end());
  out.p50 = percentile(out.ratios, 0.5);
  out.p90 = percentile(out.ratios, 0.9);
  out.p99 = percentile(out.ratios, 0.99);
  out.max = out.ratios.empty() ? 0 : out.ratios.back();
  out.kappa = std::max(1.0, 2 * out.p99);
  out.c_eff = out.fails_per_rep_max / (static_cast<double>(c.k) * std::log2(static_cast<double>(c.n)));
  return out;
}

struct CellEvaluation {
  CellSpec cell;
  double kappa = 0;
  std::uint32_t close_total = 0, close_correct = 0;
  std::uint32_t far_total = 0, far_correct = 0;
  bool far_feasible = true;  // n >= 4 kappa k, otherwise no far instance exists
  std::uint64_t far_min_ed = 0;
  double seconds = 0;

  double close_rate() const { return close_total ? static_cast<double>(close_correct) / close_total : 0; }
  double far_rate() const { return far_total ? static_cast<double>(far_correct) / far_total : 0; }
};

// Close side: planted k edits. Far side: disjoint alphabets (ED = n), verified
// by the banded oracle against 4 kappa k before use.
inline CellEvaluation evaluate_cell(const CellSpec& c, const EngineConfig& base, double kappa, std::uint32_t trials,
                                    const Seed& seed) {
  CellEvaluation ev;
  ev.cell = c;
  ev.kappa = kappa;
  const auto start = std::chrono::steady_clock::now();
  EngineConfig cfg = cell_config(c, base);
  cfg.kappa = kappa;
  const double far_need = std::ceil(4 * kappa * static_cast<double>(c.k));
  ev.far_min_ed = static_cast<std::uint64_t>(far_need);
  ev.far_feasible = far_need <= static_cast<double>(c.n);
  const std::uint32_t texts = std::max<std::uint32_t>(1, std::min(c.texts, trials));
  for (std::uint32_t t = 0; t < texts; ++t) {
    InstanceSpec ys{InstanceKind::planted, c.n, c.alphabet, 0, 7, 0, mix_seed(seed, t, 0)};
    const std::string ytext = generate_instance(ys).y;
    const YIndex y = preprocess_y(Text::from_bytes(ytext), cfg);
    for (std::uint32_t i = t; i < trials; i += texts) {
      const std::string x = plant_edits(ytext, c.k, c.alphabet, mix_seed(seed, t, i + 1));
      ++ev.close_total;
      if (gap_query(Text::from_bytes(x), y).verdict.decision == Decision::close) ++ev.close_correct;
    }
    if (!ev.far_feasible) continue;
    for (std::uint32_t i = t; i < trials; i += texts) {
      InstanceSpec fs{InstanceKind::far, c.n, c.alphabet, 0, 7, 0, mix_seed(seed, t, 1000000 + i)};
      std::string x = generate_instance(fs, 0, ev.far_min_ed - 1).x;
      if (bounded_edit_distance(Text::from_bytes(x), Text::from_bytes(ytext), ev.far_min_ed - 1))
        throw std::logic_error("far instance failed verification");
      ++ev.far_total;
      if (gap_query(Text::from_bytes(x), y).verdict.decision == Decision::far) ++ev.far_correct;
    }
  }
  ev.seconds = elapsed_nanos(start) / 1e9;
  return ev;
}

}  // namespace gapedit
