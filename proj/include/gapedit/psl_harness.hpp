#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "gapedit/psl.hpp"
#include "gapedit/random.hpp"

namespace gapedit {

struct RecoverHarnessConfig {
  std::vector<std::uint32_t> branchings{8, 32, 256};
  std::vector<double> lambdas{8, 16};
  std::vector<double> alphas{1, 2};
  std::vector<double> betas{0, 1, 10};
  std::uint32_t trials = 10000;
  double delta_target = 0.01;
  double u_min = 1e-12;
  Seed seed = Seed::from_u64(0x5eed);
};

struct RecoverCell {
  std::uint32_t branching;
  double lambda, alpha, beta;
  std::string family, adversary;
  std::uint32_t trials = 0;
  std::uint32_t violations = 0;
  double frequency() const { return trials ? static_cast<double>(violations) / trials : 0.0; }
};

struct RecoverReport {
  RecoverParams params;
  double delta_target = 0.01;
  std::uint32_t trials = 0;
  std::vector<RecoverCell> cells;

  const RecoverCell* worst() const {
    const RecoverCell* w = nullptr;
    for (const auto& c : cells)
      if (!w || c.frequency() > w->frequency()) w = &c;
    return w;
  }
  bool passed() const {
    for (const auto& c : cells)
      if (c.frequency() > delta_target) return false;
    return true;
  }
};

struct RecoverFamily {
  std::string name;
  std::vector<double> a;
};

// True vectors; `s` = max(beta, 1) sets the scale where mass is comparable to
// the noise floor.
inline std::vector<RecoverFamily> recover_families(std::uint32_t b, double lambda, double beta) {
  const double s = std::max(beta, 1.0);
  std::vector<RecoverFamily> out;
  out.push_back({"spread", std::vector<double>(b, 1.0)});
  for (double h : {2.2, 3.0, 5.0}) {
    std::vector<double> a(b, 0.0);
    a[0] = h * s;
    char name[32];
    std::snprintf(name, sizeof name, "heavy-%.1f", h);
    out.push_back({name, a});
  }
  {
    std::vector<double> a(b);
    for (std::uint32_t i = 0; i < b; ++i) a[i] = 4 * s * std::pow(0.5, i);
    out.push_back({"geometric", a});
  }
  {
    std::vector<double> a(b, 0.0);
    const auto m = std::min<std::uint32_t>(b, static_cast<std::uint32_t>(std::ceil(lambda / 10)));
    for (std::uint32_t i = 0; i < m; ++i) a[i] = 2 * s;
    out.push_back({"mid", a});
  }
  out.push_back({"tiny", std::vector<double>(b, s / lambda)});
  return out;
}

inline const std::vector<std::string>& recover_adversaries() {
  static const std::vector<std::string> names{"exact", "max-up", "max-down", "hide-small"};
  return names;
}

// Every adversary meets the preconditions of both bullets, so each trial is
// checked against both.
inline double recover_adversary(std::size_t which, double a, double alpha, double beta, double u) {
  switch (which) {
    case 0: return a;
    case 1: return alpha * a + beta * u;
    case 2: return std::max(0.0, a / alpha - beta * u);
    default: return a / alpha <= beta * u ? 0.0 : a;
  }
}

inline RecoverReport recover_contract_harness(const RecoverParams& params, const RecoverHarnessConfig& cfg = {}) {
  RecoverReport rep;
  rep.params = params;
  rep.delta_target = cfg.delta_target;
  rep.trials = cfg.trials;
  const auto& advs = recover_adversaries();
  std::uint64_t setting = 0;
  for (std::uint32_t b : cfg.branchings)
    for (double lambda : cfg.lambdas)
      for (double alpha : cfg.alphas)
        for (double beta : cfg.betas) {
          const auto fams = recover_families(b, lambda, beta);
          const std::size_t first = rep.cells.size();
          for (const auto& f : fams)
            for (const auto& an : advs) rep.cells.push_back({b, lambda, alpha, beta, f.name, an, cfg.trials, 0});
          std::vector<double> sums(fams.size());
          for (std::size_t f = 0; f < fams.size(); ++f)
            for (double x : fams[f].a) sums[f] += x;
          RandomStream rs(cfg.seed, setting++, Purpose::harness);
          std::vector<double> u(b);
          for (std::uint32_t t = 0; t < cfg.trials; ++t) {
            for (auto& x : u) x = sample_exponential(lambda, cfg.u_min, rs);
            for (std::size_t f = 0; f < fams.size(); ++f) {
              const double lo = sums[f] / (2 * alpha) - beta, hi = 2 * alpha * sums[f] + beta;
              for (std::size_t ad = 0; ad < advs.size(); ++ad) {
                double r = 0;
                for (std::uint32_t i = 0; i < b; ++i)
                  r += recover_term(recover_adversary(ad, fams[f].a[i], alpha, beta, u[i]), u[i], lambda, beta, params);
                const double eps = 1e-9 * (1 + hi);
                if (r < lo - eps || r > hi + eps) ++rep.cells[first + f * advs.size() + ad].violations;
              }
            }
          }
        }
  return rep;
}

}  // namespace gapedit
