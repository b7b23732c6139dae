#pragma once

#include <algorithm>
#include <cstddef>
#include <span>

#include "gapedit/text.hpp"

namespace gapedit {

// R = sum_i max(0, a_i - c1*beta*u_i) + c2*(beta/lambda) * sum_i ramp(a_i / (beta*u_i))
// where ramp rises linearly from 0 at ramp_lo to 1 at ramp_hi (a step at
// ramp_lo when the two coincide). The count term stands in for mass hidden
// below each coordinate's noise floor.
struct RecoverParams {
  double c1 = 2.5;
  double c2 = 2.0;
  double ramp_lo = 1.5;
  double ramp_hi = 2.5;
};

inline double recover_ramp(double x, const RecoverParams& p) noexcept {
  if (p.ramp_hi <= p.ramp_lo) return x > p.ramp_lo ? 1.0 : 0.0;
  return std::clamp((x - p.ramp_lo) / (p.ramp_hi - p.ramp_lo), 0.0, 1.0);
}

// Contribution of one coordinate; recover() is the sum of these.
inline double recover_term(double estimate, double precision, double lambda, double beta,
                           const RecoverParams& p) noexcept {
  const double noise = beta * precision;
  double r = std::max(0.0, estimate - p.c1 * noise);
  if (beta > 0 && estimate > 0) r += p.c2 * (beta / lambda) * recover_ramp(estimate / noise, p);
  return r;
}

inline double recover(std::span<const double> estimates, std::span<const double> precisions, double lambda,
                      double beta, const RecoverParams& p = {}) {
  if (estimates.size() != precisions.size() || estimates.empty()) throw UsageError("recover: size mismatch");
  if (!(lambda > 0) || beta < 0) throw UsageError("recover: invalid lambda or beta");
  double r = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) r += recover_term(estimates[i], precisions[i], lambda, beta, p);
  return r;
}

}  // namespace gapedit
