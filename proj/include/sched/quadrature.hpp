#pragma once

// Adaptive composite Gauss-Legendre quadrature on a finite interval.
// Panels are bisected greedily (worst error first) until the summed error
// bound meets max(abs_tol, rel_tol * |integral|) or the panel budget runs
// out. The per-panel error estimate compares the 15-point rule on the panel
// against the same rule on its two halves.

#include <functional>

#include "sched/errors.hpp"

namespace sched {

struct QuadratureConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_subdivisions = 1 << 16;

  void check() const;  // throws std::invalid_argument on nonsense tolerances
};

struct QuadratureResult {
  double value = 0.0;
  double error_bound = 0.0;
  int panels = 0;
};

// Integrates f over [lo, hi]. Throws QuadratureNotConverged when the panel
// budget is exhausted before the tolerance is met.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo,
                                    double hi, const QuadratureConfig& cfg = {});

}  // namespace sched
