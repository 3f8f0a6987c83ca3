#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "tylercov/bounds.hpp"

// Exhaustive fine-grid reference for the bound optimizer: t on a 1e-4-step
// grid over (0, 2], tau on a 1e-3-step grid over the feasibility window.
// For fixed tau the success probability is non-decreasing in t and the
// radius is increasing, so scanning t upward and stopping at the first
// feasible point yields the exact grid minimum.
namespace testsup {

inline std::optional<double> fine_grid_bound_oracle(const tylercov::BoundQuery& q) {
  using namespace tylercov;
  const double eps = epsilon_ceiling(q.p, q.cos_phi0);
  const TauWindow window = tau_window(q.p, q.cos_phi0, eps);
  const double tau_hi = std::min(window.hi, 1.0 - 1e-9);

  std::optional<double> best;
  const double t_step = 1e-4;
  const double tau_step = 1e-3;
  for (double tau = window.lo; tau <= tau_hi; tau += tau_step) {
    const double hess = hessian_discount_tail(q.n, q.p, tau, q.cos_phi0, eps);
    const double budget = 1.0 - q.confidence - hess;
    if (!(budget > 0.0)) continue;
    for (double t = t_step; t <= 2.0; t += t_step) {
      if (gradient_tail(q.n, t) <= budget) {
        const double radius =
            bound_radius(t, tau, q.p, q.cos_phi0, q.lambda_min);
        if (!best || radius < *best) best = radius;
        break;
      }
    }
  }
  return best;
}

}  // namespace testsup
