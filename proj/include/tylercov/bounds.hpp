#pragma once

#include "tylercov/errors.hpp"

namespace tylercov {

// Vector Bernstein tail: min(1, 2 exp(-n t^2 / (2 (1 + 1.7 t L / sigma)))).
double vector_bernstein_tail(long n, double t, double sigma, double L);

// Validity threshold of the matrix Bernstein inequality:
//   t > (sigma / 4L) (1 + 1/p^2) / ln(64 sqrt(2) p^2 L^2 / sigma^2).
double matrix_bernstein_threshold(int p, double sigma, double L);

// Matrix Bernstein tail
//   min(1, 2 p^2 exp(-n t sigma / (8 L ln(64 sqrt(2) p^2 L^2 / sigma^2)))
//          (1 + 6 / (n^2 t^2 sigma^2 ln^2(1 + t/sigma)))).
// Throws BelowValidityThreshold when t is not above the threshold.
double matrix_bernstein_tail(long n, int p, double t, double sigma, double L);

// Tail of the sample-gradient deviation, uniform over traceless primed
// directions: min(1, 2 exp(-n t^2 / (2 (1 + 1.7 t)))); the vector Bernstein
// tail at sigma = L = 1.
double gradient_tail(long n, double t);

// Ceiling on the spectral deviation for which the Hessian lower bound is
// valid: p cos^2(phi0) / (6 (p + 2)).
double epsilon_ceiling(int p, double cos_phi0);

// Feasibility window for the Hessian discount level tau:
//   (1 + 1/p^2)/ln(32 sqrt(2) p^2) <= tau p (1-eps)^2 cos^2(phi0)/(p+2) <= 1.
struct TauWindow {
  double lo;
  double hi;
};
TauWindow tau_window(int p, double cos_phi0, double epsilon);

// Tail of the event that the sample Hessian loses more than a (1 - tau)
// fraction of its expected restricted strong convexity:
//   min(1, 2 p^2 exp(-n tau cos^2(phi0) / (46 ln(7p) (1 + 2/p)))
//          (1 + 2e3 (1 + 2/p)^4 / (n^2 tau^4 cos^8(phi0)))).
// Throws TauOutOfWindow / EpsilonTooLarge on infeasible parameters.
double hessian_discount_tail(long n, int p, double tau, double cos_phi0,
                             double epsilon);

// max(0, 1 - gradient_tail - hessian_discount_tail) with the spectral
// deviation fixed at its ceiling (the worst case for the tau window).
double success_probability(long n, int p, double t, double tau,
                           double cos_phi0);

// Certified Frobenius radius for ||T^-1 - Theta0^-1||_F:
//   (1 / lambda_min) * 4t/(1 - tau) * (p + 2)/cos^2(phi0).
double bound_radius(double t, double tau, int p, double cos_phi0,
                    double lambda_min);

struct ClosedFormBound {
  double radius;
  double probability;
};

// The closed-form bound at tau = 3/5, t = theta/sqrt(n):
//   radius      = 10 theta (p+2) / (lambda_min cos^2(phi0) sqrt(n))
//   probability = max(0, 1 - 2 exp(-theta^2 / (2 (1 + 1.7 theta/sqrt(n))))
//                        - 2 p^2 exp(-n cos^2(phi0)/(77 ln(7p)(1 + 2/p)))
//                          (1 + 15e3 (1 + 2/p)^4 / (n^2 cos^8(phi0)))).
ClosedFormBound closed_form_bound(long n, int p, double cos_phi0, double lambda_min,
                            double theta);

struct BoundQuery {
  long n = 0;
  int p = 0;
  double cos_phi0 = 1.0;
  double lambda_min = 1.0;
  double confidence = 0.95;
};

struct BoundResult {
  bool feasible = false;
  double radius = 0.0;
  double t_star = 0.0;
  double tau_star = 0.0;
  double theta = 0.0;        // t_star * sqrt(n)
  double probability = 0.0;  // achieved success probability
  // True when the certified radius in the primed coordinates stays within
  // the spectral-deviation ceiling (via ||.||_2 <= ||.||_F).
  bool validity_radius_ok = false;
};

// Minimizes the radius over t > 0 and tau in the feasibility window subject
// to success_probability >= confidence. Deterministic two-stage search:
// a coarse grid (at least 200 x 200 points, logarithmic in t) followed by
// golden-section refinement of t for each of the 20 best tau values.
// Infeasibility is reported through feasible = false, not an error.
BoundResult optimize_bound(const BoundQuery& query);

}  // namespace tylercov
