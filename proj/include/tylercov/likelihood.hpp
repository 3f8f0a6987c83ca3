#pragma once

#include <Eigen/Core>

#include "tylercov/sampling.hpp"
#include "tylercov/shape_matrix.hpp"

namespace tylercov {

// Symmetric direction used to probe the likelihood's gradient and Hessian as
// linear/quadratic forms. Traceless directions span the subspace that the
// trace constraint leaves free.
struct PerturbationDirection {
  Eigen::MatrixXd U;
  bool traceless = false;
};

// Validates symmetry (1e-12 * max|entry|) and, when traceless is requested,
// |Tr U| <= 1e-12 * ||U||_F.
PerturbationDirection make_direction(const Eigen::MatrixXd& u,
                                     bool traceless = false);

// u - (Tr u / p) I
Eigen::MatrixXd project_traceless(const Eigen::MatrixXd& u);

// Negative log-likelihood parametrized by the inverse shape matrix:
//   f(Omega; x) = -log|Omega| + p log(x' Omega x),   ||x|| = 1.
double neg_loglik(const ShapeMatrix& omega, const Eigen::VectorXd& x);

// Directional derivative -Tr(Omega^-1 U) + p (x'Ux)/(x'Omega x).
double grad_form(const ShapeMatrix& omega, const PerturbationDirection& u,
                 const Eigen::VectorXd& x);

// Second directional derivative Tr((Omega^-1 U)^2) - p ((x'Ux)/(x'Omega x))^2.
double hessian_form(const ShapeMatrix& omega, const PerturbationDirection& u,
                    const Eigen::VectorXd& x);

enum class LikelihoodForm { neg_loglik, grad, hessian };

// Arithmetic mean of the chosen form over all rows of the sample set. The
// direction is ignored for neg_loglik and may be null in that case.
double sample_avg(LikelihoodForm form, const ShapeMatrix& omega,
                  const PerturbationDirection* u, const SampleSet& samples);

// Expected Hessian at the true parameter:
//   [p Tr((Theta0 U)^2) - Tr(Theta0 U)^2] / (p + 2).
// Zero exactly on the kernel direction U = Theta0^-1.
double expected_hessian_at_truth(const ShapeMatrix& theta0,
                                 const PerturbationDirection& u);

// Inputs for the moments R^nu(U, Omega; Theta0) = E[((x'Ux)/(x'Omega x))^nu].
struct MomentSpec {
  int nu = 1;
  Eigen::MatrixXd U;
  ShapeMatrix omega;    // I + delta in the primed coordinates
  double epsilon = 0.0; // spectral norm of (omega - I), when relevant
  double alpha = 0.0;   // Taylor path parameter, carried for diagnostics
};

// Closed forms for nu in {1,2,3}, valid only at omega = I and theta0 = I:
//   R^1 = Tr U / p
//   R^2 = [(Tr U)^2 + 2||U||_F^2] / (p(p+2))
//   R^3 = [(Tr U)^3 + 6 Tr U Tr U^2 + 8 Tr U^3] / (p(p+2)(p+4))
// Throws UnsupportedOrder for other nu; use moment_mc_oracle instead.
double moment_r(const MomentSpec& spec, const ShapeMatrix& theta0);

// (nu/2)! ||U||_F^nu / p^(nu/2); an upper bound on R^nu(U, I; I) for even nu.
double moment_even_bound(int nu, const Eigen::MatrixXd& u, int p);

struct MonteCarloMoment {
  double estimate;
  double std_error;
};

// Sample mean and standard error of ((x'Ux)/(x'Omega x))^nu over n_mc ACG
// draws from theta0. Streams samples, so n_mc can be large. Requires
// n_mc >= 1000.
MonteCarloMoment moment_mc_oracle(const MomentSpec& spec,
                                  const ShapeMatrix& theta0, long n_mc,
                                  const SeededStream& stream);

}  // namespace tylercov
