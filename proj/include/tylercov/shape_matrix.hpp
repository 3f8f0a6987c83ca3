#pragma once

#include <Eigen/Dense>

#include "tylercov/errors.hpp"

namespace tylercov {

// Symmetric positive definite matrix with eagerly cached spectral data.
// Immutable once built; the eigendecomposition of the symmetrized input is
// the single source of truth for the square root, the inverse and all norms,
// so the caches stay mutually consistent. Safe to share across threads.
class ShapeMatrix {
 public:
  ShapeMatrix() = default;  // empty (dim 0); only valid as a placeholder

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }

  // Eigenvalues in descending order; column k of eigenvectors() pairs with
  // eigenvalues()(k).
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

  // Symmetric square root: sqrt_factor() * sqrt_factor() == entries().
  const Eigen::MatrixXd& sqrt_factor() const { return sqrt_factor_; }
  const Eigen::MatrixXd& inverse() const { return inverse_; }

  double lambda_min() const { return eigenvalues_(dim() - 1); }
  double lambda_max() const { return eigenvalues_(0); }
  double log_det() const { return log_det_; }
  double trace_inverse() const { return trace_inverse_; }

  static ShapeMatrix identity(int p);
  static ShapeMatrix diagonal(const Eigen::VectorXd& diag);

 private:
  Eigen::MatrixXd entries_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::MatrixXd sqrt_factor_;
  Eigen::MatrixXd inverse_;
  double log_det_ = 0.0;
  double trace_inverse_ = 0.0;

  friend ShapeMatrix make_shape(const Eigen::MatrixXd& entries);
};

// Validates and builds a ShapeMatrix. The input is symmetrized by averaging
// with its transpose before decomposition. Throws NotSymmetric when the
// asymmetry exceeds 1e-12 * max|entry|, NotPositiveDefinite when the smallest
// eigenvalue is at most 1e-12 * largest.
ShapeMatrix make_shape(const Eigen::MatrixXd& entries);

struct SphericityStats {
  double cos_phi0;    // Tr(inv) / (sqrt(p) ||inv||_F), in (0,1]
  double kappa;       // condition number lambda_max / lambda_min
  double lambda_min;  // smallest eigenvalue of the shape itself
};

// Sphericity statistics of a shape interpreted as the true parameter.
// cos_phi0 == 1 exactly when all eigenvalues are equal, and is always at
// least 1/kappa.
SphericityStats sphericity(const ShapeMatrix& shape);

// ||a^-1 - b^-1||_F. Throws DimensionMismatch.
double frobenius_distance_of_inverses(const ShapeMatrix& a,
                                      const ShapeMatrix& b);

}  // namespace tylercov
