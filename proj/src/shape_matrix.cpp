#include "tylercov/shape_matrix.hpp"

#include <cmath>
#include <sstream>

namespace tylercov {

namespace {

void check_finite_square(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    std::ostringstream os;
    os << "shape matrix must be square and nonempty, got " << m.rows() << "x"
       << m.cols();
    throw InvalidInput(os.str());
  }
  if (!m.allFinite()) {
    throw InvalidInput("shape matrix has non-finite entries");
  }
}

}  // namespace

ShapeMatrix make_shape(const Eigen::MatrixXd& entries) {
  check_finite_square(entries);

  const double max_abs = entries.cwiseAbs().maxCoeff();
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * max_abs) {
    std::ostringstream os;
    os << "asymmetry " << asym << " exceeds tolerance " << 1e-12 * max_abs;
    throw NotSymmetric(os.str());
  }

  ShapeMatrix s;
  s.entries_ = 0.5 * (entries + entries.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.entries_);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed");
  }

  const int p = s.dim();
  // Eigen returns ascending order; flip to descending.
  s.eigenvalues_ = es.eigenvalues().reverse();
  s.eigenvectors_ = es.eigenvectors().rowwise().reverse();

  const double lmax = s.eigenvalues_(0);
  const double lmin = s.eigenvalues_(p - 1);
  if (!(lmin > 1e-12 * lmax) || !(lmax > 0.0)) {
    std::ostringstream os;
    os << "smallest eigenvalue " << lmin << " fails cutoff "
       << 1e-12 * lmax;
    throw NotPositiveDefinite(os.str());
  }

  const Eigen::ArrayXd lam = s.eigenvalues_.array();
  s.sqrt_factor_ = s.eigenvectors_ * lam.sqrt().matrix().asDiagonal() *
                   s.eigenvectors_.transpose();
  s.inverse_ = s.eigenvectors_ * lam.inverse().matrix().asDiagonal() *
               s.eigenvectors_.transpose();
  // Keep the derived matrices exactly symmetric.
  s.sqrt_factor_ = 0.5 * (s.sqrt_factor_ + s.sqrt_factor_.transpose()).eval();
  s.inverse_ = 0.5 * (s.inverse_ + s.inverse_.transpose()).eval();
  s.log_det_ = lam.log().sum();
  s.trace_inverse_ = lam.inverse().sum();
  return s;
}

ShapeMatrix ShapeMatrix::identity(int p) {
  return make_shape(Eigen::MatrixXd::Identity(p, p));
}

ShapeMatrix ShapeMatrix::diagonal(const Eigen::VectorXd& diag) {
  return make_shape(Eigen::MatrixXd(diag.asDiagonal()));
}

SphericityStats sphericity(const ShapeMatrix& shape) {
  // A symmetric matrix has all eigenvalues equal exactly when it is a
  // multiple of the identity; report the spherical case without rounding.
  const int p = shape.dim();
  const double scale = shape.entries()(0, 0);
  if ((shape.entries() - scale * Eigen::MatrixXd::Identity(p, p))
          .cwiseAbs()
          .maxCoeff() == 0.0) {
    return SphericityStats{1.0, 1.0, scale};
  }
  const Eigen::ArrayXd inv_lam = shape.eigenvalues().array().inverse();
  const double trace = inv_lam.sum();
  const double fro = std::sqrt(inv_lam.square().sum());
  SphericityStats stats;
  stats.cos_phi0 = trace / (std::sqrt(static_cast<double>(p)) * fro);
  stats.kappa = shape.lambda_max() / shape.lambda_min();
  stats.lambda_min = shape.lambda_min();
  if (stats.cos_phi0 > 1.0) stats.cos_phi0 = 1.0;  // rounding guard
  return stats;
}

double frobenius_distance_of_inverses(const ShapeMatrix& a,
                                      const ShapeMatrix& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "dimension mismatch: " << a.dim() << " vs " << b.dim();
    throw DimensionMismatch(os.str());
  }
  return (a.inverse() - b.inverse()).norm();
}

}  // namespace tylercov
