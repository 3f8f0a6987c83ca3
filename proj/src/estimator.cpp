#include "tylercov/estimator.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace tylercov {

namespace {

void check_samples(const SampleSet& samples) {
  const long n = samples.n();
  const int p = samples.p();
  if (n < 1 || p < 1) throw InvalidInput("empty sample set");
  for (long i = 0; i < n; ++i) {
    const double norm = samples.rows.row(i).norm();
    if (std::abs(norm - 1.0) > 1e-10) {
      std::ostringstream os;
      os << "row " << i << " has norm " << norm << ", expected unit";
      throw InvalidInput(os.str());
    }
  }
}

// One application of the fixed-point map: (p/n) sum_i x_i x_i' / s_i with
// s_i = x_i' Tinv x_i. Throws QuadFormUnderflow on degenerate weights.
Eigen::MatrixXd fixed_point_map(const Eigen::MatrixXd& X,
                                const Eigen::MatrixXd& Tinv) {
  const long n = X.rows();
  const int p = static_cast<int>(X.cols());
  const Eigen::VectorXd s = ((X * Tinv).cwiseProduct(X)).rowwise().sum();
  const double floor = 1e-300;
  for (long i = 0; i < n; ++i) {
    if (!(s(i) > floor) || !std::isfinite(s(i))) {
      std::ostringstream os;
      os << "weight denominator " << s(i) << " at sample " << i;
      throw QuadFormUnderflow(os.str());
    }
  }
  const Eigen::MatrixXd weighted =
      s.cwiseInverse().asDiagonal() * X;  // rows x_i / s_i
  Eigen::MatrixXd F =
      (static_cast<double>(p) / static_cast<double>(n)) * (X.transpose() * weighted);
  F = 0.5 * (F + F.transpose()).eval();
  return F;
}

}  // namespace

EstimatorResult tyler_estimate(const SampleSet& samples,
                               const SolverConfig& config) {
  check_samples(samples);
  const long n = samples.n();
  const int p = samples.p();
  if (n <= p) {
    std::ostringstream os;
    os << "need n > p, got n = " << n << ", p = " << p;
    throw NotEnoughSamples(os.str());
  }
  if (!(config.tol > 0.0)) throw InvalidInput("tol must be positive");
  if (config.max_iter < 1) throw InvalidInput("max_iter must be at least 1");
  const double trace_target =
      config.trace_target.value_or(static_cast<double>(p));
  if (!(trace_target > 0.0)) {
    throw InvalidInput("trace target must be positive");
  }

  const Eigen::MatrixXd& X = samples.rows;
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(p, p);
  Eigen::MatrixXd Tinv = T;  // kept consistent with T, Tr(Tinv) = p

  std::vector<double> residuals;
  residuals.reserve(64);
  std::vector<Eigen::MatrixXd> iterates;
  if (config.keep_iterates) iterates.push_back(T);

  for (int iter = 1; iter <= config.max_iter; ++iter) {
    const Eigen::MatrixXd F = fixed_point_map(X, Tinv);
    const double residual = (T - F).norm() / T.norm();
    residuals.push_back(residual);

    if (residual <= config.tol) {
      // The residual certifies T itself; rescaling preserves it.
      EstimatorResult result;
      result.T = make_shape(T * (static_cast<double>(p) / trace_target));
      result.iterations = iter;
      result.residual = residual;
      result.converged = true;
      result.trace_target = trace_target;
      result.iterates = std::move(iterates);
      return result;
    }

    // Renormalize the next iterate to Tr(T^-1) = p to pin the free scale.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(F);
    const Eigen::MatrixXd Finv =
        ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    const double trace_inv = Finv.trace();
    if (ldlt.info() != Eigen::Success || !std::isfinite(trace_inv) ||
        !(trace_inv > 0.0)) {
      throw NotConverged("iterate became numerically singular", iter,
                         std::move(residuals), std::move(T));
    }
    const double c = trace_inv / static_cast<double>(p);
    T = c * F;
    Tinv = Finv / c;
    Tinv = 0.5 * (Tinv + Tinv.transpose()).eval();
    if (config.keep_iterates) iterates.push_back(T);
  }

  std::ostringstream os;
  os << "no convergence after " << config.max_iter
     << " iterations, residual " << residuals.back();
  throw NotConverged(os.str(), config.max_iter, std::move(residuals),
                     std::move(T));
}

double fixed_point_residual(const ShapeMatrix& T, const SampleSet& samples) {
  check_samples(samples);
  if (T.dim() != samples.p()) {
    throw DimensionMismatch("estimate and samples dimensions differ");
  }
  const Eigen::MatrixXd F = fixed_point_map(samples.rows, T.inverse());
  return (T.entries() - F).norm() / T.entries().norm();
}

ShapeMatrix scm_estimate(const Eigen::MatrixXd& rows, double trace_target) {
  const long n = rows.rows();
  const int p = static_cast<int>(rows.cols());
  if (n < 1 || p < 1) throw InvalidInput("empty sample matrix");
  if (n <= p) {
    std::ostringstream os;
    os << "need n > p, got n = " << n << ", p = " << p;
    throw NotEnoughSamples(os.str());
  }
  if (!(trace_target > 0.0)) {
    throw InvalidInput("trace target must be positive");
  }
  Eigen::MatrixXd S = (rows.transpose() * rows) / static_cast<double>(n);
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const double lmin = es.eigenvalues()(0);
  const double lmax = es.eigenvalues()(p - 1);
  if (!(lmin > 1e-12 * lmax) || !(lmax > 0.0)) {
    std::ostringstream os;
    os << "sample covariance is singular (eigenvalues " << lmin << " .. "
       << lmax << ")";
    throw SingularScm(os.str());
  }
  const double trace_inv = es.eigenvalues().cwiseInverse().sum();
  return make_shape(S * (trace_inv / trace_target));
}

ShapeMatrix scm_estimate(const SampleSet& samples, double trace_target) {
  return scm_estimate(samples.rows, trace_target);
}

}  // namespace tylercov
