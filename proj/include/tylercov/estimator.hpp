#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "tylercov/sampling.hpp"
#include "tylercov/shape_matrix.hpp"

namespace tylercov {

struct SolverConfig {
  double tol = 1e-12;  // relative fixed-point residual
  int max_iter = 1000;
  // Desired Tr(T^-1) after convergence; defaults to the dimension p.
  std::optional<double> trace_target;
  // Record the scale-normalized iterates (diagnostics and tests only).
  bool keep_iterates = false;
};

struct EstimatorResult {
  ShapeMatrix T;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double trace_target = 0.0;
  std::vector<Eigen::MatrixXd> iterates;  // filled when keep_iterates is set
};

// Raised when the fixed-point iteration hits max_iter (or the iterate
// degenerates), which signals sample configurations for which the estimator
// does not exist. Carries the residual trace and the last iterate so
// campaigns can record the failed trial.
struct NotConverged : NumericalError {
  NotConverged(const std::string& msg, int iterations_used,
               std::vector<double> residuals, Eigen::MatrixXd last)
      : NumericalError(msg),
        iterations(iterations_used),
        residual_trace(std::move(residuals)),
        last_iterate(std::move(last)) {}
  int iterations;
  std::vector<double> residual_trace;
  Eigen::MatrixXd last_iterate;  // scale-normalized, Tr(inverse) = p
};

// Tyler's estimator: the fixed point of
//   T = (p/n) sum_i x_i x_i' / (x_i' T^-1 x_i),
// iterated from T = I with the inverse trace pinned to p each step, then
// rescaled so Tr(T^-1) equals the configured trace target. Convergence is
// certified by the relative fixed-point residual of the returned iterate.
// Throws NotEnoughSamples when n <= p and NotConverged as described above.
EstimatorResult tyler_estimate(const SampleSet& samples,
                               const SolverConfig& config = {});

// ||T - (p/n) sum_i x_i x_i' / (x_i' T^-1 x_i)||_F / ||T||_F
double fixed_point_residual(const ShapeMatrix& T, const SampleSet& samples);

// Second-moment matrix of the rows, rescaled so its inverse has the requested
// trace. Throws NotEnoughSamples when n <= p and SingularScm when the moment
// matrix is numerically singular.
ShapeMatrix scm_estimate(const Eigen::MatrixXd& rows, double trace_target);
ShapeMatrix scm_estimate(const SampleSet& samples, double trace_target);

}  // namespace tylercov
