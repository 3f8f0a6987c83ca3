#include "tylercov/likelihood.hpp"

#include <cmath>
#include <sstream>

namespace tylercov {

namespace {

void check_unit(const Eigen::VectorXd& x) {
  if (std::abs(x.norm() - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "sample vector has norm " << x.norm() << ", expected 1";
    throw InvalidInput(os.str());
  }
}

double quad_form(const Eigen::MatrixXd& m, const Eigen::VectorXd& x) {
  const double q = x.dot(m * x);
  if (!(q > 1e-300) || !std::isfinite(q)) {
    std::ostringstream os;
    os << "quadratic form " << q << " underflows";
    throw QuadFormUnderflow(os.str());
  }
  return q;
}

// Tr(A B) for square A, B of equal size.
double trace_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b.transpose()).sum();
}

}  // namespace

PerturbationDirection make_direction(const Eigen::MatrixXd& u,
                                     bool traceless) {
  if (u.rows() == 0 || u.rows() != u.cols()) {
    throw InvalidInput("direction must be square and nonempty");
  }
  if (!u.allFinite()) {
    throw InvalidInput("direction has non-finite entries");
  }
  const double max_abs = u.cwiseAbs().maxCoeff();
  const double asym = (u - u.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * max_abs) {
    std::ostringstream os;
    os << "direction asymmetry " << asym << " exceeds tolerance";
    throw NotSymmetric(os.str());
  }
  PerturbationDirection d;
  d.U = 0.5 * (u + u.transpose());
  d.traceless = traceless;
  if (traceless && std::abs(d.U.trace()) > 1e-12 * d.U.norm()) {
    std::ostringstream os;
    os << "direction trace " << d.U.trace() << " is not negligible";
    throw InvalidInput(os.str());
  }
  return d;
}

Eigen::MatrixXd project_traceless(const Eigen::MatrixXd& u) {
  const int p = static_cast<int>(u.rows());
  return u - (u.trace() / p) * Eigen::MatrixXd::Identity(p, p);
}

double neg_loglik(const ShapeMatrix& omega, const Eigen::VectorXd& x) {
  check_unit(x);
  const double q = quad_form(omega.entries(), x);
  return -omega.log_det() + omega.dim() * std::log(q);
}

double grad_form(const ShapeMatrix& omega, const PerturbationDirection& u,
                 const Eigen::VectorXd& x) {
  check_unit(x);
  const double q = quad_form(omega.entries(), x);
  const double xux = x.dot(u.U * x);
  return -trace_product(omega.inverse(), u.U) + omega.dim() * xux / q;
}

double hessian_form(const ShapeMatrix& omega, const PerturbationDirection& u,
                    const Eigen::VectorXd& x) {
  check_unit(x);
  const double q = quad_form(omega.entries(), x);
  const double ratio = x.dot(u.U * x) / q;
  const Eigen::MatrixXd m = omega.inverse() * u.U;
  return trace_product(m, m) - omega.dim() * ratio * ratio;
}

double sample_avg(LikelihoodForm form, const ShapeMatrix& omega,
                  const PerturbationDirection* u, const SampleSet& samples) {
  if (samples.n() < 1) throw InvalidInput("empty sample set");
  if (form != LikelihoodForm::neg_loglik && u == nullptr) {
    throw InvalidInput("derivative forms need a direction");
  }
  double sum = 0.0;
  Eigen::VectorXd x(samples.p());
  for (long i = 0; i < samples.n(); ++i) {
    x = samples.rows.row(i).transpose();
    switch (form) {
      case LikelihoodForm::neg_loglik:
        sum += neg_loglik(omega, x);
        break;
      case LikelihoodForm::grad:
        sum += grad_form(omega, *u, x);
        break;
      case LikelihoodForm::hessian:
        sum += hessian_form(omega, *u, x);
        break;
    }
  }
  return sum / static_cast<double>(samples.n());
}

double expected_hessian_at_truth(const ShapeMatrix& theta0,
                                 const PerturbationDirection& u) {
  if (theta0.dim() != u.U.rows()) {
    throw DimensionMismatch("shape and direction dimensions differ");
  }
  const double p = static_cast<double>(theta0.dim());
  const Eigen::MatrixXd m = theta0.entries() * u.U;
  const double tr_sq = trace_product(m, m);
  const double tr = m.trace();
  return (p * tr_sq - tr * tr) / (p + 2.0);
}

namespace {

bool is_identity(const Eigen::MatrixXd& m) {
  return (m - Eigen::MatrixXd::Identity(m.rows(), m.cols()))
             .cwiseAbs()
             .maxCoeff() <= 1e-12;
}

}  // namespace

double moment_r(const MomentSpec& spec, const ShapeMatrix& theta0) {
  if (spec.nu < 1 || spec.nu > 3) {
    std::ostringstream os;
    os << "no closed form for nu = " << spec.nu;
    throw UnsupportedOrder(os.str());
  }
  if (spec.omega.dim() == 0 || !is_identity(spec.omega.entries()) ||
      !is_identity(theta0.entries())) {
    throw UnsupportedOrder(
        "closed forms require omega = I and theta0 = I; use the Monte Carlo "
        "oracle for general arguments");
  }
  const Eigen::MatrixXd& u = spec.U;
  if (u.rows() != theta0.dim()) {
    throw DimensionMismatch("direction and shape dimensions differ");
  }
  const double p = static_cast<double>(theta0.dim());
  const double t1 = u.trace();
  const double t2 = u.squaredNorm();  // Tr(U^2) for symmetric U
  switch (spec.nu) {
    case 1:
      return t1 / p;
    case 2:
      return (t1 * t1 + 2.0 * t2) / (p * (p + 2.0));
    default: {
      const double t3 = (u * u).cwiseProduct(u.transpose()).sum();  // Tr(U^3)
      return (t1 * t1 * t1 + 6.0 * t1 * t2 + 8.0 * t3) /
             (p * (p + 2.0) * (p + 4.0));
    }
  }
}

double moment_even_bound(int nu, const Eigen::MatrixXd& u, int p) {
  if (nu < 2 || nu % 2 != 0) {
    std::ostringstream os;
    os << "even-moment bound needs even nu, got " << nu;
    throw OddOrder(os.str());
  }
  double half_factorial = 1.0;
  for (int k = 2; k <= nu / 2; ++k) half_factorial *= k;
  return half_factorial * std::pow(u.norm(), nu) /
         std::pow(static_cast<double>(p), nu / 2.0);
}

MonteCarloMoment moment_mc_oracle(const MomentSpec& spec,
                                  const ShapeMatrix& theta0, long n_mc,
                                  const SeededStream& stream) {
  if (n_mc < 1000) {
    throw InvalidInput("Monte Carlo moment oracle needs n_mc >= 1000");
  }
  const int p = theta0.dim();
  if (spec.U.rows() != p || spec.omega.dim() != p) {
    throw DimensionMismatch("moment spec dimensions differ from shape");
  }
  const Eigen::MatrixXd& L = theta0.sqrt_factor();
  const Eigen::MatrixXd& omega = spec.omega.entries();

  // Welford running mean/variance of the ratio powers.
  double mean = 0.0;
  double m2 = 0.0;
  Eigen::VectorXd z(p), x(p);
  for (long i = 0; i < n_mc; ++i) {
    for (int j = 0; j < p; ++j) z(j) = rng::normal(stream, i, j);
    x = L * z;
    x /= x.norm();
    const double num = x.dot(spec.U * x);
    const double den = quad_form(omega, x);
    const double ratio = num / den;
    double value = ratio;
    for (int k = 2; k <= spec.nu; ++k) value *= ratio;
    const double delta = value - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (value - mean);
  }
  MonteCarloMoment out;
  out.estimate = mean;
  out.std_error =
      std::sqrt(m2 / static_cast<double>(n_mc - 1) / static_cast<double>(n_mc));
  return out;
}

}  // namespace tylercov
