#include "tylercov/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace tylercov {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double clamp_tail(double v) { return std::min(1.0, v); }

void check_basic(long n, int p) {
  if (n < 1) throw InvalidInput("sample count must be at least 1");
  if (p < 1) throw InvalidInput("dimension must be at least 1");
}

void check_cos(double cos_phi0) {
  if (!(cos_phi0 > 0.0) || cos_phi0 > 1.0) {
    throw InvalidInput("cos_phi0 must lie in (0, 1]");
  }
}

}  // namespace

double vector_bernstein_tail(long n, double t, double sigma, double L) {
  if (n < 1) throw InvalidInput("sample count must be at least 1");
  if (!(sigma > 0.0) || !(L > 0.0)) {
    throw InvalidInput("sigma and L must be positive");
  }
  if (t < 0.0) throw InvalidInput("t must be nonnegative");
  const double nn = static_cast<double>(n);
  return clamp_tail(2.0 *
                    std::exp(-nn * t * t / (2.0 * (1.0 + 1.7 * t * L / sigma))));
}

double matrix_bernstein_threshold(int p, double sigma, double L) {
  if (p < 1) throw InvalidInput("dimension must be at least 1");
  if (!(sigma > 0.0) || !(L > 0.0)) {
    throw InvalidInput("sigma and L must be positive");
  }
  const double pp = static_cast<double>(p);
  return (sigma / (4.0 * L)) * (1.0 + 1.0 / (pp * pp)) /
         std::log(64.0 * kSqrt2 * pp * pp * L * L / (sigma * sigma));
}

double matrix_bernstein_tail(long n, int p, double t, double sigma, double L) {
  check_basic(n, p);
  const double threshold = matrix_bernstein_threshold(p, sigma, L);
  if (!(t > threshold)) {
    std::ostringstream os;
    os << "t = " << t << " is not above the validity threshold " << threshold;
    throw BelowValidityThreshold(threshold, os.str());
  }
  const double nn = static_cast<double>(n);
  const double pp = static_cast<double>(p);
  const double log_term =
      std::log(64.0 * kSqrt2 * pp * pp * L * L / (sigma * sigma));
  const double exp_part =
      2.0 * pp * pp * std::exp(-nn * t * sigma / (8.0 * L * log_term));
  const double log1p_term = std::log1p(t / sigma);
  const double correction =
      1.0 + 6.0 / (nn * nn * t * t * sigma * sigma * log1p_term * log1p_term);
  return clamp_tail(exp_part * correction);
}

double gradient_tail(long n, double t) {
  return vector_bernstein_tail(n, t, 1.0, 1.0);
}

double epsilon_ceiling(int p, double cos_phi0) {
  if (p < 1) throw InvalidInput("dimension must be at least 1");
  check_cos(cos_phi0);
  const double pp = static_cast<double>(p);
  return pp * cos_phi0 * cos_phi0 / (6.0 * (pp + 2.0));
}

TauWindow tau_window(int p, double cos_phi0, double epsilon) {
  if (p < 1) throw InvalidInput("dimension must be at least 1");
  check_cos(cos_phi0);
  if (epsilon < 0.0 || epsilon >= 1.0) {
    throw InvalidInput("epsilon must lie in [0, 1)");
  }
  const double pp = static_cast<double>(p);
  const double scale = pp * (1.0 - epsilon) * (1.0 - epsilon) * cos_phi0 *
                       cos_phi0 / (pp + 2.0);
  const double lo_const =
      (1.0 + 1.0 / (pp * pp)) / std::log(32.0 * kSqrt2 * pp * pp);
  return TauWindow{lo_const / scale, 1.0 / scale};
}

double hessian_discount_tail(long n, int p, double tau, double cos_phi0,
                             double epsilon) {
  check_basic(n, p);
  check_cos(cos_phi0);
  const double ceiling = epsilon_ceiling(p, cos_phi0);
  if (epsilon < 0.0 || epsilon > ceiling) {
    std::ostringstream os;
    os << "epsilon = " << epsilon << " exceeds the validity ceiling "
       << ceiling;
    throw EpsilonTooLarge(os.str());
  }
  const TauWindow window = tau_window(p, cos_phi0, epsilon);
  if (tau < window.lo || tau > window.hi) {
    std::ostringstream os;
    os << "tau = " << tau << " outside the feasibility window [" << window.lo
       << ", " << window.hi << "]";
    throw TauOutOfWindow(os.str());
  }
  const double nn = static_cast<double>(n);
  const double pp = static_cast<double>(p);
  const double c2 = cos_phi0 * cos_phi0;
  const double c8 = c2 * c2 * c2 * c2;
  const double one_plus = 1.0 + 2.0 / pp;
  const double exp_part =
      2.0 * pp * pp *
      std::exp(-nn * tau * c2 / (46.0 * std::log(7.0 * pp) * one_plus));
  const double one_plus4 = one_plus * one_plus * one_plus * one_plus;
  const double correction =
      1.0 + 2.0e3 * one_plus4 / (nn * nn * tau * tau * tau * tau * c8);
  return clamp_tail(exp_part * correction);
}

double success_probability(long n, int p, double t, double tau,
                           double cos_phi0) {
  const double eps = epsilon_ceiling(p, cos_phi0);
  const double grad = gradient_tail(n, t);
  const double hess = hessian_discount_tail(n, p, tau, cos_phi0, eps);
  return std::max(0.0, 1.0 - grad - hess);
}

double bound_radius(double t, double tau, int p, double cos_phi0,
                    double lambda_min) {
  if (!(t > 0.0)) throw InvalidInput("t must be positive");
  if (tau < 0.0 || !(tau < 1.0)) throw InvalidInput("tau must lie in [0, 1)");
  if (p < 1) throw InvalidInput("dimension must be at least 1");
  check_cos(cos_phi0);
  if (!(lambda_min > 0.0)) throw InvalidInput("lambda_min must be positive");
  const double pp = static_cast<double>(p);
  return (1.0 / lambda_min) * (4.0 * t / (1.0 - tau)) * (pp + 2.0) /
         (cos_phi0 * cos_phi0);
}

ClosedFormBound closed_form_bound(long n, int p, double cos_phi0, double lambda_min,
                            double theta) {
  check_basic(n, p);
  check_cos(cos_phi0);
  if (!(lambda_min > 0.0)) throw InvalidInput("lambda_min must be positive");
  if (theta < 0.0) throw InvalidInput("theta must be nonnegative");
  if (n <= p) {
    std::ostringstream os;
    os << "need n > p, got n = " << n << ", p = " << p;
    throw NotEnoughSamples(os.str());
  }
  const double nn = static_cast<double>(n);
  const double pp = static_cast<double>(p);
  const double c2 = cos_phi0 * cos_phi0;
  const double c8 = c2 * c2 * c2 * c2;
  const double sqrt_n = std::sqrt(nn);
  ClosedFormBound out;
  out.radius = 10.0 * theta * (pp + 2.0) / (lambda_min * c2 * sqrt_n);
  const double grad =
      2.0 * std::exp(-theta * theta / (2.0 * (1.0 + 1.7 * theta / sqrt_n)));
  const double one_plus = 1.0 + 2.0 / pp;
  const double one_plus4 = one_plus * one_plus * one_plus * one_plus;
  const double hess =
      2.0 * pp * pp *
      std::exp(-nn * c2 / (77.0 * std::log(7.0 * pp) * one_plus)) *
      (1.0 + 15.0e3 * one_plus4 / (nn * nn * c8));
  out.probability = std::min(1.0, std::max(0.0, 1.0 - grad - hess));
  return out;
}

namespace {

// Ascending logarithmic grid with `count` points.
std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> grid(count);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (int i = 0; i < count; ++i) {
    grid[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

struct Candidate {
  double tau = 0.0;
  double hess_tail = 0.0;
  double t = 0.0;
  double radius = 0.0;
  int t_index = -1;
};

}  // namespace

BoundResult optimize_bound(const BoundQuery& query) {
  check_basic(query.n, query.p);
  if (query.n <= query.p) {
    std::ostringstream os;
    os << "need n > p, got n = " << query.n << ", p = " << query.p;
    throw InvalidInput(os.str());
  }
  check_cos(query.cos_phi0);
  if (!(query.lambda_min > 0.0)) {
    throw InvalidInput("lambda_min must be positive");
  }
  if (!(query.confidence > 0.0) || !(query.confidence < 1.0)) {
    throw InvalidInput("confidence must lie in the open interval (0, 1)");
  }

  BoundResult result;
  const double eps = epsilon_ceiling(query.p, query.cos_phi0);
  const TauWindow window = tau_window(query.p, query.cos_phi0, eps);
  const double tau_lo = window.lo;
  const double tau_hi = std::min(window.hi, 1.0 - 1e-9);
  if (!(tau_lo < tau_hi)) return result;  // window incompatible with tau < 1

  // Coarse stage. The tau grid unions log spacing in tau with log spacing in
  // (1 - tau): the optimum sits near the window floor for large n and close
  // to 1 for barely-feasible n.
  constexpr int kTauPoints = 512;
  constexpr int kTPoints = 384;
  std::vector<double> taus = log_grid(tau_lo, tau_hi, kTauPoints);
  for (double one_minus : log_grid(1.0 - tau_hi, 1.0 - tau_lo, kTauPoints)) {
    taus.push_back(1.0 - one_minus);
  }
  std::sort(taus.begin(), taus.end());
  const std::vector<double> ts = log_grid(1e-6, 64.0, kTPoints);

  std::vector<double> grad_tails(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    grad_tails[i] = gradient_tail(query.n, ts[i]);
  }

  // For each tau, the success probability is non-decreasing in t while the
  // radius grows linearly, so the best t is the first feasible one.
  std::vector<Candidate> candidates;
  for (double tau : taus) {
    if (tau < tau_lo || tau > tau_hi) continue;
    Candidate cand;
    cand.tau = tau;
    cand.hess_tail =
        hessian_discount_tail(query.n, query.p, tau, query.cos_phi0, eps);
    const double budget = 1.0 - query.confidence - cand.hess_tail;
    if (!(budget > 0.0)) continue;
    const auto it = std::lower_bound(
        grad_tails.begin(), grad_tails.end(), budget,
        [](double tail, double b) { return tail > b; });  // tails descend
    if (it == grad_tails.end()) continue;
    cand.t_index = static_cast<int>(it - grad_tails.begin());
    cand.t = ts[cand.t_index];
    cand.radius = bound_radius(cand.t, tau, query.p, query.cos_phi0,
                               query.lambda_min);
    candidates.push_back(cand);
  }
  if (candidates.empty()) return result;

  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              return a.radius < b.radius;
            });
  const std::size_t refine_count = std::min<std::size_t>(20, candidates.size());

  // Refinement stage: golden-section on t for the best tau values. The
  // penalized objective is unimodal (decreasing while infeasible, then the
  // linearly growing radius), and only feasible evaluations can win.
  constexpr double kGolden = 0.6180339887498949;
  double best_radius = std::numeric_limits<double>::infinity();
  double best_t = 0.0, best_tau = 0.0;
  for (std::size_t c = 0; c < refine_count; ++c) {
    const Candidate& cand = candidates[c];
    const double budget = 1.0 - query.confidence - cand.hess_tail;
    double feasible_t = cand.t;
    auto objective = [&](double t) {
      const double grad = gradient_tail(query.n, t);
      if (grad <= budget) {
        if (t < feasible_t) feasible_t = t;
        return bound_radius(t, cand.tau, query.p, query.cos_phi0,
                            query.lambda_min);
      }
      return 1e300 * (1.0 + grad - budget);
    };
    double a = cand.t_index > 0 ? ts[cand.t_index - 1] : ts[0] * 0.25;
    double b = cand.t;
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = objective(x1);
    double f2 = objective(x2);
    for (int iter = 0; iter < 90; ++iter) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - kGolden * (b - a);
        f1 = objective(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kGolden * (b - a);
        f2 = objective(x2);
      }
    }
    const double radius = bound_radius(feasible_t, cand.tau, query.p,
                                       query.cos_phi0, query.lambda_min);
    if (radius < best_radius) {
      best_radius = radius;
      best_t = feasible_t;
      best_tau = cand.tau;
    }
  }

  result.feasible = true;
  result.radius = best_radius;
  result.t_star = best_t;
  result.tau_star = best_tau;
  result.theta = best_t * std::sqrt(static_cast<double>(query.n));
  result.probability =
      success_probability(query.n, query.p, best_t, best_tau, query.cos_phi0);
  const double primed_radius = 4.0 * best_t / (1.0 - best_tau) *
                               (query.p + 2.0) /
                               (query.cos_phi0 * query.cos_phi0);
  result.validity_radius_ok = primed_radius <= eps;
  return result;
}

}  // namespace tylercov
