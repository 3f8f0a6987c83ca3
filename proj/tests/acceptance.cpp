// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit code 0 only when all pass.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bound_oracle.hpp"
#include "test_support.hpp"
#include "tylercov/bounds.hpp"
#include "tylercov/estimator.hpp"
#include "tylercov/experiments.hpp"
#include "tylercov/likelihood.hpp"
#include "tylercov/sampling.hpp"

using namespace tylercov;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
void run_parallel(int jobs, F&& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const int workers = std::max(1, std::min<int>(hw == 0 ? 1 : hw, jobs));
  if (workers <= 1) {
    for (int j = 0; j < jobs; ++j) fn(j);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int j = next.fetch_add(1); j < jobs; j = next.fetch_add(1)) fn(j);
    });
  }
  for (std::thread& th : pool) th.join();
}

struct Reporter {
  bool all_ok = true;

  void report(int k, const std::string& name, bool ok,
              const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", k,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
};

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// 1. Fixed-point certificate on 100 random ACG instances.
void criterion_1(Reporter& rep) {
  const auto start = Clock::now();
  const std::vector<int> dims{2, 5, 10, 25, 50};
  const int per_dim = 20;
  std::atomic<int> converged{0};
  std::vector<double> residuals(dims.size() * per_dim, 1.0);
  std::vector<int> iterations(dims.size() * per_dim, 0);

  run_parallel(static_cast<int>(residuals.size()), [&](int job) {
    const int p = dims[job / per_dim];
    const SeededStream stream{900, static_cast<std::uint64_t>(job)};
    const SampleSet set = sample_acg(ShapeMatrix::identity(p), 4L * p, stream);
    try {
      const EstimatorResult r = tyler_estimate(set);
      residuals[job] = fixed_point_residual(r.T, set);
      iterations[job] = r.iterations;
      converged.fetch_add(1);
    } catch (const Error&) {
    }
  });

  const double elapsed = seconds_since(start);
  const double max_residual =
      *std::max_element(residuals.begin(), residuals.end());
  const int max_iters = *std::max_element(iterations.begin(), iterations.end());
  const bool ok = converged == 100 && max_residual <= 1e-10 &&
                  max_iters <= 1000 && elapsed <= 60.0;
  std::ostringstream os;
  os << converged << "/100 converged, max residual " << max_residual
     << ", max iterations " << max_iters << ", " << elapsed << " s";
  rep.report(1, "fixed-point certificate", ok, os.str());
}

// 2. Analytic derivatives match central finite differences.
void criterion_2(Reporter& rep) {
  const SeededStream s{901, 0};
  const double h = 1e-5;
  double worst_grad = 0.0, worst_hess = 0.0;
  for (int rep_i = 0; rep_i < 100; ++rep_i) {
    const int p = 2 + rep_i % 5;
    const Eigen::MatrixXd omega = testsup::random_spd(p, s, 3 * rep_i);
    Eigen::MatrixXd u = testsup::random_symmetric(p, s, 3 * rep_i + 1);
    u /= u.norm();
    const Eigen::VectorXd x = testsup::random_unit(p, s, 3 * rep_i + 2);
    const ShapeMatrix shape = make_shape(omega);
    const PerturbationDirection dir = make_direction(u);

    const double g = grad_form(shape, dir, x);
    const double g_fd = testsup::fd_gradient(omega, u, x, h);
    worst_grad = std::max(worst_grad,
                          std::abs(g - g_fd) / std::max(1.0, std::abs(g)));

    const double hs = hessian_form(shape, dir, x);
    const double h_fd = testsup::fd_hessian(omega, u, x, h);
    worst_hess = std::max(worst_hess,
                          std::abs(hs - h_fd) / std::max(1.0, std::abs(hs)));
  }
  const bool ok = worst_grad <= 1e-6 && worst_hess <= 1e-5;
  std::ostringstream os;
  os << "worst gradient rel err " << worst_grad << ", worst hessian rel err "
     << worst_hess;
  rep.report(2, "derivative correctness", ok, os.str());
}

// 3. Closed-form moments match Monte Carlo; even-moment bound never violated.
void criterion_3(Reporter& rep) {
  const auto start = Clock::now();
  const std::vector<int> dims{2, 3, 5, 10};
  const int per_dim = 20;
  const long n_mc = 1000000;
  const int jobs = static_cast<int>(dims.size()) * per_dim;

  std::vector<double> worst_z(jobs, 0.0);    // |closed - mc| / se
  std::vector<double> worst_gap(jobs, -1e9); // mc - bound - 4 se
  std::atomic<bool> failed{false};

  run_parallel(jobs, [&](int job) {
    const int p = dims[job / per_dim];
    const SeededStream s{902, static_cast<std::uint64_t>(job)};
    const ShapeMatrix eye = ShapeMatrix::identity(p);
    MomentSpec spec;
    spec.U = testsup::random_symmetric(p, s, 1);
    spec.omega = eye;
    try {
      for (int nu : {1, 2, 3}) {
        spec.nu = nu;
        const double closed = moment_r(spec, eye);
        const MonteCarloMoment mc = moment_mc_oracle(
            spec, eye, n_mc, {903, static_cast<std::uint64_t>(job * 8 + nu)});
        worst_z[job] = std::max(
            worst_z[job], std::abs(closed - mc.estimate) /
                              std::max(mc.std_error, 1e-300));
      }
      for (int nu : {2, 4}) {
        spec.nu = nu;
        const MonteCarloMoment mc = moment_mc_oracle(
            spec, eye, n_mc, {903, static_cast<std::uint64_t>(job * 8 + nu + 4)});
        const double bound = moment_even_bound(nu, spec.U, p);
        worst_gap[job] = std::max(
            worst_gap[job], mc.estimate - bound - 4.0 * mc.std_error);
      }
    } catch (const Error&) {
      failed = true;
    }
  });

  const double max_z = *std::max_element(worst_z.begin(), worst_z.end());
  const double max_gap = *std::max_element(worst_gap.begin(), worst_gap.end());
  const bool ok = !failed && max_z <= 4.0 && max_gap <= 0.0;
  std::ostringstream os;
  os << "80 directions, max |closed-mc|/se " << max_z
     << ", max even-bound violation " << max_gap << ", "
     << seconds_since(start) << " s";
  rep.report(3, "moment formulas", ok, os.str());
}

// 4. Expected Hessian: Monte Carlo law, exact kernel, convexity lower bound.
void criterion_4(Reporter& rep) {
  const auto start = Clock::now();
  Eigen::VectorXd d(5);
  d << 1.0, 2.0, 0.5, 1.5, 3.0;
  const ShapeMatrix theta0 = ShapeMatrix::diagonal(d);
  const ShapeMatrix omega0 = make_shape(theta0.inverse());
  const SeededStream s{904, 0};
  const PerturbationDirection u =
      make_direction(testsup::random_symmetric(5, s, 0));

  const long n = 1000000;
  const SampleSet set = sample_acg(theta0, n, {905, 0});
  double mean = 0.0, m2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double v = hessian_form(omega0, u, set.rows.row(i).transpose());
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double se = std::sqrt(m2 / (n - 1.0) / n);
  const double closed = expected_hessian_at_truth(theta0, u);
  const double z = std::abs(mean - closed) / se;

  // Kernel direction: identically zero, both pointwise and in expectation.
  const PerturbationDirection kernel = make_direction(omega0.entries());
  double max_kernel = std::abs(expected_hessian_at_truth(theta0, kernel));
  for (int i = 0; i < 100; ++i) {
    max_kernel = std::max(
        max_kernel, std::abs(hessian_form(omega0, kernel,
                                          testsup::random_unit(5, s, 10 + i))));
  }

  bool lower_bound_ok = true;
  for (int rep_i = 0; rep_i < 1000; ++rep_i) {
    const int p = 2 + rep_i % 5;
    const ShapeMatrix t0 = make_shape(testsup::random_spd(p, s, 2000 + 2 * rep_i));
    const SphericityStats st = sphericity(t0);
    const Eigen::MatrixXd dir =
        testsup::random_traceless_unit(p, s, 2000 + 2 * rep_i + 1);
    const Eigen::MatrixXd primed = t0.sqrt_factor() * dir * t0.sqrt_factor();
    const double lhs = expected_hessian_at_truth(t0, make_direction(dir, true));
    const double rhs = p / (p + 2.0) * st.cos_phi0 * st.cos_phi0 *
                       primed.squaredNorm();
    if (lhs < rhs - 1e-10) lower_bound_ok = false;
  }

  const bool ok = z <= 4.0 && max_kernel <= 1e-12 * 5 && lower_bound_ok;
  std::ostringstream os;
  os << "|mc-closed|/se = " << z << ", max kernel value " << max_kernel
     << ", lower bound " << (lower_bound_ok ? "holds" : "violated") << ", "
     << seconds_since(start) << " s";
  rep.report(4, "expected-Hessian law", ok, os.str());
}

// 5. Figure 1 replication: bound dominance and the sqrt(n) rate at p = 50.
void criterion_5(Reporter& rep) {
  const auto start = Clock::now();
  const CampaignResult result = run_campaign(fig1_config(200, 1));
  write_fig_csv("acceptance_fig1.csv", result);
  write_summary_csv("acceptance_fig1_summary.csv", result);

  bool dominance = true, decreasing = true, have_bounds = true;
  std::vector<double> ns, medians;
  double prev95 = std::numeric_limits<double>::infinity();
  double prev50 = std::numeric_limits<double>::infinity();
  for (const SummaryRow& row : result.summary) {
    ns.push_back(static_cast<double>(row.n));
    medians.push_back(row.median_error);
    if (!row.bound[0] || !row.bound[1]) {
      have_bounds = false;
      continue;
    }
    if (*row.bound[0] < row.quantiles[0]) dominance = false;
    if (*row.bound[1] < row.quantiles[1]) dominance = false;
    if (!(*row.bound[0] < prev95) || !(*row.bound[1] < prev50)) {
      decreasing = false;
    }
    prev95 = *row.bound[0];
    prev50 = *row.bound[1];
  }
  const double slope = loglog_slope(ns, medians);
  const double elapsed = seconds_since(start);
  const bool ok = have_bounds && dominance && decreasing &&
                  slope >= -0.6 && slope <= -0.4 && elapsed <= 900.0;
  std::ostringstream os;
  os << result.summary.size() << " grid points from n=" << result.summary.front().n
     << ", dominance " << (dominance ? "holds" : "violated") << ", slope "
     << slope << ", bounds " << (decreasing ? "decreasing" : "non-monotone")
     << ", " << elapsed << " s";
  rep.report(5, "figure-1 replication", ok, os.str());
}

// 6. Figure 2 replication: linear-in-p scaling at n = 2500.
void criterion_6(Reporter& rep) {
  const auto start = Clock::now();
  const CampaignResult result = run_campaign(fig2_config(200, 2));
  write_fig_csv("acceptance_fig2.csv", result);
  write_summary_csv("acceptance_fig2_summary.csv", result);

  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  bool dominance = true;
  int feasible_count = 0;
  for (const SummaryRow& row : result.summary) {
    const double rate = row.p / std::sqrt(2500.0);
    const double ratio = row.median_error / rate;
    min_ratio = std::min(min_ratio, ratio);
    max_ratio = std::max(max_ratio, ratio);
    if (row.bound[0]) {
      ++feasible_count;
      if (*row.bound[0] < row.quantiles[0]) dominance = false;
    }
  }
  const double band = max_ratio / min_ratio;
  const double elapsed = seconds_since(start);
  const bool ok = band <= 2.0 && dominance && feasible_count > 0;
  std::ostringstream os;
  os << "median/(p/sqrt(n)) in [" << min_ratio << ", " << max_ratio
     << "], band factor " << band << ", " << feasible_count
     << " feasible 0.95 bounds (dominance "
     << (dominance ? "holds" : "violated") << "), " << elapsed << " s";
  rep.report(6, "figure-2 replication", ok, os.str());
}

// 7. Optimizer against the exhaustive fine grid, and the two bound paths.
void criterion_7(Reporter& rep) {
  const auto start = Clock::now();
  const std::vector<std::pair<int, long>> pairs{
      {5, 2500},  {10, 2000},  {10, 5000},  {10, 20000}, {20, 3000},
      {20, 10000}, {25, 8000}, {50, 5000},  {50, 10000}, {50, 30000}};
  double worst_rel = 0.0;
  bool all_feasible = true;
  std::vector<double> rels(pairs.size(), 0.0);
  std::vector<bool> feas(pairs.size(), true);
  run_parallel(static_cast<int>(pairs.size()), [&](int j) {
    BoundQuery query;
    query.p = pairs[j].first;
    query.n = pairs[j].second;
    query.confidence = 0.95;
    const BoundResult result = optimize_bound(query);
    const auto oracle = testsup::fine_grid_bound_oracle(query);
    if (!result.feasible || !oracle) {
      feas[j] = false;
      return;
    }
    rels[j] = std::abs(result.radius - *oracle) / *oracle;
  });
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    all_feasible = all_feasible && feas[j];
    worst_rel = std::max(worst_rel, rels[j]);
  }

  double worst_prob_gap = 0.0;
  double worst_radius_rel = 0.0;
  for (int p : {10, 25, 50}) {
    for (long n : {3000L, 5000L, 10000L, 30000L}) {
      for (double theta : {1.0, 2.0, 4.0}) {
        const double t = theta / std::sqrt(static_cast<double>(n));
        const ClosedFormBound thm = closed_form_bound(n, p, 1.0, 1.0, theta);
        worst_radius_rel = std::max(
            worst_radius_rel,
            std::abs(thm.radius - bound_radius(t, 0.6, p, 1.0, 1.0)) /
                thm.radius);
        worst_prob_gap = std::max(
            worst_prob_gap,
            std::abs(thm.probability - success_probability(n, p, t, 0.6, 1.0)));
      }
    }
  }

  const bool ok = all_feasible && worst_rel <= 0.005 &&
                  worst_radius_rel <= 1e-12 && worst_prob_gap <= 0.01;
  std::ostringstream os;
  os << "10 pairs, worst optimizer-vs-oracle " << worst_rel * 100.0
     << "%, closed-form-vs-general prob gap " << worst_prob_gap << ", "
     << seconds_since(start) << " s";
  rep.report(7, "optimizer correctness", ok, os.str());
}

// 8. Distribution-freeness of Tyler; fragility of the raw-data SCM baseline.
void criterion_8(Reporter& rep) {
  const auto start = Clock::now();
  ExperimentConfig acg_config;
  acg_config.model = SampleModel::acg;
  acg_config.shape = "identity";
  acg_config.p = 10;
  acg_config.n_values = {500};
  acg_config.trials = 200;
  acg_config.master_seed = 101;
  const CampaignResult acg = run_campaign(acg_config);

  ExperimentConfig cg_config = acg_config;
  cg_config.model = SampleModel::compound_gaussian;
  cg_config.texture = "inv-chisq:1";
  cg_config.master_seed = 202;  // independent draws
  const CampaignResult cg = run_campaign(cg_config);

  const double m_acg = acg.summary[0].median_error;
  const double m_cg = cg.summary[0].median_error;
  const double rel = std::abs(m_cg / m_acg - 1.0);
  const double scm_cg = cg.summary[0].scm_median_error;
  const double scm_margin = scm_cg / m_cg;

  const bool ok = rel <= 0.05 && scm_cg > m_cg;
  std::ostringstream os;
  os << "acg median " << m_acg << ", compound median " << m_cg
     << " (rel gap " << rel * 100.0 << "%), scm median " << scm_cg << " = "
     << scm_margin << "x Tyler, " << seconds_since(start) << " s";
  rep.report(8, "distribution-freeness", ok, os.str());
}

// 9. Empirical gradient deviations never exceed the tail bound.
void criterion_9(Reporter& rep) {
  const auto start = Clock::now();
  const int p = 5;
  const long n = 200;
  const int replicas = 10000;
  const std::vector<double> ts{0.1, 0.2, 0.4};
  const PerturbationDirection u =
      make_direction(testsup::random_traceless_unit(p, {906, 0}, 0), true);
  const ShapeMatrix eye = ShapeMatrix::identity(p);

  std::vector<std::atomic<int>> exceed(ts.size());
  for (auto& e : exceed) e = 0;
  run_parallel(replicas, [&](int r) {
    const SampleSet set =
        sample_acg(eye, n, {907, static_cast<std::uint64_t>(r)});
    const double avg =
        std::abs(sample_avg(LikelihoodForm::grad, eye, &u, set));
    for (std::size_t k = 0; k < ts.size(); ++k) {
      if (avg >= ts[k] * p) exceed[k].fetch_add(1);
    }
  });

  bool ok = true;
  std::ostringstream os;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double freq = exceed[k] / static_cast<double>(replicas);
    const double bound = gradient_tail(n, ts[k]);
    if (freq > bound) ok = false;
    os << "t=" << ts[k] << ": " << freq << " <= " << bound << "; ";
  }
  os << seconds_since(start) << " s";
  rep.report(9, "tail-bound sanity", ok, os.str());
}

}  // namespace

int main() {
  const auto start = Clock::now();
  Reporter rep;
  criterion_1(rep);
  criterion_2(rep);
  criterion_3(rep);
  criterion_4(rep);
  criterion_5(rep);
  criterion_6(rep);
  criterion_7(rep);
  criterion_8(rep);
  criterion_9(rep);
  std::printf("%s: 9 criteria in %.1f s\n", rep.all_ok ? "ALL PASS" : "FAILURES",
              seconds_since(start));
  return rep.all_ok ? 0 : 1;
}
