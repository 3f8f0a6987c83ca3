#include "tylercov/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "tylercov/csv.hpp"

namespace tylercov {

std::vector<long> GridSpec::values() const {
  std::vector<long> out;
  if (step < 1) throw InvalidInput("grid step must be positive");
  for (long v = start; v <= stop; v += step) out.push_back(v);
  if (out.empty()) throw InvalidInput("grid is empty");
  return out;
}

GridSpec GridSpec::parse(const std::string& text) {
  GridSpec spec;
  std::istringstream in(text);
  char c1 = 0, c2 = 0;
  if (!(in >> spec.start >> c1 >> spec.stop >> c2 >> spec.step) || c1 != ':' ||
      c2 != ':' || !(in >> std::ws).eof()) {
    throw InvalidInput("grid must be start:stop:step, got '" + text + "'");
  }
  return spec;
}

ShapeMatrix parse_shape_spec(const std::string& spec, int p_hint) {
  if (spec == "identity") {
    if (p_hint < 1) {
      throw InvalidInput("identity shape needs an explicit dimension");
    }
    return ShapeMatrix::identity(p_hint);
  }
  if (spec.rfind("diag:", 0) == 0) {
    std::vector<double> diag;
    std::istringstream in(spec.substr(5));
    std::string token;
    while (std::getline(in, token, ',')) {
      try {
        diag.push_back(std::stod(token));
      } catch (const std::exception&) {
        throw InvalidInput("bad diagonal entry '" + token + "'");
      }
    }
    if (diag.empty()) throw InvalidInput("diag shape needs entries");
    if (p_hint > 0 && static_cast<int>(diag.size()) != p_hint) {
      throw InvalidInput("diag shape dimension disagrees with p");
    }
    Eigen::VectorXd d =
        Eigen::Map<Eigen::VectorXd>(diag.data(), diag.size());
    return ShapeMatrix::diagonal(d);
  }
  if (spec.rfind("file:", 0) == 0) {
    const Eigen::MatrixXd m = csv::read_matrix(spec.substr(5));
    if (p_hint > 0 && m.rows() != p_hint) {
      throw InvalidInput("shape file dimension disagrees with p");
    }
    return make_shape(m);
  }
  throw InvalidInput("shape must be identity, diag:... or file:..., got '" +
                     spec + "'");
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (!(q > 0.0) || q > 1.0) throw InvalidInput("quantile level out of (0,1]");
  std::sort(values.begin(), values.end());
  const long n = static_cast<long>(values.size());
  long rank = static_cast<long>(std::ceil(q * static_cast<double>(n)));
  rank = std::max<long>(1, std::min(rank, n));
  return values[rank - 1];
}

namespace {

int worker_count(int trials) {
  if (const char* env = std::getenv("TYLERCOV_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed >= 1) return std::min(parsed, trials);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return std::max(1, std::min<int>(hw == 0 ? 1 : static_cast<int>(hw), trials));
}

struct GridPoint {
  long grid_value;
  long n;
  int p;
};

TrialRecord run_trial(const ExperimentConfig& config, const GridPoint& point,
                      const ShapeMatrix& theta0, const TextureSampler* texture,
                      double trace_target, int trial) {
  TrialRecord rec;
  rec.grid_value = point.grid_value;
  rec.n = point.n;
  rec.p = point.p;
  rec.trial = trial;
  rec.stream_index = static_cast<std::uint64_t>(trial);
  rec.error = std::numeric_limits<double>::quiet_NaN();
  rec.scm_error = std::numeric_limits<double>::quiet_NaN();

  const SeededStream stream{config.master_seed, rec.stream_index};
  SolverConfig solver = config.solver;
  solver.trace_target = trace_target;
  solver.keep_iterates = false;

  try {
    RawDraw draw;
    if (texture != nullptr) {
      draw = sample_compound_gaussian_raw(theta0, *texture, point.n, stream);
    } else {
      draw = sample_acg_raw(theta0, point.n, stream);
    }

    if (config.record_scm) {
      try {
        const ShapeMatrix scm = scm_estimate(draw.raw, trace_target);
        rec.scm_error = frobenius_distance_of_inverses(scm, theta0);
      } catch (const Error&) {
        // leave NaN
      }
    }

    try {
      const EstimatorResult est = tyler_estimate(draw.normalized, solver);
      rec.error = frobenius_distance_of_inverses(est.T, theta0);
      rec.iterations = est.iterations;
      rec.converged = true;
    } catch (const NotConverged& e) {
      rec.iterations = e.iterations;
      rec.converged = false;
      try {
        const ShapeMatrix last = make_shape(
            e.last_iterate * (static_cast<double>(point.p) / trace_target));
        rec.error = frobenius_distance_of_inverses(last, theta0);
      } catch (const Error&) {
        // degenerate iterate, error stays NaN
      }
    }
  } catch (const Error&) {
    rec.converged = false;
  }
  return rec;
}

}  // namespace

CampaignResult run_campaign(const ExperimentConfig& config) {
  if (config.trials < 1) throw InvalidInput("trials must be at least 1");
  const bool n_axis = !config.n_values.empty();
  const bool p_axis = !config.p_values.empty();
  if (n_axis == p_axis) {
    throw InvalidInput("exactly one of the n-grid and p-grid must be set");
  }
  if (p_axis && config.shape != "identity") {
    throw InvalidInput("a p-grid requires the identity shape");
  }

  std::vector<GridPoint> grid;
  if (n_axis) {
    int p = config.p;
    if (p < 1 && config.shape != "identity") {
      p = parse_shape_spec(config.shape, 0).dim();  // dimension from the shape
    }
    if (p < 1) throw InvalidInput("n-grid campaigns need p");
    for (long n : config.n_values) grid.push_back({n, n, p});
  } else {
    if (config.n < 1) throw InvalidInput("p-grid campaigns need n");
    for (long p : config.p_values) {
      grid.push_back({p, config.n, static_cast<int>(p)});
    }
  }
  for (const GridPoint& point : grid) {
    if (point.n <= point.p) {
      std::ostringstream os;
      os << "grid point n = " << point.n << ", p = " << point.p
         << " violates n > p";
      throw InvalidInput(os.str());
    }
  }
  for (double c : config.confidences) {
    if (!(c > 0.0) || !(c < 1.0)) {
      throw InvalidInput("confidence levels must lie in (0, 1)");
    }
  }

  if (config.model == SampleModel::external) {
    throw InvalidInput("simulation model must be acg or compound-gaussian");
  }
  std::optional<TextureSampler> texture;
  if (config.model == SampleModel::compound_gaussian) {
    texture = parse_texture(config.texture);
  }

  CampaignResult result;
  result.config = config;

  const int workers = worker_count(config.trials);
  for (const GridPoint& point : grid) {
    const ShapeMatrix theta0 = parse_shape_spec(config.shape, point.p);
    const SphericityStats stats = sphericity(theta0);
    result.shape_stats = stats;
    const double trace_target =
        config.solver.trace_target.value_or(theta0.trace_inverse());

    std::vector<TrialRecord> records(config.trials);
    std::atomic<int> next{0};
    auto work = [&]() {
      for (int t = next.fetch_add(1); t < config.trials;
           t = next.fetch_add(1)) {
        records[t] = run_trial(config, point, theta0,
                               texture ? &*texture : nullptr, trace_target, t);
      }
    };
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int w = 0; w < workers; ++w) pool.emplace_back(work);
      for (std::thread& th : pool) th.join();
    }

    SummaryRow row;
    row.grid_value = point.grid_value;
    row.n = point.n;
    row.p = point.p;
    row.trials = config.trials;
    std::vector<double> errors;
    std::vector<double> scm_errors;
    for (const TrialRecord& rec : records) {
      if (rec.converged && std::isfinite(rec.error)) {
        errors.push_back(rec.error);
      }
      if (std::isfinite(rec.scm_error)) scm_errors.push_back(rec.scm_error);
    }
    row.converged_count = static_cast<int>(errors.size());
    row.median_error = nearest_rank_quantile(errors, 0.5);
    row.scm_median_error = nearest_rank_quantile(scm_errors, 0.5);
    for (double c : config.confidences) {
      row.quantiles.push_back(nearest_rank_quantile(errors, c));
      BoundQuery query;
      query.n = point.n;
      query.p = point.p;
      query.cos_phi0 = stats.cos_phi0;
      query.lambda_min = stats.lambda_min;
      query.confidence = c;
      const BoundResult bound = optimize_bound(query);
      if (bound.feasible) {
        row.bound.push_back(bound.radius);
      } else {
        row.bound.push_back(std::nullopt);
      }
    }
    result.summary.push_back(std::move(row));
    result.trials.insert(result.trials.end(), records.begin(), records.end());
  }
  return result;
}

namespace {

void write_header(std::ofstream& out, const CampaignResult& result) {
  const ExperimentConfig& c = result.config;
  out << "# model=" << to_string(c.model);
  if (c.model == SampleModel::compound_gaussian) {
    out << " texture=" << c.texture;
  }
  out << " shape=" << c.shape << "\n";
  out << "# trials=" << c.trials << " master_seed=" << c.master_seed
      << " tol=" << csv::format(c.solver.tol)
      << " max_iter=" << c.solver.max_iter << "\n";
  out << "# cos_phi0=" << csv::format(result.shape_stats.cos_phi0)
      << " lambda_min=" << csv::format(result.shape_stats.lambda_min) << "\n";
  out << "# quantile rule: nearest rank, element ceil(q*N) of the sorted "
         "converged errors\n";
  out << "# error metric: Frobenius norm of (T^-1 - Theta0^-1)\n";
  for (const std::string& note : c.notes) out << "# " << note << "\n";
}

std::string trim_level(double c) { return csv::format_short(c); }

void write_optional(std::ofstream& out, double v) {
  if (std::isfinite(v)) out << csv::format(v);
}

}  // namespace

void write_trials_csv(const std::string& path, const CampaignResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_header(out, result);
  out << "grid,n,p,trial,stream_index,error,scm_error,iterations,converged\n";
  for (const TrialRecord& rec : result.trials) {
    out << rec.grid_value << ',' << rec.n << ',' << rec.p << ',' << rec.trial
        << ',' << rec.stream_index << ',';
    write_optional(out, rec.error);
    out << ',';
    write_optional(out, rec.scm_error);
    out << ',' << rec.iterations << ',' << (rec.converged ? 1 : 0) << '\n';
  }
  if (!out.good()) throw Error("write failed on " + path);
}

void write_summary_csv(const std::string& path, const CampaignResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_header(out, result);
  out << "grid,n,p,trials,converged,median_error,scm_median_error";
  for (double c : result.config.confidences) out << ",q" << trim_level(c);
  for (double c : result.config.confidences) out << ",bound" << trim_level(c);
  out << '\n';
  for (const SummaryRow& row : result.summary) {
    out << row.grid_value << ',' << row.n << ',' << row.p << ',' << row.trials
        << ',' << row.converged_count << ',';
    write_optional(out, row.median_error);
    out << ',';
    write_optional(out, row.scm_median_error);
    for (double q : row.quantiles) {
      out << ',';
      write_optional(out, q);
    }
    for (const std::optional<double>& b : row.bound) {
      out << ',';
      if (b) out << csv::format(*b);
    }
    out << '\n';
  }
  if (!out.good()) throw Error("write failed on " + path);
}

void write_fig_csv(const std::string& path, const CampaignResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_header(out, result);
  out << "x,median";
  for (double c : result.config.confidences) out << ",q" << trim_level(c);
  for (double c : result.config.confidences) out << ",bound" << trim_level(c);
  out << '\n';
  for (const SummaryRow& row : result.summary) {
    out << row.grid_value << ',';
    write_optional(out, row.median_error);
    for (double q : row.quantiles) {
      out << ',';
      write_optional(out, q);
    }
    for (const std::optional<double>& b : row.bound) {
      out << ',';
      if (b) out << csv::format(*b);
    }
    out << '\n';
  }
  if (!out.good()) throw Error("write failed on " + path);
}

std::optional<long> scan_first_feasible_n(int p, double cos_phi0,
                                          double lambda_min, double confidence,
                                          long n_lo, long n_hi, long step) {
  if (step < 1) throw InvalidInput("scan step must be positive");
  for (long n = n_lo; n <= n_hi; n += step) {
    if (n <= p) continue;
    BoundQuery query;
    query.n = n;
    query.p = p;
    query.cos_phi0 = cos_phi0;
    query.lambda_min = lambda_min;
    query.confidence = confidence;
    if (optimize_bound(query).feasible) return n;
  }
  return std::nullopt;
}

ExperimentConfig fig1_config(int trials, std::uint64_t seed) {
  ExperimentConfig config;
  config.model = SampleModel::acg;
  config.shape = "identity";
  config.p = 50;
  config.trials = trials;
  config.master_seed = seed;
  config.confidences = {0.95, 0.5};
  config.solver.tol = 1e-10;
  config.solver.max_iter = 500;

  const long scan_step = 500;
  const std::optional<long> first =
      scan_first_feasible_n(config.p, 1.0, 1.0, 0.95, 1000, 30000, scan_step);
  if (!first) throw NumericalError("no feasible n found for the 0.95 bound");
  const long n_lo = *first;
  const long n_hi = 30000;
  const int points = 6;
  const double ratio = std::pow(static_cast<double>(n_hi) / n_lo,
                                1.0 / (points - 1));
  for (int i = 0; i < points; ++i) {
    const long n =
        std::lround(static_cast<double>(n_lo) * std::pow(ratio, i));
    if (config.n_values.empty() || n > config.n_values.back()) {
      config.n_values.push_back(n);
    }
  }
  std::ostringstream note;
  note << "fig1 preset: p=50, identity shape, geometric n-grid from the "
          "first 0.95-feasible n="
       << n_lo << " (scan step " << scan_step << ") to " << n_hi;
  config.notes.push_back(note.str());
  return config;
}

ExperimentConfig fig2_config(int trials, std::uint64_t seed) {
  ExperimentConfig config;
  config.model = SampleModel::acg;
  config.shape = "identity";
  config.n = 2500;
  config.trials = trials;
  config.master_seed = seed;
  config.confidences = {0.95, 0.5};
  config.solver.tol = 1e-10;
  config.solver.max_iter = 500;
  for (long p = 5; p <= 50; p += 5) config.p_values.push_back(p);
  config.notes.push_back(
      "fig2 preset: n=2500, identity shape, p grid 5,10,...,50; bounds "
      "blank where infeasible");
  return config;
}

}  // namespace tylercov
