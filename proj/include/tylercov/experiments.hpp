#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tylercov/bounds.hpp"
#include "tylercov/estimator.hpp"
#include "tylercov/sampling.hpp"
#include "tylercov/shape_matrix.hpp"

namespace tylercov {

// Inclusive arithmetic grid parsed from "start:stop:step".
struct GridSpec {
  long start = 0;
  long stop = 0;
  long step = 1;

  std::vector<long> values() const;
  static GridSpec parse(const std::string& text);
};

// Resolves `identity`, `diag:v1,v2,...` or `file:<path>` into a ShapeMatrix.
// p_hint supplies the dimension for `identity` and cross-checks the others.
ShapeMatrix parse_shape_spec(const std::string& spec, int p_hint);

struct ExperimentConfig {
  SampleModel model = SampleModel::acg;
  std::string shape = "identity";
  std::string texture = "inv-chisq:1";  // compound-Gaussian texture
  int p = 0;                            // dimension when n varies
  long n = 0;                           // sample count when p varies
  std::vector<long> n_values;           // exactly one of n_values/p_values
  std::vector<long> p_values;           //   is nonempty
  int trials = 1;
  std::uint64_t master_seed = 0;
  std::vector<double> confidences = {0.95, 0.5};
  SolverConfig solver;
  bool record_scm = true;  // SCM baseline on the raw draws
  std::vector<std::string> notes;  // extra header lines for the outputs
};

struct TrialRecord {
  long grid_value = 0;
  long n = 0;
  int p = 0;
  int trial = 0;
  std::uint64_t stream_index = 0;
  double error = 0.0;      // ||T^-1 - Theta0^-1||_F (last iterate if failed)
  double scm_error = 0.0;  // NaN when unavailable
  int iterations = 0;
  bool converged = false;
};

struct SummaryRow {
  long grid_value = 0;
  long n = 0;
  int p = 0;
  int trials = 0;
  int converged_count = 0;
  double median_error = 0.0;
  double scm_median_error = 0.0;             // NaN when not recorded
  std::vector<double> quantiles;             // one per confidence level
  std::vector<std::optional<double>> bound;  // one per level; nullopt when
                                             // the bound is infeasible
};

struct CampaignResult {
  ExperimentConfig config;
  SphericityStats shape_stats{};
  std::vector<TrialRecord> trials;
  std::vector<SummaryRow> summary;
};

// Runs every (grid value, trial) cell on a deterministic per-trial stream
// (stream_index = trial id) and aggregates in a fixed order, so the output
// is byte-identical no matter how many worker threads run. Worker count
// follows hardware concurrency; the TYLERCOV_THREADS environment variable
// overrides it.
CampaignResult run_campaign(const ExperimentConfig& config);

// Nearest-rank quantile: the element at 1-based index ceil(q * N) of the
// sorted values. No interpolation, so summaries re-derive exactly from the
// trials file.
double nearest_rank_quantile(std::vector<double> values, double q);

void write_trials_csv(const std::string& path, const CampaignResult& result);
void write_summary_csv(const std::string& path, const CampaignResult& result);

// Plot-ready figure CSV: x, median, one empirical quantile column per
// confidence level, then one bound column per confidence level.
void write_fig_csv(const std::string& path, const CampaignResult& result);

// Smallest n in [n_lo, n_hi] (multiples of step) whose optimized bound is
// feasible at the given confidence; nullopt when none is.
std::optional<long> scan_first_feasible_n(int p, double cos_phi0,
                                          double lambda_min, double confidence,
                                          long n_lo, long n_hi, long step);

// Presets replicating the two report figures. fig1: p = 50, identity shape,
// geometric n-grid starting at the first n where the 0.95 bound is feasible.
// fig2: n = 2500, p = 5,10,...,50. Both default to 200 trials per point and
// bounds at confidence 0.95 and 0.5.
ExperimentConfig fig1_config(int trials = 200, std::uint64_t seed = 1);

ExperimentConfig fig2_config(int trials = 200, std::uint64_t seed = 2);

}  // namespace tylercov
