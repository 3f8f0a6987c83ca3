#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tylercov/bounds.hpp"
#include "tylercov/csv.hpp"
#include "tylercov/estimator.hpp"
#include "tylercov/experiments.hpp"
#include "tylercov/sampling.hpp"

namespace {

using nlohmann::json;
using namespace tylercov;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

// Splices a flat key=value config file into the token stream as ordinary
// flags. Keys mirror the long flag names; a key already given on the command
// line is dropped, so explicit flags always win. Repeat a key (for example
// confidence) to pass several values.
std::vector<std::string> expand_config_tokens(int argc, char** argv) {
  std::vector<std::string> tokens(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "--config") {
      if (i + 1 >= tokens.size()) {
        throw InvalidInput("--config needs a file path");
      }
      config_path = tokens[i + 1];
      tokens.erase(tokens.begin() + i, tokens.begin() + i + 2);
      break;
    }
    if (tokens[i].rfind("--config=", 0) == 0) {
      config_path = tokens[i].substr(9);
      tokens.erase(tokens.begin() + i);
      break;
    }
  }
  if (config_path.empty()) return tokens;

  std::ifstream in(config_path);
  if (!in) throw InvalidInput("cannot open config file " + config_path);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError(config_path + ": line " + std::to_string(line_no) +
                       " is not key=value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(config_path + ": line " + std::to_string(line_no) +
                       " has an empty key");
    }
    const std::string flag = "--" + key;
    bool overridden = false;
    for (const std::string& t : tokens) {
      if (t == flag || t.rfind(flag + "=", 0) == 0) {
        overridden = true;
        break;
      }
    }
    if (!overridden) {
      tokens.push_back(flag);
      tokens.push_back(value);
    }
  }
  return tokens;
}

struct EstimateArgs {
  std::string input;
  std::string output = "estimate";
  double trace_target = 0.0;  // 0 = default (dimension p)
  double tol = 1e-12;
  int max_iter = 1000;
};

int run_estimate(const EstimateArgs& args) {
  const Eigen::MatrixXd raw = csv::read_matrix(args.input);
  const SampleSet samples = normalize_rows(raw);

  SolverConfig solver;
  solver.tol = args.tol;
  solver.max_iter = args.max_iter;
  if (args.trace_target != 0.0) solver.trace_target = args.trace_target;

  const EstimatorResult result = tyler_estimate(samples, solver);
  const std::string matrix_path = args.output + ".csv";
  csv::write_matrix(matrix_path, result.T.entries());

  json j;
  j["n"] = samples.n();
  j["p"] = samples.p();
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["residual"] = result.residual;
  j["trace_target"] = result.trace_target;
  j["matrix_csv"] = matrix_path;
  std::ofstream out(args.output + ".json", std::ios::binary);
  if (!out) throw Error("cannot open " + args.output + ".json for writing");
  out << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

struct BoundArgs {
  long n = 0;
  int p = 0;
  double cos_phi0 = 1.0;
  double lambda_min = 1.0;
  double confidence = 0.95;
  std::string output;
};

int run_bound(const BoundArgs& args) {
  BoundQuery query;
  query.n = args.n;
  query.p = args.p;
  query.cos_phi0 = args.cos_phi0;
  query.lambda_min = args.lambda_min;
  query.confidence = args.confidence;
  const BoundResult result = optimize_bound(query);

  json j;
  j["n"] = args.n;
  j["p"] = args.p;
  j["cos_phi0"] = args.cos_phi0;
  j["lambda_min"] = args.lambda_min;
  j["confidence"] = args.confidence;
  j["feasible"] = result.feasible;
  if (result.feasible) {
    j["radius"] = result.radius;
    j["t_star"] = result.t_star;
    j["tau_star"] = result.tau_star;
    j["theta"] = result.theta;
    j["probability"] = result.probability;
    j["validity_radius_ok"] = result.validity_radius_ok;
  } else {
    j["radius"] = nullptr;
    j["t_star"] = nullptr;
    j["tau_star"] = nullptr;
    j["theta"] = nullptr;
    j["probability"] = nullptr;
    j["validity_radius_ok"] = false;
  }
  if (!args.output.empty()) {
    std::ofstream out(args.output, std::ios::binary);
    if (!out) throw Error("cannot open " + args.output + " for writing");
    out << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

struct SimulateArgs {
  std::string model = "acg";
  std::string shape = "identity";
  std::string texture = "inv-chisq:1";
  int p = 0;
  long n = 0;
  std::string n_grid;
  std::string p_grid;
  int trials = 1;
  std::uint64_t seed = 0;
  std::vector<double> confidences;
  double tol = 1e-12;
  int max_iter = 1000;
  double trace_target = 0.0;
  std::string output = "simulate";
};

ExperimentConfig to_config(const SimulateArgs& args) {
  ExperimentConfig config;
  config.model = parse_sample_model(args.model);
  config.shape = args.shape;
  config.texture = args.texture;
  config.p = args.p;
  config.n = args.n;
  if (!args.n_grid.empty()) {
    config.n_values = GridSpec::parse(args.n_grid).values();
  } else if (args.n > 0 && args.p_grid.empty()) {
    config.n_values = {args.n};
  }
  if (!args.p_grid.empty()) {
    config.p_values = GridSpec::parse(args.p_grid).values();
  }
  config.trials = args.trials;
  config.master_seed = args.seed;
  if (!args.confidences.empty()) config.confidences = args.confidences;
  config.solver.tol = args.tol;
  config.solver.max_iter = args.max_iter;
  if (args.trace_target != 0.0) config.solver.trace_target = args.trace_target;
  return config;
}

int run_simulate(const SimulateArgs& args) {
  const CampaignResult result = run_campaign(to_config(args));
  write_trials_csv(args.output + "_trials.csv", result);
  write_summary_csv(args.output + "_summary.csv", result);
  std::cout << "wrote " << args.output << "_trials.csv and " << args.output
            << "_summary.csv\n";
  return kExitOk;
}

int run_fig(const ExperimentConfig& config, const std::string& output) {
  const CampaignResult result = run_campaign(config);
  write_fig_csv(output + ".csv", result);
  write_summary_csv(output + "_summary.csv", result);
  write_trials_csv(output + "_trials.csv", result);
  std::cout << "wrote " << output << ".csv, " << output << "_summary.csv and "
            << output << "_trials.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Tyler's shape-matrix estimator with non-asymptotic error bounds and "
      "Monte Carlo replication of the performance figures"};
  app.require_subcommand(1);

  EstimateArgs est_args;
  CLI::App* est = app.add_subcommand(
      "estimate", "Estimate the shape matrix from a CSV of samples");
  est->add_option("--config", "flat key=value file mirroring the flags");
  est->add_option("--input", est_args.input, "n x p sample CSV (no header)")
      ->required();
  est->add_option("--output", est_args.output,
                  "output prefix for <prefix>.json and <prefix>.csv");
  est->add_option("--trace-target", est_args.trace_target,
                  "target Tr(T^-1); 0 means the dimension p");
  est->add_option("--tol", est_args.tol, "relative fixed-point tolerance");
  est->add_option("--max-iter", est_args.max_iter, "iteration cap");

  BoundArgs bound_args;
  CLI::App* bound = app.add_subcommand(
      "bound", "Optimize the certified error-bound radius");
  bound->add_option("--config", "flat key=value file mirroring the flags");
  bound->add_option("--n", bound_args.n, "sample count")->required();
  bound->add_option("--p", bound_args.p, "dimension")->required();
  bound->add_option("--cos-phi0", bound_args.cos_phi0, "sphericity statistic");
  bound->add_option("--lambda-min", bound_args.lambda_min,
                    "smallest eigenvalue of the true shape");
  bound->add_option("--confidence", bound_args.confidence,
                    "target success probability in (0,1)");
  bound->add_option("--output", bound_args.output, "JSON output path");

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Monte Carlo campaign over an n-grid or a p-grid");
  sim->add_option("--config", "flat key=value file mirroring the flags");
  sim->add_option("--model", sim_args.model, "acg | compound-gaussian");
  sim->add_option("--shape", sim_args.shape,
                  "identity | diag:v1,v2,... | file:<path>");
  sim->add_option("--texture", sim_args.texture,
                  "compound-Gaussian texture: constant | inv-chisq:1 | "
                  "inv-chisq:2");
  sim->add_option("--p", sim_args.p, "dimension (n-grid campaigns)");
  sim->add_option("--n", sim_args.n, "sample count (p-grid campaigns)");
  sim->add_option("--n-grid", sim_args.n_grid, "start:stop:step");
  sim->add_option("--p-grid", sim_args.p_grid, "start:stop:step");
  sim->add_option("--trials", sim_args.trials, "trials per grid point");
  sim->add_option("--seed", sim_args.seed, "master seed");
  sim->add_option("--confidence", sim_args.confidences,
                  "confidence levels (repeatable; default 0.95 0.5)");
  sim->add_option("--tol", sim_args.tol, "solver tolerance");
  sim->add_option("--max-iter", sim_args.max_iter, "solver iteration cap");
  sim->add_option("--trace-target", sim_args.trace_target,
                  "target Tr(T^-1); 0 means Tr(Theta0^-1)");
  sim->add_option("--output", sim_args.output, "output prefix");

  int fig_trials = 200;
  std::uint64_t fig_seed = 0;
  bool fig_seed_set = false;
  std::string fig_output;
  CLI::App* fig1 = app.add_subcommand(
      "replicate-fig1", "Error vs n at p=50 with 0.95/0.5 bounds");
  fig1->add_option("--config", "flat key=value file mirroring the flags");
  fig1->add_option("--trials", fig_trials, "trials per grid point");
  fig1->add_option("--seed", fig_seed, "master seed")
      ->each([&](const std::string&) { fig_seed_set = true; });
  fig1->add_option("--output", fig_output, "output prefix (default fig1)");

  int fig2_trials = 200;
  std::uint64_t fig2_seed = 0;
  bool fig2_seed_set = false;
  std::string fig2_output;
  CLI::App* fig2 = app.add_subcommand(
      "replicate-fig2", "Error vs p at n=2500 with 0.95/0.5 bounds");
  fig2->add_option("--config", "flat key=value file mirroring the flags");
  fig2->add_option("--trials", fig2_trials, "trials per grid point");
  fig2->add_option("--seed", fig2_seed, "master seed")
      ->each([&](const std::string&) { fig2_seed_set = true; });
  fig2->add_option("--output", fig2_output, "output prefix (default fig2)");

  std::vector<std::string> tokens;
  try {
    tokens = expand_config_tokens(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  std::vector<char*> parse_argv;
  parse_argv.push_back(argv[0]);
  for (std::string& t : tokens) parse_argv.push_back(t.data());
  try {
    app.parse(static_cast<int>(parse_argv.size()), parse_argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (est->parsed()) return run_estimate(est_args);
    if (bound->parsed()) return run_bound(bound_args);
    if (sim->parsed()) return run_simulate(sim_args);
    if (fig1->parsed()) {
      ExperimentConfig config =
          fig_seed_set ? fig1_config(fig_trials, fig_seed)
                       : fig1_config(fig_trials);
      return run_fig(config, fig_output.empty() ? "fig1" : fig_output);
    }
    if (fig2->parsed()) {
      ExperimentConfig config =
          fig2_seed_set ? fig2_config(fig2_trials, fig2_seed)
                        : fig2_config(fig2_trials);
      return run_fig(config, fig2_output.empty() ? "fig2" : fig2_output);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitValidation;
}
