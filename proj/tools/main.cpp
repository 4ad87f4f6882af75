// gvcplm command line: fit, select, test, bandwidth and simulate subcommands
// over csv data or the bundled Monte Carlo scenarios. Options mirror the
// config-file keys; explicit flags override file values.

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "gvcplm/runconfig.hpp"

namespace {

struct CliCapture {
  std::vector<std::pair<std::string, std::string>> entries;
};

// Registers a string-typed option whose value is replayed through the same
// key=value channel the config file uses.
void add_key(CLI::App* cmd, CliCapture& cap, const std::string& flag,
             const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
         flag,
         [&cap, key](const std::string& v) { cap.entries.emplace_back(key, v); },
         help)
      ->expected(1);
}

void add_flag_key(CLI::App* cmd, CliCapture& cap, const std::string& flag,
                  const std::string& key, const std::string& help) {
  cmd->add_flag_callback(
      flag, [&cap, key]() { cap.entries.emplace_back(key, "true"); }, help);
}

void add_common(CLI::App* cmd, CliCapture& cap) {
  add_key(cmd, cap, "--seed", "seed", "RNG seed (required when stochastic)");
  add_key(cmd, cap, "--threads", "threads",
          "worker threads (0 = all, 1 = serial reference path)");
  add_key(cmd, cap, "--out-dir", "out_dir", "output directory");
}

void add_data_opts(CLI::App* cmd, CliCapture& cap) {
  add_key(cmd, cap, "--data", "data", "csv data file (header row required)");
  add_key(cmd, cap, "--roles", "roles",
          "role map file: one `column = u|x|z|y` line per csv column");
  add_key(cmd, cap, "--family", "family",
          "gaussian | poisson | bernoulli");
  add_key(cmd, cap, "--kernel", "kernel",
          "epanechnikov | uniform | triangular | biweight");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "gvcplm: local quasi-likelihood fitting, penalized variable selection "
      "and likelihood-ratio inference for generalized varying-coefficient "
      "partially linear models"};
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "key=value config file; explicit flags override it");

  CliCapture cap;

  CLI::App* fit = app.add_subcommand("fit", "unpenalized semiparametric fit");
  add_data_opts(fit, cap);
  add_key(fit, cap, "--bandwidth,-H", "bandwidth", "kernel bandwidth h");
  add_flag_key(fit, cap, "--undersmooth", "undersmooth",
               "apply the n^(-2/15) undersmoothing rescale to h");
  add_common(fit, cap);

  CLI::App* select =
      app.add_subcommand("select", "penalized variable selection for beta");
  add_data_opts(select, cap);
  add_key(select, cap, "--bandwidth,-H", "bandwidth", "kernel bandwidth h");
  add_flag_key(select, cap, "--undersmooth", "undersmooth",
               "apply the n^(-2/15) undersmoothing rescale to h");
  add_key(select, cap, "--penalty", "penalty", "scad | l1 | lq | l0");
  add_key(select, cap, "--scad-a", "scad_a", "SCAD shape parameter (a > 2)");
  add_key(select, cap, "--lq-q", "lq_q", "Lq exponent in (0,1)");
  add_key(select, cap, "--lambda-policy", "lambda_policy", "fixed | gcv");
  add_key(select, cap, "--lambda", "lambda", "lambda for the fixed policy");
  add_flag_key(select, cap, "--lambda-raw", "lambda_raw",
               "apply the fixed lambda without SE scaling");
  add_key(select, cap, "--no-penalize", "no_penalize",
          "1-based z indices kept unpenalized (comma list)");
  add_key(select, cap, "--criterion", "criterion",
          "aic | bic | ric (penalty = l0)");
  add_common(select, cap);

  CLI::App* test =
      app.add_subcommand("test", "generalized likelihood ratio test on alpha");
  add_data_opts(test, cap);
  add_key(test, cap, "--bandwidth,-H", "bandwidth", "kernel bandwidth h");
  add_flag_key(test, cap, "--undersmooth", "undersmooth",
               "apply the n^(-2/15) undersmoothing rescale to h");
  add_key(test, cap, "--null-x", "null_x",
          "1-based x indices set to zero under H0 (comma list)");
  add_key(test, cap, "--bootstrap", "bootstrap",
          "bootstrap replicates B (0 = asymptotic p only)");
  add_common(test, cap);

  CLI::App* bandwidth =
      app.add_subcommand("bandwidth", "multifold cross-validated bandwidth");
  add_data_opts(bandwidth, cap);
  add_key(bandwidth, cap, "--h-grid", "h_grid",
          "candidate bandwidths (comma list)");
  add_key(bandwidth, cap, "--folds", "folds", "number of CV folds (default 10)");
  add_common(bandwidth, cap);

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo studies on paper scenarios");
  add_key(simulate, cap, "--scenario", "scenario", "example41 | example42");
  add_key(simulate, cap, "--study", "study", "table1 | table2 | power");
  add_key(simulate, cap, "--methods", "methods",
          "scad,l1,aic,bic,ric,oracle (comma list)");
  add_key(simulate, cap, "--reps", "reps", "Monte Carlo replications");
  add_key(simulate, cap, "--bootstrap", "bootstrap",
          "bootstrap size for power critical values");
  add_key(simulate, cap, "--delta-grid", "delta_grid",
          "alternative scales for the power study (comma list)");
  add_key(simulate, cap, "--levels", "levels",
          "significance levels (comma list)");
  add_key(simulate, cap, "--d-values", "d_values",
          "parametric dimensions for table2 (comma list)");
  add_flag_key(simulate, cap, "--full-scale", "full_scale",
               "paper-scale sample sizes instead of desk scale");
  add_key(simulate, cap, "--n", "n", "override the scenario sample size");
  add_key(simulate, cap, "--h", "scenario_h", "override the scenario bandwidth");
  add_common(simulate, cap);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gvcplm::kExitConfigError;
  }

  gvcplm::RunConfig config;
  std::vector<std::string> errors;

  if (!config_path.empty()) {
    // Parse errors are fatal; validation waits until flags are applied.
    errors = gvcplm::load_config_file(config_path, config);
    if (!errors.empty()) {
      std::fprintf(stderr, "config errors:\n");
      for (const auto& e : errors) std::fprintf(stderr, "  %s\n", e.c_str());
      return gvcplm::kExitConfigError;
    }
  }

  for (const auto& sub : app.get_subcommands())
    config.command = sub->get_name();

  // Flags win over config file values.
  for (const auto& [key, value] : cap.entries) {
    const std::string err = gvcplm::apply_config_entry(config, key, value);
    if (!err.empty()) errors.push_back(err);
  }

  const auto validation = gvcplm::validate_run_config(config);
  errors.insert(errors.end(), validation.begin(), validation.end());
  if (!errors.empty()) {
    std::fprintf(stderr, "config errors:\n");
    for (const auto& e : errors) std::fprintf(stderr, "  %s\n", e.c_str());
    return gvcplm::kExitConfigError;
  }

  return gvcplm::run(config);
}
