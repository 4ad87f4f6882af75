#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace gvcplm {

// Resolved batch-run configuration. Flags and config-file keys share these
// field names; command-line values win over file values. Every artifact a
// run writes embeds the resolved config and seed so it can be regenerated.
struct RunConfig {
  std::string command;  // fit | select | test | bandwidth | simulate

  // data commands
  std::string data_path;
  std::string roles_path;
  std::string family = "gaussian";
  std::string kernel = "epanechnikov";
  double bandwidth = 0.0;
  bool apply_undersmooth = false;  // report/use h * n^{-2/15}

  // penalty / selection
  std::string penalty = "scad";
  double scad_a = 3.7;
  double lq_q = 0.5;
  std::string lambda_policy = "gcv";  // fixed | gcv
  double lambda_value = 0.0;
  bool lambda_raw = false;  // fixed lambda without SE scaling
  std::vector<int> no_penalize;  // 1-based coefficient indices kept unpenalized
  std::string criterion = "bic";  // for penalty = l0

  // glrt
  std::vector<int> null_x;  // 1-based X column indices under H0
  int bootstrap_b = 0;

  // bandwidth search
  std::vector<double> h_grid;
  int folds = 10;

  // simulate
  std::string scenario;
  std::string study = "table1";  // table1 | table2 | power
  std::vector<std::string> methods = {"scad", "l1", "oracle"};
  int reps = 100;
  std::vector<double> delta_grid = {0.0, 0.4, 0.8, 1.2, 1.6, 2.0};
  std::vector<double> levels = {0.25, 0.10, 0.05, 0.01};
  std::vector<int> d_values = {8, 9, 10};
  bool full_scale = false;
  int scenario_n = 0;     // > 0 overrides the preset
  double scenario_h = 0.0;  // > 0 overrides the preset

  // common
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  std::string out_dir = "gvcplm-out";
};

// Exit codes used by run(): 0 success, 2 config errors, 3 data validation
// errors, 4 numerical failures.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitDataError = 3,
  kExitNumericalError = 4,
};

// Applies one `key = value` pair; returns an error message or empty.
std::string apply_config_entry(RunConfig& config, const std::string& key,
                               const std::string& value);

// Parses a key=value file into config (no validation); returns parse errors.
std::vector<std::string> load_config_file(const std::string& path,
                                          RunConfig& config);

// Validates the assembled config, collecting every problem (not just the
// first). An empty list means the config is runnable.
std::vector<std::string> validate_run_config(const RunConfig& config);

// Reads a key=value config file and validates it fully.
std::variant<RunConfig, std::vector<std::string>> validate_config(
    const std::string& path);

// Executes the configured command, writing result.json, report.txt and any
// requested CSVs under out_dir. Returns an ExitCode.
int run(const RunConfig& config);

}  // namespace gvcplm
