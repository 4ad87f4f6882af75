#include "gvcplm/runconfig.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "gvcplm/family.hpp"
#include "gvcplm/kernel.hpp"
#include "gvcplm/penalty.hpp"
#include "gvcplm/simlab.hpp"

namespace gvcplm {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool parse_double(const std::string& s, double* out) {
  try {
    std::size_t pos = 0;
    *out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_int(const std::string& s, int* out) {
  try {
    std::size_t pos = 0;
    *out = std::stoi(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_u64(const std::string& s, std::uint64_t* out) {
  try {
    std::size_t pos = 0;
    *out = std::stoull(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_bool(const std::string& s, bool* out) {
  const std::string v = lower(s);
  if (v == "1" || v == "true" || v == "yes" || v == "on") {
    *out = true;
    return true;
  }
  if (v == "0" || v == "false" || v == "no" || v == "off") {
    *out = false;
    return true;
  }
  return false;
}

template <class T, class Parse>
bool parse_list(const std::string& s, std::vector<T>* out, Parse parse) {
  out->clear();
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) return false;
    T v;
    if (!parse(item, &v)) return false;
    out->push_back(v);
  }
  return !out->empty();
}

}  // namespace

std::string apply_config_entry(RunConfig& c, const std::string& raw_key,
                               const std::string& raw_value) {
  const std::string key = lower(trim(raw_key));
  const std::string value = trim(raw_value);
  auto bad = [&](const char* expect) {
    return "key `" + key + "`: expected " + expect + ", got `" + value + "`";
  };

  if (key == "command") {
    c.command = lower(value);
    return "";
  }
  if (key == "data") {
    c.data_path = value;
    return "";
  }
  if (key == "roles") {
    c.roles_path = value;
    return "";
  }
  if (key == "family") {
    c.family = lower(value);
    return "";
  }
  if (key == "kernel") {
    c.kernel = lower(value);
    return "";
  }
  if (key == "bandwidth" || key == "h")
    return parse_double(value, &c.bandwidth) ? "" : bad("a number");
  if (key == "undersmooth")
    return parse_bool(value, &c.apply_undersmooth) ? "" : bad("a boolean");
  if (key == "penalty") {
    c.penalty = lower(value);
    return "";
  }
  if (key == "scad_a" || key == "a")
    return parse_double(value, &c.scad_a) ? "" : bad("a number");
  if (key == "lq_q" || key == "q")
    return parse_double(value, &c.lq_q) ? "" : bad("a number");
  if (key == "lambda_policy") {
    c.lambda_policy = lower(value);
    return "";
  }
  if (key == "lambda")
    return parse_double(value, &c.lambda_value) ? "" : bad("a number");
  if (key == "lambda_raw")
    return parse_bool(value, &c.lambda_raw) ? "" : bad("a boolean");
  if (key == "no_penalize")
    return parse_list<int>(value, &c.no_penalize, parse_int)
               ? ""
               : bad("a comma list of indices");
  if (key == "criterion") {
    c.criterion = lower(value);
    return "";
  }
  if (key == "null_x")
    return parse_list<int>(value, &c.null_x, parse_int)
               ? ""
               : bad("a comma list of indices");
  if (key == "bootstrap")
    return parse_int(value, &c.bootstrap_b) ? "" : bad("an integer");
  if (key == "h_grid")
    return parse_list<double>(value, &c.h_grid, parse_double)
               ? ""
               : bad("a comma list of numbers");
  if (key == "folds")
    return parse_int(value, &c.folds) ? "" : bad("an integer");
  if (key == "scenario") {
    c.scenario = lower(value);
    return "";
  }
  if (key == "study") {
    c.study = lower(value);
    return "";
  }
  if (key == "methods") {
    std::vector<std::string> m;
    std::stringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = lower(trim(item));
      if (item.empty()) return bad("a comma list of method names");
      m.push_back(item);
    }
    if (m.empty()) return bad("a comma list of method names");
    c.methods = m;
    return "";
  }
  if (key == "reps")
    return parse_int(value, &c.reps) ? "" : bad("an integer");
  if (key == "delta_grid")
    return parse_list<double>(value, &c.delta_grid, parse_double)
               ? ""
               : bad("a comma list of numbers");
  if (key == "levels")
    return parse_list<double>(value, &c.levels, parse_double)
               ? ""
               : bad("a comma list of numbers");
  if (key == "d_values")
    return parse_list<int>(value, &c.d_values, parse_int)
               ? ""
               : bad("a comma list of integers");
  if (key == "full_scale")
    return parse_bool(value, &c.full_scale) ? "" : bad("a boolean");
  if (key == "n")
    return parse_int(value, &c.scenario_n) ? "" : bad("an integer");
  if (key == "scenario_h")
    return parse_double(value, &c.scenario_h) ? "" : bad("a number");
  if (key == "seed") {
    if (!parse_u64(value, &c.seed)) return bad("an unsigned integer");
    c.seed_set = true;
    return "";
  }
  if (key == "threads")
    return parse_int(value, &c.threads) ? "" : bad("an integer");
  if (key == "out_dir" || key == "out") {
    c.out_dir = value;
    return "";
  }
  return "unknown key `" + key + "`";
}

std::vector<std::string> validate_run_config(const RunConfig& c) {
  std::vector<std::string> errors;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };

  const std::set<std::string> commands = {"fit", "select", "test", "bandwidth",
                                          "simulate"};
  if (c.command.empty()) {
    errors.push_back(
        "command is required (one of fit, select, test, bandwidth, simulate)");
    return errors;
  }
  if (commands.count(c.command) == 0) {
    errors.push_back("unknown command `" + c.command + "`");
    return errors;
  }

  const bool data_command = c.command != "simulate";
  if (data_command) {
    require(!c.data_path.empty(), "data is required (path to a csv file)");
    require(!c.roles_path.empty(), "roles is required (path to a role map)");
    if (!c.data_path.empty())
      require(static_cast<bool>(std::ifstream(c.data_path)),
              "data file does not exist: " + c.data_path);
    if (!c.roles_path.empty())
      require(static_cast<bool>(std::ifstream(c.roles_path)),
              "roles file does not exist: " + c.roles_path);
    try {
      QuasiFamily::by_name(c.family);
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
    try {
      KernelSpec::by_name(c.kernel, 1.0);
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
  }

  if (c.command == "fit" || c.command == "select" || c.command == "test")
    require(c.bandwidth > 0.0, "bandwidth must be > 0 for " + c.command);

  if (c.command == "select") {
    try {
      const PenaltyKind kind = penalty_kind_by_name(c.penalty);
      if (kind == PenaltyKind::scad)
        require(c.scad_a > 2.0, "scad_a must be > 2");
      if (kind == PenaltyKind::lq)
        require(c.lq_q > 0.0 && c.lq_q < 1.0, "lq_q must be in (0,1)");
      if (kind == PenaltyKind::l0) {
        try {
          criterion_by_name(c.criterion);
        } catch (const std::exception& e) {
          errors.push_back(e.what());
        }
      }
      if (kind == PenaltyKind::none)
        errors.push_back("select needs a penalty other than `none`; use fit");
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
    require(c.lambda_policy == "fixed" || c.lambda_policy == "gcv",
            "lambda_policy must be fixed or gcv");
    if (c.lambda_policy == "fixed")
      require(c.lambda_value >= 0.0, "lambda must be >= 0");
    for (int j : c.no_penalize)
      require(j >= 1, "no_penalize uses 1-based indices");
  }

  if (c.command == "test") {
    require(!c.null_x.empty(), "null_x is required (1-based X indices)");
    for (int j : c.null_x) require(j >= 1, "null_x uses 1-based indices");
    require(c.bootstrap_b >= 0, "bootstrap must be >= 0");
  }

  if (c.command == "bandwidth") {
    require(!c.h_grid.empty(), "h_grid is required (comma list of bandwidths)");
    for (double h : c.h_grid) require(h > 0.0, "h_grid entries must be > 0");
    require(c.folds >= 2, "folds must be >= 2");
  }

  if (c.command == "simulate") {
    require(!c.scenario.empty(),
            "scenario is required (example41 or example42)");
    if (!c.scenario.empty()) {
      try {
        ScenarioSpec::by_name(c.scenario, c.full_scale);
      } catch (const std::exception& e) {
        errors.push_back(e.what());
      }
    }
    require(c.study == "table1" || c.study == "table2" || c.study == "power",
            "study must be table1, table2 or power");
    require(c.reps >= 1, "reps must be >= 1");
    if (c.study == "table1") {
      for (const auto& m : c.methods) {
        try {
          method_by_name(m);
        } catch (const std::exception& e) {
          errors.push_back(e.what());
        }
      }
    }
    if (c.study == "table2") {
      require(!c.d_values.empty(), "d_values is required for table2");
      for (int d : c.d_values)
        require(d >= 1 && d <= 20, "d_values entries must be in [1, 20]");
    }
    if (c.study == "power") {
      require(!c.delta_grid.empty(), "delta_grid is required for power");
      for (double d : c.delta_grid)
        require(d >= 0.0, "delta_grid entries must be >= 0");
      for (double l : c.levels)
        require(l > 0.0 && l < 1.0, "levels must be in (0,1)");
      require(c.bootstrap_b >= 1, "bootstrap must be >= 1 for power");
    }
    if (c.scenario_n != 0) require(c.scenario_n >= 20, "n override too small");
    if (c.scenario_h != 0.0) require(c.scenario_h > 0.0, "scenario_h must be > 0");
  }

  // Stochastic commands need the seed pinned up front.
  const bool stochastic = c.command == "simulate" || c.command == "bandwidth" ||
                          (c.command == "test" && c.bootstrap_b > 0);
  if (stochastic) require(c.seed_set, "seed is required for " + c.command);

  require(c.threads >= 0, "threads must be >= 0 (0 = all hardware threads)");
  require(!c.out_dir.empty(), "out_dir must be nonempty");
  return errors;
}

std::vector<std::string> load_config_file(const std::string& path,
                                          RunConfig& config) {
  std::vector<std::string> errors;
  std::ifstream in(path);
  if (!in) {
    errors.push_back("cannot open config file: " + path);
    return errors;
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) +
                       ": expected `key = value`");
      continue;
    }
    const std::string err =
        apply_config_entry(config, t.substr(0, eq), t.substr(eq + 1));
    if (!err.empty())
      errors.push_back("line " + std::to_string(line_no) + ": " + err);
  }
  return errors;
}

std::variant<RunConfig, std::vector<std::string>> validate_config(
    const std::string& path) {
  RunConfig config;
  std::vector<std::string> errors = load_config_file(path, config);
  const auto validation = validate_run_config(config);
  errors.insert(errors.end(), validation.begin(), validation.end());
  if (!errors.empty()) return errors;
  return config;
}

}  // namespace gvcplm
