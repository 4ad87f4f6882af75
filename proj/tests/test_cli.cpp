#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gvcplm/runconfig.hpp"
#include "gvcplm/simlab.hpp"

using namespace gvcplm;
namespace fs = std::filesystem;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes a small gaussian dataset csv + role map for the data commands.
void write_dataset(const std::string& csv, const std::string& roles) {
  const ScenarioSpec spec = [] {
    ScenarioSpec s = ScenarioSpec::example41();
    s.family = "gaussian";
    s.n = 120;
    s.d = 3;
    s.beta_true = Eigen::VectorXd::Zero(3);
    s.beta_true(0) = 0.5;
    return s;
  }();
  const Dataset data = gen_scenario(spec, 42);
  std::ostringstream out;
  out << "u,x1,x2,z1,z2,z3,y\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << data.u(i) << "," << data.x(i, 0) << "," << data.x(i, 1);
    for (int j = 0; j < 3; ++j) out << "," << data.z(i, j);
    out << "," << data.y(i) << "\n";
  }
  write_file(csv, out.str());
  write_file(roles, "u=u\nx1=x\nx2=x\nz1=z\nz2=z\nz3=z\ny=y\n");
}

}  // namespace

TEST_CASE("empty config file reports the required fields") {
  write_file("/tmp/gvcplm_empty.cfg", "");
  const auto parsed = validate_config("/tmp/gvcplm_empty.cfg");
  REQUIRE(std::holds_alternative<std::vector<std::string>>(parsed));
  const auto& errors = std::get<std::vector<std::string>>(parsed);
  REQUIRE_FALSE(errors.empty());
  CHECK(errors[0].find("command") != std::string::npos);
}

TEST_CASE("config validation collects every problem") {
  write_file("/tmp/gvcplm_bad.cfg",
             "command = select\n"
             "family = gamma\n"
             "kernel = box\n"
             "penalty = ridge\n"
             "bandwidth = -1\n"
             "not_a_key = 3\n");
  const auto parsed = validate_config("/tmp/gvcplm_bad.cfg");
  REQUIRE(std::holds_alternative<std::vector<std::string>>(parsed));
  const auto& errors = std::get<std::vector<std::string>>(parsed);
  CHECK(errors.size() >= 5);
  bool saw_family = false, saw_kernel = false, saw_penalty = false,
       saw_bandwidth = false, saw_unknown = false;
  for (const auto& e : errors) {
    saw_family = saw_family || e.find("family") != std::string::npos;
    saw_kernel = saw_kernel || e.find("kernel") != std::string::npos;
    saw_penalty = saw_penalty || e.find("penalty") != std::string::npos;
    saw_bandwidth = saw_bandwidth || e.find("bandwidth") != std::string::npos;
    saw_unknown = saw_unknown || e.find("not_a_key") != std::string::npos;
  }
  CHECK(saw_family);
  CHECK(saw_kernel);
  CHECK(saw_penalty);
  CHECK(saw_bandwidth);
  CHECK(saw_unknown);
}

TEST_CASE("seed is mandatory for stochastic commands") {
  RunConfig c;
  c.command = "simulate";
  c.scenario = "example41";
  auto errors = validate_run_config(c);
  bool saw_seed = false;
  for (const auto& e : errors)
    saw_seed = saw_seed || e.find("seed") != std::string::npos;
  CHECK(saw_seed);
  c.seed = 1;
  c.seed_set = true;
  CHECK(validate_run_config(c).empty());
}

TEST_CASE("valid scenario reference resolves the published constants") {
  RunConfig c;
  c.command = "simulate";
  c.scenario = "example41";
  c.seed = 7;
  c.seed_set = true;
  CHECK(validate_run_config(c).empty());
  const ScenarioSpec spec = ScenarioSpec::by_name(c.scenario, c.full_scale);
  CHECK(spec.n == 200);
  CHECK(spec.h == 0.125);
  CHECK(spec.beta_true(4) == 0.2);
}

TEST_CASE("duplicate y role surfaces as a data validation failure") {
  write_file("/tmp/gvcplm_dup.csv", "u,x,y1,y2\n0.1,1,2,3\n0.5,1,2,3\n");
  write_file("/tmp/gvcplm_dup_roles.txt", "u=u\nx=x\ny1=y\ny2=y\n");
  RunConfig c;
  c.command = "fit";
  c.data_path = "/tmp/gvcplm_dup.csv";
  c.roles_path = "/tmp/gvcplm_dup_roles.txt";
  c.family = "gaussian";
  c.bandwidth = 0.5;
  c.out_dir = "/tmp/gvcplm_out_dup";
  CHECK(run(c) == kExitDataError);
}

TEST_CASE("response outside the family range is a data error") {
  write_file("/tmp/gvcplm_range.csv", "u,x,y\n0.1,1,7\n0.5,1,0\n0.9,1,1\n");
  write_file("/tmp/gvcplm_range_roles.txt", "u=u\nx=x\ny=y\n");
  RunConfig c;
  c.command = "fit";
  c.data_path = "/tmp/gvcplm_range.csv";
  c.roles_path = "/tmp/gvcplm_range_roles.txt";
  c.family = "bernoulli";
  c.bandwidth = 0.5;
  c.out_dir = "/tmp/gvcplm_out_range";
  CHECK(run(c) == kExitDataError);
}

TEST_CASE("missing input files fail config validation") {
  RunConfig c;
  c.command = "fit";
  c.data_path = "/tmp/gvcplm_does_not_exist.csv";
  c.roles_path = "/tmp/gvcplm_does_not_exist.roles";
  c.bandwidth = 0.3;
  CHECK(run(c) == kExitConfigError);
}

TEST_CASE("fit command writes reproducible artifacts") {
  write_dataset("/tmp/gvcplm_cli.csv", "/tmp/gvcplm_cli_roles.txt");
  RunConfig c;
  c.command = "fit";
  c.data_path = "/tmp/gvcplm_cli.csv";
  c.roles_path = "/tmp/gvcplm_cli_roles.txt";
  c.family = "gaussian";
  c.kernel = "epanechnikov";
  c.bandwidth = 0.35;
  c.threads = 2;
  c.out_dir = "/tmp/gvcplm_out_fit";
  REQUIRE(run(c) == kExitOk);
  CHECK(fs::exists("/tmp/gvcplm_out_fit/result.json"));
  CHECK(fs::exists("/tmp/gvcplm_out_fit/report.txt"));
  CHECK(fs::exists("/tmp/gvcplm_out_fit/curves.csv"));
  const std::string first = read_file("/tmp/gvcplm_out_fit/result.json");
  const std::string curves = read_file("/tmp/gvcplm_out_fit/curves.csv");

  // Re-running the same config reproduces the machine-readable outputs
  // byte for byte, at a different thread count too.
  c.threads = 1;
  c.out_dir = "/tmp/gvcplm_out_fit2";
  REQUIRE(run(c) == kExitOk);
  std::string second = read_file("/tmp/gvcplm_out_fit2/result.json");
  // The embedded config echoes out_dir/threads; strip those lines before
  // comparing the numerical payload.
  auto strip = [](std::string s) {
    std::string out;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line))
      if (line.find("out_dir") == std::string::npos &&
          line.find("threads") == std::string::npos)
        out += line + "\n";
    return out;
  };
  CHECK(strip(first) == strip(second));
  CHECK(curves == read_file("/tmp/gvcplm_out_fit2/curves.csv"));
}

TEST_CASE("select command: gcv path artifacts and determinism") {
  write_dataset("/tmp/gvcplm_cli.csv", "/tmp/gvcplm_cli_roles.txt");
  RunConfig c;
  c.command = "select";
  c.data_path = "/tmp/gvcplm_cli.csv";
  c.roles_path = "/tmp/gvcplm_cli_roles.txt";
  c.family = "gaussian";
  c.bandwidth = 0.35;
  c.penalty = "scad";
  c.lambda_policy = "gcv";
  c.threads = 0;  // all threads
  c.out_dir = "/tmp/gvcplm_out_select";
  REQUIRE(run(c) == kExitOk);
  CHECK(fs::exists("/tmp/gvcplm_out_select/lambda_path.csv"));
  CHECK(fs::exists("/tmp/gvcplm_out_select/curves.csv"));
  const std::string result = read_file("/tmp/gvcplm_out_select/result.json");
  CHECK(result.find("lambda_star") != std::string::npos);
  CHECK(result.find("coefficients") != std::string::npos);
}

TEST_CASE("select with the l0 penalty runs the exhaustive search") {
  write_dataset("/tmp/gvcplm_cli.csv", "/tmp/gvcplm_cli_roles.txt");
  RunConfig c;
  c.command = "select";
  c.data_path = "/tmp/gvcplm_cli.csv";
  c.roles_path = "/tmp/gvcplm_cli_roles.txt";
  c.family = "gaussian";
  c.bandwidth = 0.35;
  c.penalty = "l0";
  c.criterion = "bic";
  c.out_dir = "/tmp/gvcplm_out_l0";
  REQUIRE(run(c) == kExitOk);
  const std::string result = read_file("/tmp/gvcplm_out_l0/result.json");
  CHECK(result.find("best_subset") != std::string::npos);
  CHECK(result.find("subsets_evaluated") != std::string::npos);
  CHECK(fs::exists("/tmp/gvcplm_out_l0/subset_trace.csv"));
}

TEST_CASE("test command reports both p-values") {
  write_dataset("/tmp/gvcplm_cli.csv", "/tmp/gvcplm_cli_roles.txt");
  RunConfig c;
  c.command = "test";
  c.data_path = "/tmp/gvcplm_cli.csv";
  c.roles_path = "/tmp/gvcplm_cli_roles.txt";
  c.family = "gaussian";
  c.bandwidth = 0.35;
  c.null_x = {2};
  c.bootstrap_b = 8;
  c.seed = 3;
  c.seed_set = true;
  c.threads = 0;
  c.out_dir = "/tmp/gvcplm_out_test";
  REQUIRE(run(c) == kExitOk);
  const std::string result = read_file("/tmp/gvcplm_out_test/result.json");
  CHECK(result.find("p_asymptotic") != std::string::npos);
  CHECK(result.find("p_bootstrap") != std::string::npos);
  CHECK(result.find("df_fitted") != std::string::npos);
  CHECK(fs::exists("/tmp/gvcplm_out_test/bootstrap_stats.csv"));
}

TEST_CASE("bandwidth command reports the undersmoothed value") {
  write_dataset("/tmp/gvcplm_cli.csv", "/tmp/gvcplm_cli_roles.txt");
  RunConfig c;
  c.command = "bandwidth";
  c.data_path = "/tmp/gvcplm_cli.csv";
  c.roles_path = "/tmp/gvcplm_cli_roles.txt";
  c.family = "gaussian";
  c.h_grid = {0.25, 0.5};
  c.folds = 4;
  c.seed = 9;
  c.seed_set = true;
  c.threads = 0;
  c.out_dir = "/tmp/gvcplm_out_bw";
  REQUIRE(run(c) == kExitOk);
  const std::string result = read_file("/tmp/gvcplm_out_bw/result.json");
  CHECK(result.find("h_star") != std::string::npos);
  CHECK(result.find("h_undersmoothed") != std::string::npos);
  CHECK(fs::exists("/tmp/gvcplm_out_bw/cv_scores.csv"));
  const std::string report = read_file("/tmp/gvcplm_out_bw/report.txt");
  CHECK(report.find("undersmoothed") != std::string::npos);
}

TEST_CASE("simulate table1 writes the study table and is reproducible") {
  RunConfig c;
  c.command = "simulate";
  c.scenario = "example41";
  c.study = "table1";
  c.methods = {"oracle"};
  c.reps = 3;
  c.seed = 5;
  c.seed_set = true;
  c.threads = 0;
  c.out_dir = "/tmp/gvcplm_out_sim";
  REQUIRE(run(c) == kExitOk);
  const std::string first = read_file("/tmp/gvcplm_out_sim/result.json");
  CHECK(first.find("\"c_avg\": 7.0") != std::string::npos);
  CHECK(fs::exists("/tmp/gvcplm_out_sim/table1.csv"));

  c.threads = 1;
  c.out_dir = "/tmp/gvcplm_out_sim2";
  REQUIRE(run(c) == kExitOk);
  auto strip = [](std::string s) {
    std::string out;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line))
      if (line.find("out_dir") == std::string::npos &&
          line.find("threads") == std::string::npos)
        out += line + "\n";
    return out;
  };
  CHECK(strip(first) == strip(read_file("/tmp/gvcplm_out_sim2/result.json")));
  CHECK(read_file("/tmp/gvcplm_out_sim/table1.csv") ==
        read_file("/tmp/gvcplm_out_sim2/table1.csv"));
}

TEST_CASE("config file plus overrides") {
  write_file("/tmp/gvcplm_run.cfg",
             "command = simulate\n"
             "scenario = example41\n"
             "study = table1\n"
             "methods = oracle\n"
             "reps = 2\n"
             "seed = 8\n"
             "out_dir = /tmp/gvcplm_out_cfg\n");
  const auto parsed = validate_config("/tmp/gvcplm_run.cfg");
  REQUIRE(std::holds_alternative<RunConfig>(parsed));
  RunConfig c = std::get<RunConfig>(parsed);
  CHECK(c.reps == 2);
  // Later entries (flag replay) override.
  CHECK(apply_config_entry(c, "reps", "4").empty());
  CHECK(c.reps == 4);
  CHECK_FALSE(apply_config_entry(c, "bogus", "4").empty());
  REQUIRE(run(c) == kExitOk);
  CHECK(fs::exists("/tmp/gvcplm_out_cfg/result.json"));
}
