// Compares the serial reference path (threads = 1) against the OpenMP path
// for the data-parallel kernels: grid smoothing, the lambda path, bootstrap
// replication and subset enumeration. Also verifies that both paths produce
// bit-identical numbers, which is the contract the tests rely on.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gvcplm/glrt.hpp"
#include "gvcplm/parallel.hpp"
#include "gvcplm/simlab.hpp"
#include "gvcplm/subset.hpp"

using namespace gvcplm;

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct BenchRow {
  std::string name;
  double serial = 0.0;
  double parallel = 0.0;
  double max_diff = 0.0;
};

void print_row(const BenchRow& r, int threads) {
  std::printf("  %-28s %10.3fs %10.3fs   x%-6.2f   max|diff| = %g\n",
              r.name.c_str(), r.serial, r.parallel, r.serial / r.parallel,
              r.max_diff);
  (void)threads;
}

}  // namespace

int main(int argc, char** argv) {
  int threads = hardware_threads();
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--threads" && i + 1 < argc)
      threads = std::atoi(argv[++i]);
    else if (arg == "--quick")
      quick = true;
  }
  if (threads < 2) {
    std::printf("only one hardware thread available; nothing to compare\n");
    return 0;
  }

  std::printf("serial reference vs OpenMP kernels (%d threads)\n\n", threads);
  std::vector<BenchRow> rows;

  const QuasiFamily family = QuasiFamily::poisson();

  {  // grid smoothing
    ScenarioSpec spec = ScenarioSpec::example41();
    spec.n = quick ? 500 : 2000;
    const Dataset data = gen_scenario(spec, 42);
    const KernelSpec kernel = KernelSpec::epanechnikov(spec.h);
    const int n_grid = quick ? 100 : 400;
    const Eigen::VectorXd beta = spec.beta_true;

    BenchRow row;
    row.name = "alpha_on_grid";
    FitOptions opts;
    opts.threads = 1;
    auto t0 = std::chrono::steady_clock::now();
    const CoefficientCurves serial =
        alpha_on_grid(data, family, kernel, beta, n_grid, opts);
    row.serial = seconds_since(t0);

    opts.threads = threads;
    t0 = std::chrono::steady_clock::now();
    const CoefficientCurves par =
        alpha_on_grid(data, family, kernel, beta, n_grid, opts);
    row.parallel = seconds_since(t0);
    row.max_diff = (serial.values - par.values).cwiseAbs().maxCoeff();
    rows.push_back(row);
    print_row(row, threads);
  }

  {  // lambda path
    ScenarioSpec spec = ScenarioSpec::example41();
    spec.n = quick ? 200 : 400;
    const Dataset data = gen_scenario(spec, 7);
    const KernelSpec kernel = KernelSpec::epanechnikov(spec.h);
    PenaltySpec pen;
    pen.kind = PenaltyKind::scad;

    BenchRow row;
    row.name = "select_lambda (50-pt path)";
    EstimatorOptions opts;
    opts.fit.threads = 1;
    const UnpenalizedFit unpen = fit_unpenalized(data, family, kernel, opts);
    auto t0 = std::chrono::steady_clock::now();
    const LambdaSelection serial =
        select_lambda(data, family, kernel, pen, {}, unpen, {}, opts);
    row.serial = seconds_since(t0);

    opts.fit.threads = threads;
    t0 = std::chrono::steady_clock::now();
    const LambdaSelection par =
        select_lambda(data, family, kernel, pen, {}, unpen, {}, opts);
    row.parallel = seconds_since(t0);
    row.max_diff = std::fabs(serial.lambda_star - par.lambda_star);
    for (std::size_t k = 0; k < serial.path.size(); ++k)
      row.max_diff = std::max(
          row.max_diff, std::fabs(serial.path[k].gcv - par.path[k].gcv));
    rows.push_back(row);
    print_row(row, threads);
  }

  {  // bootstrap replication
    ScenarioSpec spec = ScenarioSpec::example41().with_delta(0.0);
    const Dataset data = gen_scenario(spec, 11);
    const KernelSpec kernel = KernelSpec::epanechnikov(spec.h);
    const int B = quick ? 16 : 48;

    BenchRow row;
    row.name = "bootstrap_null (B=" + std::to_string(B) + ")";
    GlrtOptions opts;
    opts.estimator.fit.threads = 1;
    auto t0 = std::chrono::steady_clock::now();
    const BootstrapNullResult serial =
        bootstrap_null(data, family, kernel, {1}, B, 3, opts);
    row.serial = seconds_since(t0);

    opts.estimator.fit.threads = threads;
    t0 = std::chrono::steady_clock::now();
    const BootstrapNullResult par =
        bootstrap_null(data, family, kernel, {1}, B, 3, opts);
    row.parallel = seconds_since(t0);
    row.max_diff = std::fabs(serial.p_bootstrap - par.p_bootstrap);
    for (std::size_t k = 0; k < serial.bootstrap_stats.size(); ++k)
      row.max_diff = std::max(row.max_diff,
                              std::fabs(serial.bootstrap_stats[k] -
                                        par.bootstrap_stats[k]));
    rows.push_back(row);
    print_row(row, threads);
  }

  {  // subset enumeration
    ScenarioSpec spec = ScenarioSpec::example41().with_dimension(quick ? 8 : 10);
    const Dataset data = gen_scenario(spec, 5);
    const KernelSpec kernel = KernelSpec::epanechnikov(spec.h);

    BenchRow row;
    row.name = "best_subset (d=" + std::to_string(spec.d) + ")";
    SubsetOptions opts;
    opts.force_serial = true;
    auto t0 = std::chrono::steady_clock::now();
    const SubsetResult serial =
        best_subset(data, family, kernel, InfoCriterion::bic, opts);
    row.serial = seconds_since(t0);

    opts.force_serial = false;
    opts.estimator.fit.threads = threads;
    t0 = std::chrono::steady_clock::now();
    const SubsetResult par =
        best_subset(data, family, kernel, InfoCriterion::bic, opts);
    row.parallel = seconds_since(t0);
    row.max_diff = std::fabs(serial.criterion_value - par.criterion_value);
    rows.push_back(row);
    print_row(row, threads);
  }

  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.max_diff);
  std::printf("\nlargest serial/parallel discrepancy: %g %s\n", worst,
              worst == 0.0 ? "(bit-identical)" : "");
  return worst == 0.0 ? 0 : 1;
}
