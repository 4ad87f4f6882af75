#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gvcplm/dataset.hpp"
#include "gvcplm/estimator.hpp"
#include "gvcplm/family.hpp"
#include "gvcplm/kernel.hpp"
#include "gvcplm/subset.hpp"

namespace gvcplm {

// Monte Carlo scenario: U ~ Uniform(0,1); X an intercept column plus
// standard normal columns; Z ~ N(0, Sigma) with Sigma_ij = rho^|i-j|;
// eta = x'alpha(u) + z'beta_true; Y drawn from the family at g^{-1}(eta).
struct ScenarioSpec {
  std::string name = "custom";
  std::string family = "gaussian";
  int n = 200;
  double h = 0.125;
  int p = 2;
  int d = 10;
  std::vector<std::function<double(double)>> alpha;
  std::vector<std::string> alpha_names;
  Eigen::VectorXd beta_true;
  double rho = 0.5;
  double sigma = 1.0;         // Gaussian noise sd
  double delta = 1.0;         // scale applied to alpha_2 (power alternatives)
  int glrt_component = 1;     // 0-based X column tested by the power study

  void validate() const;
  std::vector<int> true_support() const;
  std::vector<int> true_zeros() const;

  // Example 4.1: Poisson, alpha1 = 5.5 + 0.1 exp(2u-1), alpha2 = 0.8u(1-u),
  // beta = (0.3, 0.15, 0, 0, 0.2, 0, ...), rho = 0.5, n = 200, h = 0.125.
  static ScenarioSpec example41();
  // Example 4.2: Bernoulli-logit, alpha1 = exp(2u-1), alpha2 = 2 sin^2(2 pi u),
  // beta = (3, 1.5, 0, 0, 2, 0, ...). Desk scale runs n = 400 with h rescaled
  // by (1000/400)^{1/3}; full scale restores n = 1000, h = 0.3.
  static ScenarioSpec example42(bool full_scale = false);
  static ScenarioSpec by_name(const std::string& name, bool full_scale = false);

  // Same design with d parametric covariates (beta1 = .3, beta2 = .15,
  // beta5 = .2 pattern truncated/extended), for the timing table.
  ScenarioSpec with_dimension(int new_d) const;
  ScenarioSpec with_delta(double new_delta) const;
};

Eigen::MatrixXd ar1_covariance(int d, double rho);

// Seeded draws; identical (spec, seed) pairs produce bit-identical datasets.
Dataset gen_scenario(const ScenarioSpec& spec, std::uint64_t seed);

// Root average squared error of the curves against the truth on their grid.
double rase(const CoefficientCurves& curves,
            const std::vector<std::function<double(double)>>& truth);

// (beta_hat - beta_true)' Sigma (beta_hat - beta_true).
double gmse(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true,
            const Eigen::MatrixXd& sigma_z);

enum class SelectionMethod { scad, l1, aic, bic, ric, oracle };
SelectionMethod method_by_name(const std::string& name);
std::string method_name(SelectionMethod m);

struct MethodRow {
  std::string method;
  double rgmse_median = 0.0;
  double rgmse_mad_scaled = 0.0;
  double c_avg = 0.0;  // true zeros correctly zeroed
  double i_avg = 0.0;  // true nonzeros incorrectly zeroed
  double wall_mean = 0.0;
  double wall_sd = 0.0;
};

struct StudyReport {
  ScenarioSpec scenario;
  int replications = 0;
  int failures = 0;
  std::vector<MethodRow> rows;
  // Per-replication relative GMSE by method, ordered by replication index.
  std::vector<std::vector<double>> rgmse;
};

struct StudyOptions {
  int threads = 1;
  EstimatorOptions estimator;
  std::vector<double> lambda_grid;  // empty: default grid
};

// Table 1 style comparison: per replication fit the full model, run each
// method, record relative GMSE and the C / I zero-pattern counts.
StudyReport run_table1_study(const ScenarioSpec& spec,
                             const std::vector<SelectionMethod>& methods,
                             int replications, std::uint64_t seed,
                             const StudyOptions& opts = {});

struct TimingRow {
  std::string method;
  int d = 0;
  double mean_seconds = 0.0;
  double sd_seconds = 0.0;
};

struct TimingReport {
  std::vector<TimingRow> rows;
  int replications = 0;
};

// Table 2 style serial wall-clock comparison over growing d.
TimingReport run_timing_study(const ScenarioSpec& base,
                              const std::vector<int>& d_values,
                              const std::vector<SelectionMethod>& methods,
                              int replications, std::uint64_t seed,
                              const StudyOptions& opts = {});

struct PowerReport {
  std::vector<double> deltas;
  std::vector<double> levels;
  // power[i][j]: rejection rate at deltas[i], levels[j]
  std::vector<std::vector<double>> power;
  std::vector<double> null_stats;  // bootstrap null statistics (critical values)
  double df_fitted = 0.0;
  int replications = 0;
};

// GLRT power curves: bootstrap critical values are computed once from the
// delta = 0 null, then each (delta, replication) recomputes the statistic.
PowerReport run_power_study(const ScenarioSpec& spec,
                            const std::vector<double>& delta_grid,
                            const std::vector<double>& levels,
                            int replications, int bootstrap_b,
                            std::uint64_t seed,
                            const StudyOptions& opts = {});

}  // namespace gvcplm
