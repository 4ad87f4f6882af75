#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "gvcplm/dataset.hpp"
#include "gvcplm/family.hpp"
#include "gvcplm/kernel.hpp"
#include "gvcplm/local_fit.hpp"
#include "gvcplm/penalty.hpp"

namespace gvcplm {

struct EstimatorOptions {
  FitOptions fit;
  int profile_grid = 200;    // grid size for the alpha-tilde profiling step
  bool profile_exact = false;  // force one local fit per observation instead
  int curve_grid = 200;      // grid size for reported coefficient curves
  bool with_curves = true;
};

// Fitted semiparametric model. beta, se and zero_mask follow the Z columns;
// se entries for zeroed coefficients are NaN. eta_offset stores the profiled
// X_i' alpha_tilde(U_i) used by the covariance / df / GCV operations, and
// penalty_used carries the per-coefficient lambdas actually applied.
struct SemiFit {
  Eigen::VectorXd beta;
  std::vector<bool> zero_mask;
  Eigen::VectorXd se;
  CoefficientCurves alpha_curves;
  Eigen::VectorXd lambda_used;
  PenaltySpec penalty_used;
  double effective_df = 0.0;
  double gcv = 0.0;
  double deviance = 0.0;
  double quasi_ll = 0.0;  // at (alpha_tilde, beta)
  int iterations = 0;
  bool converged = false;
  bool ridged = false;
  bool clamped = false;
  Eigen::VectorXd eta_offset;

  std::vector<int> active_set() const {
    std::vector<int> a;
    for (std::size_t j = 0; j < zero_mask.size(); ++j)
      if (!zero_mask[j]) a.push_back(static_cast<int>(j));
    return a;
  }
};

struct UnpenalizedFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd alpha_tilde;      // n x p, interpolated at observed U_i
  CoefficientCurves curves_tilde;   // profiling grid (joint local fits)
  Eigen::VectorXd eta_offset;       // X_i' alpha_tilde(U_i)
  double quasi_ll = 0.0;
  double deviance = 0.0;
  int iterations = 0;
  bool converged = false;
  bool ridged = false;
  bool clamped = false;
};

// Step 1-2 of the backfit: profile alpha by joint local fits on a grid
// (interpolated to the observations), then maximize the global
// quasi-likelihood over beta with the profiled part as offset. Standard
// errors come from the sandwich formula with the penalty term zero.
UnpenalizedFit fit_unpenalized(const Dataset& data, const QuasiFamily& family,
                               const KernelSpec& kernel,
                               const EstimatorOptions& opts = {});

// LQA-modified Newton-Raphson for the penalized quasi-likelihood with
// alpha_tilde plugged in. Coefficients with |beta_j| <= zero_threshold are
// hard-zeroed and stay frozen. lambda_vec carries the per-coefficient
// lambdas (zero entries are unpenalized).
SemiFit fit_penalized(const Dataset& data, const QuasiFamily& family,
                      const KernelSpec& kernel, const PenaltySpec& penalty,
                      const Eigen::VectorXd& lambda_vec,
                      const Eigen::VectorXd& beta_init,
                      const EstimatorOptions& opts = {});
// Variant reusing a precomputed unpenalized fit (profiling is shared).
SemiFit fit_penalized(const Dataset& data, const QuasiFamily& family,
                      const KernelSpec& kernel, const PenaltySpec& penalty,
                      const Eigen::VectorXd& lambda_vec,
                      const UnpenalizedFit& unpen,
                      const EstimatorOptions& opts = {});

// Sandwich covariance {l'' - n Sigma_l}^{-1} cov{l'} {l'' - n Sigma_l}^{-1}
// on the active coefficients; cov{l'} is the centered outer product of the
// per-observation scores q1(eta_i, Y_i) Z_i.
Eigen::MatrixXd sandwich_cov(const Dataset& data, const QuasiFamily& family,
                             const KernelSpec& kernel, const SemiFit& fit);

// Effective number of parameters tr[{l'' - n Sigma_l}^{-1} l''] on the
// active set.
double effective_df(const Dataset& data, const QuasiFamily& family,
                    const KernelSpec& kernel, const SemiFit& fit);

// Deviance inflated by the effective-parameter correction.
double gcv_score(const Dataset& data, const QuasiFamily& family,
                 const KernelSpec& kernel, const SemiFit& fit);

struct LambdaPathPoint {
  double lambda = 0.0;
  double gcv = 0.0;
  double df = 0.0;
  Eigen::VectorXd beta;
  std::vector<bool> zero_mask;
  bool ok = false;
  std::string error;
};

struct LambdaSelection {
  double lambda_star = 0.0;
  std::vector<LambdaPathPoint> path;
};

// Grid search over the scalar lambda with lambda_j = lambda * SE(beta_j^u);
// ties in GCV go to the smaller lambda. An empty grid requests the default
// 50-point log grid under a doubling search for the all-zero lambda.
LambdaSelection select_lambda(const Dataset& data, const QuasiFamily& family,
                              const KernelSpec& kernel,
                              const PenaltySpec& penalty,
                              const std::vector<double>& grid,
                              const UnpenalizedFit& unpen,
                              const std::vector<int>& exempt = {},
                              const EstimatorOptions& opts = {});
LambdaSelection select_lambda(const Dataset& data, const QuasiFamily& family,
                              const KernelSpec& kernel,
                              const PenaltySpec& penalty,
                              const std::vector<double>& grid,
                              const EstimatorOptions& opts = {});

struct LambdaPolicy {
  enum class Mode { none, fixed, gcv };
  Mode mode = Mode::gcv;
  double fixed_lambda = 0.0;
  bool se_scale = true;          // lambda_j = lambda * SE(beta_j^u)
  std::vector<int> exempt;       // coefficients never penalized
  std::vector<double> grid;      // empty: default log grid
};

struct BackfitResult {
  SemiFit fit;
  UnpenalizedFit unpenalized;
  std::optional<LambdaSelection> selection;
};

// Full pipeline: joint local profiling, penalized global fit (lambda from
// GCV when requested), final alpha refit on the grid with beta fixed.
BackfitResult backfit(const Dataset& data, const QuasiFamily& family,
                      const KernelSpec& kernel, const PenaltySpec& penalty,
                      const LambdaPolicy& policy,
                      const EstimatorOptions& opts = {});

// Linear predictor at the observations using the fit's coefficient curves.
Eigen::VectorXd fitted_eta(const Dataset& data, const SemiFit& fit);

}  // namespace gvcplm
