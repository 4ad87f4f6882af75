#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "gvcplm/dataset.hpp"
#include "gvcplm/family.hpp"
#include "gvcplm/kernel.hpp"

namespace gvcplm {

struct FitOptions {
  int max_iter = 100;
  int max_halvings = 10;
  double tol = 1e-9;
  double ridge_tau = 1e-8;
  int threads = 1;
};

// Local linear quasi-likelihood fit at one evaluation point: a estimates
// alpha(u0), b estimates alpha'(u0); beta_local is present when beta was
// estimated jointly.
struct LocalFit {
  double u0 = 0.0;
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  std::optional<Eigen::VectorXd> beta_local;
  int iterations = 0;
  bool converged = false;
  bool ridged = false;
  bool clamped = false;
  double effective_kernel_mass = 0.0;
};

struct CoefficientCurves {
  Eigen::VectorXd grid;        // strictly increasing, inside [omega_lo, omega_hi]
  Eigen::MatrixXd values;      // n_grid x p, alpha_j(grid_k)
  Eigen::MatrixXd derivatives; // n_grid x p, alpha_j'(grid_k)
};

// Maximizes the local likelihood over (a, b, beta) at u0 (the joint form).
LocalFit local_fit_joint(const Dataset& data, const QuasiFamily& family,
                         const KernelSpec& kernel, double u0,
                         const FitOptions& opts = {});

// Maximizes over (a, b) with beta held fixed (the backfit form).
LocalFit local_fit_alpha(const Dataset& data, const QuasiFamily& family,
                         const KernelSpec& kernel, double u0,
                         const Eigen::VectorXd& beta,
                         const FitOptions& opts = {});

// Fits alpha on an equispaced grid over [omega_lo, omega_hi] with beta fixed.
// Grid points are independent; they run in parallel in fixed blocks with
// deterministic warm starts, so results do not depend on the thread count.
CoefficientCurves alpha_on_grid(const Dataset& data, const QuasiFamily& family,
                                const KernelSpec& kernel,
                                const Eigen::VectorXd& beta, int n_grid,
                                const FitOptions& opts = {});

struct CvBandwidthResult {
  double h_star = 0.0;
  std::vector<double> h_grid;
  std::vector<double> cv_scores;  // +inf marks an all-fold failure for that h
};

// K-fold cross-validated bandwidth: folds by seeded shuffle, per-fold refit
// of the full (unpenalized) semiparametric model, held-out deviance summed.
CvBandwidthResult select_bandwidth_cv(const Dataset& data,
                                      const QuasiFamily& family,
                                      const KernelSpec& kernel_proto,
                                      const std::vector<double>& h_grid,
                                      int k_folds, std::uint64_t seed,
                                      const FitOptions& opts = {});

// Undersmoothing rescale h_opt * n^{-2/15}.
double undersmooth(double h_opt, Eigen::Index n);

}  // namespace gvcplm
