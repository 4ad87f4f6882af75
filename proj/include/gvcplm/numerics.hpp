#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace gvcplm {

// Adaptive Simpson quadrature with Richardson correction.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol, int max_depth = 60);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Chi-square distribution with (possibly non-integer) df > 0.
double chi2_cdf(double x, double df);
double chi2_sf(double x, double df);

// Piecewise-linear interpolation on a strictly increasing grid; x outside the
// grid is clamped to the endpoints.
double lin_interp(const Eigen::VectorXd& grid, const Eigen::VectorXd& values,
                  double x);
// Row-wise variant: interpolates every column of `values` at x.
Eigen::VectorXd lin_interp_row(const Eigen::VectorXd& grid,
                               const Eigen::MatrixXd& values, double x);

double median(std::vector<double> v);
// Median absolute deviation scaled by 1/0.6745.
double mad_scaled(const std::vector<double>& v);

// Spearman rank correlation (average ranks on ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Kolmogorov-Smirnov distance between the ECDF of `sample` and `cdf`.
double ks_distance(std::vector<double> sample,
                   const std::function<double(double)>& cdf);

}  // namespace gvcplm
