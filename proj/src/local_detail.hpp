#pragma once

// Internal context shared by the local smoother and the profiling step of the
// estimator: observations sorted by U for kernel-window lookup plus the pilot
// GLM coefficients used as Newton starting values.

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "gvcplm/dataset.hpp"
#include "gvcplm/family.hpp"
#include "gvcplm/kernel.hpp"
#include "gvcplm/local_fit.hpp"
#include "newton.hpp"

namespace gvcplm::detail {

struct LocalContext {
  const Dataset* data = nullptr;
  const QuasiFamily* family = nullptr;
  const KernelSpec* kernel = nullptr;
  std::vector<int> order;        // row indices sorted by u
  std::vector<double> u_sorted;  // data->u in sorted order
  Eigen::VectorXd pilot_a;       // unweighted GLM of y on X
  NewtonOptions newton;

  Eigen::Index p() const { return data->p(); }
  Eigen::Index d() const { return data->d(); }
};

inline Eigen::VectorXd pilot_glm(const Dataset& data, const QuasiFamily& family,
                                 const NewtonOptions& opts) {
  const Eigen::Index n = data.n();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(data.p());
  // Start the leading coefficient near g(mean response) when the first X
  // column is constant; harmless otherwise.
  double ybar = data.y.mean();
  switch (family.kind()) {
    case QuasiFamily::Kind::poisson_log:
      ybar = std::max(ybar, 1e-8);
      break;
    case QuasiFamily::Kind::bernoulli_logit:
      ybar = std::min(std::max(ybar, 1e-8), 1.0 - 1e-8);
      break;
    default:
      break;
  }
  const double x0 = data.x(0, 0);
  if (x0 != 0.0) theta(0) = family.link(ybar) / x0;
  Eigen::VectorXd offset = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  auto res = newton_quasi(data.x, offset, data.y, w, family, theta, opts,
                          "pilot-glm");
  return res.theta;
}

inline LocalContext make_local_context(const Dataset& data,
                                       const QuasiFamily& family,
                                       const KernelSpec& kernel,
                                       const FitOptions& opts) {
  LocalContext ctx;
  ctx.data = &data;
  ctx.family = &family;
  ctx.kernel = &kernel;
  ctx.newton.max_iter = opts.max_iter;
  ctx.newton.max_halvings = opts.max_halvings;
  ctx.newton.tol = opts.tol;
  ctx.newton.ridge_tau = opts.ridge_tau;
  const Eigen::Index n = data.n();
  ctx.order.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ctx.order[static_cast<std::size_t>(i)] = static_cast<int>(i);
  std::stable_sort(ctx.order.begin(), ctx.order.end(),
                   [&](int a, int b) { return data.u(a) < data.u(b); });
  ctx.u_sorted.resize(ctx.order.size());
  for (std::size_t k = 0; k < ctx.order.size(); ++k)
    ctx.u_sorted[k] = data.u(ctx.order[k]);
  ctx.pilot_a = pilot_glm(data, family, ctx.newton);
  return ctx;
}

// Shared grid driver (defined in local_fit.cpp): beta == nullptr runs joint
// fits, otherwise alpha-only fits with beta fixed.
CoefficientCurves alpha_grid_with_context(const LocalContext& ctx, int n_grid,
                                          const Eigen::VectorXd* beta,
                                          int threads,
                                          std::vector<LocalFit>* fits_out);

// Raw local fit at u0. beta_fixed == nullptr requests the joint fit over
// (a, b, beta); otherwise beta enters through the offset. warm, when given,
// supplies the full starting parameter (must match the fit's dimension).
inline LocalFit fit_local(const LocalContext& ctx, double u0,
                          const Eigen::VectorXd* beta_fixed,
                          const Eigen::VectorXd* warm,
                          Eigen::VectorXd* theta_out = nullptr) {
  const Dataset& data = *ctx.data;
  const Eigen::Index p = data.p();
  const Eigen::Index d = data.d();
  const bool joint = beta_fixed == nullptr;
  const Eigen::Index m = joint ? 2 * p + d : 2 * p;

  const double radius = ctx.kernel->radius();
  auto lo_it = std::lower_bound(ctx.u_sorted.begin(), ctx.u_sorted.end(),
                                u0 - radius);
  auto hi_it = std::upper_bound(ctx.u_sorted.begin(), ctx.u_sorted.end(),
                                u0 + radius);
  const std::size_t first = static_cast<std::size_t>(lo_it - ctx.u_sorted.begin());
  const std::size_t last = static_cast<std::size_t>(hi_it - ctx.u_sorted.begin());

  // Count strictly positive weights before building the design.
  std::vector<int> rows;
  rows.reserve(last - first);
  double mass = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    const int i = ctx.order[k];
    const double w = ctx.kernel->kh(data.u(i) - u0);
    if (w > 0.0) {
      rows.push_back(i);
      mass += w;
    }
  }
  if (rows.empty())
    throw FitError("local-fit",
                   "no observations with nonzero kernel weight at u0 = " +
                       std::to_string(u0) + "; increase the bandwidth");
  // Boundary windows can hold fewer points than parameters; the ridge
  // fallback inside the Newton solve keeps those fits defined and flags them.
  const bool thin_window = static_cast<Eigen::Index>(rows.size()) < m + 1;

  const Eigen::Index nw = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd R(nw, m);
  Eigen::VectorXd w(nw), yw(nw), offset(nw);
  for (Eigen::Index k = 0; k < nw; ++k) {
    const int i = rows[static_cast<std::size_t>(k)];
    const double du = data.u(i) - u0;
    R.block(k, 0, 1, p) = data.x.row(i);
    R.block(k, p, 1, p) = data.x.row(i) * du;
    if (joint && d > 0) R.block(k, 2 * p, 1, d) = data.z.row(i);
    w(k) = ctx.kernel->kh(du);
    yw(k) = data.y(i);
    offset(k) = joint || d == 0 ? 0.0 : data.z.row(i).dot(*beta_fixed);
  }

  Eigen::VectorXd theta0;
  if (warm != nullptr && warm->size() == m) {
    theta0 = *warm;
  } else {
    theta0 = Eigen::VectorXd::Zero(m);
    theta0.head(p) = ctx.pilot_a;
  }

  NewtonOptions nopts = ctx.newton;
  nopts.force_ridge = nopts.force_ridge || thin_window;
  auto nr = newton_quasi(R, offset, yw, w, *ctx.family, theta0, nopts,
                         "local-fit");

  LocalFit fit;
  fit.u0 = u0;
  fit.a = nr.theta.head(p);
  fit.b = nr.theta.segment(p, p);
  if (joint && d > 0) fit.beta_local = nr.theta.tail(d);
  fit.iterations = nr.iterations;
  fit.converged = nr.converged;
  fit.ridged = nr.ridged;
  fit.clamped = nr.clamped;
  fit.effective_kernel_mass = mass;
  if (theta_out != nullptr) *theta_out = nr.theta;
  return fit;
}

}  // namespace gvcplm::detail
