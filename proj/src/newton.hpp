#pragma once

// Internal Newton engine for weighted quasi-likelihood objectives
//   sum_i w_i Q(g^{-1}(r_i' theta + o_i), y_i),
// shared by the local smoother, the global beta step and the pilot GLM.
// Concavity (q2 < 0) makes the maximizer unique; step halving keeps the
// iteration monotone and a ridge fallback handles rank-deficient designs.

#include <Eigen/Dense>
#include <cmath>

#include "gvcplm/errors.hpp"
#include "gvcplm/family.hpp"

namespace gvcplm::detail {

struct NewtonOptions {
  int max_iter = 100;
  int max_halvings = 10;
  double tol = 1e-9;        // converged when max |dtheta_j| < tol(1+|theta_j|)
  double ridge_tau = 1e-8;  // added as tau*mean(diag(-H)) on solve failure
  bool force_ridge = false;  // rank-deficient by construction (thin window)
};

struct NewtonResult {
  Eigen::VectorXd theta;
  int iterations = 0;
  bool converged = false;
  bool ridged = false;
  bool clamped = false;
  double objective = 0.0;
};

inline double weighted_quasi_loglik(const QuasiFamily& family,
                                    const Eigen::VectorXd& eta,
                                    const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& w) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    total += w(i) * family.quasi_loglik_term(family.inv_link(eta(i)), y(i));
  return total;
}

// Maximizes the weighted quasi-likelihood over theta. R is the regressor
// matrix (one row per observation), o an offset added to the linear
// predictor, w nonnegative weights.
inline NewtonResult newton_quasi(const Eigen::MatrixXd& R,
                                 const Eigen::VectorXd& o,
                                 const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& w,
                                 const QuasiFamily& family,
                                 Eigen::VectorXd theta,
                                 const NewtonOptions& opts,
                                 const char* stage) {
  const Eigen::Index m = R.cols();
  NewtonResult res;
  if (m == 0) {
    res.theta = theta;
    res.converged = true;
    res.objective = weighted_quasi_loglik(family, o, y, w);
    return res;
  }

  Eigen::VectorXd eta = R * theta + o;
  double obj = weighted_quasi_loglik(family, eta, y, w);
  if (!std::isfinite(obj))
    throw FitError(stage, "non-finite objective at the starting point");

  Eigen::VectorXd grad(m);
  Eigen::MatrixXd neg_hess(m, m);
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    res.iterations = iter;
    grad.setZero();
    neg_hess.setZero();
    bool clamped = false;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      if (w(i) == 0.0) continue;
      const double e = eta(i);
      if (family.clamps(e)) clamped = true;
      const double wq1 = w(i) * family.q1(e, y(i));
      const double wq2 = -w(i) * family.q2(e, y(i));
      grad.noalias() += wq1 * R.row(i).transpose();
      neg_hess.selfadjointView<Eigen::Lower>().rankUpdate(
          R.row(i).transpose(), wq2);
    }
    res.clamped = res.clamped || clamped;
    neg_hess = neg_hess.selfadjointView<Eigen::Lower>();

    // Solve (-H) dtheta = grad, escalating the ridge if the factorization
    // is unusable.
    Eigen::VectorXd step;
    double tau = opts.ridge_tau;
    const double diag_mean = neg_hess.diagonal().mean();
    for (int attempt = opts.force_ridge ? 1 : 0;; ++attempt) {
      Eigen::MatrixXd lhs = neg_hess;
      if (attempt > 0) {
        lhs.diagonal().array() += tau * std::max(diag_mean, 1e-300);
        res.ridged = true;
        tau *= 100.0;
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
      step = ldlt.solve(grad);
      const bool ok = ldlt.info() == Eigen::Success && step.allFinite() &&
                      (lhs * step - grad).norm() <=
                          1e-6 * (grad.norm() + 1e-12);
      if (ok) break;
      if (attempt >= 4)
        throw FitError(stage,
                       "singular quasi-likelihood Hessian (rank-deficient "
                       "local design or bandwidth too small)");
    }

    // Newton decrement convergence check before stepping.
    bool small = true;
    for (Eigen::Index j = 0; j < m; ++j)
      if (std::fabs(step(j)) >= opts.tol * (1.0 + std::fabs(theta(j)))) {
        small = false;
        break;
      }
    if (small) {
      res.converged = true;
      break;
    }

    double t = 1.0;
    bool accepted = false;
    for (int half = 0; half <= opts.max_halvings; ++half) {
      Eigen::VectorXd cand = theta + t * step;
      Eigen::VectorXd eta_cand = R * cand + o;
      double obj_cand = weighted_quasi_loglik(family, eta_cand, y, w);
      if (std::isfinite(obj_cand) && obj_cand >= obj) {
        theta = std::move(cand);
        eta = std::move(eta_cand);
        obj = obj_cand;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no ascent possible; treated as stalled
  }

  res.theta = std::move(theta);
  res.objective = obj;
  return res;
}

}  // namespace gvcplm::detail
