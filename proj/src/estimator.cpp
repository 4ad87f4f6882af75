#include "gvcplm/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "gvcplm/numerics.hpp"
#include "gvcplm/parallel.hpp"
#include "gvcplm/rng.hpp"
#include "local_detail.hpp"

namespace gvcplm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Profiled {
  Eigen::MatrixXd alpha_at_obs;  // n x p
  Eigen::VectorXd offset;        // X_i' alpha_tilde(U_i)
  CoefficientCurves curves;
  bool ridged = false;
  bool clamped = false;
};

// Alpha-tilde profiling: joint local fits on a grid, linearly interpolated to
// the observed points. profile_exact forces one fit per observation instead
// (validation path; quadratic interpolation error is below smoothing error).
Profiled profile_alpha(const detail::LocalContext& ctx,
                       const EstimatorOptions& opts) {
  const Dataset& data = *ctx.data;
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  Profiled out;

  if (opts.profile_exact) {
    out.alpha_at_obs.resize(n, p);
    constexpr int kBlock = 16;
    const Eigen::Index n_sorted = static_cast<Eigen::Index>(ctx.order.size());
    const Eigen::Index n_blocks = (n_sorted + kBlock - 1) / kBlock;
    std::vector<std::string> failures(static_cast<std::size_t>(n_blocks));
    parallel_for(n_blocks, opts.fit.threads, [&](std::int64_t blk) {
      Eigen::VectorXd warm;
      bool have_warm = false;
      const Eigen::Index begin = blk * kBlock;
      const Eigen::Index end = std::min(begin + kBlock, n_sorted);
      for (Eigen::Index k = begin; k < end; ++k) {
        const int i = ctx.order[static_cast<std::size_t>(k)];
        try {
          Eigen::VectorXd theta;
          LocalFit fit = detail::fit_local(ctx, data.u(i), nullptr,
                                           have_warm ? &warm : nullptr, &theta);
          out.alpha_at_obs.row(i) = fit.a.transpose();
          warm = std::move(theta);
          have_warm = true;
        } catch (const FitError& e) {
          if (failures[static_cast<std::size_t>(blk)].empty())
            failures[static_cast<std::size_t>(blk)] = e.what();
        }
      }
    });
    for (const auto& f : failures)
      if (!f.empty()) throw FitError("profile", f);
    // Also keep grid curves for reporting/prediction.
    out.curves = detail::alpha_grid_with_context(ctx, opts.profile_grid,
                                                 nullptr, opts.fit.threads,
                                                 nullptr);
  } else {
    std::vector<LocalFit> fits;
    out.curves = detail::alpha_grid_with_context(ctx, opts.profile_grid,
                                                 nullptr, opts.fit.threads,
                                                 &fits);
    for (const auto& f : fits) {
      out.ridged = out.ridged || f.ridged;
      out.clamped = out.clamped || f.clamped;
    }
    out.alpha_at_obs.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
      out.alpha_at_obs.row(i) =
          lin_interp_row(out.curves.grid, out.curves.values, data.u(i))
              .transpose();
  }

  out.offset.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out.offset(i) = data.x.row(i).dot(out.alpha_at_obs.row(i));
  return out;
}

// Solves lhs * x = rhs for symmetric positive definite lhs with an escalating
// ridge fallback; used by the LQA subproblem.
Eigen::VectorXd solve_spd(Eigen::MatrixXd lhs, const Eigen::VectorXd& rhs,
                          bool* ridged, const char* stage) {
  const double diag_mean = std::max(lhs.diagonal().mean(), 1e-300);
  double tau = 1e-8;
  for (int attempt = 0;; ++attempt) {
    Eigen::MatrixXd work = lhs;
    if (attempt > 0) {
      work.diagonal().array() += tau * diag_mean;
      if (ridged != nullptr) *ridged = true;
      tau *= 100.0;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(work);
    Eigen::VectorXd x = ldlt.solve(rhs);
    if (ldlt.info() == Eigen::Success && x.allFinite() &&
        (work * x - rhs).norm() <= 1e-6 * (rhs.norm() + 1e-12))
      return x;
    if (attempt >= 4)
      throw FitError(stage, "singular system in penalized Newton step");
  }
}

struct CoreFit {
  Eigen::VectorXd beta;
  std::vector<bool> zero_mask;
  double quasi_ll = 0.0;
  int iterations = 0;
  bool converged = false;
  bool ridged = false;
  bool clamped = false;
};

double lqa_weight_or_zero(const PenaltySpec& p, double lambda_j, double beta_j) {
  const double b = std::fabs(beta_j);
  if (lambda_j <= 0.0 || p.kind == PenaltyKind::none || b <= p.zero_threshold)
    return 0.0;
  return penalty_deriv(p, lambda_j, b) / b;
}

// Per-coefficient drop thresholds: the absolute floor plus the SE-scaled
// reading of the LQA rule (a penalized coefficient within a couple of
// standard errors of zero is set to zero and frozen).
Eigen::VectorXd drop_thresholds(const PenaltySpec& penalty,
                                const Eigen::VectorXd& se_u,
                                Eigen::Index d) {
  Eigen::VectorXd eps = Eigen::VectorXd::Constant(d, penalty.zero_threshold);
  if (penalty.zero_se_multiplier > 0.0 && se_u.size() == d)
    for (Eigen::Index j = 0; j < d; ++j)
      if (std::isfinite(se_u(j)) && se_u(j) > 0.0)
        eps(j) = std::max(eps(j), penalty.zero_se_multiplier * se_u(j));
  return eps;
}

// LQA-modified Newton-Raphson on the active set. Zeroed coefficients are
// frozen: the active set is monotone over iterations.
CoreFit lqa_fit(const Dataset& data, const QuasiFamily& family,
                const Eigen::VectorXd& offset,
                const Eigen::VectorXd& lambda_vec, const PenaltySpec& penalty,
                const Eigen::VectorXd& beta_init, const Eigen::VectorXd& eps,
                const EstimatorOptions& opts) {
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();
  CoreFit core;
  core.zero_mask.assign(static_cast<std::size_t>(d), false);
  core.beta = beta_init;

  const bool penalized =
      penalty.kind != PenaltyKind::none && lambda_vec.size() == d &&
      lambda_vec.maxCoeff() > 0.0;

  if (d == 0) {
    core.converged = true;
    core.quasi_ll = detail::weighted_quasi_loglik(
        family, offset, data.y, Eigen::VectorXd::Ones(n));
    return core;
  }

  detail::NewtonOptions nopts;
  nopts.max_iter = opts.fit.max_iter;
  nopts.max_halvings = opts.fit.max_halvings;
  nopts.tol = opts.fit.tol;
  nopts.ridge_tau = opts.fit.ridge_tau;

  if (!penalized) {
    auto nr = detail::newton_quasi(data.z, offset, data.y,
                                   Eigen::VectorXd::Ones(n), family, beta_init,
                                   nopts, "global-fit");
    core.beta = nr.theta;
    core.quasi_ll = nr.objective;
    core.iterations = nr.iterations;
    core.converged = nr.converged;
    core.ridged = nr.ridged;
    core.clamped = nr.clamped;
    return core;
  }

  std::vector<int> active;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (lambda_vec(j) > 0.0 && std::fabs(core.beta(j)) <= eps(j)) {
      core.beta(j) = 0.0;
      core.zero_mask[static_cast<std::size_t>(j)] = true;
    } else {
      active.push_back(static_cast<int>(j));
    }
  }

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  for (int iter = 1; iter <= opts.fit.max_iter; ++iter) {
    core.iterations = iter;
    const Eigen::Index s = static_cast<Eigen::Index>(active.size());
    if (s == 0) {
      core.converged = true;
      break;
    }

    Eigen::MatrixXd za(n, s);
    Eigen::VectorXd ba(s), wdiag(s);
    for (Eigen::Index k = 0; k < s; ++k) {
      za.col(k) = data.z.col(active[static_cast<std::size_t>(k)]);
      ba(k) = core.beta(active[static_cast<std::size_t>(k)]);
      wdiag(k) = lqa_weight_or_zero(penalty,
                                    lambda_vec(active[static_cast<std::size_t>(k)]),
                                    ba(k));
    }

    Eigen::VectorXd eta = offset + za * ba;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(s);
    Eigen::MatrixXd neg_hess = Eigen::MatrixXd::Zero(s, s);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = eta(i);
      if (family.clamps(e)) core.clamped = true;
      grad.noalias() += family.q1(e, data.y(i)) * za.row(i).transpose();
      neg_hess.selfadjointView<Eigen::Lower>().rankUpdate(
          za.row(i).transpose(), -family.q2(e, data.y(i)));
    }
    neg_hess = neg_hess.selfadjointView<Eigen::Lower>();

    // Surrogate S(b) = l(b) - (n/2) sum w_j b_j^2 with weights frozen at the
    // current iterate; the Newton step solves {l'' - nW} delta = -(l' - nWb).
    Eigen::MatrixXd lhs = neg_hess;
    lhs.diagonal() += static_cast<double>(n) * wdiag;
    Eigen::VectorXd rhs = grad - static_cast<double>(n) * wdiag.cwiseProduct(ba);
    Eigen::VectorXd step = solve_spd(lhs, rhs, &core.ridged, "penalized-fit");

    auto surrogate = [&](const Eigen::VectorXd& b) {
      const Eigen::VectorXd e = offset + za * b;
      double s_obj = detail::weighted_quasi_loglik(family, e, data.y, ones);
      s_obj -= 0.5 * static_cast<double>(n) *
               wdiag.cwiseProduct(b).dot(b);
      return s_obj;
    };
    const double s0 = surrogate(ba);
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd ba_new;
    for (int half = 0; half <= opts.fit.max_halvings; ++half) {
      ba_new = ba + t * step;
      const double s_new = surrogate(ba_new);
      if (std::isfinite(s_new) && s_new >= s0) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;

    const double max_step = (t * step).cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < s; ++k)
      core.beta(active[static_cast<std::size_t>(k)]) = ba_new(k);

    // Hard-zero rule: penalized coefficients at or below the threshold are
    // set to exactly zero and never resurrected.
    bool active_changed = false;
    std::vector<int> next_active;
    next_active.reserve(active.size());
    for (int j : active) {
      if (lambda_vec(j) > 0.0 && std::fabs(core.beta(j)) <= eps(j)) {
        core.beta(j) = 0.0;
        core.zero_mask[static_cast<std::size_t>(j)] = true;
        active_changed = true;
      } else {
        next_active.push_back(j);
      }
    }
    active = std::move(next_active);

    if (!active_changed && max_step < 1e-8) {
      core.converged = true;
      break;
    }
  }

  const Eigen::VectorXd eta_final = offset + data.z * core.beta;
  core.quasi_ll =
      detail::weighted_quasi_loglik(family, eta_final, data.y, ones);
  return core;
}

// Sandwich pieces restricted to the active coefficients.
struct ActiveModel {
  std::vector<int> idx;
  Eigen::MatrixXd za;
  Eigen::VectorXd eta;
};

ActiveModel active_model(const Dataset& data, const SemiFit& fit) {
  ActiveModel am;
  am.idx = fit.active_set();
  const Eigen::Index s = static_cast<Eigen::Index>(am.idx.size());
  am.za.resize(data.n(), s);
  for (Eigen::Index k = 0; k < s; ++k)
    am.za.col(k) = data.z.col(am.idx[static_cast<std::size_t>(k)]);
  am.eta = fit.eta_offset + data.z * fit.beta;
  return am;
}

Eigen::VectorXd sigma_lambda_diag(const SemiFit& fit,
                                  const std::vector<int>& active) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    const int j = active[k];
    const double lam =
        fit.lambda_used.size() > 0 ? fit.lambda_used(j) : 0.0;
    w(static_cast<Eigen::Index>(k)) =
        lqa_weight_or_zero(fit.penalty_used, lam, fit.beta(j));
  }
  return w;
}

Eigen::MatrixXd neg_hessian_active(const Dataset& data,
                                   const QuasiFamily& family,
                                   const ActiveModel& am) {
  const Eigen::Index s = am.za.cols();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(s, s);
  for (Eigen::Index i = 0; i < data.n(); ++i)
    h.selfadjointView<Eigen::Lower>().rankUpdate(
        am.za.row(i).transpose(), -family.q2(am.eta(i), data.y(i)));
  return h.selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd sandwich_active(const Dataset& data, const QuasiFamily& family,
                                const SemiFit& fit, const ActiveModel& am) {
  const Eigen::Index n = data.n();
  const Eigen::Index s = am.za.cols();
  if (s == 0) return Eigen::MatrixXd(0, 0);

  // Bread: l'' - n Sigma_lambda (negative definite).
  Eigen::MatrixXd bread = -neg_hessian_active(data, family, am);
  bread.diagonal() -= static_cast<double>(n) * sigma_lambda_diag(fit, am.idx);

  // Meat: centered outer product of psi_i = q1(eta_i, y_i) z_i.
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(s, s);
  Eigen::VectorXd psi_bar = Eigen::VectorXd::Zero(s);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd psi =
        family.q1(am.eta(i), data.y(i)) * am.za.row(i).transpose();
    meat.selfadjointView<Eigen::Lower>().rankUpdate(psi, 1.0);
    psi_bar += psi;
  }
  meat = meat.selfadjointView<Eigen::Lower>();
  psi_bar /= static_cast<double>(n);
  meat.noalias() -= static_cast<double>(n) * psi_bar * psi_bar.transpose();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(bread);
  if (ldlt.info() != Eigen::Success)
    throw FitError("sandwich", "singular bread matrix");
  const Eigen::MatrixXd inv_bread =
      ldlt.solve(Eigen::MatrixXd::Identity(s, s));
  Eigen::MatrixXd cov = inv_bread * meat * inv_bread;
  cov = 0.5 * (cov + cov.transpose()).eval();  // enforce exact symmetry
  if (!cov.allFinite()) throw FitError("sandwich", "non-finite covariance");
  return cov;
}

double effective_df_active(const Dataset& data, const QuasiFamily& family,
                           const SemiFit& fit, const ActiveModel& am) {
  const Eigen::Index s = am.za.cols();
  if (s == 0) return 0.0;
  const Eigen::MatrixXd neg_h = neg_hessian_active(data, family, am);
  Eigen::MatrixXd denom = neg_h;
  denom.diagonal() +=
      static_cast<double>(data.n()) * sigma_lambda_diag(fit, am.idx);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(denom);
  if (ldlt.info() != Eigen::Success)
    throw FitError("effective-df", "singular penalized Hessian");
  return ldlt.solve(neg_h).trace();
}

SemiFit assemble_fit(const Dataset& data, const QuasiFamily& family,
                     const KernelSpec& kernel, const Profiled& profiled,
                     const CoreFit& core, const Eigen::VectorXd& lambda_vec,
                     const PenaltySpec& penalty, const EstimatorOptions& opts) {
  SemiFit fit;
  fit.beta = core.beta;
  fit.zero_mask = core.zero_mask;
  fit.lambda_used = lambda_vec;
  fit.penalty_used = penalty;
  fit.penalty_used.lambda_vec = lambda_vec;
  fit.iterations = core.iterations;
  fit.converged = core.converged;
  fit.ridged = core.ridged || profiled.ridged;
  fit.clamped = core.clamped || profiled.clamped;
  fit.eta_offset = profiled.offset;
  fit.quasi_ll = core.quasi_ll;

  const Eigen::Index n = data.n();
  const Eigen::VectorXd eta = profiled.offset + data.z * fit.beta;
  Eigen::VectorXd mu(n);
  for (Eigen::Index i = 0; i < n; ++i) mu(i) = family.inv_link(eta(i));
  fit.deviance = deviance(family, data.y, mu);

  const ActiveModel am = active_model(data, fit);
  fit.effective_df = effective_df_active(data, family, fit, am);
  if (fit.effective_df >= static_cast<double>(n))
    throw FitError("gcv", "effective parameters reached the sample size");
  const double denom =
      1.0 - fit.effective_df / static_cast<double>(n);
  fit.gcv = fit.deviance / (static_cast<double>(n) * denom * denom);

  fit.se = Eigen::VectorXd::Constant(data.d(), kNaN);
  if (opts.with_curves) {
    if (!am.idx.empty()) {
      const Eigen::MatrixXd cov = sandwich_active(data, family, fit, am);
      for (std::size_t k = 0; k < am.idx.size(); ++k)
        fit.se(am.idx[k]) = std::sqrt(std::max(
            cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)),
            0.0));
    }
    fit.alpha_curves = alpha_on_grid(data, family, kernel, fit.beta,
                                     opts.curve_grid, opts.fit);
  }
  return fit;
}

Profiled profiled_from_unpen(const UnpenalizedFit& unpen) {
  Profiled prof;
  prof.alpha_at_obs = unpen.alpha_tilde;
  prof.offset = unpen.eta_offset;
  prof.curves = unpen.curves_tilde;
  prof.ridged = unpen.ridged;
  prof.clamped = unpen.clamped;
  return prof;
}

std::vector<double> default_lambda_grid(
    const Dataset& data, const QuasiFamily& family, const PenaltySpec& penalty,
    const UnpenalizedFit& unpen, const std::vector<int>& exempt,
    const EstimatorOptions& opts, const Eigen::VectorXd& se_scale) {
  EstimatorOptions path_opts = opts;
  path_opts.with_curves = false;
  const Profiled prof = profiled_from_unpen(unpen);

  const Eigen::VectorXd eps = drop_thresholds(penalty, unpen.se, data.d());
  auto all_zeroed = [&](double lam) {
    Eigen::VectorXd lv = lam * se_scale;
    for (int j : exempt) lv(j) = 0.0;
    CoreFit c = lqa_fit(data, family, prof.offset, lv, penalty, unpen.beta,
                        eps, path_opts);
    for (Eigen::Index j = 0; j < data.d(); ++j)
      if (lv(j) > 0.0 && !c.zero_mask[static_cast<std::size_t>(j)])
        return false;
    return true;
  };

  double lam = 1.0;
  int guard = 0;
  if (all_zeroed(lam)) {
    while (guard++ < 60 && lam > 1e-12 && all_zeroed(0.5 * lam)) lam *= 0.5;
  } else {
    while (guard++ < 60 && !all_zeroed(lam)) lam *= 2.0;
  }
  const double lam_max = lam;
  const double lam_min = 1e-3 * lam_max;
  const int n_points = 50;
  std::vector<double> grid(n_points);
  const double log_lo = std::log(lam_min), log_hi = std::log(lam_max);
  for (int k = 0; k < n_points; ++k)
    grid[static_cast<std::size_t>(k)] =
        std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(k) /
                              static_cast<double>(n_points - 1));
  return grid;
}

}  // namespace

UnpenalizedFit fit_unpenalized(const Dataset& data, const QuasiFamily& family,
                               const KernelSpec& kernel,
                               const EstimatorOptions& opts) {
  if (data.n() <= 2 * data.p() + data.d())
    throw std::invalid_argument("fit_unpenalized: needs n > 2p + d");

  auto ctx = detail::make_local_context(data, family, kernel, opts.fit);
  const Profiled prof = profile_alpha(ctx, opts);

  UnpenalizedFit out;
  out.alpha_tilde = prof.alpha_at_obs;
  out.curves_tilde = prof.curves;
  out.eta_offset = prof.offset;
  out.ridged = prof.ridged;
  out.clamped = prof.clamped;

  PenaltySpec none;
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(data.d());
  CoreFit core = lqa_fit(data, family, prof.offset, zeros, none,
                         Eigen::VectorXd::Zero(data.d()), zeros, opts);
  out.beta = core.beta;
  out.quasi_ll = core.quasi_ll;
  out.iterations = core.iterations;
  out.converged = core.converged;
  out.ridged = out.ridged || core.ridged;
  out.clamped = out.clamped || core.clamped;

  const Eigen::Index n = data.n();
  Eigen::VectorXd eta = prof.offset + data.z * core.beta;
  Eigen::VectorXd mu(n);
  for (Eigen::Index i = 0; i < n; ++i) mu(i) = family.inv_link(eta(i));
  out.deviance = deviance(family, data.y, mu);

  if (data.d() > 0) {
    SemiFit tmp;
    tmp.beta = core.beta;
    tmp.zero_mask.assign(static_cast<std::size_t>(data.d()), false);
    tmp.lambda_used = zeros;
    tmp.penalty_used = none;
    tmp.eta_offset = prof.offset;
    const ActiveModel am = active_model(data, tmp);
    out.cov = sandwich_active(data, family, tmp, am);
    out.se.resize(data.d());
    for (Eigen::Index j = 0; j < data.d(); ++j)
      out.se(j) = std::sqrt(std::max(out.cov(j, j), 0.0));
  }
  return out;
}

SemiFit fit_penalized(const Dataset& data, const QuasiFamily& family,
                      const KernelSpec& kernel, const PenaltySpec& penalty,
                      const Eigen::VectorXd& lambda_vec,
                      const UnpenalizedFit& unpen,
                      const EstimatorOptions& opts) {
  penalty.validate(static_cast<int>(data.d()));
  Eigen::VectorXd lv = lambda_vec;
  if (lv.size() == 0) lv = Eigen::VectorXd::Zero(data.d());
  if (lv.size() != data.d())
    throw std::invalid_argument("fit_penalized: lambda_vec length must be d");
  const Profiled prof = profiled_from_unpen(unpen);
  const Eigen::VectorXd eps = drop_thresholds(penalty, unpen.se, data.d());
  CoreFit core = lqa_fit(data, family, prof.offset, lv, penalty, unpen.beta,
                         eps, opts);
  return assemble_fit(data, family, kernel, prof, core, lv, penalty, opts);
}

SemiFit fit_penalized(const Dataset& data, const QuasiFamily& family,
                      const KernelSpec& kernel, const PenaltySpec& penalty,
                      const Eigen::VectorXd& lambda_vec,
                      const Eigen::VectorXd& beta_init,
                      const EstimatorOptions& opts) {
  UnpenalizedFit unpen = fit_unpenalized(data, family, kernel, opts);
  if (beta_init.size() == data.d()) unpen.beta = beta_init;
  return fit_penalized(data, family, kernel, penalty, lambda_vec, unpen, opts);
}

Eigen::MatrixXd sandwich_cov(const Dataset& data, const QuasiFamily& family,
                             const KernelSpec& kernel, const SemiFit& fit) {
  (void)kernel;
  const ActiveModel am = active_model(data, fit);
  if (am.idx.empty())
    throw std::invalid_argument("sandwich_cov: active set is empty");
  return sandwich_active(data, family, fit, am);
}

double effective_df(const Dataset& data, const QuasiFamily& family,
                    const KernelSpec& kernel, const SemiFit& fit) {
  (void)kernel;
  const ActiveModel am = active_model(data, fit);
  return effective_df_active(data, family, fit, am);
}

double gcv_score(const Dataset& data, const QuasiFamily& family,
                 const KernelSpec& kernel, const SemiFit& fit) {
  const double e = effective_df(data, family, kernel, fit);
  const double n = static_cast<double>(data.n());
  if (e >= n) throw FitError("gcv", "effective parameters reached sample size");
  const Eigen::VectorXd eta = fit.eta_offset + data.z * fit.beta;
  Eigen::VectorXd mu(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) mu(i) = family.inv_link(eta(i));
  const double dev = deviance(family, data.y, mu);
  const double denom = 1.0 - e / n;
  return dev / (n * denom * denom);
}

LambdaSelection select_lambda(const Dataset& data, const QuasiFamily& family,
                              const KernelSpec& kernel,
                              const PenaltySpec& penalty,
                              const std::vector<double>& grid,
                              const UnpenalizedFit& unpen,
                              const std::vector<int>& exempt,
                              const EstimatorOptions& opts) {
  if (penalty.kind == PenaltyKind::l0)
    throw std::invalid_argument(
        "select_lambda: L0 is handled by exhaustive subset search");
  LambdaSelection sel;
  if (data.d() == 0) return sel;
  for (int j : exempt)
    if (j < 0 || j >= data.d())
      throw std::invalid_argument("select_lambda: exempt index out of range");

  Eigen::VectorXd se_scale = unpen.se;
  for (Eigen::Index j = 0; j < se_scale.size(); ++j)
    if (!std::isfinite(se_scale(j)) || se_scale(j) <= 0.0) se_scale(j) = 1e-12;

  std::vector<double> lam_grid = grid;
  if (lam_grid.empty())
    lam_grid = default_lambda_grid(data, family, penalty, unpen, exempt, opts,
                                   se_scale);
  std::sort(lam_grid.begin(), lam_grid.end());
  for (double lam : lam_grid)
    if (lam < 0.0)
      throw std::invalid_argument("select_lambda: lambdas must be >= 0");

  EstimatorOptions path_opts = opts;
  path_opts.with_curves = false;
  sel.path.resize(lam_grid.size());

  parallel_for(static_cast<std::int64_t>(lam_grid.size()), opts.fit.threads,
               [&](std::int64_t k) {
                 LambdaPathPoint& pt = sel.path[static_cast<std::size_t>(k)];
                 pt.lambda = lam_grid[static_cast<std::size_t>(k)];
                 Eigen::VectorXd lv = pt.lambda * se_scale;
                 for (int j : exempt) lv(j) = 0.0;
                 try {
                   SemiFit f = fit_penalized(data, family, kernel, penalty, lv,
                                             unpen, path_opts);
                   pt.gcv = f.gcv;
                   pt.df = f.effective_df;
                   pt.beta = f.beta;
                   pt.zero_mask = f.zero_mask;
                   pt.ok = true;
                 } catch (const std::exception& e) {
                   pt.ok = false;
                   pt.error = e.what();
                 }
               });

  bool any_ok = false;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pt : sel.path) {
    if (!pt.ok) continue;
    any_ok = true;
    if (pt.gcv < best) {  // ties keep the earlier (smaller) lambda
      best = pt.gcv;
      sel.lambda_star = pt.lambda;
    }
  }
  if (!any_ok)
    throw FitError("select-lambda",
                   "every lambda in the grid failed; widen the grid");
  return sel;
}

LambdaSelection select_lambda(const Dataset& data, const QuasiFamily& family,
                              const KernelSpec& kernel,
                              const PenaltySpec& penalty,
                              const std::vector<double>& grid,
                              const EstimatorOptions& opts) {
  const UnpenalizedFit unpen = fit_unpenalized(data, family, kernel, opts);
  return select_lambda(data, family, kernel, penalty, grid, unpen, {}, opts);
}

BackfitResult backfit(const Dataset& data, const QuasiFamily& family,
                      const KernelSpec& kernel, const PenaltySpec& penalty,
                      const LambdaPolicy& policy, const EstimatorOptions& opts) {
  BackfitResult out;
  out.unpenalized = fit_unpenalized(data, family, kernel, opts);

  Eigen::VectorXd lambda_vec = Eigen::VectorXd::Zero(data.d());
  if (data.d() > 0 && penalty.kind != PenaltyKind::none &&
      policy.mode != LambdaPolicy::Mode::none) {
    if (policy.mode == LambdaPolicy::Mode::fixed) {
      if (penalty.lambda_vec.size() == data.d()) {
        lambda_vec = penalty.lambda_vec;
      } else if (policy.se_scale) {
        Eigen::VectorXd se = out.unpenalized.se;
        for (Eigen::Index j = 0; j < se.size(); ++j)
          if (!std::isfinite(se(j)) || se(j) <= 0.0) se(j) = 1e-12;
        lambda_vec = policy.fixed_lambda * se;
      } else {
        lambda_vec.setConstant(policy.fixed_lambda);
      }
      for (int j : policy.exempt) lambda_vec(j) = 0.0;
    } else {
      out.selection = select_lambda(data, family, kernel, penalty, policy.grid,
                                    out.unpenalized, policy.exempt, opts);
      Eigen::VectorXd se = out.unpenalized.se;
      for (Eigen::Index j = 0; j < se.size(); ++j)
        if (!std::isfinite(se(j)) || se(j) <= 0.0) se(j) = 1e-12;
      lambda_vec = out.selection->lambda_star * se;
      for (int j : policy.exempt) lambda_vec(j) = 0.0;
    }
  }

  out.fit = fit_penalized(data, family, kernel, penalty, lambda_vec,
                          out.unpenalized, opts);
  return out;
}

CvBandwidthResult select_bandwidth_cv(const Dataset& data,
                                      const QuasiFamily& family,
                                      const KernelSpec& kernel_proto,
                                      const std::vector<double>& h_grid,
                                      int k_folds, std::uint64_t seed,
                                      const FitOptions& opts) {
  const Eigen::Index n = data.n();
  if (h_grid.empty())
    throw std::invalid_argument("select_bandwidth_cv: empty bandwidth grid");
  if (k_folds < 2 || k_folds > n)
    throw std::invalid_argument("select_bandwidth_cv: K must be in [2, n]");
  for (double h : h_grid)
    if (!(h > 0.0))
      throw std::invalid_argument("select_bandwidth_cv: bandwidths must be > 0");

  // Seeded shuffle; fold sizes differ by at most one.
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = static_cast<int>(i);
  Rng rng = Rng::stream(seed, 0);
  rng.shuffle(perm);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  {
    const int base = static_cast<int>(n) / k_folds;
    const int extra = static_cast<int>(n) % k_folds;
    std::size_t pos = 0;
    for (int k = 0; k < k_folds; ++k) {
      const int size = base + (k < extra ? 1 : 0);
      for (int s = 0; s < size; ++s) fold_of[static_cast<std::size_t>(perm[pos++])] = k;
    }
  }

  const std::size_t n_h = h_grid.size();
  std::vector<double> cell_dev(n_h * static_cast<std::size_t>(k_folds), 0.0);
  std::vector<char> cell_ok(n_h * static_cast<std::size_t>(k_folds), 0);

  parallel_for(static_cast<std::int64_t>(n_h * static_cast<std::size_t>(k_folds)),
               opts.threads, [&](std::int64_t cell) {
    const std::size_t hi = static_cast<std::size_t>(cell) /
                           static_cast<std::size_t>(k_folds);
    const int k = static_cast<int>(static_cast<std::size_t>(cell) %
                                   static_cast<std::size_t>(k_folds));
    std::vector<int> train, held;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (fold_of[static_cast<std::size_t>(i)] == k)
        held.push_back(static_cast<int>(i));
      else
        train.push_back(static_cast<int>(i));
    }
    try {
      const Dataset sub = data.rows(train);
      const KernelSpec kern = kernel_proto.with_bandwidth(h_grid[hi]);
      EstimatorOptions eopts;
      eopts.fit = opts;
      eopts.fit.threads = 1;  // cells are already parallel
      eopts.with_curves = false;
      const UnpenalizedFit unpen = fit_unpenalized(sub, family, kern, eopts);
      const CoefficientCurves curves = alpha_on_grid(
          sub, family, kern, unpen.beta, eopts.curve_grid, eopts.fit);
      double dev = 0.0;
      for (int i : held) {
        const Eigen::VectorXd a =
            lin_interp_row(curves.grid, curves.values, data.u(i));
        double eta = data.x.row(i).dot(a);
        if (data.d() > 0) eta += data.z.row(i).dot(unpen.beta);
        const double mu = family.inv_link(eta);
        dev += -2.0 * family.quasi_loglik_term(mu, data.y(i));
      }
      cell_dev[static_cast<std::size_t>(cell)] = dev;
      cell_ok[static_cast<std::size_t>(cell)] = 1;
    } catch (const std::exception&) {
      cell_ok[static_cast<std::size_t>(cell)] = 0;
    }
  });

  CvBandwidthResult out;
  out.h_grid = h_grid;
  out.cv_scores.assign(n_h, std::numeric_limits<double>::infinity());
  for (std::size_t hi = 0; hi < n_h; ++hi) {
    double total = 0.0;
    bool ok = true;
    for (int k = 0; k < k_folds; ++k) {
      const std::size_t cell = hi * static_cast<std::size_t>(k_folds) +
                               static_cast<std::size_t>(k);
      if (!cell_ok[cell]) {
        ok = false;
        break;
      }
      total += cell_dev[cell];
    }
    if (ok) out.cv_scores[hi] = total;
  }

  double best = std::numeric_limits<double>::infinity();
  double best_h = 0.0;
  bool any = false;
  for (std::size_t hi = 0; hi < n_h; ++hi) {
    const double s = out.cv_scores[hi];
    if (!std::isfinite(s)) continue;
    if (!any || s < best || (s == best && h_grid[hi] < best_h)) {
      best = s;
      best_h = h_grid[hi];
      any = true;
    }
  }
  if (!any)
    throw FitError("bandwidth-cv",
                   "every candidate bandwidth failed; widen the grid");
  out.h_star = best_h;
  return out;
}

Eigen::VectorXd fitted_eta(const Dataset& data, const SemiFit& fit) {
  if (fit.alpha_curves.grid.size() == 0)
    throw std::invalid_argument("fitted_eta: fit has no coefficient curves");
  Eigen::VectorXd eta(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd a =
        lin_interp_row(fit.alpha_curves.grid, fit.alpha_curves.values,
                       data.u(i));
    eta(i) = data.x.row(i).dot(a) +
             (data.d() > 0 ? data.z.row(i).dot(fit.beta) : 0.0);
  }
  return eta;
}

}  // namespace gvcplm
