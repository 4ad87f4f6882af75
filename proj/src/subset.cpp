#include "gvcplm/subset.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "gvcplm/errors.hpp"
#include "gvcplm/parallel.hpp"

namespace gvcplm {

namespace {

std::vector<int> mask_to_indices(std::uint32_t mask, int d) {
  std::vector<int> idx;
  for (int j = 0; j < d; ++j)
    if (mask & (1u << j)) idx.push_back(j);
  return idx;
}

// Quasi-likelihood of the unpenalized pipeline restricted to subset columns.
double subset_loglik(const Dataset& data, const QuasiFamily& family,
                     const KernelSpec& kernel, const std::vector<int>& subset,
                     const EstimatorOptions& opts) {
  const Dataset sub = data.with_z_columns(subset);
  EstimatorOptions sopts = opts;
  sopts.with_curves = false;
  sopts.fit.threads = 1;
  const UnpenalizedFit fit = fit_unpenalized(sub, family, kernel, sopts);
  return fit.quasi_ll;
}

}  // namespace

InfoCriterion criterion_by_name(const std::string& name) {
  if (name == "aic") return InfoCriterion::aic;
  if (name == "bic") return InfoCriterion::bic;
  if (name == "ric") return InfoCriterion::ric;
  throw std::invalid_argument("unknown criterion: " + name);
}

std::string criterion_name(InfoCriterion c) {
  switch (c) {
    case InfoCriterion::aic: return "aic";
    case InfoCriterion::bic: return "bic";
    case InfoCriterion::ric: return "ric";
  }
  return "?";
}

double criterion_lambda(InfoCriterion criterion, Eigen::Index n,
                        Eigen::Index d) {
  if (n < 2) throw std::invalid_argument("criterion_lambda: n must be >= 2");
  if (d < 1) throw std::invalid_argument("criterion_lambda: d must be >= 1");
  const double nn = static_cast<double>(n);
  switch (criterion) {
    case InfoCriterion::aic:
      return std::sqrt(2.0 / nn);
    case InfoCriterion::bic:
      return std::sqrt(std::log(nn) / nn);
    case InfoCriterion::ric:
      return std::sqrt(2.0 * std::log(static_cast<double>(d)) / nn);
  }
  return 0.0;
}

SubsetResult best_subset(const Dataset& data, const QuasiFamily& family,
                         const KernelSpec& kernel, InfoCriterion criterion,
                         const SubsetOptions& opts) {
  const int d = static_cast<int>(data.d());
  if (d > opts.max_d)
    throw std::invalid_argument(
        "best_subset: d exceeds the 2^d enumeration guard (max_d = " +
        std::to_string(opts.max_d) + ")");

  SubsetResult res;
  if (d == 0) {
    res.best_subset = {};
    res.subsets_evaluated = 1;
    EstimatorOptions eopts = opts.estimator;
    const UnpenalizedFit unpen = fit_unpenalized(data, family, kernel, eopts);
    res.criterion_value = unpen.quasi_ll;
    res.fit = oracle_fit(data, family, kernel, {}, opts.estimator);
    return res;
  }

  const double lambda = criterion_lambda(criterion, data.n(), d);
  const double charge_per_var =
      static_cast<double>(data.n()) * 0.5 * lambda * lambda;
  const std::uint32_t n_subsets = 1u << d;

  std::vector<double> scores(n_subsets,
                             -std::numeric_limits<double>::infinity());

  const auto t0 = std::chrono::steady_clock::now();
  const int threads = opts.force_serial ? 1 : opts.estimator.fit.threads;
  parallel_for(static_cast<std::int64_t>(n_subsets), threads,
               [&](std::int64_t m) {
                 const auto mask = static_cast<std::uint32_t>(m);
                 const auto subset = mask_to_indices(mask, d);
                 try {
                   const double ll = subset_loglik(data, family, kernel,
                                                   subset, opts.estimator);
                   scores[mask] =
                       ll - charge_per_var * static_cast<double>(subset.size());
                 } catch (const std::exception&) {
                   // failed subsets keep -inf and are counted below
                 }
               });
  const auto t1 = std::chrono::steady_clock::now();
  res.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

  std::uint32_t best_mask = 0;
  double best = -std::numeric_limits<double>::infinity();
  int failures = 0;
  for (std::uint32_t m = 0; m < n_subsets; ++m) {
    if (!std::isfinite(scores[m])) ++failures;
    if (scores[m] > best) {  // ties keep the lower mask (binary counting order)
      best = scores[m];
      best_mask = m;
    }
  }
  if (!std::isfinite(best))
    throw FitError("best-subset", "every subset failed to fit");

  res.best_subset = mask_to_indices(best_mask, d);
  res.criterion_value = best;
  res.subsets_evaluated = n_subsets;
  if (opts.keep_trace) {
    res.trace.reserve(n_subsets);
    for (std::uint32_t m = 0; m < n_subsets; ++m)
      res.trace.emplace_back(m, scores[m]);
  }
  res.fit = oracle_fit(data, family, kernel, res.best_subset, opts.estimator);
  return res;
}

SemiFit oracle_fit(const Dataset& data, const QuasiFamily& family,
                   const KernelSpec& kernel, const std::vector<int>& support,
                   const EstimatorOptions& opts) {
  const int d = static_cast<int>(data.d());
  std::set<int> sup(support.begin(), support.end());
  for (int j : sup)
    if (j < 0 || j >= d)
      throw std::invalid_argument("oracle_fit: support index out of range");

  const std::vector<int> keep(sup.begin(), sup.end());
  const Dataset sub = data.with_z_columns(keep);
  PenaltySpec none;
  LambdaPolicy policy;
  policy.mode = LambdaPolicy::Mode::none;
  BackfitResult bf = backfit(sub, family, kernel, none, policy, opts);

  // Expand restricted coefficients back to the full coordinate system.
  SemiFit fit = bf.fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd se =
      Eigen::VectorXd::Constant(d, std::numeric_limits<double>::quiet_NaN());
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(d);
  std::vector<bool> mask(static_cast<std::size_t>(d), true);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const int j = keep[k];
    beta(j) = bf.fit.beta(static_cast<Eigen::Index>(k));
    se(j) = bf.fit.se(static_cast<Eigen::Index>(k));
    mask[static_cast<std::size_t>(j)] = false;
  }
  fit.beta = beta;
  fit.se = se;
  fit.zero_mask = mask;
  fit.lambda_used = lambda;
  return fit;
}

}  // namespace gvcplm
