#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gvcplm/estimator.hpp"
#include "gvcplm/parallel.hpp"
#include "gvcplm/rng.hpp"
#include "gvcplm/simlab.hpp"
#include "oracles.hpp"

using namespace gvcplm;

namespace {

// Constant-alpha gaussian design where the two-step estimator reduces to
// ordinary least squares when the kernel covers the whole sample.
Dataset constant_alpha_gaussian(Rng& rng, int n, int d, Eigen::VectorXd* beta) {
  Dataset data;
  data.u.resize(n);
  data.x = Eigen::MatrixXd::Ones(n, 1);
  data.z.resize(n, d);
  data.y.resize(n);
  beta->resize(d);
  for (int j = 0; j < d; ++j) (*beta)(j) = (j % 2 == 0 ? 0.5 : -0.3);
  for (int i = 0; i < n; ++i) {
    data.u(i) = rng.uniform();
    for (int j = 0; j < d; ++j) data.z(i, j) = rng.normal();
    data.y(i) = 2.0 + data.z.row(i).dot(*beta) + 0.5 * rng.normal();
  }
  data.validate();
  return data;
}

}  // namespace

TEST_CASE("two-step fit reduces to joint least squares under a global kernel") {
  Rng rng(101);
  Eigen::VectorXd beta_true;
  const Dataset data = constant_alpha_gaussian(rng, 150, 4, &beta_true);
  // Uniform kernel with radius beyond the support: every local fit sees all
  // observations with equal weight.
  const KernelSpec kernel = KernelSpec::uniform(2.0);
  const UnpenalizedFit fit =
      fit_unpenalized(data, QuasiFamily::gaussian(), kernel);

  // Joint OLS of y on (1, u, z).
  Eigen::MatrixXd design(data.n(), 2 + data.d());
  design.col(0).setOnes();
  design.col(1) = data.u;
  design.rightCols(data.d()) = data.z;
  const Eigen::VectorXd ols =
      (design.transpose() * design)
          .ldlt()
          .solve(design.transpose() * data.y);
  for (int j = 0; j < 4; ++j)
    CHECK(fit.beta(j) == doctest::Approx(ols(2 + j)).epsilon(1e-8));
}

TEST_CASE("analytic beta gradient matches finite differences per family") {
  Rng rng(103);
  for (const auto& fam : {QuasiFamily::gaussian(), QuasiFamily::poisson(),
                          QuasiFamily::bernoulli()}) {
    const Dataset data = oracles::random_dataset(rng, 120, 2, 3, fam);
    const KernelSpec kernel = KernelSpec::epanechnikov(0.5);
    const UnpenalizedFit unpen = fit_unpenalized(data, fam, kernel);
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::VectorXd beta(3);
      for (int j = 0; j < 3; ++j) beta(j) = 0.4 * rng.normal();
      auto loglik = [&](const Eigen::VectorXd& b) {
        return quasi_loglik(fam, unpen.eta_offset + data.z * b, data.y);
      };
      for (int j = 0; j < 3; ++j) {
        // Analytic score component.
        const Eigen::VectorXd eta = unpen.eta_offset + data.z * beta;
        double analytic = 0.0;
        for (Eigen::Index i = 0; i < data.n(); ++i)
          analytic += fam.q1(eta(i), data.y(i)) * data.z(i, j);
        const double h = 1e-6 * (1.0 + std::fabs(beta(j)));
        Eigen::VectorXd bp = beta, bm = beta;
        bp(j) += h;
        bm(j) -= h;
        const double fd = (loglik(bp) - loglik(bm)) / (2.0 * h);
        CAPTURE(fam.name());
        CHECK(analytic ==
              doctest::Approx(fd).epsilon(1e-5).scale(1.0 + std::fabs(fd)));
      }
    }
  }
}

TEST_CASE("zero penalty reproduces the unpenalized fit") {
  Rng rng(107);
  const Dataset data =
      oracles::random_dataset(rng, 150, 2, 4, QuasiFamily::poisson());
  const KernelSpec kernel = KernelSpec::epanechnikov(0.4);
  const QuasiFamily fam = QuasiFamily::poisson();
  const UnpenalizedFit unpen = fit_unpenalized(data, fam, kernel);

  PenaltySpec scad;
  scad.kind = PenaltyKind::scad;
  const SemiFit zero = fit_penalized(data, fam, kernel, scad,
                                     Eigen::VectorXd::Zero(4), unpen);
  CHECK((zero.beta - unpen.beta).cwiseAbs().maxCoeff() < 1e-8);
  for (bool z : zero.zero_mask) CHECK_FALSE(z);

  PenaltySpec none;
  const SemiFit nofit = fit_penalized(data, fam, kernel, none,
                                      Eigen::VectorXd::Zero(4), unpen);
  CHECK((nofit.beta - unpen.beta).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("a dominating penalty zeroes every coefficient") {
  Rng rng(109);
  const Dataset data =
      oracles::random_dataset(rng, 120, 2, 3, QuasiFamily::gaussian());
  const KernelSpec kernel = KernelSpec::epanechnikov(0.5);
  const QuasiFamily fam = QuasiFamily::gaussian();
  const UnpenalizedFit unpen = fit_unpenalized(data, fam, kernel);
  PenaltySpec scad;
  scad.kind = PenaltyKind::scad;
  const SemiFit fit = fit_penalized(data, fam, kernel, scad,
                                    Eigen::VectorXd::Constant(3, 1e6), unpen);
  for (bool z : fit.zero_mask) CHECK(z);
  CHECK(fit.beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.converged);
}

TEST_CASE("zeroed coefficients stay zero along the lqa iterations") {
  // Monotone mask: refitting with the same lambda from the penalized result
  // cannot resurrect a zeroed coefficient.
  Rng rng(113);
  const Dataset data =
      oracles::random_dataset(rng, 150, 2, 5, QuasiFamily::gaussian());
  const KernelSpec kernel = KernelSpec::epanechnikov(0.5);
  const QuasiFamily fam = QuasiFamily::gaussian();
  const UnpenalizedFit unpen = fit_unpenalized(data, fam, kernel);
  PenaltySpec l1;
  l1.kind = PenaltyKind::l1;
  Eigen::VectorXd lv = 2.0 * unpen.se;
  const SemiFit first = fit_penalized(data, fam, kernel, l1, lv, unpen);
  UnpenalizedFit warm = unpen;
  warm.beta = first.beta;
  const SemiFit second = fit_penalized(data, fam, kernel, l1, lv, warm);
  for (std::size_t j = 0; j < first.zero_mask.size(); ++j)
    if (first.zero_mask[j]) CHECK(second.zero_mask[j]);
}

TEST_CASE("linear predictor is invariant to column rescaling at lambda 0") {
  Rng rng(127);
  Dataset data =
      oracles::random_dataset(rng, 140, 2, 3, QuasiFamily::poisson());
  const KernelSpec kernel = KernelSpec::epanechnikov(0.5);
  const QuasiFamily fam = QuasiFamily::poisson();
  const UnpenalizedFit base = fit_unpenalized(data, fam, kernel);

  Dataset scaled = data;
  const double c = 37.5;
  scaled.z.col(1) *= c;
  const UnpenalizedFit rescaled = fit_unpenalized(scaled, fam, kernel);
  const Eigen::VectorXd pred_base = data.z * base.beta;
  const Eigen::VectorXd pred_scaled = scaled.z * rescaled.beta;
  CHECK((pred_base - pred_scaled).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("sandwich covariance: symmetry, psd, and the direct-formula oracle") {
  Rng rng(131);
  const Dataset data =
      oracles::random_dataset(rng, 160, 2, 4, QuasiFamily::poisson());
  const KernelSpec kernel = KernelSpec::epanechnikov(0.5);
  const QuasiFamily fam = QuasiFamily::poisson();
  const UnpenalizedFit unpen = fit_unpenalized(data, fam, kernel);

  PenaltySpec none;
  const SemiFit fit = fit_penalized(data, fam, kernel, none,
                                    Eigen::VectorXd::Zero(4), unpen);
  const Eigen::MatrixXd cov = sandwich_cov(data, fam, kernel, fit);

  // Exact symmetry and PSD up to round-off.
  CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * cov.trace());

  // Direct assembly with Sigma_lambda = 0.
  const Eigen::VectorXd eta = fit.eta_offset + data.z * fit.beta;
  Eigen::VectorXd q1(data.n()), q2(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    q1(i) = fam.q1(eta(i), data.y(i));
    q2(i) = fam.q2(eta(i), data.y(i));
  }
  const Eigen::MatrixXd direct = oracles::direct_sandwich(data.z, q1, q2);
  CHECK((cov - direct).cwiseAbs().maxCoeff() < 1e-8 * (1.0 + direct.norm()));
}

TEST_CASE("gaussian sandwich diagonal is near sigma^2/n for orthonormal z") {
  Rng rng(137);
  const int n = 4000, d = 2;
  Dataset data;
  data.u.resize(n);
  data.x = Eigen::MatrixXd::Ones(n, 1);
  data.z.resize(n, d);
  data.y.resize(n);
  const double sigma = 0.7;
  for (int i = 0; i < n; ++i) {
    data.u(i) = rng.uniform();
    for (int j = 0; j < d; ++j) data.z(i, j) = rng.normal();
    data.y(i) = 1.0 + 0.3 * data.z(i, 0) + sigma * rng.normal();
  }
  data.validate();
  const UnpenalizedFit fit =
      fit_unpenalized(data, QuasiFamily::gaussian(), KernelSpec::uniform(2.0));
  for (int j = 0; j < d; ++j)
    CHECK(fit.cov(j, j) ==
          doctest::Approx(sigma * sigma / n).epsilon(0.15));
}

TEST_CASE("effective df equals the active count when the penalty is flat") {
  Rng rng(139);
  const Dataset data =
      oracles::random_dataset(rng, 130, 2, 3, QuasiFamily::gaussian());
  const KernelSpec kernel = KernelSpec::epanechnikov(0.5);
  const QuasiFamily fam = QuasiFamily::gaussian();
  const UnpenalizedFit unpen = fit_unpenalized(data, fam, kernel);

  PenaltySpec none;
  const SemiFit plain = fit_penalized(data, fam, kernel, none,
                                      Eigen::VectorXd::Zero(3), unpen);
  CHECK(effective_df(data, fam, kernel, plain) ==
        doctest::Approx(3.0).epsilon(1e-10));

  // SCAD with every active coefficient beyond a*lambda has a flat tail:
  // Sigma_lambda vanishes on the active set.
  PenaltySpec scad;
  scad.kind = PenaltyKind::scad;
  scad.zero_se_multiplier = 0.0;  // keep the drop rule out of this check
  Eigen::VectorXd lv =
      Eigen::VectorXd::Constant(3, unpen.beta.cwiseAbs().minCoeff() / 5.0);
  const SemiFit flat = fit_penalized(data, fam, kernel, scad, lv, unpen);
  const double e = effective_df(data, fam, kernel, flat);
  int active = 0;
  for (bool z : flat.zero_mask) active += z ? 0 : 1;
  if (flat.beta.cwiseAbs().minCoeff() > 3.7 * lv.maxCoeff())
    CHECK(e == doctest::Approx(static_cast<double>(active)).epsilon(1e-9));

  // L1 at a mid-size lambda sits strictly inside (0, active).
  PenaltySpec l1;
  l1.kind = PenaltyKind::l1;
  l1.zero_se_multiplier = 0.0;
  const SemiFit mid =
      fit_penalized(data, fam, kernel, l1, 0.5 * unpen.se, unpen);
  const double e_mid = effective_df(data, fam, kernel, mid);
  int active_mid = 0;
  for (bool z : mid.zero_mask) active_mid += z ? 0 : 1;
  CHECK(e_mid > 0.0);
  CHECK(e_mid < static_cast<double>(active_mid));
}

TEST_CASE("gcv identities") {
  Rng rng(149);
  const Dataset data =
      oracles::random_dataset(rng, 100, 1, 0, QuasiFamily::gaussian());
  const KernelSpec kernel = KernelSpec::epanechnikov(0.5);
  PenaltySpec none;
  LambdaPolicy policy;
  policy.mode = LambdaPolicy::Mode::none;
  const BackfitResult bf =
      backfit(data, QuasiFamily::gaussian(), kernel, none, policy);
  // d = 0: no parametric part, e = 0, GCV = deviance / n.
  CHECK(bf.fit.effective_df == 0.0);
  CHECK(bf.fit.gcv ==
        doctest::Approx(bf.fit.deviance / data.n()).epsilon(1e-12));
  CHECK(bf.fit.beta.size() == 0);
  CHECK(gcv_score(data, QuasiFamily::gaussian(), kernel, bf.fit) ==
        doctest::Approx(bf.fit.gcv).epsilon(1e-12));
}

TEST_CASE("select_lambda trivial grids") {
  Rng rng(151);
  const Dataset data =
      oracles::random_dataset(rng, 120, 2, 3, QuasiFamily::gaussian());
  const KernelSpec kernel = KernelSpec::epanechnikov(0.5);
  const QuasiFamily fam = QuasiFamily::gaussian();
  const UnpenalizedFit unpen = fit_unpenalized(data, fam, kernel);
  PenaltySpec scad;
  scad.kind = PenaltyKind::scad;

  const LambdaSelection zero =
      select_lambda(data, fam, kernel, scad, {0.0}, unpen, {});
  CHECK(zero.lambda_star == 0.0);
  CHECK((zero.path[0].beta - unpen.beta).cwiseAbs().maxCoeff() < 1e-8);

  const LambdaSelection one =
      select_lambda(data, fam, kernel, scad, {0.37}, unpen, {});
  CHECK(one.lambda_star == 0.37);
  CHECK(one.path.size() == 1);

  PenaltySpec l0;
  l0.kind = PenaltyKind::l0;
  CHECK_THROWS_AS(select_lambda(data, fam, kernel, l0, {0.1}, unpen, {}),
                  std::invalid_argument);
}

TEST_CASE("l1 path zero count is nondecreasing in lambda") {
  const ScenarioSpec spec = ScenarioSpec::example41();
  const Dataset data = gen_scenario(spec, 77);
  const KernelSpec kernel = KernelSpec::epanechnikov(spec.h);
  const QuasiFamily fam = QuasiFamily::poisson();
  EstimatorOptions opts;
  opts.with_curves = false;
  opts.fit.threads = hardware_threads();
  const UnpenalizedFit unpen = fit_unpenalized(data, fam, kernel, opts);
  PenaltySpec l1;
  l1.kind = PenaltyKind::l1;
  const LambdaSelection sel =
      select_lambda(data, fam, kernel, l1, {}, unpen, {}, opts);
  int prev = -1;
  for (const auto& pt : sel.path) {
    REQUIRE(pt.ok);
    int zeros = 0;
    for (bool z : pt.zero_mask) zeros += z ? 1 : 0;
    CHECK(zeros >= prev);
    prev = zeros;
  }
}

TEST_CASE("lambda path is identical at any thread count") {
  const ScenarioSpec spec = ScenarioSpec::example41();
  const Dataset data = gen_scenario(spec, 11);
  const KernelSpec kernel = KernelSpec::epanechnikov(spec.h);
  const QuasiFamily fam = QuasiFamily::poisson();
  PenaltySpec scad;
  scad.kind = PenaltyKind::scad;
  EstimatorOptions serial;
  serial.with_curves = false;
  serial.fit.threads = 1;
  EstimatorOptions parallel = serial;
  parallel.fit.threads = hardware_threads() > 1 ? hardware_threads() : 4;
  const UnpenalizedFit u1 = fit_unpenalized(data, fam, kernel, serial);
  const UnpenalizedFit u2 = fit_unpenalized(data, fam, kernel, parallel);
  CHECK((u1.beta - u2.beta).cwiseAbs().maxCoeff() == 0.0);
  const LambdaSelection a =
      select_lambda(data, fam, kernel, scad, {}, u1, {}, serial);
  const LambdaSelection b =
      select_lambda(data, fam, kernel, scad, {}, u2, {}, parallel);
  CHECK(a.lambda_star == b.lambda_star);
  REQUIRE(a.path.size() == b.path.size());
  for (std::size_t k = 0; k < a.path.size(); ++k)
    CHECK(a.path[k].gcv == b.path[k].gcv);
}

TEST_CASE("penalty-exempt coefficients are never shrunk or zeroed") {
  Rng rng(157);
  const Dataset data =
      oracles::random_dataset(rng, 150, 2, 4, QuasiFamily::gaussian());
  const KernelSpec kernel = KernelSpec::epanechnikov(0.5);
  const QuasiFamily fam = QuasiFamily::gaussian();
  PenaltySpec l1;
  l1.kind = PenaltyKind::l1;
  LambdaPolicy policy;
  policy.mode = LambdaPolicy::Mode::fixed;
  policy.fixed_lambda = 1e5;
  policy.exempt = {2};
  const BackfitResult bf = backfit(data, fam, kernel, l1, policy);
  CHECK_FALSE(bf.fit.zero_mask[2]);
  CHECK(bf.fit.lambda_used(2) == 0.0);
  // Everything penalized at that scale is gone.
  for (int j : {0, 1, 3}) CHECK(bf.fit.zero_mask[static_cast<std::size_t>(j)]);
}

TEST_CASE("backfit pipeline assembles curves and reports") {
  const ScenarioSpec spec = ScenarioSpec::example41();
  const Dataset data = gen_scenario(spec, 5);
  const KernelSpec kernel = KernelSpec::epanechnikov(spec.h);
  PenaltySpec scad;
  scad.kind = PenaltyKind::scad;
  LambdaPolicy policy;  // gcv default
  EstimatorOptions opts;
  opts.fit.threads = hardware_threads();
  const BackfitResult bf =
      backfit(data, QuasiFamily::poisson(), kernel, scad, policy, opts);
  CHECK(bf.fit.alpha_curves.grid.size() == 200);
  CHECK(bf.fit.alpha_curves.values.cols() == 2);
  CHECK(bf.selection.has_value());
  CHECK(bf.fit.converged);
  CHECK(bf.fit.effective_df >= 0.0);
  CHECK(bf.fit.effective_df <= 10.0);
  CHECK(bf.fit.gcv >= 0.0);
  // fitted_eta interpolates the final curves.
  const Eigen::VectorXd eta = fitted_eta(data, bf.fit);
  CHECK(eta.size() == data.n());
  CHECK(eta.allFinite());
  // Standard errors: NaN exactly on zeroed coefficients.
  for (std::size_t j = 0; j < bf.fit.zero_mask.size(); ++j) {
    if (bf.fit.zero_mask[j])
      CHECK(std::isnan(bf.fit.se(static_cast<Eigen::Index>(j))));
    else
      CHECK(bf.fit.se(static_cast<Eigen::Index>(j)) > 0.0);
  }
}
