#pragma once

#include <Eigen/Dense>
#include <string>

namespace gvcplm {

enum class PenaltyKind { none, scad, l1, lq, l0 };

PenaltyKind penalty_kind_by_name(const std::string& name);
std::string penalty_kind_name(PenaltyKind kind);

// Penalty p_lambda(|beta|) with the SCAD value recovered as the piecewise
// antiderivative of its published derivative. lambda may be broadcast or
// given per coefficient (a zero entry exempts that coefficient).
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::none;
  double lambda = 0.0;            // scalar, broadcast when lambda_vec empty
  Eigen::VectorXd lambda_vec;     // optional per-coefficient lambdas
  double a = 3.7;                 // SCAD shape, must be > 2
  double q = 0.5;                 // Lq exponent, in (0, 1)
  double zero_threshold = 1e-8;   // |beta| <= eps0 is hard-zeroed by callers
  // The estimator reads "not very close to 0" on the coefficient's own
  // statistical scale: a penalized coefficient is dropped when it falls
  // within zero_se_multiplier unpenalized standard errors of zero. Set to 0
  // to make the absolute zero_threshold the only drop rule.
  double zero_se_multiplier = 2.0;

  void validate(int d) const;
  double lambda_for(int j) const {
    return lambda_vec.size() > 0 ? lambda_vec(j) : lambda;
  }
};

// p_lambda(beta) for beta >= 0.
double penalty_value(const PenaltySpec& p, double lambda, double beta);
// p'_lambda(beta) for beta > 0. L0 has no usable derivative and throws.
double penalty_deriv(const PenaltySpec& p, double lambda, double beta);
// LQA weight p'(|beta0|)/|beta0|; |beta0| <= zero_threshold throws, the
// caller must hard-zero such coefficients instead.
double lqa_weight(const PenaltySpec& p, double lambda, double beta0);

// Scalar-lambda conveniences used by the per-operation contracts.
inline double penalty_value(const PenaltySpec& p, double beta) {
  return penalty_value(p, p.lambda, beta);
}
inline double penalty_deriv(const PenaltySpec& p, double beta) {
  return penalty_deriv(p, p.lambda, beta);
}
inline double lqa_weight(const PenaltySpec& p, double beta0) {
  return lqa_weight(p, p.lambda, beta0);
}

}  // namespace gvcplm
