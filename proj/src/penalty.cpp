#include "gvcplm/penalty.hpp"

#include <cmath>
#include <stdexcept>

namespace gvcplm {

PenaltyKind penalty_kind_by_name(const std::string& name) {
  if (name == "none") return PenaltyKind::none;
  if (name == "scad") return PenaltyKind::scad;
  if (name == "l1" || name == "lasso") return PenaltyKind::l1;
  if (name == "lq" || name == "bridge") return PenaltyKind::lq;
  if (name == "l0") return PenaltyKind::l0;
  throw std::invalid_argument("unknown penalty kind: " + name);
}

std::string penalty_kind_name(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::none: return "none";
    case PenaltyKind::scad: return "scad";
    case PenaltyKind::l1: return "l1";
    case PenaltyKind::lq: return "lq";
    case PenaltyKind::l0: return "l0";
  }
  return "?";
}

void PenaltySpec::validate(int d) const {
  if (lambda < 0.0) throw std::invalid_argument("penalty: lambda must be >= 0");
  if (lambda_vec.size() > 0 && lambda_vec.size() != d)
    throw std::invalid_argument("penalty: lambda_vec length must equal d");
  for (Eigen::Index j = 0; j < lambda_vec.size(); ++j)
    if (lambda_vec(j) < 0.0)
      throw std::invalid_argument("penalty: lambda_j must be >= 0");
  if (kind == PenaltyKind::scad && !(a > 2.0))
    throw std::invalid_argument("penalty: SCAD shape a must be > 2");
  if (kind == PenaltyKind::lq && !(q > 0.0 && q < 1.0))
    throw std::invalid_argument("penalty: Lq exponent must be in (0,1)");
  if (!(zero_threshold > 0.0))
    throw std::invalid_argument("penalty: zero_threshold must be > 0");
}

double penalty_value(const PenaltySpec& p, double lambda, double beta) {
  if (beta < 0.0) throw std::domain_error("penalty_value: beta must be >= 0");
  if (beta == 0.0 || lambda == 0.0) return 0.0;
  switch (p.kind) {
    case PenaltyKind::none:
      return 0.0;
    case PenaltyKind::l1:
      return lambda * beta;
    case PenaltyKind::lq:
      return lambda * std::pow(beta, p.q);
    case PenaltyKind::l0:
      return 0.5 * lambda * lambda;
    case PenaltyKind::scad: {
      const double a = p.a;
      if (beta <= lambda) return lambda * beta;
      if (beta <= a * lambda)
        return -(beta * beta - 2.0 * a * lambda * beta + lambda * lambda) /
               (2.0 * (a - 1.0));
      return (a + 1.0) * lambda * lambda / 2.0;
    }
  }
  return 0.0;
}

double penalty_deriv(const PenaltySpec& p, double lambda, double beta) {
  if (!(beta > 0.0)) throw std::domain_error("penalty_deriv: beta must be > 0");
  if (lambda == 0.0) return 0.0;
  switch (p.kind) {
    case PenaltyKind::none:
      return 0.0;
    case PenaltyKind::l1:
      return lambda;
    case PenaltyKind::lq:
      return lambda * p.q * std::pow(beta, p.q - 1.0);
    case PenaltyKind::l0:
      throw std::logic_error(
          "L0 penalty has no derivative; use exhaustive subset search");
    case PenaltyKind::scad: {
      const double a = p.a;
      if (beta <= lambda) return lambda;
      const double plus = a * lambda - beta;
      return plus > 0.0 ? plus / (a - 1.0) : 0.0;
    }
  }
  return 0.0;
}

double lqa_weight(const PenaltySpec& p, double lambda, double beta0) {
  const double b = std::fabs(beta0);
  if (b <= p.zero_threshold)
    throw std::domain_error(
        "lqa_weight: |beta0| at or below zero_threshold; zero the coefficient");
  if (lambda == 0.0 || p.kind == PenaltyKind::none) return 0.0;
  return penalty_deriv(p, lambda, b) / b;
}

}  // namespace gvcplm
