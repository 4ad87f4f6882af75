#pragma once

#include <Eigen/Dense>
#include <string>

#include "gvcplm/rng.hpp"

namespace gvcplm {

// Quasi-likelihood family: link g, variance V, and the criterion
//   Q(mu, y) = int_mu^y (s - y) / V(s) ds,
// normalized so Q(y, y) = 0 and deviance D(y, mu) = -2 Q(mu, y).
// q1 and q2 are the first and second derivatives of Q(g^{-1}(eta), y) in eta.
// The dispersion is absorbed into V, so Gaussian variance is 1.
class QuasiFamily {
 public:
  enum class Kind { gaussian_identity, poisson_log, bernoulli_logit };

  static QuasiFamily gaussian();
  static QuasiFamily poisson();
  static QuasiFamily bernoulli();
  static QuasiFamily by_name(const std::string& name);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  double link(double mu) const;
  // Inverse link with the linear predictor clamped to +-eta_bound() before
  // exponentiation; use clamps() to record when an iterate was clamped.
  double inv_link(double eta) const;
  double dinv_link(double eta) const;
  double variance(double mu) const;
  double eta_bound() const { return eta_bound_; }
  bool clamps(double eta) const { return std::fabs(eta) > eta_bound_; }

  double quasi_loglik_term(double mu, double y) const;  // Q(mu, y)
  double q1(double eta, double y) const;
  double q2(double eta, double y) const;
  double rho1(double eta) const;
  double rho2(double eta) const;

  bool admissible_y(double y) const;
  // Simulated response at mean mu; sigma is the Gaussian standard deviation
  // and is ignored by the discrete families.
  double draw(double mu, double sigma, Rng& rng) const;

 private:
  QuasiFamily(Kind kind, std::string name, double eta_bound)
      : kind_(kind), name_(std::move(name)), eta_bound_(eta_bound) {}

  Kind kind_;
  std::string name_;
  double eta_bound_;
};

// Sum of Q(g^{-1}(eta_i), y_i). Throws std::domain_error when a fitted mean
// hits the boundary of the admissible range against the observed response.
double quasi_loglik(const QuasiFamily& family, const Eigen::VectorXd& eta,
                    const Eigen::VectorXd& y);

// Sum of -2 Q(mu_i, y_i) >= 0, zero iff mu == y elementwise.
double deviance(const QuasiFamily& family, const Eigen::VectorXd& y,
                const Eigen::VectorXd& mu);

}  // namespace gvcplm
