#include "gvcplm/family.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gvcplm {

namespace {

double clamp_abs(double x, double bound) {
  if (x > bound) return bound;
  if (x < -bound) return -bound;
  return x;
}

// y*log(x) with the y log y -> 0 convention at y = 0.
double xlogy(double y, double x) { return y == 0.0 ? 0.0 : y * std::log(x); }

}  // namespace

QuasiFamily QuasiFamily::gaussian() {
  return QuasiFamily(Kind::gaussian_identity, "gaussian-identity",
                     std::numeric_limits<double>::infinity());
}
QuasiFamily QuasiFamily::poisson() {
  return QuasiFamily(Kind::poisson_log, "poisson-log", 700.0);
}
QuasiFamily QuasiFamily::bernoulli() {
  return QuasiFamily(Kind::bernoulli_logit, "bernoulli-logit", 30.0);
}

QuasiFamily QuasiFamily::by_name(const std::string& name) {
  if (name == "gaussian" || name == "gaussian-identity") return gaussian();
  if (name == "poisson" || name == "poisson-log") return poisson();
  if (name == "bernoulli" || name == "bernoulli-logit" || name == "logistic")
    return bernoulli();
  throw std::invalid_argument("unknown family: " + name);
}

double QuasiFamily::link(double mu) const {
  switch (kind_) {
    case Kind::gaussian_identity:
      return mu;
    case Kind::poisson_log:
      if (!(mu > 0.0)) throw std::domain_error("log link needs mu > 0");
      return std::log(mu);
    case Kind::bernoulli_logit:
      if (!(mu > 0.0 && mu < 1.0))
        throw std::domain_error("logit link needs mu in (0,1)");
      return std::log(mu / (1.0 - mu));
  }
  return 0.0;
}

double QuasiFamily::inv_link(double eta) const {
  switch (kind_) {
    case Kind::gaussian_identity:
      return eta;
    case Kind::poisson_log:
      return std::exp(clamp_abs(eta, eta_bound_));
    case Kind::bernoulli_logit: {
      const double e = clamp_abs(eta, eta_bound_);
      return 1.0 / (1.0 + std::exp(-e));
    }
  }
  return 0.0;
}

double QuasiFamily::dinv_link(double eta) const {
  switch (kind_) {
    case Kind::gaussian_identity:
      return 1.0;
    case Kind::poisson_log:
      return std::exp(clamp_abs(eta, eta_bound_));
    case Kind::bernoulli_logit: {
      const double mu = inv_link(eta);
      return mu * (1.0 - mu);
    }
  }
  return 0.0;
}

double QuasiFamily::variance(double mu) const {
  switch (kind_) {
    case Kind::gaussian_identity:
      return 1.0;
    case Kind::poisson_log:
      return mu;
    case Kind::bernoulli_logit:
      return mu * (1.0 - mu);
  }
  return 0.0;
}

double QuasiFamily::quasi_loglik_term(double mu, double y) const {
  switch (kind_) {
    case Kind::gaussian_identity:
      return -0.5 * (y - mu) * (y - mu);
    case Kind::poisson_log:
      if (y < 0.0) throw std::domain_error("poisson response must be >= 0");
      if (mu == y) return 0.0;  // covers mu = y = 0
      if (!(mu > 0.0))
        throw std::domain_error("poisson mean hit the boundary mu = 0");
      return (y - mu) - xlogy(y, y / mu);
    case Kind::bernoulli_logit:
      if (y < 0.0 || y > 1.0)
        throw std::domain_error("bernoulli response must be in [0,1]");
      if (mu == y) return 0.0;
      if (!(mu > 0.0 && mu < 1.0))
        throw std::domain_error(
            "bernoulli mean hit the boundary against the observed response");
      return xlogy(y, mu) + xlogy(1.0 - y, 1.0 - mu) - xlogy(y, y) -
             xlogy(1.0 - y, 1.0 - y);
  }
  return 0.0;
}

// Canonical links: rho1 = 1 and q2 = -V(g^{-1}(eta)).
double QuasiFamily::q1(double eta, double y) const {
  return (y - inv_link(eta)) * rho1(eta);
}

double QuasiFamily::q2(double eta, double y) const {
  (void)y;
  switch (kind_) {
    case Kind::gaussian_identity:
      return -1.0;
    case Kind::poisson_log:
      return -inv_link(eta);
    case Kind::bernoulli_logit: {
      const double mu = inv_link(eta);
      return -mu * (1.0 - mu);
    }
  }
  return 0.0;
}

double QuasiFamily::rho1(double eta) const {
  (void)eta;
  return 1.0;  // dg^{-1}/V(g^{-1}) = 1 for all three canonical links
}

double QuasiFamily::rho2(double eta) const {
  const double d = dinv_link(eta);
  return d * d / variance(inv_link(eta));
}

bool QuasiFamily::admissible_y(double y) const {
  if (!std::isfinite(y)) return false;
  switch (kind_) {
    case Kind::gaussian_identity:
      return true;
    case Kind::poisson_log:
      return y >= 0.0;
    case Kind::bernoulli_logit:
      return y >= 0.0 && y <= 1.0;
  }
  return false;
}

double QuasiFamily::draw(double mu, double sigma, Rng& rng) const {
  switch (kind_) {
    case Kind::gaussian_identity:
      return mu + sigma * rng.normal();
    case Kind::poisson_log:
      return static_cast<double>(rng.poisson(mu));
    case Kind::bernoulli_logit:
      return rng.bernoulli(mu) ? 1.0 : 0.0;
  }
  return 0.0;
}

double quasi_loglik(const QuasiFamily& family, const Eigen::VectorXd& eta,
                    const Eigen::VectorXd& y) {
  if (eta.size() != y.size())
    throw std::invalid_argument("quasi_loglik: eta and y sizes differ");
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    total += family.quasi_loglik_term(family.inv_link(eta(i)), y(i));
  if (!std::isfinite(total))
    throw std::domain_error("quasi_loglik: non-finite value (separation?)");
  return total;
}

double deviance(const QuasiFamily& family, const Eigen::VectorXd& y,
                const Eigen::VectorXd& mu) {
  if (y.size() != mu.size())
    throw std::invalid_argument("deviance: y and mu sizes differ");
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    total += -2.0 * family.quasi_loglik_term(mu(i), y(i));
  if (!std::isfinite(total))
    throw std::domain_error("deviance: non-finite value");
  return total;
}

}  // namespace gvcplm
