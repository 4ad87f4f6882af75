#include "gvcplm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gvcplm/numerics.hpp"

namespace gvcplm {

namespace {

double epan(double t) {
  const double s = 1.0 - t * t;
  return s > 0.0 ? 0.75 * s : 0.0;
}
double unif(double t) { return std::fabs(t) <= 1.0 ? 0.5 : 0.0; }
double tria(double t) {
  const double s = 1.0 - std::fabs(t);
  return s > 0.0 ? s : 0.0;
}
double biwt(double t) {
  const double s = 1.0 - t * t;
  return s > 0.0 ? (15.0 / 16.0) * s * s : 0.0;
}

// int over [-2s, 2s] of {K(u) - 0.5 (K*K)(u)}^2 with the convolution by
// closed form where known, nested quadrature otherwise.
double wilks_denominator(const std::function<double(double)>& k,
                         const std::function<double(double)>& conv,
                         double support, double abs_tol) {
  auto integrand = [&](double u) {
    const double b = k(u) - 0.5 * conv(u);
    return b * b;
  };
  return adaptive_simpson(integrand, -2.0 * support, 2.0 * support, abs_tol);
}

double epan_conv(double u) {
  // Epanechnikov self-convolution on [-2, 2].
  const double a = std::fabs(u);
  if (a >= 2.0) return 0.0;
  const double t = 2.0 - a;
  return (3.0 / 160.0) * t * t * t * (a * a + 6.0 * a + 4.0);
}

double unif_conv(double u) {
  // Uniform self-convolution: triangular density on [-2, 2].
  const double a = std::fabs(u);
  return a >= 2.0 ? 0.0 : (2.0 - a) / 4.0;
}

KernelConstants finish(KernelConstants c) {
  c.r_k = (c.k0 - 0.5 * c.nu0) / (1.0 - 0.5 * c.conv_mass);
  return c;
}

}  // namespace

KernelSpec::KernelSpec(std::string name, std::function<double(double)> k,
                       double support, double h, KernelConstants constants)
    : name_(std::move(name)),
      k_(std::move(k)),
      support_(support),
      h_(h),
      constants_(constants) {
  if (!(h_ > 0.0)) throw std::invalid_argument("kernel: bandwidth must be > 0");
  if (!(support_ > 0.0))
    throw std::invalid_argument("kernel: support must be > 0");
}

KernelSpec KernelSpec::epanechnikov(double h) {
  KernelConstants c;
  c.k0 = 0.75;
  c.mu2 = 0.2;
  c.nu0 = 0.6;
  c.nu2 = 3.0 / 35.0;
  static const double denom = wilks_denominator(epan, epan_conv, 1.0, 1e-13);
  c.wilks_rk = (c.k0 - 0.5 * c.nu0) / denom;
  return KernelSpec("epanechnikov", epan, 1.0, h, finish(c));
}

KernelSpec KernelSpec::uniform(double h) {
  KernelConstants c;
  c.k0 = 0.5;
  c.mu2 = 1.0 / 3.0;
  c.nu0 = 0.5;
  c.nu2 = 1.0 / 6.0;
  static const double denom = wilks_denominator(unif, unif_conv, 1.0, 1e-13);
  c.wilks_rk = (c.k0 - 0.5 * c.nu0) / denom;
  return KernelSpec("uniform", unif, 1.0, h, finish(c));
}

KernelSpec KernelSpec::triangular(double h) {
  KernelConstants c;
  c.k0 = 1.0;
  c.mu2 = 1.0 / 6.0;
  c.nu0 = 2.0 / 3.0;
  c.nu2 = 1.0 / 15.0;
  static const double wilks =
      kernel_constants_quadrature(tria, 1.0, 1e-12).wilks_rk;
  c.wilks_rk = wilks;
  return KernelSpec("triangular", tria, 1.0, h, finish(c));
}

KernelSpec KernelSpec::biweight(double h) {
  KernelConstants c;
  c.k0 = 15.0 / 16.0;
  c.mu2 = 1.0 / 7.0;
  c.nu0 = 5.0 / 7.0;
  c.nu2 = 5.0 / 77.0;
  static const double wilks =
      kernel_constants_quadrature(biwt, 1.0, 1e-12).wilks_rk;
  c.wilks_rk = wilks;
  return KernelSpec("biweight", biwt, 1.0, h, finish(c));
}

KernelSpec KernelSpec::custom(std::string name, std::function<double(double)> k,
                              double support, double h) {
  KernelConstants c = kernel_constants_quadrature(k, support, 1e-10);
  return KernelSpec(std::move(name), std::move(k), support, h, c);
}

KernelSpec KernelSpec::by_name(const std::string& name, double h) {
  if (name == "epanechnikov") return epanechnikov(h);
  if (name == "uniform") return uniform(h);
  if (name == "triangular") return triangular(h);
  if (name == "biweight") return biweight(h);
  throw std::invalid_argument("unknown kernel: " + name);
}

KernelSpec KernelSpec::with_bandwidth(double h) const {
  return KernelSpec(name_, k_, support_, h, constants_);
}

namespace {

// Integrates f over consecutive segments; used to split at kink locations
// (t = 0 for the kernels, v = u for the convolution integrand).
double integrate_split(const std::function<double(double)>& f,
                       std::vector<double> knots, double abs_tol) {
  std::sort(knots.begin(), knots.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    if (knots[i + 1] > knots[i])
      total += adaptive_simpson(f, knots[i], knots[i + 1], abs_tol);
  return total;
}

}  // namespace

KernelConstants kernel_constants_quadrature(
    const std::function<double(double)>& k, double support, double abs_tol) {
  const double s = support;
  const double mass = integrate_split(k, {-s, 0.0, s}, abs_tol);
  if (std::fabs(mass - 1.0) > 1e-6)
    throw std::invalid_argument("kernel does not integrate to 1");
  KernelConstants c;
  c.k0 = k(0.0);
  c.mu2 = integrate_split([&](double t) { return t * t * k(t); }, {-s, 0.0, s},
                          abs_tol);
  c.nu0 = integrate_split([&](double t) { return k(t) * k(t); }, {-s, 0.0, s},
                          abs_tol);
  c.nu2 = integrate_split([&](double t) { return t * t * k(t) * k(t); },
                          {-s, 0.0, s}, abs_tol);
  // K*K integrates to (integral of K)^2; convolution support is [-2s, 2s]
  // and the inner integrand lives on the overlap of the two supports with
  // possible kinks at v = 0 and v = u.
  auto conv = [&](double u) {
    const double lo = std::max(-s, u - s);
    const double hi = std::min(s, u + s);
    if (hi <= lo) return 0.0;
    std::vector<double> knots = {lo, hi};
    if (0.0 > lo && 0.0 < hi) knots.push_back(0.0);
    if (u > lo && u < hi) knots.push_back(u);
    return integrate_split([&](double v) { return k(v) * k(u - v); }, knots,
                           abs_tol);
  };
  c.conv_mass = integrate_split(conv, {-2.0 * s, -s, 0.0, s, 2.0 * s},
                                abs_tol * 10.0);
  c.r_k = (c.k0 - 0.5 * c.nu0) / (1.0 - 0.5 * c.conv_mass);
  auto bracket_sq = [&](double u) {
    const double b = k(u) - 0.5 * conv(u);
    return b * b;
  };
  c.wilks_rk = (c.k0 - 0.5 * c.nu0) /
               integrate_split(bracket_sq, {-2.0 * s, -s, 0.0, s, 2.0 * s},
                               abs_tol * 10.0);
  return c;
}

KernelConstants kernel_constants(const KernelSpec& kernel) {
  return kernel.constants();
}

}  // namespace gvcplm
