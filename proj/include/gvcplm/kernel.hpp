#pragma once

#include <functional>
#include <string>

namespace gvcplm {

struct KernelConstants {
  double k0 = 0.0;       // K(0)
  double mu2 = 0.0;      // second moment of K
  double nu0 = 0.0;      // integral of K^2
  double nu2 = 0.0;      // second moment of K^2
  double conv_mass = 1.0;  // integral of K*K, equals 1 for a density
  double r_k = 0.0;      // {K(0) - nu0/2} / {1 - conv_mass/2}
  // Wilks calibration ratio {K(0) - nu0/2} / int {K - (K*K)/2}^2: the factor
  // that puts the likelihood-ratio statistic on its chi-square scale. Differs
  // from r_k, whose denominator integrates the bracket unsquared.
  double wilks_rk = 0.0;
};

// Symmetric density kernel on [-support, support] together with a bandwidth.
// Built-ins carry closed-form constants; custom kernels get them by adaptive
// quadrature (kernel_constants_quadrature) at construction.
class KernelSpec {
 public:
  static KernelSpec epanechnikov(double h);
  static KernelSpec uniform(double h);
  static KernelSpec triangular(double h);
  static KernelSpec biweight(double h);
  static KernelSpec custom(std::string name, std::function<double(double)> k,
                           double support, double h);
  static KernelSpec by_name(const std::string& name, double h);

  const std::string& name() const { return name_; }
  double bandwidth() const { return h_; }
  double support() const { return support_; }
  // Window radius in U units: points with |U - u0| > radius have zero weight.
  double radius() const { return support_ * h_; }

  double evaluate(double t) const { return k_(t); }
  // Scaled kernel K_h(t) = K(t/h)/h.
  double kh(double t) const { return k_(t / h_) / h_; }

  const KernelConstants& constants() const { return constants_; }

  KernelSpec with_bandwidth(double h) const;

 private:
  KernelSpec(std::string name, std::function<double(double)> k, double support,
             double h, KernelConstants constants);

  std::string name_;
  std::function<double(double)> k_;
  double support_;
  double h_;
  KernelConstants constants_;
};

// Constants straight from the spec'd integrals by adaptive quadrature
// (abs. tol 1e-10 by default); the independent route against closed forms.
KernelConstants kernel_constants_quadrature(
    const std::function<double(double)>& k, double support,
    double abs_tol = 1e-12);

KernelConstants kernel_constants(const KernelSpec& kernel);

}  // namespace gvcplm
