#include "gvcplm/local_fit.hpp"

#include <cmath>

#include "gvcplm/parallel.hpp"
#include "local_detail.hpp"

namespace gvcplm {

LocalFit local_fit_joint(const Dataset& data, const QuasiFamily& family,
                         const KernelSpec& kernel, double u0,
                         const FitOptions& opts) {
  auto ctx = detail::make_local_context(data, family, kernel, opts);
  return detail::fit_local(ctx, u0, nullptr, nullptr);
}

LocalFit local_fit_alpha(const Dataset& data, const QuasiFamily& family,
                         const KernelSpec& kernel, double u0,
                         const Eigen::VectorXd& beta, const FitOptions& opts) {
  if (beta.size() != data.d())
    throw std::invalid_argument("local_fit_alpha: beta length must equal d");
  auto ctx = detail::make_local_context(data, family, kernel, opts);
  return detail::fit_local(ctx, u0, &beta, nullptr);
}

namespace detail {

// Grid fits run block-parallel: within a block of 16 consecutive grid points
// each fit warm-starts from its left neighbor, the first point of a block
// starts from the pilot. Block boundaries depend only on the grid index, so
// results are identical at any thread count.
CoefficientCurves alpha_grid_with_context(const LocalContext& ctx, int n_grid,
                                          const Eigen::VectorXd* beta,
                                          int threads,
                                          std::vector<LocalFit>* fits_out) {
  const Dataset& data = *ctx.data;
  if (n_grid < 2) throw std::invalid_argument("alpha_on_grid: n_grid must be >= 2");
  const double lo = data.omega_lo();
  const double hi = data.omega_hi();
  const Eigen::Index p = data.p();

  CoefficientCurves curves;
  curves.grid.resize(n_grid);
  for (int k = 0; k < n_grid; ++k)
    curves.grid(k) = lo + (hi - lo) * static_cast<double>(k) /
                              static_cast<double>(n_grid - 1);
  curves.values.resize(n_grid, p);
  curves.derivatives.resize(n_grid, p);
  if (fits_out != nullptr) fits_out->resize(static_cast<std::size_t>(n_grid));

  constexpr int kBlock = 16;
  const int n_blocks = (n_grid + kBlock - 1) / kBlock;
  std::vector<std::string> failures(static_cast<std::size_t>(n_blocks));

  parallel_for(n_blocks, threads, [&](std::int64_t blk) {
    const int begin = static_cast<int>(blk) * kBlock;
    const int end = std::min(begin + kBlock, n_grid);
    Eigen::VectorXd warm;
    bool have_warm = false;
    for (int k = begin; k < end; ++k) {
      try {
        Eigen::VectorXd theta;
        LocalFit fit = fit_local(ctx, curves.grid(k), beta,
                                 have_warm ? &warm : nullptr, &theta);
        curves.values.row(k) = fit.a.transpose();
        curves.derivatives.row(k) = fit.b.transpose();
        if (fits_out != nullptr)
          (*fits_out)[static_cast<std::size_t>(k)] = fit;
        warm = std::move(theta);
        have_warm = true;
      } catch (const FitError& e) {
        if (failures[static_cast<std::size_t>(blk)].empty())
          failures[static_cast<std::size_t>(blk)] =
              "grid point u0 = " + std::to_string(curves.grid(k)) + ": " +
              e.what();
      }
    }
  });

  for (const auto& f : failures)
    if (!f.empty()) throw FitError("alpha-grid", f);
  return curves;
}

}  // namespace detail

CoefficientCurves alpha_on_grid(const Dataset& data, const QuasiFamily& family,
                                const KernelSpec& kernel,
                                const Eigen::VectorXd& beta, int n_grid,
                                const FitOptions& opts) {
  if (beta.size() != data.d())
    throw std::invalid_argument("alpha_on_grid: beta length must equal d");
  auto ctx = detail::make_local_context(data, family, kernel, opts);
  return detail::alpha_grid_with_context(ctx, n_grid, &beta, opts.threads,
                                         nullptr);
}

double undersmooth(double h_opt, Eigen::Index n) {
  if (!(h_opt > 0.0)) throw std::invalid_argument("undersmooth: h_opt must be > 0");
  if (n < 1) throw std::invalid_argument("undersmooth: n must be >= 1");
  return h_opt * std::pow(static_cast<double>(n), -2.0 / 15.0);
}

}  // namespace gvcplm
