#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gvcplm/estimator.hpp"

namespace gvcplm {

enum class InfoCriterion { aic, bic, ric };

InfoCriterion criterion_by_name(const std::string& name);
std::string criterion_name(InfoCriterion c);

// L0 lambda for the classical criteria: sqrt(2/n), sqrt(log(n)/n),
// sqrt(2 log(d)/n).
double criterion_lambda(InfoCriterion criterion, Eigen::Index n,
                        Eigen::Index d);

struct SubsetResult {
  std::vector<int> best_subset;  // 0-based Z indices
  double criterion_value = 0.0;
  SemiFit fit;
  std::uint64_t subsets_evaluated = 0;
  double wall_seconds = 0.0;
  // Optional criterion trace: (bitmask, score); score -inf marks a failure.
  std::vector<std::pair<std::uint32_t, double>> trace;
};

struct SubsetOptions {
  EstimatorOptions estimator;
  int max_d = 20;          // 2^d enumeration guard
  bool force_serial = false;  // timing-faithful enumeration
  bool keep_trace = false;
};

// Exhaustive best-subset search under the L0 penalty: every subset refits the
// full semiparametric pipeline (alpha re-profiled jointly with the restricted
// beta) and is scored by l(alpha_S, beta_S) - n * 0.5 * lambda^2 * |S|.
SubsetResult best_subset(const Dataset& data, const QuasiFamily& family,
                         const KernelSpec& kernel, InfoCriterion criterion,
                         const SubsetOptions& opts = {});

// Unpenalized fit restricted to a known support; the zero mask marks the
// complement.
SemiFit oracle_fit(const Dataset& data, const QuasiFamily& family,
                   const KernelSpec& kernel, const std::vector<int>& support,
                   const EstimatorOptions& opts = {});

}  // namespace gvcplm
