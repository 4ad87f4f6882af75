#pragma once

#include <stdexcept>
#include <string>

namespace gvcplm {

// Numerical failure inside a fitting stage (singular design, non-convergence,
// too-narrow bandwidth). The stage tag survives pipeline propagation.
class FitError : public std::runtime_error {
 public:
  FitError(std::string stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace gvcplm
