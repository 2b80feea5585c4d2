#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "restyle/tensor.hpp"

namespace restyle {

struct GradSuiteCheck {
  std::string name;
  std::size_t instances = 0;
  std::size_t elements = 0;   // total gradient entries compared
  std::size_t failures = 0;
  double max_rel_err = 0.0;
  bool pass() const { return failures == 0; }
};

struct GradSuiteResult {
  std::vector<GradSuiteCheck> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass()) return false;
    return true;
  }
};

// Central finite-difference verification of every differentiable operation
// (rel. tol 1e-4) and of the three loss functions through a small random
// model (rel. tol 1e-3), `instances` random instances each. Deterministic
// given the seed.
GradSuiteResult run_gradient_suite(std::uint64_t seed, int instances = 20);

std::string format_suite(const GradSuiteResult& result);

}  // namespace restyle
