#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nldp/problem.hpp"

namespace nldp {

struct ValidationCheck {
  std::string name;
  bool passed = true;
  /// Worst observed violation measure for this check (0 when clean).
  double worst = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::uint64_t seed = 0;
  int n_samples = 0;
  std::vector<ValidationCheck> checks;

  bool all_passed() const;
  const ValidationCheck& check(const std::string& name) const;
};

/// Samples the bounding box uniformly and checks symmetry and ellipticity of
/// A, the square-root factor, kappa >= 0, normalization of nu, nu({x}) = 0,
/// and the declared bound on phi at exterior points.
ValidationReport validate_problem(const ProblemSpec& spec, int n_samples, std::uint64_t rng_seed);

}  // namespace nldp
