#pragma once

#include <array>
#include <vector>

#include "nldp/types.hpp"

namespace nldp {

/// coef * x1^p1 * ... * xd^pd
struct Monomial {
  double coef = 0.0;
  std::array<int, kMaxDim> powers{};
};

/// Multivariate polynomial with explicitly listed terms. Used for the
/// coefficient fields that configs may specify without an expression parser.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(int dim, std::vector<Monomial> terms);

  static Polynomial constant(int dim, double c);

  int dim() const { return dim_; }
  const std::vector<Monomial>& terms() const { return terms_; }

  double operator()(const Point& x) const;
  Polynomial derivative(int axis) const;

  bool is_constant() const;

 private:
  int dim_ = 1;
  std::vector<Monomial> terms_;
};

}  // namespace nldp
