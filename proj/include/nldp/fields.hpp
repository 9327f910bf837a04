#pragma once

#include <functional>
#include <optional>

#include "nldp/types.hpp"

namespace nldp {

/// Scalar map R^d -> R. Either a constant (fast path in the kernels) or a
/// pure function. An optional declared bound sup|f| travels with the field.
class ScalarField {
 public:
  using Fn = std::function<double(const Point&)>;

  ScalarField() = default;  // identically zero

  static ScalarField constant(double c);
  static ScalarField function(Fn fn, std::optional<double> sup_bound = std::nullopt);

  double operator()(const Point& x) const { return fn_ ? fn_(x) : value_; }

  std::optional<double> constant_value() const;
  std::optional<double> sup_bound() const { return sup_; }
  bool is_zero() const { return !fn_ && value_ == 0.0; }

  /// Pointwise product; constants fold and bounds multiply.
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);

 private:
  double value_ = 0.0;
  Fn fn_;
  std::optional<double> sup_ = 0.0;
};

/// Diffusion matrix A(x) of the divergence-form part. Supports constant A and
/// C^1 variable A with a user-supplied divergence (div A)_i = sum_j d_j a_ij.
class EllipticField {
 public:
  using MatrixFn = std::function<Matrix(const Point&)>;
  using VectorFn = std::function<Point(const Point&)>;

  EllipticField() : a_(Matrix::Identity(1, 1)), sqrt_a_(Matrix::Identity(1, 1)) {}

  static EllipticField identity(int dim);
  static EllipticField constant(const Matrix& a, double lambda);
  /// `div_a` may be empty, meaning the divergence vanishes identically.
  static EllipticField variable(int dim, MatrixFn a, VectorFn div_a, double lambda, bool diagonal);

  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  bool is_constant() const { return !a_fn_; }
  bool is_diagonal() const { return diagonal_; }
  bool has_zero_divergence() const { return !div_fn_; }

  Matrix eval_A(const Point& x) const { return a_fn_ ? a_fn_(x) : a_; }
  Point eval_div_A(const Point& x) const;
  /// Symmetric square root S with S*S^T = A(x).
  Matrix sqrt_A(const Point& x) const;

  const Matrix& constant_A() const { return a_; }
  const Matrix& constant_sqrt_A() const { return sqrt_a_; }

 private:
  int dim_ = 1;
  double lambda_ = 1.0;
  bool diagonal_ = true;
  Matrix a_;
  Matrix sqrt_a_;
  MatrixFn a_fn_;
  VectorFn div_fn_;
};

/// Symmetric square root through a self-adjoint eigendecomposition.
Matrix symmetric_sqrt(const Matrix& a);

class DriftField {
 public:
  using VectorFn = std::function<Point(const Point&)>;

  DriftField() : b_(Point::Zero(1)) {}

  static DriftField zero(int dim);
  static DriftField constant(const Point& b);
  static DriftField variable(int dim, VectorFn b, std::optional<double> bound_hint = std::nullopt);

  int dim() const { return dim_; }
  bool is_constant() const { return !fn_; }
  Point operator()(const Point& x) const { return fn_ ? fn_(x) : b_; }
  std::optional<double> bound_hint() const { return bound_; }

 private:
  int dim_ = 1;
  Point b_;
  VectorFn fn_;
  std::optional<double> bound_;
};

}  // namespace nldp
