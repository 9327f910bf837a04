#include "nldp/fields.hpp"

#include <cmath>

#include "nldp/error.hpp"

namespace nldp {

ScalarField ScalarField::constant(double c) {
  ScalarField f;
  f.value_ = c;
  f.sup_ = std::abs(c);
  return f;
}

ScalarField ScalarField::function(Fn fn, std::optional<double> sup_bound) {
  ScalarField f;
  f.fn_ = std::move(fn);
  f.sup_ = sup_bound;
  return f;
}

std::optional<double> ScalarField::constant_value() const {
  if (fn_) return std::nullopt;
  return value_;
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  if (a.is_zero() || b.is_zero()) return ScalarField::constant(0.0);
  std::optional<double> sup;
  if (a.sup_ && b.sup_) sup = *a.sup_ * *b.sup_;
  if (!a.fn_ && !b.fn_) return ScalarField::constant(a.value_ * b.value_);
  return ScalarField::function([a, b](const Point& x) { return a(x) * b(x); }, sup);
}

Matrix symmetric_sqrt(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::evaluation_failure, "eigendecomposition of A failed");
  }
  Point ev = eig.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    if (!(ev[i] >= 0.0)) throw Error(ErrorKind::evaluation_failure, "A is not positive semi-definite");
    ev[i] = std::sqrt(ev[i]);
  }
  Matrix s = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (s + s.transpose());
}

EllipticField EllipticField::identity(int dim) {
  return constant(Matrix::Identity(dim, dim), 1.0);
}

EllipticField EllipticField::constant(const Matrix& a, double lambda) {
  if (a.rows() != a.cols() || a.rows() < 1 || a.rows() > kMaxDim) {
    throw Error(ErrorKind::invalid_argument, "A must be square with dimension in [1, 3]");
  }
  if (!(lambda >= 1.0)) throw Error(ErrorKind::invalid_argument, "ellipticity constant must be >= 1");
  EllipticField f;
  f.dim_ = static_cast<int>(a.rows());
  f.lambda_ = lambda;
  f.a_ = a;
  f.a_fn_ = nullptr;
  f.div_fn_ = nullptr;
  f.diagonal_ = a.isDiagonal(0.0);
  f.sqrt_a_ = f.diagonal_ ? Matrix(a.diagonal().cwiseSqrt().asDiagonal()) : symmetric_sqrt(a);
  return f;
}

EllipticField EllipticField::variable(int dim, MatrixFn a, VectorFn div_a, double lambda,
                                      bool diagonal) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::invalid_argument, "dimension out of range");
  if (!a) throw Error(ErrorKind::invalid_argument, "variable A requires an evaluation map");
  if (!(lambda >= 1.0)) throw Error(ErrorKind::invalid_argument, "ellipticity constant must be >= 1");
  EllipticField f;
  f.dim_ = dim;
  f.lambda_ = lambda;
  f.diagonal_ = diagonal;
  f.a_fn_ = std::move(a);
  f.div_fn_ = std::move(div_a);
  return f;
}

Point EllipticField::eval_div_A(const Point& x) const {
  if (!div_fn_) return Point::Zero(dim_);
  return div_fn_(x);
}

Matrix EllipticField::sqrt_A(const Point& x) const {
  if (!a_fn_) return sqrt_a_;
  Matrix a = a_fn_(x);
  if (diagonal_) {
    Matrix s = Matrix::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
      if (!(a(i, i) >= 0.0)) throw Error(ErrorKind::evaluation_failure, "negative diagonal entry in A");
      s(i, i) = std::sqrt(a(i, i));
    }
    return s;
  }
  return symmetric_sqrt(a);
}

DriftField DriftField::zero(int dim) { return constant(Point::Zero(dim)); }

DriftField DriftField::constant(const Point& b) {
  DriftField f;
  f.dim_ = static_cast<int>(b.size());
  f.b_ = b;
  f.fn_ = nullptr;
  f.bound_ = b.norm();
  return f;
}

DriftField DriftField::variable(int dim, VectorFn b, std::optional<double> bound_hint) {
  DriftField f;
  f.dim_ = dim;
  f.b_ = Point::Zero(dim);
  f.fn_ = std::move(b);
  f.bound_ = bound_hint;
  return f;
}

}  // namespace nldp
