#include "nldp/polynomial.hpp"

#include <cmath>

#include "nldp/error.hpp"

namespace nldp {

Polynomial::Polynomial(int dim, std::vector<Monomial> terms) : dim_(dim), terms_(std::move(terms)) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::invalid_argument, "polynomial dimension out of range");
  for (const auto& t : terms_) {
    for (int i = 0; i < kMaxDim; ++i) {
      if (t.powers[i] < 0 || (i >= dim && t.powers[i] != 0)) {
        throw Error(ErrorKind::invalid_argument, "polynomial term has invalid powers");
      }
    }
  }
}

Polynomial Polynomial::constant(int dim, double c) { return Polynomial(dim, {Monomial{c, {}}}); }

double Polynomial::operator()(const Point& x) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coef;
    for (int i = 0; i < dim_; ++i) {
      for (int p = 0; p < t.powers[i]; ++p) v *= x[i];
    }
    sum += v;
  }
  return sum;
}

Polynomial Polynomial::derivative(int axis) const {
  std::vector<Monomial> out;
  for (const auto& t : terms_) {
    if (t.powers[axis] == 0) continue;
    Monomial m = t;
    m.coef *= t.powers[axis];
    m.powers[axis] -= 1;
    out.push_back(m);
  }
  return Polynomial(dim_, std::move(out));
}

bool Polynomial::is_constant() const {
  for (const auto& t : terms_) {
    if (t.coef == 0.0) continue;
    for (int p : t.powers) {
      if (p != 0) return false;
    }
  }
  return true;
}

}  // namespace nldp
