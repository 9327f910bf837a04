#pragma once

#include <Eigen/Dense>

namespace nldp {

/// Largest spatial dimension supported. Points and matrices are stack
/// allocated with this bound so path kernels never touch the heap.
inline constexpr int kMaxDim = 3;

using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                             kMaxDim, kMaxDim>;

/// Closed axis-aligned box [lo, hi].
struct Box {
  Point lo;
  Point hi;

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Point& x) const {
    for (int i = 0; i < dim(); ++i) {
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
  }

  Box expanded(double margin) const {
    Box b = *this;
    b.lo.array() -= margin;
    b.hi.array() += margin;
    return b;
  }
};

inline Point make_point(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double v : xs) p[i++] = v;
  return p;
}

}  // namespace nldp
