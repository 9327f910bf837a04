#include "nldp/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nldp/error.hpp"

namespace nldp {

namespace {

// Push a boundary point outward until membership flips.
template <class Contains>
Point nudge_outward(Point p, const Point& outward, Contains&& contains) {
  double eps = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, p.lpNorm<Eigen::Infinity>());
  for (int i = 0; i < 64 && contains(p); ++i) {
    p += eps * outward;
    eps *= 2.0;
  }
  return p;
}

}  // namespace

BallDomain::BallDomain(Point center, double radius)
    : center_(std::move(center)), radius_(radius), r2_(radius * radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::invalid_argument, "ball radius must be positive");
  if (center_.size() < 1 || center_.size() > kMaxDim) {
    throw Error(ErrorKind::invalid_argument, "ball dimension out of range");
  }
}

Box BallDomain::bounding_box() const {
  Box b{center_, center_};
  b.lo.array() -= radius_;
  b.hi.array() += radius_;
  return b;
}

Point BallDomain::exterior_projection(const Point& x) const {
  Point dir = x - center_;
  double n = dir.norm();
  if (n == 0.0) {
    dir = Point::Zero(dim());
    dir[0] = 1.0;
  } else {
    dir /= n;
  }
  return nudge_outward(Point(center_ + radius_ * dir), dir, [this](const Point& p) { return contains(p); });
}

BoxDomain::BoxDomain(Box box) : box_(std::move(box)) {
  if (box_.lo.size() != box_.hi.size() || box_.lo.size() < 1 || box_.lo.size() > kMaxDim) {
    throw Error(ErrorKind::invalid_argument, "box dimension out of range");
  }
  for (int i = 0; i < box_.dim(); ++i) {
    if (!(box_.lo[i] < box_.hi[i])) throw Error(ErrorKind::invalid_argument, "box must have lo < hi");
  }
}

bool BoxDomain::contains(const Point& x) const {
  for (int i = 0; i < dim(); ++i) {
    if (!(x[i] > box_.lo[i] && x[i] < box_.hi[i])) return false;
  }
  return true;
}

double BoxDomain::signed_distance(const Point& x) const {
  // Outside: Euclidean distance to the box. Inside: minus the distance to the nearest face.
  double outside2 = 0.0;
  double inside = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i) {
    double below = box_.lo[i] - x[i];
    double above = x[i] - box_.hi[i];
    double excess = std::max({below, above, 0.0});
    outside2 += excess * excess;
    inside = std::min(inside, std::min(-below, -above));
  }
  if (outside2 > 0.0) return std::sqrt(outside2);
  return contains(x) ? -inside : 0.0;
}

Point BoxDomain::exterior_projection(const Point& x) const {
  if (!contains(x)) return x;
  int axis = 0;
  bool upper = false;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i) {
    if (x[i] - box_.lo[i] < best) {
      best = x[i] - box_.lo[i];
      axis = i;
      upper = false;
    }
    if (box_.hi[i] - x[i] < best) {
      best = box_.hi[i] - x[i];
      axis = i;
      upper = true;
    }
  }
  Point p = x;
  p[axis] = upper ? box_.hi[axis] : box_.lo[axis];
  return p;  // a face point is already outside the open box
}

std::shared_ptr<const Domain> make_ball(const Point& center, double radius) {
  return std::make_shared<BallDomain>(center, radius);
}

std::shared_ptr<const Domain> make_box(const Point& lo, const Point& hi) {
  return std::make_shared<BoxDomain>(Box{lo, hi});
}

std::shared_ptr<const Domain> make_interval(double lo, double hi) {
  return make_box(make_point({lo}), make_point({hi}));
}

}  // namespace nldp
