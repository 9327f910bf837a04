#pragma once

#include <memory>

#include "nldp/types.hpp"

namespace nldp {

/// Bounded open set D. Implementations must be pure and thread-safe.
class Domain {
 public:
  virtual ~Domain() = default;

  virtual int dim() const = 0;
  /// Open-set membership.
  virtual bool contains(const Point& x) const = 0;
  /// Negative inside, positive outside. Exact for the built-in shapes.
  virtual double signed_distance(const Point& x) const = 0;
  virtual Box bounding_box() const = 0;
  /// Closest boundary point, moved just far enough outward that
  /// contains() is false.
  virtual Point exterior_projection(const Point& x) const = 0;

  /// Every boundary point is declared regular for D^c. Not verified.
  bool regularity_declared() const { return regular_; }

 protected:
  bool regular_ = true;
};

class BallDomain final : public Domain {
 public:
  BallDomain(Point center, double radius);

  int dim() const override { return static_cast<int>(center_.size()); }
  bool contains(const Point& x) const override { return (x - center_).squaredNorm() < r2_; }
  double signed_distance(const Point& x) const override { return (x - center_).norm() - radius_; }
  Box bounding_box() const override;
  Point exterior_projection(const Point& x) const override;

  const Point& center() const { return center_; }
  double radius() const { return radius_; }

 private:
  Point center_;
  double radius_;
  double r2_;
};

/// Open box (lo, hi); in one dimension this is the interval domain.
class BoxDomain final : public Domain {
 public:
  explicit BoxDomain(Box box);

  int dim() const override { return box_.dim(); }
  bool contains(const Point& x) const override;
  double signed_distance(const Point& x) const override;
  Box bounding_box() const override { return box_; }
  Point exterior_projection(const Point& x) const override;

 private:
  Box box_;
};

std::shared_ptr<const Domain> make_ball(const Point& center, double radius);
std::shared_ptr<const Domain> make_box(const Point& lo, const Point& hi);
std::shared_ptr<const Domain> make_interval(double lo, double hi);

}  // namespace nldp
