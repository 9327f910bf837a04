#pragma once

#include <span>
#include <vector>

#include "nldp/fields.hpp"

namespace nldp {

struct KatoSample {
  double radius = 0.0;
  double sup_estimate = 0.0;
};

/// Kato-class diagnostic: for each radius r, the maximum over probe points x of
///   d = 1:  int_{B(x,r)} |f(y)| dy
///   d = 2:  int_{B(x,r)} |f(y)| log(1/|x-y|) dy
///   d = 3:  int_{B(x,r)} |f(y)| |x-y|^{2-d} dy
/// computed with a fixed polar quadrature centred at x. A profile that decays
/// to zero as r -> 0 is consistent with Kato membership; it never proves it.
/// Throws QuadratureFailure when |f| is non-finite at a quadrature node.
std::vector<KatoSample> kato_profile(const ScalarField& f, int dim, std::span<const double> radii,
                                     std::span<const Point> probe_points);

/// The single-point integral used by kato_profile.
double kato_integral(const ScalarField& f, int dim, double radius, const Point& x);

}  // namespace nldp
