#include "nldp/kato.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "nldp/error.hpp"

namespace nldp {

namespace {

constexpr int kRadialOrder = 30;
constexpr int kPolarOrder = 16;
constexpr int kAzimuthNodes = 64;

using RadialRule = boost::math::quadrature::gauss<double, kRadialOrder>;
using PolarRule = boost::math::quadrature::gauss<double, kPolarOrder>;

// Expands the symmetric half-rule boost stores into full node/weight lists on [-1, 1].
template <class Rule>
void full_rule(std::vector<double>& nodes, std::vector<double>& weights) {
  const auto& a = Rule::abscissa();
  const auto& w = Rule::weights();
  nodes.clear();
  weights.clear();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      nodes.push_back(0.0);
      weights.push_back(w[i]);
    } else {
      nodes.push_back(a[i]);
      weights.push_back(w[i]);
      nodes.push_back(-a[i]);
      weights.push_back(w[i]);
    }
  }
}

double checked_abs(const ScalarField& f, const Point& y) {
  const double v = std::abs(f(y));
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::quadrature_failure, "integrand is non-finite at a quadrature node");
  }
  return v;
}

}  // namespace

double kato_integral(const ScalarField& f, int dim, double radius, const Point& x) {
  if (!(radius > 0.0)) throw Error(ErrorKind::invalid_argument, "radius must be positive");
  if (x.size() != dim) throw Error(ErrorKind::invalid_argument, "probe dimension mismatch");
  if (f.is_zero()) return 0.0;

  std::vector<double> rn, rw;
  full_rule<RadialRule>(rn, rw);
  const double two_pi = 2.0 * std::numbers::pi;

  double total = 0.0;
  for (std::size_t k = 0; k < rn.size(); ++k) {
    // s = radius t^2 flattens the log and 1/|y| singularities at the centre
    const double t = 0.5 * (rn[k] + 1.0);
    const double s = radius * t * t;
    const double ws = radius * t * rw[k];
    double shell = 0.0;  // integral over the sphere of radius s, times the kernel and Jacobian
    if (dim == 1) {
      Point y = x;
      y[0] = x[0] + s;
      shell = checked_abs(f, y);
      y[0] = x[0] - s;
      shell += checked_abs(f, y);
    } else if (dim == 2) {
      double ring = 0.0;
      for (int j = 0; j < kAzimuthNodes; ++j) {
        const double th = two_pi * (j + 0.5) / kAzimuthNodes;
        Point y = x;
        y[0] += s * std::cos(th);
        y[1] += s * std::sin(th);
        ring += checked_abs(f, y);
      }
      shell = ring * (two_pi / kAzimuthNodes) * std::log(1.0 / s) * s;
    } else {
      std::vector<double> pn, pw;
      full_rule<PolarRule>(pn, pw);
      double sphere = 0.0;
      for (std::size_t i = 0; i < pn.size(); ++i) {
        const double mu = pn[i];
        const double rho = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        for (int j = 0; j < kAzimuthNodes; ++j) {
          const double ph = two_pi * (j + 0.5) / kAzimuthNodes;
          Point y = x;
          y[0] += s * rho * std::cos(ph);
          y[1] += s * rho * std::sin(ph);
          y[2] += s * mu;
          sphere += pw[i] * checked_abs(f, y);
        }
      }
      // |x-y|^{2-d} * s^{d-1} = s for d = 3
      shell = sphere * (two_pi / kAzimuthNodes) * s;
    }
    total += ws * shell;
  }
  return total;
}

std::vector<KatoSample> kato_profile(const ScalarField& f, int dim, std::span<const double> radii,
                                     std::span<const Point> probe_points) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::invalid_argument, "dimension out of range");
  if (probe_points.empty()) throw Error(ErrorKind::invalid_argument, "need at least one probe point");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw Error(ErrorKind::invalid_argument, "radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) {
      throw Error(ErrorKind::invalid_argument, "radii must be strictly decreasing");
    }
  }
  for (const auto& p : probe_points) {
    if (!p.allFinite()) throw Error(ErrorKind::invalid_argument, "probe points must be finite");
  }

  std::vector<KatoSample> out;
  for (double r : radii) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& x : probe_points) best = std::max(best, kato_integral(f, dim, r, x));
    out.push_back({r, best});
  }
  return out;
}

}  // namespace nldp
