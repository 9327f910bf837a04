#include "nldp/validate.hpp"

#include <algorithm>
#include <cmath>

#include "nldp/error.hpp"

namespace nldp {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::evaluation_failure, std::string("non-finite value from ") + what);
  }
}

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::evaluation_failure, std::string("non-finite value from ") + what);
  }
}

Point uniform_in(const Box& box, RngStream& rng) {
  Point x(box.dim());
  for (int i = 0; i < box.dim(); ++i) x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * rng.uniform();
  return x;
}

}  // namespace

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck& ValidationReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw Error(ErrorKind::invalid_argument, "no validation check named " + name);
}

ValidationReport validate_problem(const ProblemSpec& spec, int n_samples, std::uint64_t rng_seed) {
  if (n_samples < 1) throw Error(ErrorKind::invalid_argument, "n_samples must be >= 1");
  spec.check_dims();

  constexpr double kSymTol = 1e-12;
  constexpr double kEigTol = 1e-12;
  constexpr double kSqrtTol = 1e-10;
  constexpr double kMassTol = 1e-12;
  constexpr double kQuadTol = 1e-10;

  ValidationReport rep;
  rep.seed = rng_seed;
  rep.n_samples = n_samples;

  ValidationCheck sym{"A_symmetric"};
  ValidationCheck eig{"A_eigenvalue_bounds"};
  ValidationCheck sqrt_chk{"sqrtA_reproduces_A"};
  ValidationCheck kappa_chk{"kappa_nonnegative"};
  ValidationCheck drift_chk{"drift_finite"};
  ValidationCheck self_atom{"nu_no_self_atom"};
  ValidationCheck phi_chk{"phi_bound"};

  const double lam = spec.elliptic.lambda();
  const Box box = spec.domain->bounding_box();
  RngStream rng(rng_seed, 0);

  for (int s = 0; s < n_samples; ++s) {
    const Point x = uniform_in(box, rng);

    const Matrix a = spec.elliptic.eval_A(x);
    require_finite(a, "A");
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    sym.worst = std::max(sym.worst, asym);

    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    eig.worst = std::max({eig.worst, 1.0 / lam - lo, hi - lam});

    const Matrix root = spec.elliptic.sqrt_A(x);
    require_finite(root, "sqrt_A");
    sqrt_chk.worst = std::max(sqrt_chk.worst, (root * root.transpose() - a).norm());

    const Point dv = spec.elliptic.eval_div_A(x);
    require_finite(dv, "div_A");
    const Point b = spec.drift(x);
    require_finite(b, "drift");

    if (spec.jumps) {
      const double k = spec.jumps->kappa(x);
      require_finite(k, "kappa");
      kappa_chk.worst = std::max(kappa_chk.worst, -k);
      if (spec.jumps->nu) {
        for (const auto& at : spec.jumps->nu->atoms()) {
          if (at.weight > 0.0 && at.point == x) self_atom.worst = 1.0;
        }
      }
    }
  }

  // Exterior probes for phi: an enlarged box plus every exterior jump target.
  const Point extent = box.hi - box.lo;
  Box outer = box;
  outer.lo -= 0.5 * extent;
  outer.hi += 0.5 * extent;
  std::vector<Point> exterior;
  for (int s = 0; s < n_samples; ++s) {
    Point x = uniform_in(outer, rng);
    if (!spec.domain->contains(x)) exterior.push_back(x);
  }
  if (spec.jumps && spec.jumps->nu) {
    for (const auto& at : spec.jumps->nu->quadrature()) {
      if (!spec.domain->contains(at.point)) exterior.push_back(at.point);
    }
  }
  for (const auto& x : exterior) {
    const double v = spec.boundary.phi(x);
    require_finite(v, "phi");
    phi_chk.worst = std::max(phi_chk.worst, std::abs(v) - spec.boundary.sup_bound);
  }

  sym.passed = sym.worst <= kSymTol;
  eig.passed = eig.worst <= kEigTol;
  sqrt_chk.passed = sqrt_chk.worst <= kSqrtTol;
  kappa_chk.passed = kappa_chk.worst <= 0.0;
  self_atom.passed = self_atom.worst == 0.0;
  phi_chk.passed = phi_chk.worst <= 0.0;
  phi_chk.worst = std::max(phi_chk.worst, 0.0);
  eig.worst = std::max(eig.worst, 0.0);
  phi_chk.detail = std::to_string(exterior.size()) + " exterior points";

  rep.checks = {sym, eig, sqrt_chk, kappa_chk, drift_chk};

  ValidationCheck mass{"nu_normalized"};
  ValidationCheck quad{"nu_quadrature_mass"};
  if (spec.jumps && spec.jumps->nu) {
    const auto& nu = *spec.jumps->nu;
    mass.worst = std::abs(nu.total_mass() - 1.0);
    mass.passed = mass.worst <= kMassTol;
    if (nu.density()) {
      double q = 0.0;
      for (const auto& at : nu.quadrature()) q += at.weight;
      quad.worst = std::abs(q - nu.total_mass());
      quad.passed = quad.worst <= kQuadTol;
    }
  } else {
    mass.detail = "no redistribution law";
  }
  rep.checks.push_back(mass);
  rep.checks.push_back(quad);
  rep.checks.push_back(self_atom);
  rep.checks.push_back(phi_chk);
  return rep;
}

}  // namespace nldp
