#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "nldp/domain.hpp"
#include "nldp/error.hpp"
#include "nldp/kato.hpp"
#include "nldp/polynomial.hpp"
#include "nldp/problem.hpp"
#include "nldp/validate.hpp"
#include "scenarios.hpp"

using namespace nldp;

TEST_SUITE("problem_model") {

TEST_CASE("polynomial evaluation and derivative") {
  // 3 x^2 y - y + 2
  Polynomial p(2, {Monomial{3.0, {2, 1, 0}}, Monomial{-1.0, {0, 1, 0}}, Monomial{2.0, {0, 0, 0}}});
  const Point x = make_point({2.0, -1.5});
  CHECK(p(x) == doctest::Approx(3 * 4 * -1.5 + 1.5 + 2));
  const Polynomial dx = p.derivative(0);
  CHECK(dx(x) == doctest::Approx(6 * 2 * -1.5));
  const Polynomial dy = p.derivative(1);
  CHECK(dy(x) == doctest::Approx(3 * 4 - 1));
  CHECK_FALSE(p.is_constant());
  CHECK(Polynomial::constant(2, 4.0).is_constant());
  CHECK(p.derivative(0).derivative(0).derivative(0).terms().empty());
}

TEST_CASE("scalar field products fold constants and bounds") {
  const auto c = ScalarField::constant(2.0);
  const auto f = ScalarField::function([](const Point& x) { return x[0]; }, 3.0);
  const auto cf = c * f;
  CHECK(cf(make_point({1.5})) == 3.0);
  REQUIRE(cf.sup_bound());
  CHECK(*cf.sup_bound() == 6.0);
  CHECK((c * c).constant_value().value() == 4.0);
  CHECK((ScalarField() * f).is_zero());
}

TEST_CASE("symmetric square root reproduces A") {
  Matrix a(2, 2);
  a << 2.0, 0.5, 0.5, 1.0;
  const Matrix r = symmetric_sqrt(a);
  CHECK((r * r.transpose() - a).norm() <= 1e-12);
  CHECK((r - r.transpose()).norm() <= 1e-15);
}

TEST_CASE("domain membership and signed distance") {
  const auto ball = make_ball(make_point({0.0, 0.0}), 1.0);
  CHECK(ball->contains(make_point({0.5, 0.5})));
  CHECK_FALSE(ball->contains(make_point({1.0, 0.0})));
  CHECK(ball->signed_distance(make_point({0.0, 0.25})) == doctest::Approx(-0.75));
  const Point proj = ball->exterior_projection(make_point({0.3, 0.4}));
  CHECK_FALSE(ball->contains(proj));
  CHECK(proj.norm() == doctest::Approx(1.0).epsilon(1e-12));

  const auto box = make_box(make_point({0.0, 0.0}), make_point({1.0, 2.0}));
  CHECK(box->contains(make_point({0.5, 1.9})));
  CHECK_FALSE(box->contains(make_point({0.0, 1.0})));
  CHECK(box->signed_distance(make_point({0.5, 1.9})) == doctest::Approx(-0.1));
  CHECK(box->signed_distance(make_point({2.0, 3.0})) == doctest::Approx(std::sqrt(2.0)));
  CHECK_FALSE(box->contains(box->exterior_projection(make_point({0.9, 1.0}))));

  const auto iv = make_interval(0.0, 1.0);
  CHECK(iv->dim() == 1);
  CHECK(iv->contains(make_point({0.5})));
  CHECK_FALSE(iv->contains(make_point({1.0})));

  // signed_distance sign agrees with contains on a sample of points
  RngStream rng(3, 0);
  for (int i = 0; i < 2000; ++i) {
    const Point x = make_point({-2.0 + 4.0 * rng.uniform(), -2.0 + 4.0 * rng.uniform()});
    for (const Domain* d : {ball.get(), box.get()}) {
      const double sd = d->signed_distance(x);
      if (sd < 0) CHECK(d->contains(x));
      if (sd > 0) CHECK_FALSE(d->contains(x));
    }
  }
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 16; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    differs_c = differs_c || x != c.normal();
    differs_d = differs_d || x != d.normal();
  }
  CHECK(differs_c);
  CHECK(differs_d);
}

TEST_CASE("atom sampling frequencies converge to the weights") {
  const std::vector<Atom> atoms{{0.2, make_point({2.0})}, {0.5, make_point({3.0})}, {0.3, make_point({-1.0})}};
  RedistributionLaw nu(atoms);
  constexpr int kN = 100000;
  std::array<int, 3> hits{};
  RngStream rng(11, 0);
  for (int i = 0; i < kN; ++i) {
    const Point y = nu.sample(rng);
    for (int k = 0; k < 3; ++k) hits[k] += y == atoms[k].point ? 1 : 0;
  }
  for (int k = 0; k < 3; ++k) {
    const double w = atoms[k].weight;
    CHECK(std::abs(hits[k] / double(kN) - w) <= 4.0 * std::sqrt(w * (1 - w) / kN));
  }
}

TEST_CASE("density part: quadrature mass and uniform sampling") {
  RedistributionLaw nu({{0.25, make_point({2.0, 0.0})}},
                       UniformBoxDensity{0.75, Box{make_point({1.5, -0.5}), make_point({2.5, 0.5})}, 6});
  double mass = 0.0;
  for (const auto& a : nu.quadrature()) mass += a.weight;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  RngStream rng(5, 1);
  int in_box = 0;
  for (int i = 0; i < 10000; ++i) {
    const Point y = nu.sample(rng);
    if (y != make_point({2.0, 0.0})) {
      CHECK(y[0] >= 1.5);
      CHECK(y[0] <= 2.5);
      ++in_box;
    }
  }
  CHECK(std::abs(in_box / 10000.0 - 0.75) <= 4.0 * std::sqrt(0.75 * 0.25 / 10000));
}

TEST_CASE("validate_problem: identity matrix passes every check") {
  const auto rep = validate_problem(testing::disk_harmonic(), 500, 1);
  CHECK(rep.all_passed());
  CHECK(rep.seed == 1);
  CHECK(rep.check("A_eigenvalue_bounds").passed);
}

TEST_CASE("validate_problem: eigenvalue outside the ellipticity window fails") {
  auto spec = testing::disk_harmonic();
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 0.5;
  spec.elliptic = EllipticField::constant(a, 1.5);
  const auto rep = validate_problem(spec, 100, 1);
  CHECK_FALSE(rep.check("A_eigenvalue_bounds").passed);
  CHECK(rep.check("A_symmetric").passed);
}

TEST_CASE("validate_problem: two half atoms are normalized; bad mass and self atom fail") {
  auto spec = testing::disk_harmonic();
  spec.jumps = JumpKernel{ScalarField::constant(1.0),
                          RedistributionLaw({{0.5, make_point({1.5, 0.0})}, {0.5, make_point({0.0, 2.0})}})};
  CHECK(validate_problem(spec, 200, 2).check("nu_normalized").passed);

  spec.jumps->nu = RedistributionLaw({{0.6, make_point({1.5, 0.0})}, {0.5, make_point({0.0, 2.0})}});
  CHECK_FALSE(validate_problem(spec, 200, 2).check("nu_normalized").passed);

  spec.jumps->kappa = ScalarField::function([](const Point& x) { return x[0]; });
  CHECK_FALSE(validate_problem(spec, 200, 2).check("kappa_nonnegative").passed);
}

TEST_CASE("validate_problem: phi exceeding its declared bound fails; NaN fields throw") {
  auto spec = testing::disk_harmonic();
  spec.boundary.sup_bound = 1.0;  // |x1| reaches 2 on the probe box
  CHECK_FALSE(validate_problem(spec, 500, 3).check("phi_bound").passed);

  spec.boundary.phi = ScalarField::function([](const Point&) { return std::nan(""); });
  CHECK_THROWS_AS(validate_problem(spec, 10, 3), Error);
  CHECK_THROWS_AS(validate_problem(testing::disk_harmonic(), 0, 3), Error);
}

TEST_CASE("kato integral closed forms in d=3") {
  const Point o = make_point({0.0, 0.0, 0.0});
  for (double r : {1.0, 0.5, 0.1}) {
    // int_{B(0,r)} c |y|^{-1} dy = 2 pi c r^2
    CHECK(kato_integral(ScalarField::constant(1.5), 3, r, o) ==
          doctest::Approx(2 * std::numbers::pi * 1.5 * r * r).epsilon(1e-10));
    // int_{B(0,r)} |y|^{-2} dy = 4 pi r
    const auto inv = ScalarField::function([](const Point& y) { return 1.0 / y.norm(); });
    CHECK(kato_integral(inv, 3, r, o) == doctest::Approx(4 * std::numbers::pi * r).epsilon(1e-10));
  }
  CHECK(kato_integral(ScalarField(), 3, 0.3, o) == 0.0);
}

TEST_CASE("kato integral against a brute-force Cartesian sum") {
  // Smooth non-radial f probed off-centre, d=3: midpoint rule on a fine cube
  // lattice, skipping the cell at the singularity (its contribution is O(h^2)).
  const auto f = ScalarField::function([](const Point& y) { return 1.0 + y[0] * y[0] + 0.5 * y[1]; });
  const Point x = make_point({0.1, -0.2, 0.05});
  const double r = 0.5;
  const int n = 120;
  const double h = 2 * r / n;
  double brute = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const Point y = make_point({x[0] - r + (i + 0.5) * h, x[1] - r + (j + 0.5) * h, x[2] - r + (k + 0.5) * h});
        const double s = (y - x).norm();
        if (s < r) brute += std::abs(f(y)) / s * h * h * h;
      }
    }
  }
  CHECK(kato_integral(f, 3, r, x) == doctest::Approx(brute).epsilon(5e-3));
}

TEST_CASE("kato integral in d=1 and d=2") {
  // d=1: int_{x-r}^{x+r} c dy = 2 c r
  CHECK(kato_integral(ScalarField::constant(2.0), 1, 0.25, make_point({0.3})) == doctest::Approx(1.0));
  // d=2: int_{B(0,r)} log(1/|y|) dy = pi r^2 (1/2 - log r)
  const double r = 0.5;
  CHECK(kato_integral(ScalarField::constant(1.0), 2, r, make_point({0.0, 0.0})) ==
        doctest::Approx(std::numbers::pi * r * r * (0.5 - std::log(r))).epsilon(1e-10));
}

TEST_CASE("kato profile: monotone decay, zero field, and argument checks") {
  const auto inv = ScalarField::function([](const Point& y) { return 1.0 / y.norm(); });
  const std::vector<double> radii{0.8, 0.4, 0.2, 0.1};
  const std::vector<Point> probes{make_point({0.0, 0.0, 0.0}), make_point({0.5, 0.0, 0.0})};
  const auto prof = kato_profile(inv, 3, radii, probes);
  REQUIRE(prof.size() == radii.size());
  for (std::size_t i = 1; i < prof.size(); ++i) CHECK(prof[i].sup_estimate <= prof[i - 1].sup_estimate);
  CHECK(prof.back().sup_estimate == doctest::Approx(4 * std::numbers::pi * 0.1).epsilon(1e-10));

  for (const auto& s : kato_profile(ScalarField(), 3, radii, probes)) CHECK(s.sup_estimate == 0.0);

  const std::vector<double> increasing{0.1, 0.2};
  CHECK_THROWS_AS(kato_profile(inv, 3, increasing, probes), Error);

  const auto bad = ScalarField::function([](const Point&) { return std::nan(""); });
  bool raised = false;
  try {
    kato_integral(bad, 1, 0.5, make_point({0.0}));
  } catch (const Error& e) {
    raised = e.kind() == ErrorKind::quadrature_failure;
  }
  CHECK(raised);
}

TEST_CASE("problem spec dimension checks") {
  auto spec = testing::disk_harmonic();
  CHECK_NOTHROW(spec.check_dims());
  spec.drift = DriftField::zero(3);
  CHECK_THROWS_AS(spec.check_dims(), Error);
}

}  // TEST_SUITE
