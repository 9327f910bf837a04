#include <doctest.h>

#include <cmath>
#include <vector>

#include "nldp/error.hpp"
#include "nldp/estimators.hpp"
#include "nldp/oracle_fd.hpp"
#include "scenarios.hpp"

using namespace nldp;

namespace {

ProblemSpec with_kappa(ProblemSpec s, ScalarField kappa) {
  if (!s.jumps) s.jumps = JumpKernel{};
  s.jumps->kappa = std::move(kappa);
  return s;
}

ProblemSpec line_no_jumps() {
  ProblemSpec s;
  s.dim = 1;
  s.elliptic = EllipticField::identity(1);
  s.drift = DriftField::zero(1);
  s.domain = make_interval(-1.0, 1.0);
  s.boundary.phi = ScalarField::constant(0.0);
  return s;
}

double within(const Estimate& e, double exact) { return std::abs(e.mean - exact) / e.std_error; }

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("summarize: formulas and the constant case") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const Estimate e = summarize(v);
  CHECK(e.mean == 2.5);
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.ci_lo == doctest::Approx(2.5 - 1.96 * e.std_error));
  CHECK(e.ci_hi == doctest::Approx(2.5 + 1.96 * e.std_error));
  CHECK(e.n_paths == 4);

  const std::vector<double> c(1001, 0.1);
  const Estimate ec = summarize(c);
  CHECK(ec.mean == 0.1);
  CHECK(ec.std_error == 0.0);

  const auto rep = make_identity_report(e, ec, 3.0);
  CHECK(rep.z_score == doctest::Approx(2.4 / e.std_error));
  CHECK(rep.pass == (rep.z_score <= 3.0));
}

TEST_CASE("pairwise sum is exact on integers and independent of production order") {
  std::vector<double> v(1000);
  for (int i = 0; i < 1000; ++i) v[i] = i;
  CHECK(pairwise_sum(v) == 499500.0);
  CHECK(pairwise_sum(std::span<const double>{}) == 0.0);
}

TEST_CASE("solve_dirichlet: harmonic x1 on the unit disk") {
  const auto spec = testing::disk_harmonic();
  const std::vector<Point> pts{make_point({0.0, 0.0}), make_point({0.5, 0.0})};
  SimConfig cfg;
  cfg.dt_base = 1e-3;
  const auto res = solve_dirichlet(spec, pts, 4000, cfg, 21);
  for (const auto& pe : res) {
    CHECK(within(pe.estimate, pe.point[0]) <= 3.0);
    CHECK(pe.estimate.aux_or("nonexit_count", -1) == 0.0);
    CHECK(pe.estimate.mean >= pe.estimate.aux_or("sample_min", 0));
    CHECK(pe.estimate.mean <= pe.estimate.aux_or("sample_max", 0));
  }
  CHECK(res[0].estimate.aux_or("mean_exit_time", 0) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("solve_dirichlet: constant data gives the constant exactly") {
  const auto spec = testing::constant_phi(testing::disk_with_killing(1.0, make_point({0.0, 1.5})), 0.7);
  const std::vector<Point> pts{make_point({0.0, 0.0}), make_point({0.9, 0.0})};
  const auto res = solve_dirichlet(spec, pts, 500, SimConfig{}, 2);
  for (const auto& pe : res) {
    CHECK(pe.estimate.mean == 0.7);
    CHECK(pe.estimate.std_error == 0.0);
  }
}

TEST_CASE("solve_dirichlet: points outside D are rejected") {
  const auto spec = testing::disk_harmonic();
  const std::vector<Point> pts{make_point({0.0, 0.0}), make_point({1.0, 0.0})};
  try {
    solve_dirichlet(spec, pts, 10, SimConfig{}, 1);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
  CHECK_THROWS_AS(solve_dirichlet(spec, std::vector<Point>{make_point({0.0, 0.0})}, 1, SimConfig{}, 1), Error);
}

TEST_CASE("solve_dirichlet: non-exits are counted, not thrown") {
  const auto spec = testing::disk_harmonic();
  SimConfig cfg;
  cfg.max_steps = 50;
  const auto res = solve_dirichlet(spec, std::vector<Point>{make_point({0.0, 0.0})}, 200, cfg, 3);
  CHECK(res[0].estimate.aux_or("nonexit_count", 0) > 0);
  CHECK_FALSE(nonexit_gate_ok(res[0].estimate));
}

TEST_CASE("serial reference and OpenMP kernel agree bit for bit") {
  const auto spec = testing::sinh_atom();
  const std::vector<Point> pts{make_point({0.25}), make_point({0.5})};
  SimConfig cfg;
  cfg.dt_base = 1e-3;
  Execution serial;
  serial.serial_reference = true;
  const auto ref = solve_dirichlet(spec, pts, 3000, cfg, 17, serial);
  for (int w : {1, 2, 8}) {
    Execution exec;
    exec.workers = w;
    const auto res = solve_dirichlet(spec, pts, 3000, cfg, 17, exec);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(res[i].estimate.mean == ref[i].estimate.mean);
      CHECK(res[i].estimate.std_error == ref[i].estimate.std_error);
      CHECK(res[i].estimate.aux == ref[i].estimate.aux);
    }
  }
}

TEST_CASE("resolvent_full: conservative process and zero integrand") {
  const auto spec = testing::disk_with_killing(1.0, make_point({0.5, 0.0}));
  SimConfig cfg;
  cfg.dt_base = 1e-2;
  const double alpha = 2.0;
  const Estimate one = resolvent_full(spec, ScalarField::constant(1.0), alpha, make_point({0.0, 0.0}), 400, cfg, 5);
  // alpha G_alpha 1 = 1 up to the truncation tail, path by path
  CHECK(std::abs(one.mean - 1.0 / alpha) <= 3 * one.std_error + one.aux_or("tail_bound", 0) + 1e-12);
  CHECK(one.aux_or("tail_bound", 1) <= 0.1 * (1.0 / alpha) / std::sqrt(400.0) + 1e-15);
  const Estimate zero = resolvent_full(spec, ScalarField(), alpha, make_point({0.0, 0.0}), 100, cfg, 5);
  CHECK(zero.mean == 0.0);
  CHECK(zero.std_error == 0.0);
}

TEST_CASE("resolvent_full matches the finite-difference resolvent in 1D") {
  const auto spec = line_no_jumps();
  const auto f = ScalarField::function([](const Point& x) { return std::abs(x[0]) <= 1.0 ? 1.0 : 0.0; }, 1.0);
  SimConfig cfg;
  cfg.dt_base = 1e-3;
  const Estimate mc = resolvent_full(spec, f, 1.0, make_point({0.0}), 4000, cfg, 8);
  const Box box{make_point({-8.0}), make_point({8.0})};
  RefinedOracle oracle{resolvent_oracle(spec, f, 1.0, box, 1.0 / 50), resolvent_oracle(spec, f, 1.0, box, 1.0 / 100)};
  const std::vector<PointEstimate> pts{{make_point({0.0}), mc}};
  const auto rep = compare(pts, oracle);
  CHECK(rep.all_pass());
  // exact: 1 - exp(-sqrt(2)) at x = 0
  CHECK(oracle.value(make_point({0.0})) == doctest::Approx(1.0 - std::exp(-std::sqrt(2.0))).epsilon(1e-3));
}

TEST_CASE("resolvent_killed: constant rate and no killing") {
  const double lambda = 1.5, alpha = 1.0;
  SimConfig cfg;
  cfg.dt_base = 1e-2;
  const auto spec = testing::disk_with_killing(lambda, make_point({0.0, 1.5}));
  const Estimate g = resolvent_killed(spec, ScalarField::constant(1.0), alpha, make_point({0.0, 0.0}), 4000, cfg, 3);
  CHECK(within(g, 1.0 / (alpha + lambda)) <= 3.0);
  CHECK(resolvent_killed(spec, ScalarField(), alpha, make_point({0.0, 0.0}), 10, cfg, 3).mean == 0.0);

  // kappa = 0: X^kappa = X^0, same estimator on the same streams
  auto free = with_kappa(spec, ScalarField());
  const auto f = ScalarField::function([](const Point& x) { return x.norm() < 0.5 ? 1.0 : 0.0; }, 1.0);
  const Estimate a = resolvent_killed(free, f, alpha, make_point({0.0, 0.0}), 300, cfg, 4);
  const Estimate b = resolvent_full(free, f, alpha, make_point({0.0, 0.0}), 300, cfg, 4);
  CHECK(std::abs(a.mean - b.mean) <= 1.96 * (a.std_error + b.std_error) + 1e-12);
}

TEST_CASE("truncation budget is enforced") {
  const auto spec = testing::disk_with_killing(1.0, make_point({0.0, 1.5}));
  SimConfig cfg;
  cfg.dt_base = 1e-3;
  cfg.max_steps = 100;
  try {
    resolvent_full(spec, ScalarField::constant(1.0), 1.0, make_point({0.0, 0.0}), 10, cfg, 1);
    FAIL("expected TruncationBudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::truncation_budget_exceeded);
  }
}

TEST_CASE("killed-process identity: scalar Laplace oracle, alpha = 0 and no killing") {
  SimConfig cfg;
  cfg.dt_base = 1e-2;
  const std::vector<Point> pts{make_point({0.0, 0.0}), make_point({0.5, 0.3})};
  const auto spec = testing::disk_with_killing(2.0, make_point({0.0, 1.5}));
  const auto reps = check_prop_2_3(spec, ScalarField::constant(1.0), 1.0, pts, 4000, cfg, 9);
  for (const auto& r : reps) {
    CHECK(r.pass);
    CHECK(within(r.lhs, 2.0 / 3.0) <= 3.0);
    CHECK(within(r.rhs, 2.0 / 3.0) <= 3.0);
  }
  cfg.max_steps = 3000;  // horizon 30 for alpha = 0
  const auto zero_alpha = check_prop_2_3(spec, ScalarField::constant(1.0), 0.0, pts, 500, cfg, 9);
  for (const auto& r : zero_alpha) {
    CHECK(r.lhs.mean == 1.0);
    CHECK(r.pass);
  }
  const auto none = check_prop_2_3(with_kappa(spec, ScalarField()), ScalarField::constant(1.0), 1.0, pts, 100, cfg, 9);
  for (const auto& r : none) {
    CHECK(r.lhs.mean == 0.0);
    CHECK(r.rhs.mean == 0.0);
    CHECK(r.z_score == 0.0);
  }
}

TEST_CASE("resolvent identity: no jumps, f = 1, and density kernels") {
  SimConfig cfg;
  cfg.dt_base = 1e-2;
  const std::vector<Point> pts{make_point({0.0, 0.0})};
  const auto f = ScalarField::function([](const Point& x) { return x[0] > 0 ? 1.0 : 0.0; }, 1.0);

  const auto free = with_kappa(testing::disk_with_killing(1.0, make_point({0.0, 1.5})), ScalarField());
  const auto r0 = check_resolvent_identity(free, f, 1.0, pts, 200, cfg, 3);
  CHECK(r0[0].z_score == 0.0);

  const auto spec = testing::disk_with_killing(1.0, make_point({0.0, 1.5}));
  const auto r1 = check_resolvent_identity(spec, ScalarField::constant(1.0), 1.0, pts, 2000, cfg, 3);
  CHECK(r1[0].pass);
  const double T = r1[0].lhs.aux_or("horizon", 0.0);
  CHECK(std::abs(r1[0].lhs.mean - 1.0) <= 3.0 * r1[0].lhs.std_error + std::exp(-T) + 1e-12);

  auto dens = spec;
  dens.jumps->nu = RedistributionLaw({}, UniformBoxDensity{1.0, Box{make_point({1.5, 0}), make_point({2, 1})}, 4});
  try {
    check_resolvent_identity(dens, f, 1.0, pts, 10, cfg, 3);
    FAIL("expected UnsupportedKernel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unsupported_kernel);
  }
}

TEST_CASE("exit time scaling: closed form, slope and drift") {
  auto spec = testing::disk_harmonic();
  SimConfig cfg;
  cfg.dt_base = 1e-4;
  const std::vector<double> radii{0.4, 0.2};
  const auto res = exit_time_scaling(spec, Point::Zero(2), radii, 4000, cfg, 6);
  CHECK(within(res.rows[1].estimate, 0.02) <= 3.0);
  CHECK(std::abs(res.slope - 2.0) <= 0.1);

  spec.drift = DriftField::constant(make_point({20.0, 0.0}));
  const auto drifted = exit_time_scaling(spec, Point::Zero(2), radii, 2000, cfg, 6);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    CHECK(drifted.rows[k].estimate.mean <= res.rows[k].estimate.mean);
    CHECK(drifted.rows[k].estimate.mean <= drifted.c0 * radii[k] * radii[k] * (1 + 1e-12));
  }

  auto jumpy = testing::disk_with_killing(1.0, make_point({0.0, 1.5}));
  CHECK_THROWS_AS(exit_time_scaling(jumpy, Point::Zero(2), radii, 10, cfg, 1), Error);
}

TEST_CASE("small-ball Kato decay: constant rate and zero rate") {
  const double lambda = 2.0;
  auto spec = testing::disk_with_killing(lambda, make_point({0.0, 1.5}));
  SimConfig cfg;
  cfg.dt_base = 1e-5;
  const std::vector<double> radii{0.1, 0.05};
  const std::vector<Point> probes{make_point({0.0, 0.0})};
  const auto prof = small_ball_kato_decay(spec, radii, probes, 4000, cfg, 2);
  // lambda E[tau ^ zeta] ~ lambda r^2 / d for small r
  CHECK(std::abs(prof[1].estimate.mean - lambda * 0.05 * 0.05 / 2) <= 3 * prof[1].estimate.std_error + 1e-4);
  const auto ratios = decay_ratios(prof);
  REQUIRE(ratios.size() == 1);
  CHECK(ratios[0].expected == doctest::Approx(4.0));
  CHECK(ratios[0].pass);

  const auto none = small_ball_kato_decay(with_kappa(spec, ScalarField()), radii, probes, 50, cfg, 2);
  for (const auto& s : none) CHECK(s.estimate.mean == 0.0);
}

TEST_CASE("alpha decay is monotone and reaches one half") {
  const auto spec = testing::disk_with_killing(1.0, make_point({0.0, 1.5}));
  SimConfig cfg;
  cfg.dt_base = 1e-3;
  cfg.max_steps = 20000;
  const std::vector<Point> probes{make_point({0.0, 0.0}), make_point({0.5, 0.0})};
  const std::vector<double> alphas{1, 2, 4, 8, 16};
  const auto res = alpha_decay(spec, probes, alphas, 2000, cfg, 4);
  CHECK(res.monotone);
  for (std::size_t k = 1; k < res.rows.size(); ++k) CHECK(res.rows[k].estimate.mean <= res.rows[k - 1].estimate.mean);
  REQUIRE(res.first_alpha_below_half);
  // first jump time ~ Exp(1): E[e^{-alpha tau}] = 1 / (1 + alpha), exactly 1/2 at alpha = 1
  CHECK(std::abs(res.rows[0].estimate.mean - 0.5) <= 3.0 * res.rows[0].estimate.std_error + 1e-3);
  CHECK(*res.first_alpha_below_half <= 2.0);
}

TEST_CASE("jump counts are dominated by a Poisson count") {
  auto spec = testing::disk_with_killing(1.0, make_point({0.3, 0.0}));
  spec.jumps->kappa = ScalarField::function([](const Point& x) { return 1.0 + 1.0 / (1.0 + x.squaredNorm()); }, 2.0);
  SimConfig cfg;
  cfg.dt_base = 1e-2;
  const auto res = jump_counts(spec, make_point({0.0, 0.0}), 5.0, 2000, cfg, 3);
  CHECK(res.budget_failures == 0);
  CHECK(res.jumps.mean <= 10.0 + 4.0 * std::sqrt(10.0 / 2000));
  CHECK(res.jumps.mean > 5.0);
}

}  // TEST_SUITE
