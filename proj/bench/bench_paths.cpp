// Serial reference loop against the OpenMP kernel on the same path set.
// Usage: nldp_bench [paths] [workers...]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "nldp/domain.hpp"
#include "nldp/estimators.hpp"

using namespace nldp;

namespace {

ProblemSpec disk_with_jumps() {
  ProblemSpec s;
  s.dim = 2;
  s.elliptic = EllipticField::identity(2);
  s.drift = DriftField::zero(2);
  s.domain = make_ball(make_point({0.0, 0.0}), 1.0);
  s.jumps = JumpKernel{ScalarField::constant(1.0), RedistributionLaw({Atom{1.0, make_point({1.5, 0.0})}})};
  s.boundary.phi = ScalarField::function([](const Point& x) { return x[0]; }, 1.5);
  s.boundary.sup_bound = 3.0;
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::int64_t paths = argc > 1 ? std::atoll(argv[1]) : 20000;
  std::vector<int> workers;
  for (int i = 2; i < argc; ++i) workers.push_back(std::atoi(argv[i]));
  if (workers.empty()) workers = {1, 2, 4, 8};

  const ProblemSpec spec = disk_with_jumps();
  const std::vector<Point> pts{make_point({0.0, 0.0}), make_point({0.5, 0.0})};
  SimConfig cfg;
  cfg.dt_base = 1e-3;

  Execution serial;
  serial.serial_reference = true;
  auto t0 = std::chrono::steady_clock::now();
  const auto ref = solve_dirichlet(spec, pts, paths, cfg, 1, serial);
  const double t_ref = seconds_since(t0);
  std::printf("%-12s %8s %10s %12s %s\n", "kernel", "workers", "seconds", "paths/s", "identical");
  std::printf("%-12s %8d %10.3f %12.0f %s\n", "serial", 1, t_ref, 2.0 * paths / t_ref, "-");

  bool all_same = true;
  for (int w : workers) {
    Execution exec;
    exec.workers = w;
    t0 = std::chrono::steady_clock::now();
    const auto res = solve_dirichlet(spec, pts, paths, cfg, 1, exec);
    const double t = seconds_since(t0);
    bool same = true;
    for (std::size_t i = 0; i < res.size(); ++i) {
      same = same && res[i].estimate.mean == ref[i].estimate.mean &&
             res[i].estimate.std_error == ref[i].estimate.std_error;
    }
    all_same = all_same && same;
    std::printf("%-12s %8d %10.3f %12.0f %s\n", "openmp", w, t, 2.0 * paths / t, same ? "yes" : "NO");
  }
  return all_same ? 0 : 1;
}
