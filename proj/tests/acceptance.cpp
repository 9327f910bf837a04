// Acceptance run: one PASS/FAIL line per criterion. Pass criterion ids as
// arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "nldp/commands.hpp"
#include "nldp/config.hpp"
#include "nldp/estimators.hpp"
#include "nldp/oracle_fd.hpp"
#include "scenarios.hpp"

using namespace nldp;
namespace fs = std::filesystem;

namespace {

// Tolerances and sample sizes.
constexpr double kZ = 3.0;
constexpr std::int64_t kPaths = 100'000;
constexpr double kDt = 1e-4;
constexpr double kHarmonicMaxStderr = 0.01;
constexpr double kSinhMaxStderr = 0.005;
constexpr double kSinhOracleH = 1.0 / 200;
constexpr double kSinhOracleTol = 1e-3;
constexpr double kMinOrder = 1.8;
constexpr double kSlopeLo = 1.9;
constexpr double kSlopeHi = 2.1;
constexpr double kMaxAlpha = 64.0;
constexpr double kKappaBound = 2.0;
constexpr double kHorizon = 5.0;
constexpr std::int64_t kWorkerCheckPaths = 4000;
constexpr double kOracleMaxPrincipleSlack = 1e-10;
constexpr double kOracleConstantTol = 1e-10;

std::string config_path(const std::string& name) { return std::string(NLDP_SOURCE_DIR) + "/configs/" + name; }

LoadedConfig config(const std::string& name) { return load_config(config_path(name)); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [fail]");
  }
};

// Criterion 1 and 2 results are reused by criterion 9.
std::optional<std::vector<PointEstimate>> g_harmonic;
std::optional<std::vector<PointEstimate>> g_sinh;

const std::vector<PointEstimate>& harmonic_results() {
  if (!g_harmonic) {
    const LoadedConfig c = config("disk_harmonic.json");
    SimConfig cfg = c.run.sim;
    cfg.dt_base = kDt;
    g_harmonic = solve_dirichlet(c.spec, c.run.points, kPaths, cfg, *c.run.seed);
  }
  return *g_harmonic;
}

const std::vector<PointEstimate>& sinh_results() {
  if (!g_sinh) {
    const LoadedConfig c = config("sinh_atom.json");
    SimConfig cfg = c.run.sim;
    cfg.dt_base = kDt;
    g_sinh = solve_dirichlet(c.spec, c.run.points, kPaths, cfg, *c.run.seed);
  }
  return *g_sinh;
}

Verdict harmonic_reproduction() {
  Verdict v;
  double worst_z = 0.0, worst_se = 0.0;
  for (const auto& pe : harmonic_results()) {
    const Estimate& e = pe.estimate;
    worst_z = std::max(worst_z, std::abs(e.mean - pe.point[0]) / e.std_error);
    worst_se = std::max(worst_se, e.std_error);
  }
  v.require(worst_z <= kZ, "max |mean - x1|/stderr = " + fmt("%.3f", worst_z));
  v.require(worst_se <= kHarmonicMaxStderr, "max stderr = " + fmt("%.5f", worst_se));
  return v;
}

double max_node_error(const GridSystem& sys) {
  double err = 0.0;
  for (std::size_t u = 0; u < sys.node_of_unknown.size(); ++u) {
    const double x = sys.grid.node(sys.node_of_unknown[u])[0];
    err = std::max(err, std::abs(sys.solution[static_cast<Eigen::Index>(u)] - testing::sinh_exact(x)));
  }
  return err;
}

Verdict jump_atom_closed_form() {
  Verdict v;
  const LoadedConfig c = config("sinh_atom.json");
  const auto& mc = sinh_results();
  double worst_z = 0.0, worst_se = 0.0;
  for (const auto& pe : mc) {
    worst_z = std::max(worst_z, std::abs(pe.estimate.mean - testing::sinh_exact(pe.point[0])) / pe.estimate.std_error);
    worst_se = std::max(worst_se, pe.estimate.std_error);
  }
  v.require(worst_z <= kZ, "MC vs closed form max z = " + fmt("%.3f", worst_z));
  v.require(worst_se <= kSinhMaxStderr, "max stderr = " + fmt("%.5f", worst_se));

  GridSystem sys = assemble(c.spec, make_grid(c.spec, kSinhOracleH));
  solve(sys);
  const double fd_err = max_node_error(sys);
  v.require(fd_err <= kSinhOracleTol, "FD h=1/200 max node error = " + fmt("%.2e", fd_err));

  const RefinedOracle oracle = oracle_solve_refined(c.spec, kSinhOracleH);
  const ComparisonReport rep = compare(mc, oracle);
  double worst_ratio = 0.0;
  for (const auto& r : rep.rows) worst_ratio = std::max(worst_ratio, r.ratio);
  v.require(rep.all_pass(), "MC vs FD max gap/tolerance = " + fmt("%.3f", worst_ratio));
  double fd_exact = 0.0;
  for (const auto& pe : mc) fd_exact = std::max(fd_exact, std::abs(oracle.value(pe.point) - testing::sinh_exact(pe.point[0])));
  v.require(fd_exact <= kSinhOracleTol, "FD vs closed form at MC points = " + fmt("%.2e", fd_exact));
  return v;
}

Verdict prop23_identity() {
  Verdict v;
  const LoadedConfig c = config("prop23_constant.json");
  const auto reps = check_prop_2_3(c.spec, c.spec.boundary.phi, *c.run.alpha, c.run.probes, *c.run.paths, c.run.sim,
                                   *c.run.seed);
  double worst_z = 0.0, worst_half = 0.0;
  for (const auto& r : reps) {
    worst_z = std::max(worst_z, r.z_score);
    worst_half = std::max({worst_half, std::abs(r.lhs.mean - 0.5) / r.lhs.std_error,
                           std::abs(r.rhs.mean - 0.5) / r.rhs.std_error});
  }
  v.require(reps.size() == 5, std::to_string(reps.size()) + " probes");
  v.require(worst_z <= kZ, "constant kappa max z = " + fmt("%.3f", worst_z));
  v.require(worst_half <= kZ, "max |side - 1/2|/stderr = " + fmt("%.3f", worst_half));

  const LoadedConfig a = config("prop23_abs.json");
  const auto reps2 = check_prop_2_3(a.spec, a.spec.boundary.phi, *a.run.alpha, a.run.probes, *a.run.paths, a.run.sim,
                                    *a.run.seed);
  double worst2 = 0.0;
  for (const auto& r : reps2) worst2 = std::max(worst2, r.z_score);
  v.require(worst2 <= kZ, "kappa = 1 + |x1| max z = " + fmt("%.3f", worst2));
  return v;
}

Verdict resolvent_identity() {
  Verdict v;
  const LoadedConfig c = config("resolvent_identity.json");
  const auto reps = check_resolvent_identity(c.spec, *c.run.f, *c.run.alpha, c.run.probes, *c.run.paths, c.run.sim,
                                             *c.run.seed, {}, kZ, *c.run.inner_paths);
  double worst = 0.0;
  for (const auto& r : reps) worst = std::max(worst, r.z_score);
  v.require(reps.size() == 3, std::to_string(reps.size()) + " probes");
  v.require(worst <= kZ, "max z = " + fmt("%.3f", worst));
  return v;
}

Verdict exit_time_law() {
  Verdict v;
  const LoadedConfig c = config("exit_scaling.json");
  const auto res = exit_time_scaling(c.spec, *c.run.center, c.run.radii, *c.run.paths, c.run.sim, *c.run.seed);
  double worst = 0.0;
  for (const auto& row : res.rows) {
    const double exact = row.radius * row.radius / 2.0;
    worst = std::max(worst, std::abs(row.estimate.mean - exact) / row.estimate.std_error);
  }
  v.require(worst <= kZ, "max |E tau - r^2/2|/stderr = " + fmt("%.3f", worst));
  v.require(res.slope >= kSlopeLo && res.slope <= kSlopeHi, "slope = " + fmt("%.4f", res.slope));
  return v;
}

Verdict kato_decay() {
  Verdict v;
  const LoadedConfig c = config("kato_decay.json");
  const auto samples = small_ball_kato_decay(c.spec, c.run.radii, c.run.points, *c.run.paths, c.run.sim, *c.run.seed);
  const auto ratios = decay_ratios(samples);
  for (const auto& r : ratios) {
    v.require(r.pass, "r " + fmt("%g", r.r_large) + "->" + fmt("%g", r.r_small) + " ratio = " + fmt("%.3f", r.ratio));
  }
  return v;
}

Verdict alpha_decay_check() {
  Verdict v;
  const LoadedConfig c = config("alpha_decay.json");
  const auto res = alpha_decay(c.spec, c.run.points, c.run.alphas, *c.run.paths, c.run.sim, *c.run.seed);
  v.require(res.monotone, "pathwise non-increasing in alpha");
  const bool below = res.first_alpha_below_half && *res.first_alpha_below_half <= kMaxAlpha;
  v.require(below, "first alpha with sup <= 1/2: " +
                       (res.first_alpha_below_half ? fmt("%g", *res.first_alpha_below_half) : std::string("none")));
  return v;
}

Verdict conservativeness() {
  Verdict v;
  auto spec = testing::disk_with_killing(1.0, make_point({0.3, 0.0}));
  spec.jumps->kappa =
      ScalarField::function([](const Point& x) { return 1.0 + 1.0 / (1.0 + x.squaredNorm()); }, kKappaBound);
  SimConfig cfg;
  cfg.dt_base = 1e-3;
  cfg.max_steps = 100'000;
  const auto s = jump_counts(spec, make_point({0.0, 0.0}), kHorizon, kPaths, cfg, 8);
  const double bound = kKappaBound * kHorizon + 4.0 * std::sqrt(kKappaBound * kHorizon / static_cast<double>(kPaths));
  v.require(s.budget_failures == 0, "budget failures = " + std::to_string(s.budget_failures));
  v.require(s.jumps.n_paths == kPaths, "completed paths = " + std::to_string(s.jumps.n_paths));
  v.require(s.jumps.mean <= bound, "E[n_jumps] = " + fmt("%.4f", s.jumps.mean) + " <= " + fmt("%.4f", bound));
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict estimator_invariants() {
  Verdict v;
  bool principle = true;
  for (const auto* res : {&harmonic_results(), &sinh_results()}) {
    for (const auto& pe : *res) {
      const Estimate& e = pe.estimate;
      principle = principle && e.mean >= e.aux_or("sample_min", NAN) && e.mean <= e.aux_or("sample_max", NAN);
    }
  }
  v.require(principle, "maximum principle on criteria 1-2 estimates");

  const fs::path dir = fs::temp_directory_path() / ("nldp_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  for (const char* name : {"disk_harmonic.json", "sinh_atom.json"}) {
    std::string reference;
    bool same = true;
    for (int w : {1, 2, 8}) {
      CommandOptions o;
      o.config_path = config_path(name);
      o.out_path = (dir / (std::string(name) + "." + std::to_string(w) + ".csv")).string();
      o.paths = kWorkerCheckPaths;
      o.workers = w;
      std::ostringstream err;
      if (cmd_solve(o, err) != kExitPass) {
        same = false;
        break;
      }
      const std::string text = slurp(o.out_path);
      if (reference.empty()) reference = text;
      same = same && !text.empty() && text == reference;
    }
    v.require(same, std::string(name) + " CSV identical for workers 1,2,8");
  }
  fs::remove_all(dir);
  return v;
}

struct OracleScenario {
  std::string name;
  ProblemSpec spec;
  double h;
};

Verdict oracle_integrity() {
  Verdict v;
  std::vector<OracleScenario> scenarios;
  scenarios.push_back({"sinh", config("sinh_atom.json").spec, 1.0 / 200});
  scenarios.push_back({"disk", config("disk_harmonic.json").spec, 1.0 / 40});
  scenarios.push_back({"killing", config("resolvent_identity.json").spec, 1.0 / 40});
  auto drift = config("sinh_atom.json").spec;
  drift.drift = DriftField::constant(make_point({400.0}));
  scenarios.push_back({"upwind", drift, 1.0 / 200});

  bool principle = true, constant = true, mmatrix = true;
  for (const auto& s : scenarios) {
    GridSystem sys = assemble(s.spec, make_grid(s.spec, s.h));
    solve(sys);
    const double scale = std::max({1.0, std::abs(sys.exterior_min), std::abs(sys.exterior_max)});
    const bool ok = sys.solution.minCoeff() >= sys.exterior_min - kOracleMaxPrincipleSlack * scale &&
                    sys.solution.maxCoeff() <= sys.exterior_max + kOracleMaxPrincipleSlack * scale;
    principle = principle && ok;
    mmatrix = mmatrix && sys.m_matrix;

    ProblemSpec c = testing::constant_phi(s.spec, 0.625);
    GridSystem csys = assemble(c, make_grid(c, s.h));
    solve(csys);
    constant = constant && (csys.solution.array() - 0.625).abs().maxCoeff() <= kOracleConstantTol;
  }
  v.require(mmatrix, "M-matrix rows on all scenarios");
  v.require(principle, "discrete maximum principle on all scenarios");
  v.require(constant, "constant invariance on all scenarios");

  const auto spec = config("sinh_atom.json").spec;
  GridSystem coarse = assemble(spec, make_grid(spec, 1.0 / 100));
  GridSystem fine = assemble(spec, make_grid(spec, 1.0 / 200));
  solve(coarse);
  solve(fine);
  const double order = std::log2(max_node_error(coarse) / max_node_error(fine));
  v.require(order >= kMinOrder, "refinement order = " + fmt("%.3f", order));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"harmonic reproduction", harmonic_reproduction},
      {"jump-atom closed form", jump_atom_closed_form},
      {"killed-process identity", prop23_identity},
      {"resolvent identity", resolvent_identity},
      {"exit-time law", exit_time_law},
      {"small-ball Kato decay", kato_decay},
      {"alpha decay", alpha_decay_check},
      {"conservativeness proxy", conservativeness},
      {"estimator invariants", estimator_invariants},
      {"oracle integrity", oracle_integrity},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s: %s (%s) [%.1fs]\n", id, v.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
