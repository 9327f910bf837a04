#include "nldp/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>

#include "nldp/config.hpp"
#include "nldp/csv.hpp"
#include "nldp/error.hpp"
#include "nldp/estimators.hpp"
#include "nldp/manifest.hpp"
#include "nldp/oracle_fd.hpp"
#include "nldp/validate.hpp"

namespace nldp {

namespace {

using Clock = std::chrono::steady_clock;

// A finished command: the table to write, the manifest and the exit code.
struct Outcome {
  CsvTable table;
  RunManifest manifest;
  int code = kExitPass;
  std::string message;  // printed to stderr for non-zero codes
  std::vector<std::string> warnings;
};

struct Context {
  const CommandOptions& opts;
  LoadedConfig config;
  SimConfig cfg;
  std::uint64_t seed = 0;
  std::int64_t paths = kDefaultPaths;
  Execution exec;
};

void report_error(std::ostream& err, const Error& e) {
  err << "error: " << (e.category() == ErrorCategory::validation ? "validation" : "simulation") << ' '
      << to_string(e.kind()) << ": " << e.what() << '\n';
}

Context make_context(const CommandOptions& opts) {
  if (opts.out_path.empty()) throw Error(ErrorKind::config, "--out is required");
  if (opts.workers < 1) throw Error(ErrorKind::invalid_argument, "--workers must be >= 1");
  Context ctx{opts, load_config(opts.config_path), {}, 0, kDefaultPaths, {}};
  const RunSection& run = ctx.config.run;
  ctx.cfg = run.sim;
  if (opts.dt) ctx.cfg.dt_base = *opts.dt;
  ctx.cfg.validate();
  ctx.seed = opts.seed.value_or(run.seed.value_or(0));
  ctx.paths = opts.paths.value_or(run.paths.value_or(kDefaultPaths));
  if (ctx.paths < 2) throw Error(ErrorKind::invalid_argument, "--paths must be >= 2");
  ctx.exec.workers = opts.workers;

  const ValidationReport rep = validate_problem(ctx.config.spec, kValidationSamples, derive_seed(ctx.seed, 0x7a11d));
  if (!rep.all_passed()) {
    std::string failed;
    for (const auto& c : rep.checks) {
      if (!c.passed) failed += " " + c.name + "(worst=" + format_double(c.worst) + ")";
    }
    throw Error(ErrorKind::invalid_argument, "problem validation failed:" + failed);
  }
  return ctx;
}

RunManifest base_manifest(const Context& ctx, const std::string& operation) {
  RunManifest m;
  m.config_digest = sha256_hex(ctx.config.text);
  m.master_seed = ctx.seed;
  m.cfg = ctx.cfg;
  m.operation = operation;
  m.parameters["paths"] = ctx.paths;
  m.parameters["workers"] = ctx.exec.workers;
  m.parameters["config_path"] = ctx.opts.config_path;
  return m;
}

std::vector<std::string> coordinate_header(const std::string& prefix, int dim) {
  std::vector<std::string> h;
  for (int k = 1; k <= dim; ++k) h.push_back(prefix + std::to_string(k));
  return h;
}

void append_point(std::vector<std::string>& row, const Point& x) {
  for (int k = 0; k < x.size(); ++k) row.push_back(format_double(x[k]));
}

std::vector<Point> require_points(const Context& ctx, bool probes) {
  std::vector<Point> pts;
  if (ctx.opts.points) {
    pts = parse_points(*ctx.opts.points, ctx.config.spec.dim);
  } else if (probes && !ctx.config.run.probes.empty()) {
    pts = ctx.config.run.probes;
  } else {
    pts = ctx.config.run.points;
  }
  if (pts.empty()) throw Error(ErrorKind::config, "no evaluation points: pass --points or set run.points");
  return pts;
}

void require_inside(const ProblemSpec& spec, std::span<const Point> pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!spec.domain->contains(pts[i])) {
      throw Error(ErrorKind::invalid_argument, "point " + std::to_string(i) + " lies outside D");
    }
  }
}

double alpha_of(const Context& ctx) {
  const double a = ctx.opts.alpha.value_or(ctx.config.run.alpha.value_or(1.0));
  if (!(a > 0.0)) throw Error(ErrorKind::invalid_argument, "alpha must be > 0");
  return a;
}

double mesh_of(const Context& ctx) {
  const double h = ctx.opts.h.value_or(ctx.config.run.h.value_or(kDefaultMesh));
  if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "h must be > 0");
  return h;
}

// Solves at the points and checks the maximum principle and the non-exit gate.
std::vector<PointEstimate> checked_solve(const Context& ctx, std::span<const Point> pts, RunManifest& m) {
  require_inside(ctx.config.spec, pts);
  auto res = solve_dirichlet(ctx.config.spec, pts, ctx.paths, ctx.cfg, ctx.seed, ctx.exec);
  bool max_principle = true;
  bool nonexit = true;
  double worst_nonexit = 0.0;
  for (const auto& pe : res) {
    const Estimate& e = pe.estimate;
    if (e.n_paths > 0) {
      max_principle = max_principle && e.mean >= e.aux_or("sample_min", e.mean) && e.mean <= e.aux_or("sample_max", e.mean);
    }
    nonexit = nonexit && nonexit_gate_ok(e);
    worst_nonexit = std::max(worst_nonexit, e.aux_or("nonexit_count", 0.0) / e.aux_or("paths_attempted", 1.0));
  }
  m.checks.push_back({"maximum_principle", max_principle, 0.0});
  m.checks.push_back({"nonexit_fraction", nonexit, worst_nonexit});
  return res;
}

CsvTable solve_table(const std::vector<PointEstimate>& res, int dim) {
  CsvTable t;
  t.header = {"point_id"};
  for (auto& c : coordinate_header("x", dim)) t.header.push_back(c);
  for (const char* c : {"mean", "stderr", "ci_lo", "ci_hi", "mean_exit_time", "mean_jumps", "nonexit_count"}) {
    t.header.push_back(c);
  }
  for (std::size_t i = 0; i < res.size(); ++i) {
    const Estimate& e = res[i].estimate;
    std::vector<std::string> row{std::to_string(i)};
    append_point(row, res[i].point);
    for (double v : {e.mean, e.std_error, e.ci_lo, e.ci_hi, e.aux_or("mean_exit_time", 0.0),
                     e.aux_or("mean_jumps", 0.0)}) {
      row.push_back(format_double(v));
    }
    row.push_back(std::to_string(static_cast<std::int64_t>(e.aux_or("nonexit_count", 0.0))));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable identity_table(std::span<const Point> pts, const std::vector<IdentityReport>& reps) {
  CsvTable t;
  t.header = {"probe_id"};
  for (auto& c : coordinate_header("x", static_cast<int>(pts.front().size()))) t.header.push_back(c);
  for (const char* c : {"lhs_mean", "lhs_stderr", "rhs_mean", "rhs_stderr", "z_score", "threshold", "pass"}) {
    t.header.push_back(c);
  }
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i];
    std::vector<std::string> row{std::to_string(i)};
    append_point(row, pts[i]);
    for (double v : {r.lhs.mean, r.lhs.std_error, r.rhs.mean, r.rhs.std_error, r.z_score, r.threshold}) {
      row.push_back(format_double(v));
    }
    row.push_back(r.pass ? "1" : "0");
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Identity gates: every z within threshold.
void identity_checks(const std::vector<IdentityReport>& reps, RunManifest& m, Outcome& out) {
  bool all = true;
  double worst = 0.0;
  for (const auto& r : reps) {
    all = all && r.pass;
    worst = std::max(worst, r.z_score);
  }
  m.checks.push_back({"z_within_threshold", all, worst});
  if (!all) out.code = kExitCheckFailed;
}

Outcome verify_identity(const Context& ctx, bool prop23) {
  Outcome out;
  out.manifest = base_manifest(ctx, prop23 ? "verify.prop23" : "verify.resolvent_identity");
  const auto pts = require_points(ctx, true);
  const double alpha = alpha_of(ctx);
  const double threshold = ctx.config.run.threshold.value_or(3.0);
  out.manifest.parameters["alpha"] = alpha;
  out.manifest.parameters["threshold"] = threshold;
  std::vector<IdentityReport> reps;
  if (prop23) {
    reps = check_prop_2_3(ctx.config.spec, ctx.config.spec.boundary.phi, alpha, pts, ctx.paths, ctx.cfg, ctx.seed,
                          ctx.exec, threshold);
  } else {
    if (!ctx.config.run.f) throw Error(ErrorKind::config, "resolvent_identity needs run.f");
    const std::int64_t inner = ctx.config.run.inner_paths.value_or(0);
    out.manifest.parameters["inner_paths"] = inner;
    reps = check_resolvent_identity(ctx.config.spec, *ctx.config.run.f, alpha, pts, ctx.paths, ctx.cfg, ctx.seed,
                                    ctx.exec, threshold, inner);
  }
  out.table = identity_table(pts, reps);
  identity_checks(reps, out.manifest, out);
  return out;
}

std::vector<double> radii_of(const Context& ctx, std::vector<double> fallback) {
  auto r = ctx.config.run.radii.empty() ? std::move(fallback) : ctx.config.run.radii;
  std::sort(r.begin(), r.end(), std::greater<>());
  return r;
}

// Isotropic constant A = a I with b = 0: E[tau_{B(x,r)}] = r^2 / (d a).
std::optional<double> isotropic_scale(const ProblemSpec& spec) {
  if (!spec.elliptic.is_constant() || !spec.drift.is_constant()) return std::nullopt;
  if (spec.drift(Point::Zero(spec.dim)).norm() != 0.0) return std::nullopt;
  const Matrix& a = spec.elliptic.constant_A();
  const double s = a(0, 0);
  if ((a - s * Matrix::Identity(spec.dim, spec.dim)).cwiseAbs().maxCoeff() > 1e-12 * s) return std::nullopt;
  return s;
}

Outcome verify_exit_scaling(const Context& ctx) {
  Outcome out;
  out.manifest = base_manifest(ctx, "verify.exit_scaling");
  const ProblemSpec& spec = ctx.config.spec;
  const auto radii = radii_of(ctx, {0.4, 0.2, 0.1});
  const Point center = ctx.config.run.center.value_or(Point::Zero(spec.dim));
  ProblemSpec local = spec;
  local.jumps.reset();
  const auto res = exit_time_scaling(local, center, radii, ctx.paths, ctx.cfg, ctx.seed, ctx.exec);
  const auto iso = isotropic_scale(spec);

  out.table.header = {"radius", "mean", "stderr", "ci_lo", "ci_hi", "closed_form", "z_score", "nonexit_count"};
  bool closed_ok = true;
  double worst_z = 0.0;
  for (const auto& row : res.rows) {
    const Estimate& e = row.estimate;
    std::vector<std::string> r;
    for (double v : {row.radius, e.mean, e.std_error, e.ci_lo, e.ci_hi}) r.push_back(format_double(v));
    if (iso) {
      const double exact = row.radius * row.radius / (spec.dim * *iso);
      const double z = e.std_error > 0.0 ? std::abs(e.mean - exact) / e.std_error : (e.mean == exact ? 0.0 : INFINITY);
      worst_z = std::max(worst_z, z);
      closed_ok = closed_ok && z <= 3.0;
      r.push_back(format_double(exact));
      r.push_back(format_double(z));
    } else {
      r.push_back("nan");
      r.push_back("nan");
    }
    r.push_back(std::to_string(static_cast<std::int64_t>(e.aux_or("nonexit_count", 0.0))));
    out.table.rows.push_back(std::move(r));
  }
  const bool slope_ok = res.slope >= 1.9 && res.slope <= 2.1;
  out.manifest.parameters["slope"] = res.slope;
  out.manifest.checks.push_back({"loglog_slope_in_1.9_2.1", slope_ok, res.slope});
  if (iso) out.manifest.checks.push_back({"closed_form_within_3_stderr", closed_ok, worst_z});
  if (!slope_ok || !closed_ok) out.code = kExitCheckFailed;
  return out;
}

Outcome verify_kato_decay(const Context& ctx) {
  Outcome out;
  out.manifest = base_manifest(ctx, "verify.kato_decay");
  const auto pts = require_points(ctx, true);
  const auto radii = radii_of(ctx, {0.2, 0.1, 0.05});
  const auto samples = small_ball_kato_decay(ctx.config.spec, radii, pts, ctx.paths, ctx.cfg, ctx.seed, ctx.exec);
  const auto ratios = decay_ratios(samples);
  out.table.header = {"radius", "value", "stderr", "ci_lo", "ci_hi", "argmax", "ratio_to_next", "expected_ratio",
                      "pass"};
  bool all = true;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Estimate& e = samples[k].estimate;
    std::vector<std::string> r;
    for (double v : {samples[k].radius, e.mean, e.std_error, e.ci_lo, e.ci_hi}) r.push_back(format_double(v));
    r.push_back(std::to_string(samples[k].argmax));
    if (k < ratios.size()) {
      r.push_back(format_double(ratios[k].ratio));
      r.push_back(format_double(ratios[k].expected));
      r.push_back(ratios[k].pass ? "1" : "0");
      all = all && ratios[k].pass;
    } else {
      r.insert(r.end(), {"nan", "nan", "1"});
    }
    out.table.rows.push_back(std::move(r));
  }
  out.manifest.checks.push_back({"quadratic_decay_within_ci", all, 0.0});
  if (!all) out.code = kExitCheckFailed;
  return out;
}

Outcome verify_alpha_decay(const Context& ctx) {
  Outcome out;
  out.manifest = base_manifest(ctx, "verify.alpha_decay");
  const auto pts = require_points(ctx, true);
  std::vector<double> alphas = ctx.config.run.alphas;
  if (alphas.empty()) alphas = {1, 2, 4, 8, 16, 32, 64};
  const auto res = alpha_decay(ctx.config.spec, pts, alphas, ctx.paths, ctx.cfg, ctx.seed, ctx.exec);
  out.table.header = {"alpha", "sup_estimate", "stderr", "argmax", "below_half"};
  for (const auto& row : res.rows) {
    out.table.rows.push_back({format_double(row.alpha), format_double(row.estimate.mean),
                              format_double(row.estimate.std_error), std::to_string(row.argmax),
                              row.estimate.mean <= 0.5 ? "1" : "0"});
  }
  const bool below = res.first_alpha_below_half.has_value();
  out.manifest.checks.push_back({"monotone_in_alpha", res.monotone, 0.0});
  out.manifest.checks.push_back({"falls_below_half", below, below ? *res.first_alpha_below_half : NAN});
  if (below) out.manifest.parameters["first_alpha_below_half"] = *res.first_alpha_below_half;
  if (!res.monotone || !below) out.code = kExitCheckFailed;
  return out;
}

// Runs a command body: errors map to exit codes, outputs are written only
// after the body returns.
int run_command(const CommandOptions& opts, std::ostream& err, const std::function<Outcome(const Context&)>& body) {
  const auto t0 = Clock::now();
  try {
    const Context ctx = make_context(opts);
    Outcome out = body(ctx);
    out.manifest.wall_time_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    write_csv(opts.out_path, out.table);
    write_manifest(opts.out_path, out.manifest);
    for (const auto& w : out.warnings) err << "warning: " << w << '\n';
    if (out.code != kExitPass) {
      err << "error: " << (out.code == kExitSimulation ? "simulation" : "check_failed") << ' '
          << (out.message.empty() ? "one or more checks failed" : out.message) << '\n';
      for (const auto& c : out.manifest.checks) {
        if (!c.pass) err << "  failed: " << c.name << " (" << format_double(c.value) << ")\n";
      }
    }
    return out.code;
  } catch (const Error& e) {
    report_error(err, e);
    return e.category() == ErrorCategory::validation ? kExitValidation : kExitSimulation;
  } catch (const std::exception& e) {
    err << "error: simulation Internal: " << e.what() << '\n';
    return kExitSimulation;
  }
}

}  // namespace

int cmd_solve(const CommandOptions& opts, std::ostream& err) {
  return run_command(opts, err, [](const Context& ctx) {
    Outcome out;
    out.manifest = base_manifest(ctx, "solve");
    const auto pts = require_points(ctx, false);
    const auto res = checked_solve(ctx, pts, out.manifest);
    out.table = solve_table(res, ctx.config.spec.dim);
    for (const auto& c : out.manifest.checks) {
      if (!c.pass) {
        out.code = kExitSimulation;
        out.message = "NonExit: " + c.name + " gate failed";
      }
    }
    return out;
  });
}

int cmd_verify(const CommandOptions& opts, std::ostream& err) {
  const std::string& w = opts.which;
  if (w != "prop23" && w != "resolvent_identity" && w != "exit_scaling" && w != "kato_decay" && w != "alpha_decay") {
    report_error(err, Error(ErrorKind::config, "unknown --which '" + w + "'"));
    return kExitValidation;
  }
  return run_command(opts, err, [&w](const Context& ctx) {
    if (w == "prop23") return verify_identity(ctx, true);
    if (w == "resolvent_identity") return verify_identity(ctx, false);
    if (w == "exit_scaling") return verify_exit_scaling(ctx);
    if (w == "kato_decay") return verify_kato_decay(ctx);
    return verify_alpha_decay(ctx);
  });
}

int cmd_oracle(const CommandOptions& opts, std::ostream& err) {
  return run_command(opts, err, [](const Context& ctx) {
    Outcome out;
    out.manifest = base_manifest(ctx, "oracle");
    out.manifest.parameters.erase("paths");
    const double h = mesh_of(ctx);
    out.manifest.parameters["h"] = h;
    const ProblemSpec& spec = ctx.config.spec;
    GridSystem sys = assemble(spec, make_grid(spec, h));
    solve(sys);
    const GridSolution sol = to_grid_solution(sys);

    const double scale = std::max({1.0, std::abs(sys.exterior_min), std::abs(sys.exterior_max)});
    double lo = INFINITY, hi = -INFINITY;
    for (Eigen::Index i = 0; i < sys.solution.size(); ++i) {
      lo = std::min(lo, sys.solution[i]);
      hi = std::max(hi, sys.solution[i]);
    }
    const bool max_principle =
        sys.solution.size() == 0 || (lo >= sys.exterior_min - 1e-10 * scale && hi <= sys.exterior_max + 1e-10 * scale);
    out.manifest.checks.push_back({"m_matrix", sys.m_matrix, static_cast<double>(sys.upwinded_rows)});
    out.manifest.checks.push_back({"discrete_maximum_principle", max_principle, hi - lo});
    out.manifest.parameters["residual"] = sys.residual;
    out.manifest.parameters["snapped_atoms"] = sys.snapped_atoms;
    out.manifest.parameters["max_snap_distance"] = sys.max_snap_distance;
    if (sys.snapped_atoms > 0) {
      out.warnings.push_back(std::to_string(sys.snapped_atoms) + " jump targets snapped to lattice nodes (max distance " +
                             format_double(sys.max_snap_distance) + ")");
    }

    out.table.header = {"node_id"};
    for (auto& c : coordinate_header("x", spec.dim)) out.table.header.push_back(c);
    out.table.header.push_back("value");
    out.table.header.push_back("interior");
    for (std::size_t i = 0; i < sol.values.size(); ++i) {
      std::vector<std::string> row{std::to_string(i)};
      append_point(row, sol.grid.node(i));
      row.push_back(format_double(sol.values[i]));
      row.push_back(sol.grid.interior[i] ? "1" : "0");
      out.table.rows.push_back(std::move(row));
    }
    if (!max_principle) out.code = kExitCheckFailed;
    return out;
  });
}

int cmd_compare(const CommandOptions& opts, std::ostream& err) {
  return run_command(opts, err, [](const Context& ctx) {
    Outcome out;
    out.manifest = base_manifest(ctx, "compare");
    const double h = mesh_of(ctx);
    out.manifest.parameters["h"] = h;
    const ProblemSpec& spec = ctx.config.spec;
    const auto pts = require_points(ctx, false);
    const auto mc = checked_solve(ctx, pts, out.manifest);
    const RefinedOracle oracle = oracle_solve_refined(spec, h);
    const ComparisonReport rep = compare(mc, oracle);

    out.table.header = {"point_id"};
    for (auto& c : coordinate_header("x", spec.dim)) out.table.header.push_back(c);
    for (const char* c : {"mc_mean", "mc_stderr", "oracle_value", "oracle_error", "gap", "tolerance", "ratio", "pass"}) {
      out.table.header.push_back(c);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const auto& r = rep.rows[i];
      std::vector<std::string> row{std::to_string(i)};
      append_point(row, r.point);
      for (double v : {r.mc_mean, r.mc_stderr, r.oracle_value, r.oracle_error, r.gap, r.tolerance, r.ratio}) {
        row.push_back(format_double(v));
      }
      row.push_back(r.pass ? "1" : "0");
      out.table.rows.push_back(std::move(row));
      worst = std::max(worst, r.ratio);
    }
    out.manifest.checks.push_back({"mc_oracle_agreement", rep.all_pass(), worst});
    for (const auto& c : out.manifest.checks) {
      if (!c.pass) out.code = c.name == "nonexit_fraction" ? kExitSimulation : kExitCheckFailed;
    }
    return out;
  });
}

}  // namespace nldp
