#include "nldp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nldp/error.hpp"

namespace nldp {

namespace {

// Accumulates int e^{-alpha t} g_k(X_t) dt for a few fields, with g_k(X_t)
// linear in t over each segment and the discount integrated exactly.
class DiscountedIntegrals final : public PathObserver {
 public:
  DiscountedIntegrals(std::span<const ScalarField* const> fields, double alpha)
      : fields_(fields.begin(), fields.end()), alpha_(alpha), totals_(fields.size(), 0.0),
        last_(fields.size(), 0.0) {}

  void on_segment(double t0, const Point& x0, double t1, const Point& x1) override {
    const double dt = t1 - t0;
    const double x = alpha_ * dt;
    const double w0 = std::exp(-alpha_ * t0);
    // i0 = int_0^dt e^{-alpha s} ds, i1 = int_0^dt (s / dt) e^{-alpha s} ds
    double i0 = dt, i1 = 0.5 * dt;
    if (x > 1e-4) {
      i0 = -std::expm1(-x) / alpha_;
      i1 = (-std::expm1(-x) - x * std::exp(-x)) / (alpha_ * x);
    } else if (x > 0.0) {
      i0 = dt * (1.0 - x / 2.0 + x * x / 6.0);
      i1 = dt * (0.5 - x / 3.0 + x * x / 8.0);
    }
    for (std::size_t k = 0; k < fields_.size(); ++k) {
      const double v0 = cached_ ? last_[k] : (*fields_[k])(x0);
      const double v1 = (*fields_[k])(x1);
      totals_[k] += w0 * (v0 * i0 + (v1 - v0) * i1);
      last_[k] = v1;
    }
    cached_ = true;
  }

  void on_jump(double, const Point&, const Point&) override { cached_ = false; }

  double total(std::size_t k) const { return totals_[k]; }

 private:
  std::vector<const ScalarField*> fields_;
  double alpha_;
  std::vector<double> totals_;
  std::vector<double> last_;
  bool cached_ = false;
};

void require_paths(std::int64_t n_paths, std::int64_t minimum = 2) {
  if (n_paths < minimum) throw Error(ErrorKind::invalid_argument, "n_paths must be >= " + std::to_string(minimum));
}

double declared_sup(const ScalarField& f, const char* what) {
  if (auto s = f.sup_bound()) return *s;
  throw Error(ErrorKind::invalid_argument, std::string(what) + " needs a declared sup bound");
}

double check_horizon(double T, const SimConfig& cfg) {
  if (T > cfg.horizon() * (1.0 + 1e-12)) {
    throw Error(ErrorKind::truncation_budget_exceeded,
                "truncation horizon " + std::to_string(T) + " exceeds max_steps * dt_base = " +
                    std::to_string(cfg.horizon()));
  }
  return T;
}

double z_of(const Estimate& a, const Estimate& b) {
  const double diff = std::abs(a.mean - b.mean);
  const double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
  if (diff == 0.0) return 0.0;
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  return diff / se;
}

struct KilledIntegralsResult {
  std::vector<std::vector<double>> per_field;  // [field][path]
};

// Integrals of each field along killed paths started at x.
KilledIntegralsResult killed_integrals(const ProblemSpec& spec, std::span<const ScalarField* const> fields,
                                       double alpha, const Point& x, double horizon, std::int64_t n_paths,
                                       const SimConfig& cfg, std::uint64_t seed, const Execution& exec) {
  KilledIntegralsResult r;
  r.per_field.assign(fields.size(), std::vector<double>(static_cast<std::size_t>(n_paths)));
  for_each_index(static_cast<std::size_t>(n_paths), exec, [&](std::size_t i) {
    RngStream rng(seed, i);
    DiscountedIntegrals obs(fields, alpha);
    run_killed(spec, x, horizon, cfg, rng, &obs);
    for (std::size_t k = 0; k < fields.size(); ++k) r.per_field[k][i] = obs.total(k);
  });
  return r;
}

std::vector<double> full_integrals(const ProblemSpec& spec, const ScalarField& f, double alpha, const Point& x,
                                   double horizon, std::int64_t n_paths, const SimConfig& cfg, std::uint64_t seed,
                                   const Execution& exec) {
  std::vector<double> v(static_cast<std::size_t>(n_paths));
  const ScalarField* fields[] = {&f};
  RunOptions opts;
  opts.redistribute = true;
  opts.horizon = horizon;
  SimConfig local = cfg;
  local.max_steps = std::max<std::int64_t>(cfg.max_steps, static_cast<std::int64_t>(std::ceil(horizon / cfg.dt_base)) + 1);
  for_each_index(v.size(), exec, [&](std::size_t i) {
    RngStream rng(seed, i);
    DiscountedIntegrals obs(fields, alpha);
    const PathOutcome o = simulate_path(spec, x, local, rng, opts, &obs);
    if (o.end == PathEnd::jump_budget) {
      throw Error(ErrorKind::jump_budget_exceeded, "resolvent path exceeded max_jumps");
    }
    v[i] = obs.total(0);
  });
  return v;
}

Estimate zero_estimate(std::int64_t n) {
  std::vector<double> zeros(static_cast<std::size_t>(n), 0.0);
  return summarize(zeros);
}

double fitted_slope(const std::vector<RadiusEstimate>& rows) {
  if (rows.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (const auto& r : rows) {
    mx += std::log(r.radius);
    my += std::log(r.estimate.mean);
  }
  mx /= rows.size();
  my /= rows.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& r : rows) {
    const double dx = std::log(r.radius) - mx;
    sxy += dx * (std::log(r.estimate.mean) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace

double Estimate::aux_or(const std::string& key, double fallback) const {
  auto it = aux.find(key);
  return it == aux.end() ? fallback : it->second;
}

Estimate summarize(std::span<const double> samples) {
  Estimate e;
  e.n_paths = static_cast<std::int64_t>(samples.size());
  if (samples.empty()) {
    e.mean = e.ci_lo = e.ci_hi = std::numeric_limits<double>::quiet_NaN();
    e.std_error = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double n = static_cast<double>(samples.size());
  if (lo == hi) {
    e.mean = lo;
    e.std_error = 0.0;
  } else {
    e.mean = std::clamp(pairwise_sum(samples) / n, lo, hi);
    std::vector<double> sq(samples.size());
    std::transform(samples.begin(), samples.end(), sq.begin(), [&](double v) { return (v - e.mean) * (v - e.mean); });
    const double var = samples.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
    e.std_error = std::sqrt(var / n);
  }
  e.ci_lo = e.mean - 1.96 * e.std_error;
  e.ci_hi = e.mean + 1.96 * e.std_error;
  e.aux["sample_min"] = lo;
  e.aux["sample_max"] = hi;
  return e;
}

IdentityReport make_identity_report(Estimate lhs, Estimate rhs, double threshold) {
  IdentityReport r;
  r.z_score = z_of(lhs, rhs);
  r.lhs = std::move(lhs);
  r.rhs = std::move(rhs);
  r.threshold = threshold;
  r.pass = r.z_score <= threshold;
  return r;
}

std::vector<PointEstimate> solve_dirichlet(const ProblemSpec& spec, std::span<const Point> points,
                                           std::int64_t n_paths, const SimConfig& cfg, std::uint64_t master_seed,
                                           const Execution& exec) {
  require_paths(n_paths);
  spec.check_dims();
  cfg.validate();
  for (const auto& p : points) {
    if (p.size() != spec.dim || !spec.domain->contains(p)) {
      throw Error(ErrorKind::invalid_argument, "solve_dirichlet: every point must lie in D");
    }
  }

  struct PathResult {
    double phi = 0.0;
    double time = 0.0;
    double jumps = 0.0;
    bool exited = false;
    bool boundary_jump = false;
    bool jumped_outside = false;
  };

  std::vector<PointEstimate> out;
  const auto n = static_cast<std::size_t>(n_paths);
  std::vector<PathResult> results(n);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point x0 = points[p];
    for_each_index(n, exec, [&](std::size_t i) {
      RngStream rng(master_seed, p * n + i);
      RunOptions opts;
      opts.stop_domain = spec.domain.get();
      const PathOutcome o = simulate_path(spec, x0, cfg, rng, opts);
      PathResult r;
      if (o.end == PathEnd::jump_budget) {
        throw Error(ErrorKind::jump_budget_exceeded, "path exceeded max_jumps");
      }
      if (o.end == PathEnd::exited) {
        r.exited = true;
        r.phi = spec.boundary.phi(o.state.position);
        if (!std::isfinite(r.phi)) throw Error(ErrorKind::evaluation_failure, "phi is non-finite at an exit point");
        r.time = o.state.time;
        r.jumps = static_cast<double>(o.state.jumps_so_far);
        r.boundary_jump = o.boundary_jump_flag;
        r.jumped_outside = o.exit_mode == ExitMode::jumped_outside;
      }
      results[i] = r;
    });

    std::vector<double> phi, time, jumps;
    double boundary = 0.0, jumped = 0.0;
    for (const auto& r : results) {
      if (!r.exited) continue;
      phi.push_back(r.phi);
      time.push_back(r.time);
      jumps.push_back(r.jumps);
      boundary += r.boundary_jump ? 1.0 : 0.0;
      jumped += r.jumped_outside ? 1.0 : 0.0;
    }
    Estimate e = summarize(phi);
    const double completed = static_cast<double>(phi.size());
    e.aux["nonexit_count"] = static_cast<double>(n - phi.size());
    e.aux["paths_attempted"] = static_cast<double>(n);
    e.aux["mean_exit_time"] = completed > 0 ? pairwise_sum(time) / completed : 0.0;
    e.aux["mean_jumps"] = completed > 0 ? pairwise_sum(jumps) / completed : 0.0;
    e.aux["boundary_jump_fraction"] = completed > 0 ? boundary / completed : 0.0;
    e.aux["jumped_outside_fraction"] = completed > 0 ? jumped / completed : 0.0;
    out.push_back({x0, std::move(e)});
  }
  return out;
}

bool nonexit_gate_ok(const Estimate& e) {
  const double attempted = e.aux_or("paths_attempted", static_cast<double>(e.n_paths));
  return e.aux_or("nonexit_count", 0.0) <= kMaxNonExitFraction * attempted;
}

double resolvent_horizon(double sup_f, double alpha, std::int64_t n_paths) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::invalid_argument, "alpha must be > 0");
  if (!(sup_f > 0.0)) return 10.0 / alpha;
  const double eps = sup_f / (alpha * std::sqrt(static_cast<double>(n_paths)));
  return std::max(std::log(10.0 * sup_f / (alpha * eps)) / alpha, 10.0 / alpha);
}

Estimate resolvent_full(const ProblemSpec& spec, const ScalarField& f, double alpha, const Point& x,
                        std::int64_t n_paths, const SimConfig& cfg, std::uint64_t seed, const Execution& exec) {
  require_paths(n_paths);
  spec.check_dims();
  cfg.validate();
  const double sup_f = declared_sup(f, "f");
  const double T = check_horizon(resolvent_horizon(sup_f, alpha, n_paths), cfg);
  if (f.is_zero()) return zero_estimate(n_paths);
  Estimate e = summarize(full_integrals(spec, f, alpha, x, T, n_paths, cfg, seed, exec));
  e.aux["horizon"] = T;
  e.aux["tail_bound"] = sup_f * std::exp(-alpha * T) / alpha;
  return e;
}

Estimate resolvent_killed(const ProblemSpec& spec, const ScalarField& f, double alpha, const Point& x,
                          std::int64_t n_paths, const SimConfig& cfg, std::uint64_t seed, const Execution& exec) {
  require_paths(n_paths);
  spec.check_dims();
  cfg.validate();
  const double sup_f = declared_sup(f, "f");
  const double T = check_horizon(resolvent_horizon(sup_f, alpha, n_paths), cfg);
  if (f.is_zero()) return zero_estimate(n_paths);
  const ScalarField* fields[] = {&f};
  auto r = killed_integrals(spec, fields, alpha, x, T, n_paths, cfg, seed, exec);
  Estimate e = summarize(r.per_field[0]);
  e.aux["horizon"] = T;
  e.aux["tail_bound"] = sup_f * std::exp(-alpha * T) / alpha;
  return e;
}

std::vector<IdentityReport> check_prop_2_3(const ProblemSpec& spec, const ScalarField& phi, double alpha,
                                           std::span<const Point> points, std::int64_t n_paths,
                                           const SimConfig& cfg, std::uint64_t seed, const Execution& exec,
                                           double threshold) {
  require_paths(n_paths);
  spec.check_dims();
  cfg.validate();
  if (alpha < 0.0) throw Error(ErrorKind::invalid_argument, "alpha must be >= 0");
  const ScalarField kappa = spec.jumps ? spec.jumps->kappa : ScalarField::constant(0.0);
  const ScalarField integrand = kappa * phi;
  const double sup_phi = declared_sup(phi, "phi");
  // Both sides beyond T are bounded by sup_phi e^{-alpha T}, whatever kappa is.
  const double T = alpha > 0.0 && sup_phi > 0.0 && spec.has_killing()
                       ? check_horizon(resolvent_horizon(alpha * sup_phi, alpha, n_paths), cfg)
                       : cfg.horizon();
  const auto n = static_cast<std::size_t>(n_paths);
  const std::uint64_t lhs_seed = derive_seed(seed, 1);
  const std::uint64_t rhs_seed = derive_seed(seed, 2);

  std::vector<IdentityReport> out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point x = points[p];
    if (!spec.has_killing()) {
      // X^kappa never dies: both sides vanish identically.
      out.push_back(make_identity_report(zero_estimate(n_paths), zero_estimate(n_paths), threshold));
      continue;
    }
    std::vector<double> lhs(n);
    for_each_index(n, exec, [&](std::size_t i) {
      RngStream rng(lhs_seed, p * n + i);
      const KilledPathRecord k = run_killed(spec, x, T, cfg, rng);
      lhs[i] = k.died ? k.discounted(alpha) * phi(k.position) : 0.0;
    });
    Estimate l = summarize(lhs);
    Estimate r;
    if (integrand.is_zero()) {
      r = zero_estimate(n_paths);
    } else {
      const ScalarField* fields[] = {&integrand};
      auto rr = killed_integrals(spec, fields, alpha, x, T, n_paths, cfg, derive_seed(rhs_seed, p), exec);
      r = summarize(rr.per_field[0]);
    }
    l.aux["horizon"] = T;
    r.aux["horizon"] = T;
    out.push_back(make_identity_report(std::move(l), std::move(r), threshold));
  }
  return out;
}

std::vector<IdentityReport> check_resolvent_identity(const ProblemSpec& spec, const ScalarField& f, double alpha,
                                                     std::span<const Point> points, std::int64_t n_paths,
                                                     const SimConfig& cfg, std::uint64_t seed,
                                                     const Execution& exec, double threshold,
                                                     std::int64_t inner_paths) {
  require_paths(n_paths);
  spec.check_dims();
  cfg.validate();
  if (!(alpha > 0.0)) throw Error(ErrorKind::invalid_argument, "alpha must be > 0");
  const bool killing = spec.has_killing();
  if (killing && (!spec.jumps->nu || !spec.jumps->nu->atom_only())) {
    throw Error(ErrorKind::unsupported_kernel, "resolvent identity check supports atom-only kernels");
  }
  if (inner_paths <= 0) inner_paths = std::max<std::int64_t>(2, n_paths / 4);

  const double sup_f = declared_sup(f, "f");
  // Tails past T: sup_f e^{-alpha T} / alpha for the f terms and the same again
  // for the kappa term, since G^kappa_alpha(kappa c) beyond T is at most |c| e^{-alpha T}.
  const double T = check_horizon(resolvent_horizon(2.0 * sup_f, alpha, n_paths), cfg);

  // Atom values G_alpha f(z_i), shared by all probe points.
  double atom_mix = 0.0;
  double atom_mix_var = 0.0;
  if (killing) {
    const auto& atoms = spec.jumps->nu->atoms();
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const Estimate g = summarize(full_integrals(spec, f, alpha, atoms[a].point, T, inner_paths, cfg,
                                                  derive_seed(seed, 100 + a), exec));
      atom_mix += atoms[a].weight * g.mean;
      atom_mix_var += atoms[a].weight * atoms[a].weight * g.std_error * g.std_error;
    }
  }

  const ScalarField kappa = killing ? spec.jumps->kappa : ScalarField::constant(0.0);
  const ScalarField* fields[] = {&f, &kappa};
  const auto n = static_cast<std::size_t>(n_paths);
  std::vector<IdentityReport> out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point x = points[p];
    const std::uint64_t lhs_seed = derive_seed(seed, 2 * p + 1);
    // Without killing both sides are the same estimator; share the paths.
    const std::uint64_t rhs_seed = killing ? derive_seed(seed, 2 * p + 2) : lhs_seed;

    Estimate lhs = summarize(full_integrals(spec, f, alpha, x, T, n_paths, cfg, lhs_seed, exec));
    auto kr = killed_integrals(spec, fields, alpha, x, T, n_paths, cfg, rhs_seed, exec);
    std::vector<double> combined(n);
    for (std::size_t i = 0; i < n; ++i) combined[i] = kr.per_field[0][i] + atom_mix * kr.per_field[1][i];
    Estimate rhs = summarize(combined);
    const double g_kappa = summarize(kr.per_field[1]).mean;
    rhs.std_error = std::sqrt(rhs.std_error * rhs.std_error + g_kappa * g_kappa * atom_mix_var);
    rhs.ci_lo = rhs.mean - 1.96 * rhs.std_error;
    rhs.ci_hi = rhs.mean + 1.96 * rhs.std_error;
    rhs.aux["atom_mix"] = atom_mix;
    rhs.aux["atom_mix_stderr"] = std::sqrt(atom_mix_var);
    lhs.aux["horizon"] = T;
    rhs.aux["horizon"] = T;
    out.push_back(make_identity_report(std::move(lhs), std::move(rhs), threshold));
  }
  return out;
}

ExitTimeScaling exit_time_scaling(const ProblemSpec& spec_no_jumps, const Point& center,
                                  std::span<const double> radii, std::int64_t n_paths, const SimConfig& cfg,
                                  std::uint64_t seed, const Execution& exec) {
  require_paths(n_paths);
  cfg.validate();
  if (spec_no_jumps.has_killing()) throw Error(ErrorKind::invalid_argument, "exit_time_scaling requires J = 0");
  if (radii.empty()) throw Error(ErrorKind::invalid_argument, "need at least one radius");
  const double r_max = *std::max_element(radii.begin(), radii.end());
  const double r_min = *std::min_element(radii.begin(), radii.end());

  ExitTimeScaling out;
  const auto n = static_cast<std::size_t>(n_paths);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    if (!(r > 0.0)) throw Error(ErrorKind::invalid_argument, "radii must be positive");
    const ProblemSpec spec = spec_no_jumps.with_domain(make_ball(center, r));
    SimConfig local = cfg;
    local.dt_base = cfg.dt_base * (r / r_max) * (r / r_max);
    std::vector<double> tau(n, std::numeric_limits<double>::quiet_NaN());
    for_each_index(n, exec, [&](std::size_t i) {
      RngStream rng(seed, k * n + i);
      RunOptions opts;
      opts.stop_domain = spec.domain.get();
      const PathOutcome o = simulate_path(spec, center, local, rng, opts);
      if (o.end == PathEnd::exited) tau[i] = o.state.time;
    });
    std::vector<double> done;
    for (double t : tau) {
      if (!std::isnan(t)) done.push_back(t);
    }
    Estimate e = summarize(done);
    e.aux["nonexit_count"] = static_cast<double>(n - done.size());
    e.aux["paths_attempted"] = static_cast<double>(n);
    e.aux["dt_base"] = local.dt_base;
    out.rows.push_back({r, std::move(e)});
  }
  out.slope = fitted_slope(out.rows);
  for (const auto& row : out.rows) {
    if (row.radius == r_min) out.c0 = row.estimate.mean / (r_min * r_min);
  }
  return out;
}

std::vector<DecaySample> small_ball_kato_decay(const ProblemSpec& spec, std::span<const double> radii,
                                               std::span<const Point> probe_points, std::int64_t n_paths,
                                               const SimConfig& cfg, std::uint64_t seed, const Execution& exec) {
  require_paths(n_paths);
  spec.check_dims();
  cfg.validate();
  if (radii.empty() || probe_points.empty()) throw Error(ErrorKind::invalid_argument, "need radii and probe points");
  const double r_max = *std::max_element(radii.begin(), radii.end());
  const auto n = static_cast<std::size_t>(n_paths);

  std::vector<DecaySample> out;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    if (!(r > 0.0)) throw Error(ErrorKind::invalid_argument, "radii must be positive");
    SimConfig local = cfg;
    local.dt_base = cfg.dt_base * (r / r_max) * (r / r_max);
    DecaySample best;
    best.radius = r;
    bool first = true;
    for (std::size_t p = 0; p < probe_points.size(); ++p) {
      const Point& x = probe_points[p];
      const auto ball = make_ball(x, r);
      std::vector<double> acc(n, std::numeric_limits<double>::quiet_NaN());
      if (spec.has_killing()) {
        for_each_index(n, exec, [&](std::size_t i) {
          RngStream rng(seed, (k * probe_points.size() + p) * n + i);
          RunOptions opts;
          opts.stop_domain = ball.get();
          opts.redistribute = false;
          const PathOutcome o = simulate_path(spec, x, local, rng, opts);
          if (o.end != PathEnd::step_budget) acc[i] = o.state.hazard_accum;
        });
      } else {
        std::fill(acc.begin(), acc.end(), 0.0);
      }
      std::vector<double> done;
      for (double v : acc) {
        if (!std::isnan(v)) done.push_back(v);
      }
      Estimate e = summarize(done);
      e.aux["nonexit_count"] = static_cast<double>(n - done.size());
      e.aux["dt_base"] = local.dt_base;
      if (first || e.mean > best.estimate.mean) {
        best.estimate = std::move(e);
        best.argmax = p;
        first = false;
      }
    }
    out.push_back(std::move(best));
  }
  return out;
}

std::vector<DecayRatio> decay_ratios(std::span<const DecaySample> samples) {
  std::vector<DecayRatio> out;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const auto& big = samples[k];
    const auto& small = samples[k + 1];
    DecayRatio r;
    r.r_large = big.radius;
    r.r_small = small.radius;
    r.expected = (big.radius / small.radius) * (big.radius / small.radius);
    r.ratio = big.estimate.mean / small.estimate.mean;
    const double gap = std::abs(big.estimate.mean - r.expected * small.estimate.mean);
    const double half_widths = 1.96 * (big.estimate.std_error + r.expected * small.estimate.std_error);
    r.pass = gap <= half_widths;
    out.push_back(r);
  }
  return out;
}

AlphaDecay alpha_decay(const ProblemSpec& spec, std::span<const Point> probe_points, std::span<const double> alphas,
                       std::int64_t n_paths, const SimConfig& cfg, std::uint64_t seed, const Execution& exec) {
  require_paths(n_paths);
  spec.check_dims();
  cfg.validate();
  if (probe_points.empty() || alphas.empty()) throw Error(ErrorKind::invalid_argument, "need probes and alphas");
  for (double a : alphas) {
    if (!(a > 0.0)) throw Error(ErrorKind::invalid_argument, "alphas must be > 0");
  }
  const auto n = static_cast<std::size_t>(n_paths);
  const double T = cfg.horizon();

  // First-jump times per probe, shared by all alphas. Survivors are stored as +inf.
  std::vector<std::vector<double>> tau(probe_points.size(), std::vector<double>(n));
  for (std::size_t p = 0; p < probe_points.size(); ++p) {
    const Point x = probe_points[p];
    if (!spec.has_killing()) {
      std::fill(tau[p].begin(), tau[p].end(), std::numeric_limits<double>::infinity());
      continue;
    }
    for_each_index(n, exec, [&](std::size_t i) {
      RngStream rng(seed, p * n + i);
      const KilledPathRecord k = run_killed(spec, x, T, cfg, rng);
      tau[p][i] = k.died ? k.end_time : std::numeric_limits<double>::infinity();
    });
  }

  AlphaDecay out;
  std::vector<double> vals(n);
  for (double a : alphas) {
    AlphaSample best;
    best.alpha = a;
    bool first = true;
    for (std::size_t p = 0; p < probe_points.size(); ++p) {
      for (std::size_t i = 0; i < n; ++i) vals[i] = std::exp(-a * std::min(tau[p][i], T));
      Estimate e = summarize(vals);
      if (first || e.mean > best.estimate.mean) {
        best.estimate = std::move(e);
        best.argmax = p;
        first = false;
      }
    }
    best.estimate.aux["tail_bound"] = std::exp(-a * T);
    out.rows.push_back(std::move(best));
  }
  // Monotonicity in increasing alpha order.
  std::vector<std::size_t> order(out.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto l, auto r) { return out.rows[l].alpha < out.rows[r].alpha; });
  for (std::size_t j = 0; j < order.size(); ++j) {
    const auto& row = out.rows[order[j]];
    if (j > 0 && row.estimate.mean > out.rows[order[j - 1]].estimate.mean) out.monotone = false;
    if (!out.first_alpha_below_half && row.estimate.mean <= 0.5) out.first_alpha_below_half = row.alpha;
  }
  return out;
}

JumpCountSummary jump_counts(const ProblemSpec& spec, const Point& x0, double horizon, std::int64_t n_paths,
                             const SimConfig& cfg, std::uint64_t seed, const Execution& exec) {
  require_paths(n_paths);
  spec.check_dims();
  cfg.validate();
  if (!(horizon > 0.0)) throw Error(ErrorKind::invalid_argument, "horizon must be > 0");
  const auto n = static_cast<std::size_t>(n_paths);
  std::vector<double> jumps(n);
  std::vector<char> failed(n, 0);
  for_each_index(n, exec, [&](std::size_t i) {
    RngStream rng(seed, i);
    RunOptions opts;
    opts.redistribute = true;
    opts.horizon = horizon;
    const PathOutcome o = simulate_path(spec, x0, cfg, rng, opts);
    jumps[i] = static_cast<double>(o.state.jumps_so_far);
    failed[i] = o.end != PathEnd::horizon;
  });
  JumpCountSummary s;
  s.jumps = summarize(jumps);
  s.budget_failures = std::count(failed.begin(), failed.end(), 1);
  return s;
}

}  // namespace nldp
