#include "nldp/pathsim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nldp/error.hpp"

namespace nldp {

namespace {

constexpr double kMinDtFraction = 1e-12;
constexpr double kIsotropyTol = 1e-12;

// Coefficient evaluation with the constant cases resolved once per path.
class Coefficients {
 public:
  explicit Coefficients(const ProblemSpec& spec)
      : spec_(spec),
        dim_(spec.dim),
        const_root_(spec.elliptic.is_constant()),
        const_drift_(spec.elliptic.is_constant() && spec.drift.is_constant()),
        has_kappa_(spec.has_killing()) {
    if (const_root_) root_ = spec.elliptic.constant_sqrt_A();
    if (const_drift_) drift_ = spec.drift(Point::Zero(dim_));
    if (has_kappa_) {
      if (auto c = spec.jumps->kappa.constant_value()) {
        const_kappa_ = true;
        kappa_ = *c;
      }
    }
  }

  int dim() const { return dim_; }
  bool has_kappa() const { return has_kappa_; }

  Point drift(const Point& x) const {
    if (const_drift_) return drift_;
    Point v = spec_.drift(x);
    if (!spec_.elliptic.has_zero_divergence()) v += 0.5 * spec_.elliptic.eval_div_A(x);
    return v;
  }

  Matrix root(const Point& x) const { return const_root_ ? root_ : spec_.elliptic.sqrt_A(x); }

  double kappa(const Point& x) const {
    if (!has_kappa_) return 0.0;
    return const_kappa_ ? kappa_ : spec_.jumps->kappa(x);
  }

  /// Diffusion scale a when A(x) = a I, otherwise throws.
  double isotropic_scale(const Point& x) const {
    const Matrix a = spec_.elliptic.eval_A(x);
    const double s = a(0, 0);
    if ((a - s * Matrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff() > kIsotropyTol * std::max(1.0, s)) {
      throw Error(ErrorKind::unsupported_coefficient, "bridge_corrected exit rule requires isotropic A");
    }
    return s;
  }

 private:
  const ProblemSpec& spec_;
  int dim_;
  bool const_root_;
  bool const_drift_;
  bool has_kappa_;
  bool const_kappa_ = false;
  double kappa_ = 0.0;
  Matrix root_;
  Point drift_;
};

void require_finite_position(const Point& x) {
  if (!x.allFinite()) throw Error(ErrorKind::evaluation_failure, "non-finite position after diffusion step");
}

void require_finite_rate(double k) {
  if (!std::isfinite(k) || k < 0.0) {
    throw Error(ErrorKind::evaluation_failure, "kappa is non-finite or negative along the path");
  }
}

Point propose(const Coefficients& c, const Point& x, double dt, RngStream& rng) {
  Point z(c.dim());
  for (int i = 0; i < c.dim(); ++i) z[i] = rng.normal();
  Point x1 = x + c.drift(x) * dt + c.root(x) * (std::sqrt(dt) * z);
  require_finite_position(x1);
  return x1;
}

double hazard_increment(HazardRule rule, double k0, double k1, double dt) {
  return rule == HazardRule::trapezoid ? 0.5 * dt * (k0 + k1) : dt * k0;
}

// Membership decided from the signed distance when it is unambiguous.
bool inside(const Domain& d, const Point& x, double sd) {
  constexpr double kTiny = 1e-12;
  if (sd < -kTiny) return true;
  if (sd > kTiny) return false;
  return d.contains(x);
}

}  // namespace

void SimConfig::validate() const {
  if (!(dt_base > 0.0) || !std::isfinite(dt_base)) throw Error(ErrorKind::invalid_argument, "dt_base must be > 0");
  if (!(dt_boundary_factor > 0.0 && dt_boundary_factor <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "dt_boundary_factor must lie in (0, 1]");
  }
  if (max_steps < 1) throw Error(ErrorKind::invalid_argument, "max_steps must be >= 1");
  if (max_jumps < 0) throw Error(ErrorKind::invalid_argument, "max_jumps must be >= 0");
}

double KilledPathRecord::discounted(double alpha) const { return died ? std::exp(-alpha * end_time) : 0.0; }

PathState initial_state(const ProblemSpec& spec, const Point& x0, RngStream& rng) {
  if (x0.size() != spec.dim) throw Error(ErrorKind::invalid_argument, "starting point has wrong dimension");
  PathState s;
  s.position = x0;
  if (spec.has_killing()) s.hazard_threshold = rng.exponential();
  return s;
}

PathState step_diffusion(const ProblemSpec& spec, const PathState& state, double dt, RngStream& rng,
                         HazardRule rule) {
  if (!(dt > 0.0)) throw Error(ErrorKind::invalid_argument, "dt must be > 0");
  const Coefficients c(spec);
  PathState next = state;
  next.position = propose(c, state.position, dt, rng);
  next.time = state.time + dt;
  if (c.has_kappa()) {
    const double k0 = c.kappa(state.position);
    const double k1 = rule == HazardRule::trapezoid ? c.kappa(next.position) : 0.0;
    require_finite_rate(k0);
    require_finite_rate(k1);
    next.hazard_accum = state.hazard_accum + hazard_increment(rule, k0, k1, dt);
  }
  return next;
}

PathOutcome simulate_path(const ProblemSpec& spec, const Point& x0, const SimConfig& cfg, RngStream& rng,
                          const RunOptions& opts, PathObserver* observer) {
  cfg.validate();
  const Coefficients c(spec);
  const Domain* dom = opts.stop_domain;
  if (dom && !dom->contains(x0)) throw Error(ErrorKind::invalid_argument, "starting point must lie in D");
  const bool redistribute = opts.redistribute && c.has_kappa();
  if (redistribute && !spec.jumps->nu) {
    throw Error(ErrorKind::invalid_argument, "redistribution requested but the jump kernel has no law nu");
  }
  const bool bridge = dom && cfg.exit_rule == ExitRule::bridge_corrected;
  const bool const_iso = spec.elliptic.is_constant();
  double iso_scale = bridge && const_iso ? c.isotropic_scale(x0) : 1.0;
  const double lambda = spec.elliptic.lambda();
  const double dt_min = cfg.dt_base * kMinDtFraction;

  PathOutcome out;
  PathState& st = out.state;
  st = initial_state(spec, x0, rng);
  double k0 = c.kappa(st.position);
  require_finite_rate(k0);
  double sd = dom ? dom->signed_distance(st.position) : 0.0;

  auto finish_exit = [&](const Point& where, double t, ExitMode mode, bool flag) {
    out.end = PathEnd::exited;
    st.position = where;
    st.time = t;
    out.exit_mode = mode;
    out.boundary_jump_flag = flag;
    return out;
  };

  for (;;) {
    const double remaining = opts.horizon - st.time;
    if (remaining <= 1e-9 * cfg.dt_base) {
      out.end = PathEnd::horizon;
      return out;
    }
    if (out.steps_used >= cfg.max_steps) {
      out.end = PathEnd::step_budget;
      return out;
    }

    double dt = cfg.dt_base;
    if (dom) dt = std::min(dt, std::max(dt_min, cfg.dt_boundary_factor * sd * sd / lambda));
    bool to_horizon = false;
    if (dt >= remaining) {
      dt = remaining;
      to_horizon = true;
    }

    const Point x1 = propose(c, st.position, dt, rng);
    double k1 = 0.0;
    double h1 = st.hazard_accum;
    if (c.has_kappa()) {
      if (cfg.hazard_rule == HazardRule::trapezoid) {
        k1 = c.kappa(x1);
        require_finite_rate(k1);
      }
      h1 += hazard_increment(cfg.hazard_rule, k0, k1, dt);
    }

    const bool crossed = h1 >= st.hazard_threshold;
    double frac = 1.0;
    if (crossed) frac = std::clamp((st.hazard_threshold - st.hazard_accum) / (h1 - st.hazard_accum), 0.0, 1.0);
    const Point x_end = crossed ? Point(st.position + frac * (x1 - st.position)) : x1;
    const double t_end = crossed ? st.time + frac * dt : (to_horizon ? opts.horizon : st.time + dt);
    ++out.steps_used;

    if (dom) {
      const double sd_end = dom->signed_distance(x_end);
      if (!inside(*dom, x_end, sd_end)) {
        if (observer) observer->on_segment(st.time, st.position, t_end, x_end);
        st.hazard_accum = crossed ? st.hazard_threshold : h1;
        return finish_exit(x_end, t_end, ExitMode::diffused_across, false);
      }
      if (bridge) {
        const double a = const_iso ? iso_scale : c.isotropic_scale(st.position);
        const double p = std::exp(-2.0 * sd * sd_end / (a * (t_end - st.time)));
        if (p > 1e-300 && rng.uniform() < p) {
          const Point& near = -sd < -sd_end ? st.position : x_end;
          if (observer) observer->on_segment(st.time, st.position, t_end, x_end);
          st.hazard_accum = crossed ? st.hazard_threshold : h1;
          return finish_exit(dom->exterior_projection(near), t_end, ExitMode::diffused_across, false);
        }
      }
      sd = sd_end;
    }

    if (observer) observer->on_segment(st.time, st.position, t_end, x_end);

    if (!crossed) {
      st.position = x1;
      st.time = t_end;
      st.hazard_accum = h1;
      if (cfg.hazard_rule == HazardRule::trapezoid) {
        k0 = k1;
      } else if (c.has_kappa()) {
        k0 = c.kappa(x1);
        require_finite_rate(k0);
      }
      continue;
    }

    st.time = t_end;
    st.hazard_accum = st.hazard_threshold;
    if (!redistribute) {
      st.position = x_end;
      out.end = PathEnd::killed;
      return out;
    }

    ++st.jumps_so_far;
    if (st.jumps_so_far > cfg.max_jumps) {
      st.position = x_end;
      out.end = PathEnd::jump_budget;
      return out;
    }
    const Point y = spec.jumps->nu->sample(rng);
    if (observer) observer->on_jump(t_end, x_end, y);
    if (dom) {
      const double sd_y = dom->signed_distance(y);
      const bool on_boundary = std::abs(sd_y) <= kBoundaryJumpTolerance;
      if (on_boundary || !dom->contains(y)) {
        const Point landing = dom->contains(y) ? dom->exterior_projection(y) : y;
        return finish_exit(landing, t_end, ExitMode::jumped_outside, on_boundary);
      }
      sd = sd_y;
    }
    st.position = y;
    st.hazard_accum = 0.0;
    st.hazard_threshold = rng.exponential();
    k0 = c.kappa(y);
    require_finite_rate(k0);
  }
}

ExitRecord run_until_exit(const ProblemSpec& spec, const Point& x0, const SimConfig& cfg, RngStream& rng) {
  RunOptions opts;
  opts.stop_domain = spec.domain.get();
  opts.redistribute = true;
  const PathOutcome o = simulate_path(spec, x0, cfg, rng, opts);
  if (o.end == PathEnd::step_budget) {
    throw Error(ErrorKind::non_exit, "path did not leave D within max_steps = " + std::to_string(cfg.max_steps));
  }
  if (o.end == PathEnd::jump_budget) {
    throw Error(ErrorKind::jump_budget_exceeded, "path exceeded max_jumps = " + std::to_string(cfg.max_jumps));
  }
  ExitRecord r;
  r.exit_point = o.state.position;
  r.exit_time = o.state.time;
  r.n_jumps = o.state.jumps_so_far;
  r.exit_mode = o.exit_mode;
  r.boundary_jump_flag = o.boundary_jump_flag;
  r.steps_used = o.steps_used;
  return r;
}

KilledPathRecord run_killed(const ProblemSpec& spec, const Point& x0, double horizon, const SimConfig& cfg,
                            RngStream& rng, PathObserver* observer) {
  if (!(horizon > 0.0)) throw Error(ErrorKind::invalid_argument, "horizon must be > 0");
  RunOptions opts;
  opts.redistribute = false;
  opts.horizon = horizon;
  // The step budget is enforced through the horizon here.
  SimConfig local = cfg;
  local.max_steps = std::max<std::int64_t>(cfg.max_steps, static_cast<std::int64_t>(std::ceil(horizon / cfg.dt_base)) + 1);
  const PathOutcome o = simulate_path(spec, x0, local, rng, opts, observer);
  KilledPathRecord r;
  r.died = o.end == PathEnd::killed;
  r.end_time = o.state.time;
  r.position = o.state.position;
  r.hazard_accum = o.state.hazard_accum;
  r.steps_used = o.steps_used;
  return r;
}

KilledPathRecord run_killed(const ProblemSpec& spec, const Point& x0, const SimConfig& cfg, RngStream& rng,
                            PathObserver* observer) {
  return run_killed(spec, x0, cfg.horizon(), cfg, rng, observer);
}

}  // namespace nldp
