#pragma once

#include <cstdint>
#include <limits>

#include "nldp/problem.hpp"
#include "nldp/rng.hpp"

namespace nldp {

enum class HazardRule { trapezoid, left_point };
enum class ExitRule { first_exterior_sample, bridge_corrected };

/// A jump landing within this distance of the boundary is an exit and is flagged.
inline constexpr double kBoundaryJumpTolerance = 1e-9;

struct SimConfig {
  double dt_base = 1e-3;
  /// Near the boundary dt = min(dt_base, factor * dist^2 / lambda).
  double dt_boundary_factor = 0.1;
  std::int64_t max_steps = 10'000'000;
  std::int64_t max_jumps = 1'000'000;
  HazardRule hazard_rule = HazardRule::trapezoid;
  ExitRule exit_rule = ExitRule::first_exterior_sample;

  /// Throws InvalidArgument on out-of-range fields.
  void validate() const;
  /// Time horizon implied by the step budget, used by killed-path runs.
  double horizon() const { return static_cast<double>(max_steps) * dt_base; }
};

struct PathState {
  Point position;
  double time = 0.0;
  /// Running integral of kappa along the current leg.
  double hazard_accum = 0.0;
  /// Exp(1) level at which the current leg is killed.
  double hazard_threshold = std::numeric_limits<double>::infinity();
  std::int64_t jumps_so_far = 0;
};

enum class ExitMode { diffused_across, jumped_outside };

struct ExitRecord {
  Point exit_point;
  double exit_time = 0.0;
  std::int64_t n_jumps = 0;
  ExitMode exit_mode = ExitMode::diffused_across;
  bool boundary_jump_flag = false;
  std::int64_t steps_used = 0;
};

struct KilledPathRecord {
  bool died = false;
  /// Death time zeta if died, otherwise the horizon reached.
  double end_time = 0.0;
  /// X_{zeta-} if died, otherwise the position at the horizon.
  Point position;
  /// int_0^{end_time} kappa(X_s) ds.
  double hazard_accum = 0.0;
  std::int64_t steps_used = 0;

  /// e^{-alpha zeta} on death, 0 for survivors.
  double discounted(double alpha) const;
};

/// Receives the continuous pieces of a simulated path. Pieces are separated by
/// redistribution jumps.
class PathObserver {
 public:
  virtual ~PathObserver() = default;
  virtual void on_segment(double t0, const Point& x0, double t1, const Point& x1) = 0;
  virtual void on_jump(double /*t*/, const Point& /*from*/, const Point& /*to*/) {}
};

/// What a general run does: stop on leaving `stop_domain` (if set), stop at
/// `horizon`, and either redistribute or die at a hazard crossing.
struct RunOptions {
  const Domain* stop_domain = nullptr;
  bool redistribute = true;
  double horizon = std::numeric_limits<double>::infinity();
};

enum class PathEnd { exited, killed, horizon, step_budget, jump_budget };

struct PathOutcome {
  PathEnd end = PathEnd::horizon;
  PathState state;
  ExitMode exit_mode = ExitMode::diffused_across;
  bool boundary_jump_flag = false;
  std::int64_t steps_used = 0;
};

/// Initial state at x0 with a fresh killing threshold (infinite without killing).
PathState initial_state(const ProblemSpec& spec, const Point& x0, RngStream& rng);

/// One Euler-Maruyama step of dX = (b + div(A)/2) dt + sqrt(A) dW, advancing
/// time and the hazard integral (kappa at the endpoints per `rule`).
/// Never applies a jump; the caller inspects hazard_accum.
PathState step_diffusion(const ProblemSpec& spec, const PathState& state, double dt, RngStream& rng,
                         HazardRule rule = HazardRule::trapezoid);

/// The general simulator behind the run_* entry points. Never throws on budget
/// exhaustion; reports it in PathOutcome::end.
PathOutcome simulate_path(const ProblemSpec& spec, const Point& x0, const SimConfig& cfg, RngStream& rng,
                          const RunOptions& opts, PathObserver* observer = nullptr);

/// Piecing-together process run until it first leaves spec.domain.
/// Throws NonExit / JumpBudgetExceeded when the budgets run out.
ExitRecord run_until_exit(const ProblemSpec& spec, const Point& x0, const SimConfig& cfg, RngStream& rng);

/// Killed subprocess X^kappa (no redistribution) up to death or the horizon
/// cfg.horizon().
KilledPathRecord run_killed(const ProblemSpec& spec, const Point& x0, const SimConfig& cfg, RngStream& rng,
                            PathObserver* observer = nullptr);
KilledPathRecord run_killed(const ProblemSpec& spec, const Point& x0, double horizon, const SimConfig& cfg,
                            RngStream& rng, PathObserver* observer = nullptr);

}  // namespace nldp
