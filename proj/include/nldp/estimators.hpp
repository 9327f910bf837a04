#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nldp/parallel.hpp"
#include "nldp/pathsim.hpp"

namespace nldp {

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_paths = 0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  /// Named diagnostics (mean_exit_time, mean_jumps, nonexit_count, ...).
  std::map<std::string, double> aux;

  double aux_or(const std::string& key, double fallback) const;
};

/// Sample mean with std_error = sample-std / sqrt(n) and ci95 = mean -/+ 1.96 std_error.
/// The mean is a fixed-order pairwise sum, clamped to [min, max] of the samples,
/// and exactly the common value when all samples agree.
Estimate summarize(std::span<const double> samples);

struct IdentityReport {
  Estimate lhs;
  Estimate rhs;
  double z_score = 0.0;
  double threshold = 3.0;
  bool pass = true;
};

IdentityReport make_identity_report(Estimate lhs, Estimate rhs, double threshold = 3.0);

struct PointEstimate {
  Point point;
  Estimate estimate;
};

/// Fraction of non-exiting paths above which a solve is considered failed.
inline constexpr double kMaxNonExitFraction = 1e-3;

/// u(x) = E_x[phi(X_{tau_D})] at each point. Path i at point p uses stream
/// index p * n_paths + i. Paths hitting max_steps are excluded and counted in
/// aux["nonexit_count"].
std::vector<PointEstimate> solve_dirichlet(const ProblemSpec& spec, std::span<const Point> points,
                                           std::int64_t n_paths, const SimConfig& cfg, std::uint64_t master_seed,
                                           const Execution& exec = {});

/// True when the non-exit fraction of a solve stays within kMaxNonExitFraction.
bool nonexit_gate_ok(const Estimate& e);

/// Truncation horizon T = max(ln(10 sup_f / (alpha eps)) / alpha, 10 / alpha)
/// with eps = sup_f / (alpha sqrt(n_paths)), the stderr scale of the estimator.
double resolvent_horizon(double sup_f, double alpha, std::int64_t n_paths);

/// G_alpha f(x) = E_x int_0^inf e^{-alpha t} f(X_t) dt along the full process,
/// truncated at resolvent_horizon; the tail sup_f e^{-alpha T} / alpha is
/// reported in aux["tail_bound"], separate from std_error.
Estimate resolvent_full(const ProblemSpec& spec, const ScalarField& f, double alpha, const Point& x,
                        std::int64_t n_paths, const SimConfig& cfg, std::uint64_t seed, const Execution& exec = {});

/// G^kappa_alpha f(x): the same integral along X^kappa, stopped at its death time.
Estimate resolvent_killed(const ProblemSpec& spec, const ScalarField& f, double alpha, const Point& x,
                          std::int64_t n_paths, const SimConfig& cfg, std::uint64_t seed,
                          const Execution& exec = {});

/// E_x[e^{-alpha zeta} phi(X_{zeta-}); zeta < T] against G^kappa_alpha(kappa phi)(x)
/// on independent path sets, both truncated at the same horizon T.
std::vector<IdentityReport> check_prop_2_3(const ProblemSpec& spec, const ScalarField& phi, double alpha,
                                           std::span<const Point> points, std::int64_t n_paths,
                                           const SimConfig& cfg, std::uint64_t seed, const Execution& exec = {},
                                           double threshold = 3.0);

/// G_alpha f(x) against G^kappa_alpha f(x) + G^kappa_alpha(kappa sum_i w_i G_alpha f(z_i))(x),
/// with the atom values G_alpha f(z_i) estimated on `inner_paths` paths each and
/// their error propagated into rhs.std_error. Atom-only kernels.
std::vector<IdentityReport> check_resolvent_identity(const ProblemSpec& spec, const ScalarField& f, double alpha,
                                                     std::span<const Point> points, std::int64_t n_paths,
                                                     const SimConfig& cfg, std::uint64_t seed,
                                                     const Execution& exec = {}, double threshold = 3.0,
                                                     std::int64_t inner_paths = 0);

struct RadiusEstimate {
  double radius = 0.0;
  Estimate estimate;
};

struct ExitTimeScaling {
  std::vector<RadiusEstimate> rows;
  /// Least-squares slope of log E[tau] against log r.
  double slope = 0.0;
  /// E[tau_{r_min}] / r_min^2, the scaling constant fitted at the smallest radius.
  double c0 = 0.0;
};

/// Mean exit time from B(center, r) started at the center, for each radius.
/// The time step is scaled with r^2 relative to the largest radius so every
/// ball sees the same discretization relative to its size.
ExitTimeScaling exit_time_scaling(const ProblemSpec& spec_no_jumps, const Point& center,
                                  std::span<const double> radii, std::int64_t n_paths, const SimConfig& cfg,
                                  std::uint64_t seed, const Execution& exec = {});

struct DecaySample {
  double radius = 0.0;
  /// Estimate at the maximizing probe point.
  Estimate estimate;
  std::size_t argmax = 0;
};

/// For each radius, max over probes x of E_x int_0^{tau_{B(x,r)}} kappa(X^kappa_s) ds.
std::vector<DecaySample> small_ball_kato_decay(const ProblemSpec& spec, std::span<const double> radii,
                                               std::span<const Point> probe_points, std::int64_t n_paths,
                                               const SimConfig& cfg, std::uint64_t seed,
                                               const Execution& exec = {});

struct DecayRatio {
  double r_large = 0.0;
  double r_small = 0.0;
  /// value(r_large) / value(r_small)
  double ratio = 0.0;
  /// (r_large / r_small)^2
  double expected = 0.0;
  /// The 95% intervals of value(r_large) and expected * value(r_small) overlap.
  bool pass = true;
};

/// Compares consecutive radii of a decay profile with quadratic scaling.
std::vector<DecayRatio> decay_ratios(std::span<const DecaySample> samples);

struct AlphaSample {
  double alpha = 0.0;
  Estimate estimate;
  std::size_t argmax = 0;
};

struct AlphaDecay {
  std::vector<AlphaSample> rows;
  /// max-over-probes estimates are non-increasing in alpha (exact, shared paths).
  bool monotone = true;
  /// Smallest alpha whose max-over-probes estimate is <= 1/2.
  std::optional<double> first_alpha_below_half;
};

/// sup over probes of E_x[e^{-alpha tau}], tau the first jump (killing) time.
/// All alphas reuse the same paths. Survivors past cfg.horizon() contribute
/// e^{-alpha T}, an upper bound.
AlphaDecay alpha_decay(const ProblemSpec& spec, std::span<const Point> probe_points, std::span<const double> alphas,
                       std::int64_t n_paths, const SimConfig& cfg, std::uint64_t seed, const Execution& exec = {});

struct JumpCountSummary {
  Estimate jumps;
  std::int64_t budget_failures = 0;
};

/// Runs the full process to time `horizon` and counts redistributions.
JumpCountSummary jump_counts(const ProblemSpec& spec, const Point& x0, double horizon, std::int64_t n_paths,
                             const SimConfig& cfg, std::uint64_t seed, const Execution& exec = {});

}  // namespace nldp
