#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "nldp/domain.hpp"
#include "nldp/fields.hpp"
#include "nldp/rng.hpp"

namespace nldp {

struct Atom {
  double weight = 0.0;
  Point point;
};

/// Absolutely continuous part of the redistribution law: uniform on a box.
/// The sampler draws uniformly; the quadrature view is a tensor midpoint rule.
struct UniformBoxDensity {
  double weight = 0.0;
  Box support;
  int nodes_per_axis = 8;
};

/// Probability law nu(x, .) of the post-jump position. Finitely many atoms plus
/// at most one compactly supported density; position independent.
class RedistributionLaw {
 public:
  RedistributionLaw() = default;
  RedistributionLaw(std::vector<Atom> atoms, std::optional<UniformBoxDensity> density = std::nullopt);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<UniformBoxDensity>& density() const { return density_; }
  bool atom_only() const { return !density_; }
  int dim() const { return dim_; }

  double total_mass() const;

  /// Atoms by cumulative-weight inversion in listed order, then the density.
  Point sample(RngStream& rng) const;

  /// Atoms followed by the density's quadrature nodes, all as weighted points.
  std::vector<Atom> quadrature() const;

 private:
  int dim_ = 0;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
  std::optional<UniformBoxDensity> density_;
};

/// J(x, dy) = kappa(x) nu(x, dy). `nu` may be absent for killing-only use.
struct JumpKernel {
  ScalarField kappa;
  std::optional<RedistributionLaw> nu;
};

struct BoundaryData {
  ScalarField phi;
  double sup_bound = 0.0;
};

/// One instance of the exterior-value Dirichlet problem
///   1/2 div(A grad u) + b . grad u + int (u(y) - u(x)) J(x, dy) = 0 in D,
///   u = phi on D^c.
struct ProblemSpec {
  int dim = 1;
  EllipticField elliptic;
  DriftField drift;
  std::optional<JumpKernel> jumps;
  std::shared_ptr<const Domain> domain;
  BoundaryData boundary;

  /// Throws InvalidArgument when component dimensions disagree.
  void check_dims() const;

  bool has_killing() const { return jumps && !jumps->kappa.is_zero(); }
  /// Copy with a different domain (exit-time and small-ball experiments).
  ProblemSpec with_domain(std::shared_ptr<const Domain> d) const;
};

}  // namespace nldp
