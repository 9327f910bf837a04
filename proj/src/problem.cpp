#include "nldp/problem.hpp"

#include <cmath>

#include "nldp/error.hpp"

namespace nldp {

RedistributionLaw::RedistributionLaw(std::vector<Atom> atoms, std::optional<UniformBoxDensity> density)
    : atoms_(std::move(atoms)), density_(std::move(density)) {
  if (atoms_.empty() && !density_) {
    throw Error(ErrorKind::invalid_argument, "redistribution law needs at least one atom or a density");
  }
  dim_ = atoms_.empty() ? density_->support.dim() : static_cast<int>(atoms_.front().point.size());
  double c = 0.0;
  for (const auto& a : atoms_) {
    if (a.point.size() != dim_) throw Error(ErrorKind::invalid_argument, "atom dimension mismatch");
    if (!(a.weight >= 0.0)) throw Error(ErrorKind::invalid_argument, "atom weights must be nonnegative");
    c += a.weight;
    cumulative_.push_back(c);
  }
  if (density_) {
    if (density_->support.dim() != dim_) throw Error(ErrorKind::invalid_argument, "density dimension mismatch");
    if (!(density_->weight >= 0.0)) throw Error(ErrorKind::invalid_argument, "density weight must be nonnegative");
    if (density_->nodes_per_axis < 1) throw Error(ErrorKind::invalid_argument, "density needs >= 1 node per axis");
  }
}

double RedistributionLaw::total_mass() const {
  double m = cumulative_.empty() ? 0.0 : cumulative_.back();
  if (density_) m += density_->weight;
  return m;
}

Point RedistributionLaw::sample(RngStream& rng) const {
  double u = rng.uniform() * total_mass();
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (u < cumulative_[i]) return atoms_[i].point;
  }
  if (!density_) return atoms_.back().point;
  const Box& s = density_->support;
  Point y(dim_);
  for (int i = 0; i < dim_; ++i) y[i] = s.lo[i] + (s.hi[i] - s.lo[i]) * rng.uniform();
  return y;
}

std::vector<Atom> RedistributionLaw::quadrature() const {
  std::vector<Atom> out = atoms_;
  if (!density_) return out;
  const Box& s = density_->support;
  const int n = density_->nodes_per_axis;
  int total = 1;
  for (int i = 0; i < dim_; ++i) total *= n;
  const double w = density_->weight / total;
  for (int k = 0; k < total; ++k) {
    Point y(dim_);
    int rem = k;
    for (int i = 0; i < dim_; ++i) {
      int idx = rem % n;
      rem /= n;
      y[i] = s.lo[i] + (s.hi[i] - s.lo[i]) * (idx + 0.5) / n;
    }
    out.push_back(Atom{w, y});
  }
  return out;
}

void ProblemSpec::check_dims() const {
  auto fail = [](const char* what) {
    throw Error(ErrorKind::invalid_argument, std::string("dimension mismatch: ") + what);
  };
  if (dim < 1 || dim > kMaxDim) fail("dim out of range");
  if (elliptic.dim() != dim) fail("elliptic");
  if (drift.dim() != dim) fail("drift");
  if (!domain) throw Error(ErrorKind::invalid_argument, "problem has no domain");
  if (domain->dim() != dim) fail("domain");
  if (jumps && jumps->nu && jumps->nu->dim() != dim) fail("redistribution law");
}

ProblemSpec ProblemSpec::with_domain(std::shared_ptr<const Domain> d) const {
  ProblemSpec s = *this;
  s.domain = std::move(d);
  return s;
}

}  // namespace nldp
