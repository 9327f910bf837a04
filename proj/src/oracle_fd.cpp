#include "nldp/oracle_fd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include <Eigen/SparseLU>

#include "nldp/error.hpp"

namespace nldp {

namespace {

using Triplet = Eigen::Triplet<double>;
using ExteriorFn = std::function<double(const Point&)>;

constexpr double kCentralPecletLimit = 2.0;

int cells_for(double extent, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "mesh width must be > 0");
  return std::max(1, static_cast<int>(std::lround(extent / h)));
}

struct AssemblyInput {
  const ProblemSpec& spec;
  const Grid& grid;
  const Domain& domain;
  double alpha = 0.0;
  const ScalarField* source = nullptr;
  ExteriorFn exterior;
};

// Per-row accumulator: unknown couplings plus the data moved to the right-hand side.
struct Row {
  double diag = 0.0;
  std::map<std::size_t, double> off;  // unknown -> coefficient in -L (negative for M-matrices)
  double rhs = 0.0;
};

GridSystem assemble_impl(const AssemblyInput& in) {
  const ProblemSpec& spec = in.spec;
  const Grid& grid = in.grid;
  const int d = grid.dim;
  if (d > 2) throw Error(ErrorKind::invalid_argument, "finite-difference oracle supports d <= 2");
  if (d == 2 && !spec.elliptic.is_constant() && !spec.elliptic.is_diagonal()) {
    throw Error(ErrorKind::unsupported_coefficient, "variable full-matrix A is outside the 2D oracle");
  }

  GridSystem sys;
  sys.grid = grid;
  const std::size_t n_nodes = grid.node_count();
  sys.unknown_of_node.assign(n_nodes, -1);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    if (grid.interior[i]) {
      sys.unknown_of_node[i] = static_cast<std::ptrdiff_t>(sys.node_of_unknown.size());
      sys.node_of_unknown.push_back(i);
    }
  }
  sys.exterior_values.assign(n_nodes, 0.0);
  sys.exterior_min = std::numeric_limits<double>::infinity();
  sys.exterior_max = -std::numeric_limits<double>::infinity();
  auto note_data = [&](double v) {
    sys.exterior_min = std::min(sys.exterior_min, v);
    sys.exterior_max = std::max(sys.exterior_max, v);
  };
  for (std::size_t i = 0; i < n_nodes; ++i) {
    if (!grid.interior[i]) sys.exterior_values[i] = in.exterior(grid.node(i));
  }

  const bool full_constant_a = spec.elliptic.is_constant() && !spec.elliptic.is_diagonal();
  std::vector<Atom> targets;
  ScalarField kappa;
  if (spec.has_killing()) {
    if (!spec.jumps->nu) throw Error(ErrorKind::invalid_argument, "jump kernel has no redistribution law");
    targets = spec.jumps->nu->quadrature();
    kappa = spec.jumps->kappa;
  }

  // Resolve every jump target once: an unknown index or exterior data.
  struct Target {
    double weight;
    std::ptrdiff_t unknown;
    double value;
  };
  std::vector<Target> resolved;
  Grid& g = sys.grid;
  for (const auto& t : targets) {
    if (in.domain.contains(t.point) && std::abs(in.domain.signed_distance(t.point)) > kBoundaryJumpTolerance) {
      std::array<int, kMaxDim> idx{};
      Point snapped(d);
      for (int k = 0; k < d; ++k) {
        const double rel = (t.point[k] - grid.core.lo[k]) / grid.h[k];
        idx[k] = static_cast<int>(std::lround(rel)) + grid.pad;
        idx[k] = std::clamp(idx[k], 0, grid.nodes_per_axis(k) - 1);
        snapped[k] = grid.coordinate(k, idx[k]);
      }
      const std::size_t node = grid.linear_index(idx);
      if (!grid.interior[node]) {
        throw Error(ErrorKind::atom_off_grid, "interior jump target snaps to a non-interior node");
      }
      const double dist = (snapped - t.point).norm();
      if (dist > 1e-12 * std::max(1.0, t.point.norm())) {
        ++sys.snapped_atoms;
        sys.max_snap_distance = std::max(sys.max_snap_distance, dist);
      }
      resolved.push_back({t.weight, sys.unknown_of_node[node], 0.0});
    } else {
      const double v = in.exterior(t.point);
      g.extra_nodes.push_back(t.point);
      resolved.push_back({t.weight, -1, v});
    }
  }

  const std::size_t n_unknowns = sys.node_of_unknown.size();
  std::vector<Triplet> trips;
  sys.rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_unknowns));
  sys.rows.resize(n_unknowns);

  auto diag_of = [&](const Point& x, int k) { return spec.elliptic.eval_A(x)(k, k); };
  const Matrix a_const = spec.elliptic.is_constant() ? spec.elliptic.constant_A() : Matrix();

  for (std::size_t u = 0; u < n_unknowns; ++u) {
    const std::size_t node = sys.node_of_unknown[u];
    const auto idx = grid.multi_index(node);
    const Point x = grid.node(node);
    Row row;

    auto couple = [&](const std::array<int, kMaxDim>& nb, double coef) {
      // coef multiplies u(nb) in L u; -L puts -coef on the neighbor.
      const std::size_t nn = grid.linear_index(nb);
      const std::ptrdiff_t un = sys.unknown_of_node[nn];
      if (un >= 0) {
        row.off[static_cast<std::size_t>(un)] -= coef;
      } else {
        row.rhs += coef * sys.exterior_values[nn];
        note_data(sys.exterior_values[nn]);
      }
    };

    const Point b = spec.drift(x);
    bool upwinded = false;
    for (int k = 0; k < d; ++k) {
      auto plus = idx, minus = idx;
      plus[k] += 1;
      minus[k] -= 1;
      const double hk = grid.h[k];
      const double a0 = diag_of(x, k);
      const double ap = diag_of(grid.node(grid.linear_index(plus)), k);
      const double am = diag_of(grid.node(grid.linear_index(minus)), k);
      const double a_half_p = 2.0 * a0 * ap / (a0 + ap);
      const double a_half_m = 2.0 * a0 * am / (a0 + am);
      const double cp = 0.5 * a_half_p / (hk * hk);
      const double cm = 0.5 * a_half_m / (hk * hk);
      couple(plus, cp);
      couple(minus, cm);
      row.diag += cp + cm;

      const double bk = b[k];
      if (bk != 0.0) {
        const double peclet = std::abs(bk) * hk / (0.5 * a0);
        if (peclet <= kCentralPecletLimit) {
          couple(plus, bk / (2.0 * hk));
          couple(minus, -bk / (2.0 * hk));
        } else {
          upwinded = true;
          if (bk > 0.0) {
            couple(plus, bk / hk);
          } else {
            couple(minus, -bk / hk);
          }
          row.diag += std::abs(bk) / hk;
        }
      }
    }
    if (upwinded) ++sys.upwinded_rows;

    if (full_constant_a && d == 2) {
      // a_12 u_xy with the four-point central stencil.
      const double c = 0.5 * (a_const(0, 1) + a_const(1, 0)) / (4.0 * grid.h[0] * grid.h[1]);
      for (int sx : {-1, 1}) {
        for (int sy : {-1, 1}) {
          auto nb = idx;
          nb[0] += sx;
          nb[1] += sy;
          couple(nb, c * sx * sy);
        }
      }
    }

    if (!resolved.empty()) {
      const double k = kappa(x);
      if (!std::isfinite(k) || k < 0.0) throw Error(ErrorKind::evaluation_failure, "kappa invalid at a grid node");
      row.diag += k;
      for (const auto& t : resolved) {
        if (t.unknown >= 0) {
          row.off[static_cast<std::size_t>(t.unknown)] -= k * t.weight;
        } else {
          row.rhs += k * t.weight * t.value;
          if (k * t.weight > 0.0) note_data(t.value);
        }
      }
    }

    row.diag += in.alpha;
    if (in.source) row.rhs += (*in.source)(x);

    // A target equal to the node itself folds into the diagonal.
    if (auto it = row.off.find(u); it != row.off.end()) {
      row.diag += it->second;
      row.off.erase(it);
    }

    RowDiagnostic diag;
    diag.diagonal = row.diag;
    diag.max_offdiagonal = -std::numeric_limits<double>::infinity();
    double abs_sum = 0.0;
    trips.emplace_back(u, u, row.diag);
    for (const auto& [col, v] : row.off) {
      if (v == 0.0) continue;
      trips.emplace_back(u, col, v);
      diag.max_offdiagonal = std::max(diag.max_offdiagonal, v);
      abs_sum += std::abs(v);
    }
    if (diag.max_offdiagonal == -std::numeric_limits<double>::infinity()) diag.max_offdiagonal = 0.0;
    diag.dominance = row.diag - abs_sum;
    diag.m_matrix_ok = row.diag > 0.0 && diag.max_offdiagonal <= 0.0 && diag.dominance >= -1e-12 * row.diag;
    sys.m_matrix = sys.m_matrix && diag.m_matrix_ok;
    sys.rows[u] = diag;
    sys.rhs[static_cast<Eigen::Index>(u)] = row.rhs;
  }

  sys.op.resize(static_cast<Eigen::Index>(n_unknowns), static_cast<Eigen::Index>(n_unknowns));
  sys.op.setFromTriplets(trips.begin(), trips.end());
  sys.op.makeCompressed();
  if (sys.exterior_min > sys.exterior_max) sys.exterior_min = sys.exterior_max = 0.0;
  return sys;
}

bool is_tridiagonal(const Eigen::SparseMatrix<double, Eigen::RowMajor>& m) {
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it) {
      if (std::abs(it.col() - r) > 1) return false;
    }
  }
  return true;
}

Eigen::VectorXd thomas(const Eigen::SparseMatrix<double, Eigen::RowMajor>& m, const Eigen::VectorXd& rhs) {
  const Eigen::Index n = m.rows();
  Eigen::VectorXd lower = Eigen::VectorXd::Zero(n), mid = Eigen::VectorXd::Zero(n), upper = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it) {
      if (it.col() == r - 1) lower[r] = it.value();
      if (it.col() == r) mid[r] = it.value();
      if (it.col() == r + 1) upper[r] = it.value();
    }
  }
  Eigen::VectorXd c(n), dvec(n), x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = mid[i] - (i > 0 ? lower[i] * c[i - 1] : 0.0);
    if (denom == 0.0 || !std::isfinite(denom)) {
      throw Error(ErrorKind::singular_system, "zero pivot in tridiagonal elimination at row " + std::to_string(i));
    }
    c[i] = upper[i] / denom;
    dvec[i] = (rhs[i] - (i > 0 ? lower[i] * dvec[i - 1] : 0.0)) / denom;
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) x[i] = dvec[i] - (i + 1 < n ? c[i] * x[i + 1] : 0.0);
  return x;
}

ComparisonReport compare_impl(std::span<const PointEstimate> mc, const std::function<double(const Point&)>& value,
                              const std::function<double(const Point&)>& error) {
  ComparisonReport rep;
  for (const auto& pe : mc) {
    ComparisonRow row;
    row.point = pe.point;
    row.mc_mean = pe.estimate.mean;
    row.mc_stderr = pe.estimate.std_error;
    row.oracle_value = value(pe.point);
    row.oracle_error = error(pe.point);
    row.gap = std::abs(row.mc_mean - row.oracle_value);
    row.tolerance = std::max(3.0 * row.mc_stderr, row.oracle_error);
    row.ratio = row.tolerance > 0.0 ? row.gap / row.tolerance : (row.gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    row.pass = row.gap <= row.tolerance;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace

double Grid::coordinate(int k, int j) const {
  const int m = j - pad;
  if (m == 0) return core.lo[k];
  if (m == cells[k]) return core.hi[k];
  return core.lo[k] + (core.hi[k] - core.lo[k]) * static_cast<double>(m) / cells[k];
}

Box Grid::lattice_box() const {
  Box b{Point(dim), Point(dim)};
  for (int k = 0; k < dim; ++k) {
    b.lo[k] = coordinate(k, 0);
    b.hi[k] = coordinate(k, nodes_per_axis(k) - 1);
  }
  return b;
}

std::size_t Grid::node_count() const {
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(nodes_per_axis(k));
  return n;
}

std::array<int, kMaxDim> Grid::multi_index(std::size_t node) const {
  std::array<int, kMaxDim> idx{};
  for (int k = 0; k < dim; ++k) {
    const auto n = static_cast<std::size_t>(nodes_per_axis(k));
    idx[k] = static_cast<int>(node % n);
    node /= n;
  }
  return idx;
}

std::size_t Grid::linear_index(const std::array<int, kMaxDim>& idx) const {
  std::size_t lin = 0;
  for (int k = dim - 1; k >= 0; --k) lin = lin * static_cast<std::size_t>(nodes_per_axis(k)) + idx[k];
  return lin;
}

Point Grid::node(std::size_t i) const {
  const auto idx = multi_index(i);
  Point x(dim);
  for (int k = 0; k < dim; ++k) x[k] = coordinate(k, idx[k]);
  return x;
}

Grid make_grid(const Box& core, const std::array<int, kMaxDim>& cells, int pad, const Domain& domain) {
  Grid g;
  g.dim = core.dim();
  if (g.dim < 1 || g.dim > 2) throw Error(ErrorKind::invalid_argument, "finite-difference oracle supports d <= 2");
  if (domain.dim() != g.dim) throw Error(ErrorKind::invalid_argument, "grid and domain dimensions differ");
  g.core = core;
  g.pad = pad;
  g.cells = cells;
  g.h = Point(g.dim);
  for (int k = 0; k < g.dim; ++k) {
    if (cells[k] < 1) throw Error(ErrorKind::invalid_argument, "need at least one cell per axis");
    g.h[k] = (core.hi[k] - core.lo[k]) / cells[k];
  }
  g.interior.resize(g.node_count());
  for (std::size_t i = 0; i < g.interior.size(); ++i) g.interior[i] = domain.contains(g.node(i)) ? 1 : 0;
  // Interior nodes on the outermost lattice layer would lack neighbors.
  for (std::size_t i = 0; i < g.interior.size(); ++i) {
    if (!g.interior[i]) continue;
    const auto idx = g.multi_index(i);
    for (int k = 0; k < g.dim; ++k) {
      if (idx[k] == 0 || idx[k] == g.nodes_per_axis(k) - 1) {
        throw Error(ErrorKind::invalid_argument, "grid does not cover the domain with a neighbor layer");
      }
    }
  }
  return g;
}

Grid make_grid(const ProblemSpec& spec, double h) {
  spec.check_dims();
  const Box core = spec.domain->bounding_box();
  std::array<int, kMaxDim> cells{};
  for (int k = 0; k < core.dim(); ++k) cells[k] = cells_for(core.hi[k] - core.lo[k], h);
  return make_grid(core, cells, 1, *spec.domain);
}

GridSystem assemble(const ProblemSpec& spec, const Grid& grid) {
  spec.check_dims();
  AssemblyInput in{spec, grid, *spec.domain};
  in.exterior = [&spec](const Point& x) { return spec.boundary.phi(x); };
  return assemble_impl(in);
}

const Eigen::VectorXd& solve(GridSystem& system) {
  const Eigen::Index n = system.op.rows();
  if (n == 0) {
    system.solution = Eigen::VectorXd();
  } else if (is_tridiagonal(system.op)) {
    system.solution = thomas(system.op, system.rhs);
  } else {
    Eigen::SparseMatrix<double> col = system.op;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(col);
    lu.factorize(col);
    if (lu.info() != Eigen::Success) {
      std::string bad;
      for (std::size_t r = 0; r < system.rows.size() && bad.size() < 200; ++r) {
        if (!system.rows[r].m_matrix_ok) bad += std::to_string(r) + " ";
      }
      throw Error(ErrorKind::singular_system, "sparse LU failed; rows without diagonal dominance: " +
                                                  (bad.empty() ? std::string("none") : bad));
    }
    system.solution = lu.solve(system.rhs);
  }
  if (!system.solution.allFinite()) throw Error(ErrorKind::singular_system, "solution is non-finite");
  system.residual = n == 0 ? 0.0 : (system.op * system.solution - system.rhs).lpNorm<Eigen::Infinity>();
  system.solved = true;
  return system.solution;
}

double GridSolution::interpolate(const Point& x) const {
  const int d = grid.dim;
  if (x.size() != d) throw Error(ErrorKind::invalid_argument, "interpolation point has wrong dimension");
  const Box lb = grid.lattice_box();
  std::array<int, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (int k = 0; k < d; ++k) {
    if (x[k] < lb.lo[k] - 1e-12 || x[k] > lb.hi[k] + 1e-12) {
      throw Error(ErrorKind::invalid_argument, "interpolation point outside the grid box");
    }
    const double rel = (x[k] - lb.lo[k]) / grid.h[k];
    int i = static_cast<int>(std::floor(rel));
    i = std::clamp(i, 0, grid.nodes_per_axis(k) - 2);
    base[k] = i;
    frac[k] = std::clamp(rel - i, 0.0, 1.0);
  }
  double v = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    auto idx = base;
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      const bool up = (corner >> k) & 1;
      idx[k] += up ? 1 : 0;
      w *= up ? frac[k] : 1.0 - frac[k];
    }
    if (w != 0.0) v += w * values[grid.linear_index(idx)];
  }
  return v;
}

GridSolution to_grid_solution(const GridSystem& system) {
  if (!system.solved) throw Error(ErrorKind::invalid_argument, "system has not been solved");
  GridSolution s;
  s.grid = system.grid;
  s.values = system.exterior_values;
  for (std::size_t u = 0; u < system.node_of_unknown.size(); ++u) {
    s.values[system.node_of_unknown[u]] = system.solution[static_cast<Eigen::Index>(u)];
  }
  return s;
}

GridSolution oracle_solve(const ProblemSpec& spec, double h) {
  GridSystem sys = assemble(spec, make_grid(spec, h));
  solve(sys);
  return to_grid_solution(sys);
}

RefinedOracle oracle_solve_refined(const ProblemSpec& spec, double h) {
  spec.check_dims();
  const Grid coarse = make_grid(spec, h);
  std::array<int, kMaxDim> fine_cells = coarse.cells;
  for (int k = 0; k < coarse.dim; ++k) fine_cells[k] *= 2;
  const Grid fine = make_grid(coarse.core, fine_cells, 1, *spec.domain);
  GridSystem cs = assemble(spec, coarse);
  GridSystem fs = assemble(spec, fine);
  solve(cs);
  solve(fs);
  return RefinedOracle{to_grid_solution(cs), to_grid_solution(fs)};
}

GridSystem assemble_resolvent(const ProblemSpec& spec, const ScalarField& f, double alpha, const Box& box, double h) {
  spec.check_dims();
  if (!(alpha > 0.0)) throw Error(ErrorKind::invalid_argument, "alpha must be > 0");
  const BoxDomain truncated(box);
  std::array<int, kMaxDim> cells{};
  for (int k = 0; k < box.dim(); ++k) cells[k] = cells_for(box.hi[k] - box.lo[k], h);
  const Grid grid = make_grid(box, cells, 0, truncated);
  AssemblyInput in{spec, grid, truncated, alpha, &f};
  in.exterior = [](const Point&) { return 0.0; };
  return assemble_impl(in);
}

GridSolution resolvent_oracle(const ProblemSpec& spec, const ScalarField& f, double alpha, const Box& box, double h) {
  GridSystem sys = assemble_resolvent(spec, f, alpha, box, h);
  solve(sys);
  return to_grid_solution(sys);
}

bool ComparisonReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; });
}

ComparisonReport compare(std::span<const PointEstimate> mc, const GridSolution& oracle) {
  return compare_impl(
      mc, [&](const Point& x) { return oracle.interpolate(x); }, [](const Point&) { return 0.0; });
}

ComparisonReport compare(std::span<const PointEstimate> mc, const RefinedOracle& oracle) {
  return compare_impl(
      mc, [&](const Point& x) { return oracle.value(x); }, [&](const Point& x) { return oracle.error(x); });
}

}  // namespace nldp
