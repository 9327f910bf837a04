#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "nldp/estimators.hpp"
#include "nldp/problem.hpp"

namespace nldp {

/// Uniform lattice on a box, nodes classified against a domain. The lattice
/// spans `core` with `cells` cells per axis plus `pad` extra cells on each side;
/// lattice coordinates that coincide with the faces of `core` are exact.
struct Grid {
  int dim = 1;
  Box core;
  int pad = 0;
  std::array<int, kMaxDim> cells{};
  Point h;
  std::vector<char> interior;        // per lattice node
  std::vector<Point> extra_nodes;    // off-lattice exterior jump targets

  int nodes_per_axis(int k) const { return cells[k] + 2 * pad + 1; }
  double coordinate(int k, int j) const;
  Box lattice_box() const;
  std::size_t node_count() const;
  std::array<int, kMaxDim> multi_index(std::size_t node) const;
  std::size_t linear_index(const std::array<int, kMaxDim>& idx) const;
  Point node(std::size_t i) const;
};

/// Lattice with `cells` cells per axis on `core` (plus `pad` cells outside), classified by `domain`.
Grid make_grid(const Box& core, const std::array<int, kMaxDim>& cells, int pad, const Domain& domain);
/// Lattice of width close to h on the domain's bounding box padded by one cell.
Grid make_grid(const ProblemSpec& spec, double h);

struct RowDiagnostic {
  double diagonal = 0.0;
  double max_offdiagonal = 0.0;
  /// diagonal - sum |offdiagonal| over the unknowns of the row.
  double dominance = 0.0;
  bool m_matrix_ok = true;
};

struct GridSystem {
  Grid grid;
  Eigen::SparseMatrix<double, Eigen::RowMajor> op;  // -L (plus alpha) over the interior nodes
  Eigen::VectorXd rhs;
  Eigen::VectorXd solution;
  std::vector<std::ptrdiff_t> unknown_of_node;  // -1 for exterior nodes
  std::vector<std::size_t> node_of_unknown;
  /// Dirichlet data at every lattice node (meaningful on exterior nodes).
  std::vector<double> exterior_values;
  double exterior_min = 0.0;
  double exterior_max = 0.0;
  std::vector<RowDiagnostic> rows;
  bool m_matrix = true;
  int snapped_atoms = 0;
  double max_snap_distance = 0.0;
  int upwinded_rows = 0;
  double residual = 0.0;
  bool solved = false;
};

/// -L u = 0 on the interior nodes with u = phi on every exterior node and jump target:
/// harmonic-mean fluxes for 1/2 div(A grad), central drift where the mesh Peclet
/// number 2|b|h/a is <= 2 and upwinded elsewhere, and kappa (sum_i w_i u(z_i) - u)
/// for the nonlocal part.
GridSystem assemble(const ProblemSpec& spec, const Grid& grid);

/// Direct solve: Thomas elimination for tridiagonal systems, sparse LU otherwise.
/// Stores the solution and the residual in the system.
const Eigen::VectorXd& solve(GridSystem& system);

/// Values on every lattice node (solution inside, data outside) with multilinear interpolation.
struct GridSolution {
  Grid grid;
  std::vector<double> values;

  double interpolate(const Point& x) const;
};

GridSolution to_grid_solution(const GridSystem& system);

/// Assemble and solve the Dirichlet problem at mesh width h.
GridSolution oracle_solve(const ProblemSpec& spec, double h);

/// Solutions at h and h/2 on nested lattices. value() reads the fine one,
/// error() is |coarse - fine| at the point.
struct RefinedOracle {
  GridSolution coarse;
  GridSolution fine;

  double value(const Point& x) const { return fine.interpolate(x); }
  double error(const Point& x) const { return std::abs(coarse.interpolate(x) - fine.interpolate(x)); }
};

RefinedOracle oracle_solve_refined(const ProblemSpec& spec, double h);

/// (alpha - L) g = f on the open box with g = 0 on its boundary and at jump targets outside it.
GridSystem assemble_resolvent(const ProblemSpec& spec, const ScalarField& f, double alpha, const Box& box, double h);
GridSolution resolvent_oracle(const ProblemSpec& spec, const ScalarField& f, double alpha, const Box& box, double h);

struct ComparisonRow {
  Point point;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double oracle_value = 0.0;
  double oracle_error = 0.0;
  double gap = 0.0;
  /// max(3 stderr, oracle_error)
  double tolerance = 0.0;
  double ratio = 0.0;
  bool pass = true;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  bool all_pass() const;
};

ComparisonReport compare(std::span<const PointEstimate> mc, const GridSolution& oracle);
ComparisonReport compare(std::span<const PointEstimate> mc, const RefinedOracle& oracle);

}  // namespace nldp
