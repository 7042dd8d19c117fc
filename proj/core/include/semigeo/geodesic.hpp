#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "semigeo/connection.hpp"
#include "semigeo/ode.hpp"

namespace semigeo {

// Uniform inclusive sample axis of a chart grid.
struct GridAxis {
  double lo = -0.5;
  double hi = 0.5;
  int count = 41;

  double spacing() const { return (hi - lo) / (count - 1); }
  std::vector<double> samples() const;
  void validate(const char* what) const;
};

// Initial hypersurface sigma: x1 = phi(x2..xn) and initial direction field
// Lambda. phi and the Lambda components are fields of the surface labels,
// evaluated at the embedded point (0, x2..xn); they must not depend on x1.
struct HypersurfaceSeed {
  ScalarField phi;
  std::vector<ScalarField> lambda;  // n components
  Box tilde_domain;                 // (n-1)-dimensional label box
};

// The coordinate map f: new -> old sampled on a regular (tau, labels) grid,
// together with first/second derivative estimates and regularity flags.
//
// Node storage is flat: node = tau_idx * columns() + column, where a column
// is one label multi-index (row-major over the label axes). Per node:
//   f      n values of the old-coordinate position
//   lambda n values of df/dtau straight from the integrator
//   jac    n*n values, jac(c,i) = dx^c/dx'^i (column 0 equals lambda)
//   hess   n*n*n values, hess(c,i,j) = d2x^c/dx'^i dx'^j; (0,0) is exact
//          from the construction ODE, the rest are central differences
struct TransformGrid {
  int n = 0;
  std::vector<double> tau;                  // includes 0 (index zero_index)
  std::vector<std::vector<double>> labels;  // one axis per label coordinate
  int zero_index = 0;

  std::vector<double> f, lambda, jac, hess;
  std::vector<double> det_jac, cond_jac;
  std::vector<std::uint8_t> covered_flags, regular_flags;

  TransformGrid() = default;
  TransformGrid(int dim, const GridAxis& tau_axis, const std::vector<GridAxis>& label_axes);

  int tau_count() const { return static_cast<int>(tau.size()); }
  int label_axis_count() const { return static_cast<int>(labels.size()); }
  int columns() const;
  int nodes() const { return tau_count() * columns(); }
  int node(int tau_idx, int column) const { return tau_idx * columns() + column; }
  int label_stride(int axis) const;
  std::vector<int> column_coords(int column) const;
  Vec label_values(int column) const;
  // the new-coordinate point (tau, labels...) of a node
  Vec new_coords(int tau_idx, int column) const;
  bool column_interior(int column, int margin = 1) const;

  std::span<const double> f_at(int node) const { return {f.data() + node * n, size_t(n)}; }
  std::span<double> f_at(int node) { return {f.data() + node * n, size_t(n)}; }
  std::span<const double> lambda_at(int node) const {
    return {lambda.data() + node * n, size_t(n)};
  }
  std::span<double> lambda_at(int node) { return {lambda.data() + node * n, size_t(n)}; }
  Mat jac_at(int node) const;
  void set_jac(int node, const Mat& m);
  Tensor3 hess_at(int node) const;
  void set_hess(int node, const Tensor3& t);
  bool covered(int node) const { return covered_flags[node] != 0; }
  bool regular(int node) const { return regular_flags[node] != 0; }
};

struct ShootOptions {
  int oversampling = 10;                 // integrator steps per grid spacing
  double max_uncovered_fraction = 0.5;   // abort when more nodes than this fail
};

// Integrates the geodesic ODE (dx = lambda, dlambda = -Gamma lambda lambda)
// from tau = tau_from (where init is given) forward to tau_to, wrapping
// ode::integrate over the 2n-dimensional system. The trajectory is truncated
// with Trajectory::truncated set when the state exits the connection domain.
Trajectory integrate_geodesic(const ConnectionField& conn, const PhaseState& init,
                              double tau_from, double tau_to, double step);

// Shoots one geodesic per label node with x(0) = (phi(label), label),
// lambda(0) = Lambda(label); negative tau values integrate the reversed
// direction so the tube extends on both sides of the hypersurface. Fills f
// and lambda from integrator samples, hess(:,0,0) exactly from the ODE, the
// remaining derivatives by central differences across the grid, and the
// per-node regularity flags. Shooting runs in parallel across label columns.
TransformGrid shoot_congruence(const ConnectionField& conn, const HypersurfaceSeed& seed,
                               const GridAxis& tau_axis,
                               const std::vector<GridAxis>& label_axes,
                               const ShootOptions& options = {});

// The identity map as a grid (f = (tau, labels), jac = I, hess = 0); every
// node is regular, including the boundary ones (no stencils involved).
TransformGrid identity_grid(int n, const GridAxis& tau_axis,
                            const std::vector<GridAxis>& label_axes);

// Fills jac label columns, the finite-difference hess entries, det/cond and
// regularity flags of a grid whose f, lambda, covered flags and exact
// hess(:,0,0) have been set by a construction. Label-boundary nodes lack a
// full stencil and are marked irregular.
void assemble_grid_derivatives(TransformGrid& grid);

// --- multilinear interpolation over the (tau, labels) lattice -------------

struct GridCell {
  std::vector<int> corner_nodes;   // 2^n corners
  std::vector<double> weights;     // matching multilinear weights
  bool in_bounds = false;
};

GridCell locate_cell(const TransformGrid& grid, std::span<const double> new_point);

// Interpolates per-node data (stride doubles per node) at a located cell.
void interpolate_cell(std::span<const double> data, int stride, const GridCell& cell,
                      std::span<double> out);

// True when every corner of the cell is a regular node.
bool cell_regular(const TransformGrid& grid, const GridCell& cell);

}  // namespace semigeo
