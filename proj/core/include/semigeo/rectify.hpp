#pragma once

#include <span>
#include <vector>

#include "semigeo/connection.hpp"
#include "semigeo/geodesic.hpp"

namespace semigeo {

// A vector field xi^h(x) over a box domain.
struct VectorFieldGrid {
  int n = 0;
  Box domain;
  std::vector<ScalarField> xi;  // n components

  Vec value(std::span<const double> x) const;
};

// Initial data and iteration controls for the successive-iteration chart
// construction. phi0/phi1 are fields of the surface labels (evaluated at the
// embedded point (0, x2..xn)). Defaults follow the canonical example:
// phi0 = (0, x2, ..., xn), phi1 = (1, 0, ..., 0).
struct PicardConfig {
  std::vector<ScalarField> phi0;
  std::vector<ScalarField> phi1;
  int max_iterations = 40;
  double convergence_tol = 1e-10;
  GridAxis tau_axis;
  std::vector<GridAxis> label_axes;
  // The integral operator runs on an internally refined tau grid (this many
  // quadrature intervals per output spacing) and is sampled back onto the
  // output grid; plain same-grid trapezoid quadrature limits the achievable
  // accuracy to ~1e-5 on curved fixtures, which is not good enough for the
  // cross-route checks.
  int oversampling = 10;

  static PicardConfig with_default_data(int n, const GridAxis& tau,
                                        const std::vector<GridAxis>& labels);
};

struct PicardResult {
  TransformGrid grid;
  std::vector<double> history;  // sup-norm successive differences per iteration
  int iterations = 0;
};

// Straightens a vector field: integrates dx/dt = xi(x) from x(0) =
// init_phi(labels) per label node and assembles the transform grid. The
// pushforward of xi through the resulting chart is the first basis vector.
// hess(:,0,0) comes from the flow identity d2x/dt2 = (dxi/dx) xi with the
// field Jacobian by central differences.
TransformGrid rectify_flow(const VectorFieldGrid& field,
                           std::span<const ScalarField> init_phi, const GridAxis& tau_axis,
                           const std::vector<GridAxis>& label_axes,
                           const ShootOptions& options = {});

// Successive iterations for the chart ODE d2f/dtau2 = -Gamma(f) df df:
//   f_{s+1}(tau, lb)      = phi0(lb) + int_0^tau lambda_s dt
//   lambda_{s+1}(tau, lb) = phi1(lb) - int_0^tau Gamma_ab(f_s) lambda_s^a lambda_s^b dt
// starting from f_0 = lambda_0 = 0, trapezoid quadrature, stopping when
// sup|f_{s+1}-f_s| + sup|lambda_{s+1}-lambda_s| < convergence_tol. Throws
// PicardError (with the recorded history) when max_iterations is reached.
PicardResult picard_solve(const ConnectionField& conn, const PicardConfig& config);

// Newton inversion of the chart map: finds new coordinates x' with
// f(x') = old_point, using multilinear interpolation of f and of the stored
// analytic jac between grid nodes. Converges to residual < 1e-10 within 50
// iterations or throws InversionError.
Vec invert_transform(const TransformGrid& grid, std::span<const double> old_point);

// First-integral residuals of the labels against a vector field, sampled at
// images of interior regular nodes: r0 = max_{i>1} |xi^a d_a F^i| and
// r1 = |xi^a d_a F^1 - 1| where F = new coordinates as functions of the old
// ones (via invert_transform) and d_a are central differences in the old
// coordinates with step equal to the tau grid spacing.
struct FirstIntegralResiduals {
  std::vector<Vec> points;
  std::vector<double> r0, r1;
  double max_r0 = 0.0, max_r1 = 0.0;
  int attempted = 0;
  int failed = 0;
};
FirstIntegralResiduals first_integral_residuals(const TransformGrid& grid,
                                                const VectorFieldGrid& field);

}  // namespace semigeo
