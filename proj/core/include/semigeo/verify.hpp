#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "semigeo/connection.hpp"
#include "semigeo/geodesic.hpp"

namespace semigeo {

inline constexpr double kEquiaffineTol = 1e-6;

struct ResidualStats {
  double max = 0.0;
  double mean = 0.0;
  int count = 0;
};

// The transformed connection Gamma' sampled on the new-coordinate grid.
// gamma_prime is valid wherever the regular mask is set; the residual stats
// run over regular interior nodes only (margin 1 in every grid axis).
struct TransformedConnection {
  int n = 0;
  std::vector<double> gamma_prime;       // node * n^3, layout (h,i,j)
  std::vector<double> residual_gamma11;  // per node: max_h |Gamma'^h_11|
  std::vector<std::uint8_t> regular;
  ResidualStats stats;

  std::span<const double> gamma_at(int node) const {
    return {gamma_prime.data() + static_cast<std::size_t>(node) * n * n * n,
            static_cast<std::size_t>(n) * n * n};
  }
};

// Applies the transformation law per regular node using the grid's jac and
// hess, and fills the Gamma'^h_11 residual field and its statistics.
TransformedConnection evaluate_transformed(const ConnectionField& conn,
                                           const TransformGrid& grid);

// Integrates geodesics of the transformed connection (multilinear interpolant
// of gamma_prime over the grid) from (0, labels) with initial velocity e_1,
// one per sampled label column, and returns the largest sup-norm deviation
// from the straight line (tau, labels).
double check_straight_geodesics(const TransformGrid& grid, const TransformedConnection& tc,
                                std::span<const int> sample_columns, double tau_lo,
                                double tau_hi, double step);

// Residual of the chart ODE along each grid column, with the second
// tau-derivative from second differences of f (independent of the stored
// hess): max over regular interior nodes of
// || (f[k+1] - 2 f[k] + f[k-1]) / dtau^2 + Gamma(f) lambda lambda ||_inf.
double check_geodesic_correspondence(const ConnectionField& conn, const TransformGrid& grid);

// Equiaffinity via the trace field t_i = Gamma^a_ia: the connection is
// equiaffine iff t is (locally) a gradient, i.e. its curl vanishes. The
// residual is max_{i<j} |d_j t_i - d_i t_j| by central differences over a
// uniform sample grid. Requires a declared-symmetric connection.
struct EquiaffineCheck {
  bool flag = false;
  double residual = 0.0;
};
EquiaffineCheck equiaffine_check(const ConnectionField& conn, int samples_per_axis = 9,
                                 double fd_step_rel = 1e-5);

// Degrees-of-freedom counts for connections in dimension n.
struct DofReport {
  int n = 0;
  long long general_count = 0;               // n^3
  long long torsion_free_count = 0;          // n^2 (n+1) / 2
  long long presemigeodesic_general = 0;     // n (n^2 - 1)
  long long presemigeodesic_torsion_free = 0;  // n (n-1)^2 / 2
  long long equiaffine_reduction = 0;        // n - 1
  long long applicable = 0;  // count for the requested flags, minus the
                             // equiaffine reduction when it applies
};
DofReport dof_report(int n, bool torsion_free, bool equiaffine);

// Torsion is a tensor: compares T' computed from the transformed components
// against the pushforward of T through the grid Jacobians; returns the max
// absolute mismatch over regular nodes.
double torsion_tensoriality_residual(const ConnectionField& conn, const TransformGrid& grid,
                                     const TransformedConnection& tc);

// Aggregated outcome of the pipeline checks; pass flags are pure functions of
// the residuals and the configured tolerances.
struct VerificationReport {
  double gamma11_max = 0.0;
  double gamma11_mean = 0.0;
  double straight_deviation = 0.0;
  double correspondence = 0.0;
  double torsion_tensoriality = 0.0;
  bool equiaffine_applicable = false;
  bool equiaffine_flag = false;
  double equiaffine_residual = 0.0;
  std::optional<double> route_agreement;  // set when both routes ran
  std::optional<double> picard_final_diff;
  int picard_iterations = 0;
  int regular_nodes = 0;
  int total_nodes = 0;

  bool pass_gamma11_max = false;
  bool pass_gamma11_mean = false;
  bool pass_straight = false;
  bool pass_correspondence = false;
  bool pass_torsion = false;
  bool pass_route_agreement = true;  // vacuously true for single-route runs
  bool all_pass = false;
};

}  // namespace semigeo
