#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semigeo/expr.hpp"
#include "semigeo/linalg.hpp"

namespace semigeo {

// Regularity thresholds shared by the transformation law and chart grids.
inline constexpr double kMaxJacobianCondition = 1e8;
inline constexpr double kMinJacobianDet = 1e-8;

// Axis-aligned box domain.
class Box {
 public:
  Box() = default;
  Box(Vec lo, Vec hi);

  int dim() const { return static_cast<int>(lo_.size()); }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  double extent(int axis) const { return hi_[axis] - lo_[axis]; }
  bool contains(std::span<const double> x, double margin = 0.0) const;

 private:
  Vec lo_, hi_;
};

// Evaluable scalar field of n variables. Immutable and reentrant; carries the
// source text when it came from an expression.
class ScalarField {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  ScalarField() = default;
  ScalarField(int dimension, Fn fn, std::string source = {});

  static ScalarField from_expr(const Expr& e);
  static ScalarField from_source(std::string_view source, int dimension);
  static ScalarField constant(int dimension, double value);
  static ScalarField zero(int dimension) { return constant(dimension, 0.0); }

  double operator()(std::span<const double> x) const { return fn_(x); }
  int dimension() const { return dim_; }
  const std::string& source() const { return source_; }
  bool valid() const { return static_cast<bool>(fn_); }

 private:
  int dim_ = 0;
  Fn fn_;
  std::string source_;
};

// A geodesic phase point: position x and velocity lambda.
struct PhaseState {
  Vec x;
  Vec lambda;
};

struct PhaseDerivative {
  Vec dx;
  Vec dlambda;
};

// The n^3 component functions of an affine connection over a box domain.
// Components are stored unsymmetrized; declared_symmetric is metadata plus a
// load-time check on a coarse grid, never silently enforced.
class ConnectionField {
 public:
  ConnectionField(int n, Box domain, std::vector<ScalarField> components,
                  bool declared_symmetric);

  int dim() const { return n_; }
  const Box& domain() const { return domain_; }
  bool declared_symmetric() const { return symmetric_; }

  const ScalarField& component(int h, int i, int j) const {
    return comps_[(h * n_ + i) * n_ + j];
  }
  double gamma(int h, int i, int j, std::span<const double> x) const {
    return component(h, i, j)(x);
  }
  Tensor3 gamma_all(std::span<const double> x) const;

 private:
  int n_ = 0;
  Box domain_;
  bool symmetric_ = false;
  std::vector<ScalarField> comps_;
};

// Symmetric metric g_ij over a box, with the signature sign e of the first
// coordinate kept as metadata. Used to build fixtures.
class MetricField {
 public:
  MetricField(int n, Box domain, std::vector<ScalarField> g, int e = +1);

  int dim() const { return n_; }
  const Box& domain() const { return domain_; }
  int signature_e() const { return e_; }
  Mat value(std::span<const double> x) const;

 private:
  int n_ = 0;
  Box domain_;
  int e_ = +1;
  std::vector<ScalarField> g_;
};

// Builds a validated ConnectionField from a JSON document:
//   { "n": int, "domain": [[lo,hi] x n], "symmetric": bool,
//     "gamma": [ {"h":int,"i":int,"j":int,"expr":"..."} ... ] }
// with 1-based component indices; unspecified components default to zero.
ConnectionField connection_from_spec(std::string_view json_document);

// Levi-Civita Christoffel symbols of the second kind at a point, with metric
// derivatives by central finite differences (step 1e-5 of the extent per
// axis) and a direct linear solve against the metric matrix per index h.
Tensor3 christoffel_from_metric(const MetricField& metric, std::span<const double> x);

// Geodesic equation right-hand side: dx = lambda,
// dlambda^h = -Gamma^h_ab(x) lambda^a lambda^b (full double sum; no symmetry
// assumed, so torsionful connections are handled as written).
PhaseDerivative geodesic_rhs(const ConnectionField& conn, const PhaseState& state);

// Torsion T^h_ij = Gamma^h_ij - Gamma^h_ji (exactly antisymmetric in i,j).
Tensor3 torsion_at(const ConnectionField& conn, std::span<const double> x);

// Transformation law applied to raw component values at one point:
//   gamma'(h,i,j) = (gamma(c,a,b) jac(a,i) jac(b,j) + hess(c,i,j)) inv(h,c)
// where jac = dx/dx', hess = d2x/dx'dx' and inv = jac^-1. Throws
// NumericsError when cond_inf(jac) exceeds kMaxJacobianCondition.
Tensor3 transform_components(const Tensor3& gamma, const Mat& jac, const Tensor3& hess);

// Evaluates conn at old_point and applies transform_components.
Tensor3 transform_connection_at(const ConnectionField& conn,
                                std::span<const double> old_point, const Mat& jac,
                                const Tensor3& hess);

}  // namespace semigeo
