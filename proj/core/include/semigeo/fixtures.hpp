#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semigeo/connection.hpp"
#include "semigeo/geodesic.hpp"

namespace semigeo {

// A coordinate map new -> old in closed form, with analytic first and second
// derivatives, all as scalar fields of the new coordinates.
struct ClosedFormTransform {
  std::vector<ScalarField> f;     // n components
  std::vector<ScalarField> jac;   // n*n, (c,i) row-major
  std::vector<ScalarField> hess;  // n*n*n, (c,i,j)

  Vec f_at(std::span<const double> xp) const;
  Mat jac_at(std::span<const double> xp) const;
  Tensor3 hess_at(std::span<const double> xp) const;
};

// A one-parameter family of closed-form geodesics (label c, natural
// parameter tau), used as oracle data.
struct GeodesicFamily {
  std::function<PhaseState(double c, double tau)> at;
  double c_lo = -0.5, c_hi = 0.5;
  double tau_lo = -0.5, tau_hi = 0.5;
};

// A test connection bundled with whatever oracle data it has in closed form.
struct Fixture {
  std::string name;
  ConnectionField connection;
  std::optional<MetricField> metric;
  std::optional<ClosedFormTransform> transform;  // straightening map, when known
  std::optional<GeodesicFamily> geodesics;
  bool symmetric = false;
  bool equiaffine = false;
  bool already_presemigeodesic = false;
  HypersurfaceSeed default_seed;
};

// Built-in fixtures: flat2, flat3, sheared2, polar2, sphere2, torsion2,
// noneq2. Throws ValidationError for an unknown name.
Fixture builtin(std::string_view name);
std::vector<std::string> builtin_names();

}  // namespace semigeo
