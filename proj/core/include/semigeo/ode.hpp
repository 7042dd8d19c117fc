#pragma once

#include <functional>
#include <span>
#include <vector>

#include "semigeo/linalg.hpp"

namespace semigeo {

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

// A fixed-step initial value problem on R^m. The rhs must be pure and
// reentrant (callers may integrate many problems concurrently). It may throw
// DomainExit to request a clean stop when the state leaves its admissible
// region; any other exception aborts the integration as an error.
struct OdeProblem {
  OdeRhs rhs;
  double t0 = 0.0;
  Vec y0;
  double t_end = 1.0;
  double step = 1e-3;  // default step in natural-parameter units
};

struct Trajectory {
  std::vector<double> ts;  // strictly increasing, ts[0] == t0
  std::vector<Vec> ys;     // one state per sample
  double error_estimate = 0.0;  // sup-norm Richardson estimate vs a half-step re-run
  bool truncated = false;       // the rhs requested a stop before t_end

  const Vec& back() const { return ys.back(); }
};

// Classical 4th-order Runge-Kutta with the given fixed step; samples recorded
// at every step. Guards: step > 0, t_end > t0, (t_end - t0)/step <= 1e7.
// Identical inputs produce bitwise-identical trajectories.
Trajectory integrate(const OdeProblem& problem);

}  // namespace semigeo
