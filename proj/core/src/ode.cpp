#include "semigeo/ode.hpp"

#include <algorithm>
#include <cmath>

#include "semigeo/errors.hpp"

namespace semigeo {

namespace {

struct RawRun {
  std::vector<double> ts;
  std::vector<Vec> ys;
  bool truncated = false;
};

RawRun run_fixed(const OdeProblem& p, double step) {
  const std::size_t m = p.y0.size();
  const double span = p.t_end - p.t0;
  const double n_exact = span / step;
  const long long nsteps = std::llround(std::ceil(n_exact - 1e-9));

  RawRun run;
  run.ts.reserve(nsteps + 1);
  run.ys.reserve(nsteps + 1);
  run.ts.push_back(p.t0);
  run.ys.push_back(p.y0);

  Vec y = p.y0;
  Vec k1(m), k2(m), k3(m), k4(m), tmp(m), ynext(m);
  for (long long s = 0; s < nsteps; ++s) {
    const double t = p.t0 + s * step;
    const double h = std::min(step, p.t_end - t);
    try {
      p.rhs(t, y, k1);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      p.rhs(t + 0.5 * h, tmp, k2);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      p.rhs(t + 0.5 * h, tmp, k3);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * k3[i];
      p.rhs(t + h, tmp, k4);
    } catch (const DomainExit&) {
      run.truncated = true;
      return run;
    }
    for (std::size_t i = 0; i < m; ++i)
      ynext[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (double v : ynext)
      if (!std::isfinite(v)) throw NumericsError("integrate: non-finite state at t = " +
                                                 std::to_string(t + h));
    y = ynext;
    run.ts.push_back(s + 1 == nsteps ? p.t_end : p.t0 + (s + 1) * step);
    run.ys.push_back(y);
  }
  return run;
}

}  // namespace

Trajectory integrate(const OdeProblem& p) {
  if (!p.rhs) throw ValidationError("integrate: missing right-hand side");
  if (p.y0.empty()) throw ValidationError("integrate: empty initial state");
  if (!(p.step > 0.0)) throw ValidationError("integrate: step must be positive");
  if (!(p.t_end > p.t0)) throw ValidationError("integrate: t_end must exceed t0");
  if ((p.t_end - p.t0) / p.step > 1e7)
    throw ValidationError("integrate: step-count guard exceeded ((t_end - t0)/step > 1e7)");

  RawRun coarse = run_fixed(p, p.step);
  RawRun fine = run_fixed(p, 0.5 * p.step);

  Trajectory out;
  out.ts = std::move(coarse.ts);
  out.ys = std::move(coarse.ys);
  out.truncated = coarse.truncated;

  // Richardson: compare against the half-step run at shared sample times.
  const std::size_t shared = std::min(out.ts.size(), (fine.ts.size() + 1) / 2);
  double err = 0.0;
  for (std::size_t k = 0; k < shared; ++k) {
    const Vec& a = out.ys[k];
    const Vec& b = fine.ys[2 * k];
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
  }
  out.error_estimate = err;
  return out;
}

}  // namespace semigeo
