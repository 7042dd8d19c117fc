#include "semigeo/verify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semigeo/errors.hpp"
#include "semigeo/ode.hpp"

namespace semigeo {

TransformedConnection evaluate_transformed(const ConnectionField& conn,
                                           const TransformGrid& grid) {
  const int n = grid.n;
  TransformedConnection tc;
  tc.n = n;
  tc.gamma_prime.assign(static_cast<std::size_t>(grid.nodes()) * n * n * n, 0.0);
  tc.residual_gamma11.assign(grid.nodes(), 0.0);
  tc.regular = grid.regular_flags;

  int regular_count = 0;
  double sum = 0.0;
  int stat_count = 0;
  double stat_max = 0.0;

  const int K = grid.tau_count();
  for (int k = 0; k < K; ++k)
    for (int col = 0; col < grid.columns(); ++col) {
      const int nd = grid.node(k, col);
      if (!grid.regular(nd)) continue;
      ++regular_count;
      const Tensor3 gp =
          transform_connection_at(conn, grid.f_at(nd), grid.jac_at(nd), grid.hess_at(nd));
      std::copy(gp.data().begin(), gp.data().end(),
                tc.gamma_prime.begin() + static_cast<std::size_t>(nd) * n * n * n);
      double r = 0.0;
      for (int h = 0; h < n; ++h) r = std::max(r, std::abs(gp(h, 0, 0)));
      tc.residual_gamma11[nd] = r;
      if (k >= 1 && k <= K - 2 && grid.column_interior(col, 1)) {
        sum += r;
        stat_max = std::max(stat_max, r);
        ++stat_count;
      }
    }
  if (regular_count == 0)
    throw ConstructionError("evaluate_transformed: every grid node is irregular");
  tc.stats.max = stat_max;
  tc.stats.mean = stat_count > 0 ? sum / stat_count : 0.0;
  tc.stats.count = stat_count;
  return tc;
}

double check_straight_geodesics(const TransformGrid& grid, const TransformedConnection& tc,
                                std::span<const int> sample_columns, double tau_lo,
                                double tau_hi, double step) {
  const int n = grid.n;
  const int n3 = n * n * n;

  OdeRhs rhs = [&grid, &tc, n, n3](double, std::span<const double> y, std::span<double> dy) {
    const GridCell cell = locate_cell(grid, y.subspan(0, n));
    if (!cell_regular(grid, cell)) throw DomainExit{};
    Vec gp(n3);
    interpolate_cell(tc.gamma_prime, n3, cell, gp);
    for (int c = 0; c < n; ++c) dy[c] = y[n + c];
    for (int h = 0; h < n; ++h) {
      double acc = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) acc += gp[(h * n + a) * n + b] * y[n + a] * y[n + b];
      dy[n + h] = -acc;
    }
  };

  double worst = 0.0;
  for (int col : sample_columns) {
    const Vec labels = grid.label_values(col);
    Vec y0(2 * n, 0.0);
    for (int a = 0; a + 1 < n; ++a) y0[a + 1] = labels[a];
    y0[n] = 1.0;  // initial velocity e_1

    auto run = [&](double t_end, int dir) {
      if (!(t_end > 0.0)) return;
      OdeProblem p;
      p.t0 = 0.0;
      p.t_end = t_end;
      p.step = step;
      p.y0 = y0;
      if (dir > 0) {
        p.rhs = rhs;
      } else {
        p.y0[n] = -1.0;
        p.rhs = rhs;
      }
      const Trajectory t = integrate(p);
      for (std::size_t s = 0; s < t.ts.size(); ++s) {
        const double tau = dir * t.ts[s];
        double dev = std::abs(t.ys[s][0] - tau);
        for (int a = 0; a + 1 < n; ++a)
          dev = std::max(dev, std::abs(t.ys[s][a + 1] - labels[a]));
        worst = std::max(worst, dev);
      }
    };
    run(tau_hi, +1);
    run(-tau_lo, -1);
  }
  return worst;
}

double check_geodesic_correspondence(const ConnectionField& conn, const TransformGrid& grid) {
  const int n = grid.n;
  const int K = grid.tau_count();
  const double dt = grid.tau[1] - grid.tau[0];
  double worst = 0.0;
  for (int k = 1; k <= K - 2; ++k)
    for (int col = 0; col < grid.columns(); ++col) {
      const int nd = grid.node(k, col);
      if (!grid.regular(nd)) continue;
      const int np = grid.node(k + 1, col);
      const int nm = grid.node(k - 1, col);
      if (!grid.covered(np) || !grid.covered(nm)) continue;
      PhaseState s{Vec(grid.f_at(nd).begin(), grid.f_at(nd).end()),
                   Vec(grid.lambda_at(nd).begin(), grid.lambda_at(nd).end())};
      const PhaseDerivative d = geodesic_rhs(conn, s);
      const auto fp = grid.f_at(np);
      const auto f0 = grid.f_at(nd);
      const auto fm = grid.f_at(nm);
      for (int c = 0; c < n; ++c) {
        const double second = (fp[c] - 2.0 * f0[c] + fm[c]) / (dt * dt);
        worst = std::max(worst, std::abs(second - d.dlambda[c]));
      }
    }
  return worst;
}

EquiaffineCheck equiaffine_check(const ConnectionField& conn, int samples_per_axis,
                                 double fd_step_rel) {
  const int n = conn.dim();
  if (!conn.declared_symmetric()) {
    // the notion is defined for symmetric connections only
    const Box& box = conn.domain();
    Vec mid(n);
    for (int a = 0; a < n; ++a) mid[a] = 0.5 * (box.lo(a) + box.hi(a));
    const Tensor3 t = torsion_at(conn, mid);
    for (int h = 0; h < n; ++h)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (t(h, i, j) != 0.0)
            throw ValidationError("equiaffine_check: connection has nonzero torsion");
    throw ValidationError("equiaffine_check: connection is not declared symmetric");
  }
  if (samples_per_axis < 2) throw ValidationError("equiaffine_check: too few samples");

  const Box& box = conn.domain();
  Vec h(n);
  for (int a = 0; a < n; ++a) h[a] = fd_step_rel * box.extent(a);

  // trace field t_i(x) = Gamma^a_ia(x)
  auto trace = [&](std::span<const double> x, int i) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += conn.gamma(a, i, a, x);
    return s;
  };

  std::vector<int> idx(n, 0);
  double residual = 0.0;
  while (true) {
    Vec x(n);
    for (int a = 0; a < n; ++a) {
      const double inner_lo = box.lo(a) + 2.0 * h[a];
      const double inner_hi = box.hi(a) - 2.0 * h[a];
      x[a] = inner_lo + (inner_hi - inner_lo) * idx[a] / (samples_per_axis - 1);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Vec xp = x, xm = x;
        xp[j] += h[j];
        xm[j] -= h[j];
        const double dj_ti = (trace(xp, i) - trace(xm, i)) / (2.0 * h[j]);
        xp[j] = x[j];
        xm[j] = x[j];
        xp[i] += h[i];
        xm[i] -= h[i];
        const double di_tj = (trace(xp, j) - trace(xm, j)) / (2.0 * h[i]);
        residual = std::max(residual, std::abs(dj_ti - di_tj));
      }
    int a = n - 1;
    while (a >= 0 && ++idx[a] == samples_per_axis) idx[a--] = 0;
    if (a < 0) break;
  }
  return {residual < kEquiaffineTol, residual};
}

DofReport dof_report(int n, bool torsion_free, bool equiaffine) {
  if (n < 2) throw ValidationError("dof_report: n must be at least 2");
  const long long N = n;
  DofReport r;
  r.n = n;
  r.general_count = N * N * N;
  r.torsion_free_count = N * N * (N + 1) / 2;
  r.presemigeodesic_general = N * (N * N - 1);
  r.presemigeodesic_torsion_free = N * (N - 1) * (N - 1) / 2;
  r.equiaffine_reduction = N - 1;
  r.applicable = torsion_free ? r.presemigeodesic_torsion_free : r.presemigeodesic_general;
  if (equiaffine) r.applicable -= r.equiaffine_reduction;
  return r;
}

double torsion_tensoriality_residual(const ConnectionField& conn, const TransformGrid& grid,
                                     const TransformedConnection& tc) {
  const int n = grid.n;
  if (tc.n != n || static_cast<int>(tc.residual_gamma11.size()) != grid.nodes())
    throw ValidationError("torsion_tensoriality_residual: grid/tc mismatch");
  double worst = 0.0;
  for (int nd = 0; nd < grid.nodes(); ++nd) {
    if (!grid.regular(nd)) continue;
    const auto gp = tc.gamma_at(nd);
    const Mat jac = grid.jac_at(nd);
    const Mat inv = inverse(jac);
    const Tensor3 t_old = torsion_at(conn, grid.f_at(nd));
    for (int h = 0; h < n; ++h)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double t_prime = gp[(h * n + i) * n + j] - gp[(h * n + j) * n + i];
          double push = 0.0;
          for (int c = 0; c < n; ++c) {
            if (inv(h, c) == 0.0) continue;
            for (int a = 0; a < n; ++a)
              for (int b = 0; b < n; ++b)
                push += inv(h, c) * t_old(c, a, b) * jac(a, i) * jac(b, j);
          }
          worst = std::max(worst, std::abs(t_prime - push));
        }
  }
  return worst;
}

}  // namespace semigeo
