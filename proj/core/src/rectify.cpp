#include "semigeo/rectify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "semigeo/errors.hpp"

namespace semigeo {

Vec VectorFieldGrid::value(std::span<const double> x) const {
  Vec v(n);
  for (int h = 0; h < n; ++h) v[h] = xi[h](x);
  return v;
}

PicardConfig PicardConfig::with_default_data(int n, const GridAxis& tau,
                                             const std::vector<GridAxis>& labels) {
  PicardConfig cfg;
  cfg.tau_axis = tau;
  cfg.label_axes = labels;
  cfg.phi0.resize(n);
  cfg.phi1.resize(n);
  cfg.phi0[0] = ScalarField::zero(n);
  cfg.phi1[0] = ScalarField::constant(n, 1.0);
  for (int h = 1; h < n; ++h) {
    cfg.phi0[h] = ScalarField(
        n, [h](std::span<const double> p) { return p[h]; }, "x" + std::to_string(h + 1));
    cfg.phi1[h] = ScalarField::zero(n);
  }
  return cfg;
}

namespace {

Vec embed_labels(std::span<const double> label_values, int n) {
  Vec p(n, 0.0);
  for (int a = 0; a + 1 < n; ++a) p[a + 1] = label_values[a];
  return p;
}

}  // namespace

TransformGrid rectify_flow(const VectorFieldGrid& field,
                           std::span<const ScalarField> init_phi, const GridAxis& tau_axis,
                           const std::vector<GridAxis>& label_axes,
                           const ShootOptions& options) {
  const int n = field.n;
  if (static_cast<int>(field.xi.size()) != n)
    throw ValidationError("rectify_flow: field needs n components");
  if (static_cast<int>(init_phi.size()) != n)
    throw ValidationError("rectify_flow: init_phi needs n components");

  TransformGrid grid(n, tau_axis, label_axes);
  if (grid.zero_index < 0)
    throw ValidationError("rectify_flow: the tau grid must include 0");
  const int C = grid.columns();
  const int K = grid.tau_count();
  const int k0 = grid.zero_index;
  const double step = tau_axis.spacing() / options.oversampling;

  OdeRhs rhs = [&field, n](double, std::span<const double> y, std::span<double> dy) {
    if (!field.domain.contains(y.subspan(0, n))) throw DomainExit{};
    const Vec v = field.value(y.subspan(0, n));
    double mag = 0.0;
    for (double c : v) mag = std::max(mag, std::abs(c));
    if (mag < 1e-12) throw ConstructionError("rectify_flow: vector field vanishes on the flow");
    std::copy(v.begin(), v.end(), dy.begin());
  };

  // initial-data regularity: det || d_i x'^h(0, labels) || != 0, with the flow
  // direction as the first column
  for (int col = 0; col < C; ++col) {
    const Vec emb = embed_labels(grid.label_values(col), n);
    Vec x0(n);
    for (int h = 0; h < n; ++h) x0[h] = init_phi[h](emb);
    if (!field.domain.contains(x0))
      throw ValidationError("rectify_flow: initial data leaves the field domain");
    const Vec xi0 = field.value(x0);
    double mag = 0.0;
    for (double c : xi0) mag = std::max(mag, std::abs(c));
    if (mag < 1e-12)
      throw ConstructionError("rectify_flow: vector field vanishes at a base point");
    Mat M(n, n);
    for (int h = 0; h < n; ++h) M(h, 0) = xi0[h];
    for (int a = 0; a + 1 < n; ++a) {
      const double h = 1e-6 * std::max(1.0, std::abs(grid.labels[a].back() - grid.labels[a].front()));
      Vec ep = emb, em = emb;
      ep[a + 1] += h;
      em[a + 1] -= h;
      for (int c = 0; c < n; ++c) M(c, a + 1) = (init_phi[c](ep) - init_phi[c](em)) / (2.0 * h);
    }
    if (std::abs(det(M)) < 1e-10)
      throw ConstructionError("rectify_flow: singular initial-data Jacobian at a label node");

    const int nd0 = grid.node(k0, col);
    std::copy(x0.begin(), x0.end(), grid.f_at(nd0).begin());
    std::copy(xi0.begin(), xi0.end(), grid.lambda_at(nd0).begin());
    grid.covered_flags[nd0] = 1;

    auto run = [&](double t_end, int dir) {
      OdeProblem p;
      p.rhs = dir > 0 ? rhs : OdeRhs([&rhs, n](double t, std::span<const double> y,
                                                std::span<double> dy) {
        rhs(t, y, dy);
        for (int c = 0; c < n; ++c) dy[c] = -dy[c];
      });
      p.t0 = 0.0;
      p.t_end = t_end;
      p.step = step;
      p.y0 = x0;
      const Trajectory t = integrate(p);
      const int reach = dir > 0 ? K - 1 - k0 : k0;
      for (int d = 1; d <= reach; ++d) {
        const std::size_t s = static_cast<std::size_t>(d) * options.oversampling;
        if (s >= t.ys.size()) break;
        const int nd = grid.node(k0 + dir * d, col);
        const Vec& y = t.ys[s];
        std::copy(y.begin(), y.end(), grid.f_at(nd).begin());
        const Vec v = field.value(y);  // lambda = xi(f), the flow velocity
        std::copy(v.begin(), v.end(), grid.lambda_at(nd).begin());
        grid.covered_flags[nd] = 1;
      }
    };
    if (k0 < K - 1) run(grid.tau.back(), +1);
    if (k0 > 0) run(-grid.tau.front(), -1);
  }

  int uncovered = 0;
  for (int nd = 0; nd < grid.nodes(); ++nd) uncovered += grid.covered(nd) ? 0 : 1;
  if (uncovered > options.max_uncovered_fraction * grid.nodes())
    throw ConstructionError("rectify_flow: flow leaves the domain on " +
                            std::to_string(uncovered) + " of " + std::to_string(grid.nodes()) +
                            " nodes");

  // hess(:,0,0) from the flow identity d2x/dt2 = (dxi/dx) xi, with the field
  // Jacobian by central differences at the node position
  for (int nd = 0; nd < grid.nodes(); ++nd) {
    if (!grid.covered(nd)) continue;
    const auto x = grid.f_at(nd);
    const auto v = grid.lambda_at(nd);
    double* h00 = grid.hess.data() + static_cast<std::size_t>(nd) * n * n * n;
    Vec xp(x.begin(), x.end()), xm(x.begin(), x.end());
    Vec acc(n, 0.0);
    for (int a = 0; a < n; ++a) {
      const double h = 1e-6 * std::max(1.0, field.domain.extent(a));
      xp[a] = x[a] + h;
      xm[a] = x[a] - h;
      const Vec fp = field.value(xp);
      const Vec fm = field.value(xm);
      for (int c = 0; c < n; ++c) acc[c] += (fp[c] - fm[c]) / (2.0 * h) * v[a];
      xp[a] = x[a];
      xm[a] = x[a];
    }
    for (int c = 0; c < n; ++c) h00[c * n * n] = acc[c];
  }

  assemble_grid_derivatives(grid);
  return grid;
}

PicardResult picard_solve(const ConnectionField& conn, const PicardConfig& config) {
  const int n = conn.dim();
  if (static_cast<int>(config.phi0.size()) != n || static_cast<int>(config.phi1.size()) != n)
    throw ValidationError("picard_solve: phi0/phi1 need n components each");
  if (config.max_iterations < 1) throw ValidationError("picard_solve: max_iterations < 1");
  if (config.oversampling < 1) throw ValidationError("picard_solve: oversampling < 1");

  TransformGrid grid(n, config.tau_axis, config.label_axes);
  if (grid.zero_index < 0)
    throw ValidationError("picard_solve: the tau grid must include 0");
  const int C = grid.columns();
  const int K = grid.tau_count();
  const int ov = config.oversampling;
  const int Kf = (K - 1) * ov + 1;
  const int k0f = grid.zero_index * ov;
  const double hf = config.tau_axis.spacing() / ov;

  // initial data per column + regularity of the Jacobi matrix at (0, labels)
  std::vector<Vec> p0(C), p1(C);
  for (int col = 0; col < C; ++col) {
    const Vec emb = embed_labels(grid.label_values(col), n);
    p0[col].resize(n);
    p1[col].resize(n);
    for (int h = 0; h < n; ++h) {
      p0[col][h] = config.phi0[h](emb);
      p1[col][h] = config.phi1[h](emb);
    }
    Mat M(n, n);
    for (int c = 0; c < n; ++c) M(c, 0) = p1[col][c];
    for (int a = 0; a + 1 < n; ++a) {
      const double h = 1e-6 * std::max(1.0, std::abs(grid.labels[a].back() - grid.labels[a].front()));
      Vec ep = emb, em = emb;
      ep[a + 1] += h;
      em[a + 1] -= h;
      for (int c = 0; c < n; ++c)
        M(c, a + 1) = (config.phi0[c](ep) - config.phi0[c](em)) / (2.0 * h);
    }
    if (std::abs(det(M)) < 1e-10)
      throw ConstructionError("picard_solve: initial data gives a singular Jacobi matrix "
                              "at a label node");
  }

  // iterate on the refined tau lattice, one state pair per column
  std::vector<Vec> f(C, Vec(Kf * n, 0.0)), lam(C, Vec(Kf * n, 0.0));
  std::vector<Vec> fn(C, Vec(Kf * n, 0.0)), ln(C, Vec(Kf * n, 0.0));
  Vec integrand(Kf * n, 0.0);
  std::vector<double> history;
  bool converged = false;

  for (int it = 0; it < config.max_iterations && !converged; ++it) {
    double diff_f = 0.0, diff_l = 0.0;
    for (int col = 0; col < C; ++col) {
      const Vec& fc = f[col];
      const Vec& lc = lam[col];
      // g = -Gamma(f) lam lam; exactly zero where lam vanishes (no Gamma
      // evaluation there: the formal start f_0 = 0 may lie outside the domain)
      for (int k = 0; k < Kf; ++k) {
        const double* l = lc.data() + k * n;
        bool zero = true;
        for (int c = 0; c < n; ++c) zero = zero && l[c] == 0.0;
        double* g = integrand.data() + k * n;
        if (zero) {
          std::fill(g, g + n, 0.0);
          continue;
        }
        std::span<const double> x(fc.data() + k * n, static_cast<std::size_t>(n));
        if (!conn.domain().contains(x))
          throw ConstructionError("picard_solve: iterate left the connection domain at "
                                  "tau index " + std::to_string(k));
        const Tensor3 G = conn.gamma_all(x);
        for (int c = 0; c < n; ++c) {
          double acc = 0.0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) acc += G(c, a, b) * l[a] * l[b];
          g[c] = -acc;
        }
      }
      // cumulative trapezoid from tau = 0 in both directions
      Vec& fnew = fn[col];
      Vec& lnew = ln[col];
      for (int c = 0; c < n; ++c) {
        fnew[k0f * n + c] = p0[col][c];
        lnew[k0f * n + c] = p1[col][c];
      }
      for (int k = k0f + 1; k < Kf; ++k)
        for (int c = 0; c < n; ++c) {
          fnew[k * n + c] = fnew[(k - 1) * n + c] +
                            0.5 * hf * (lc[(k - 1) * n + c] + lc[k * n + c]);
          lnew[k * n + c] = lnew[(k - 1) * n + c] +
                            0.5 * hf * (integrand[(k - 1) * n + c] + integrand[k * n + c]);
        }
      for (int k = k0f - 1; k >= 0; --k)
        for (int c = 0; c < n; ++c) {
          fnew[k * n + c] = fnew[(k + 1) * n + c] -
                            0.5 * hf * (lc[(k + 1) * n + c] + lc[k * n + c]);
          lnew[k * n + c] = lnew[(k + 1) * n + c] -
                            0.5 * hf * (integrand[(k + 1) * n + c] + integrand[k * n + c]);
        }
      for (int k = 0; k < Kf * n; ++k) {
        diff_f = std::max(diff_f, std::abs(fnew[k] - fc[k]));
        diff_l = std::max(diff_l, std::abs(lnew[k] - lc[k]));
      }
    }
    std::swap(f, fn);
    std::swap(lam, ln);
    const double diff = diff_f + diff_l;
    history.push_back(diff);
    converged = diff < config.convergence_tol;
  }
  if (!converged)
    throw PicardError("picard_solve: no convergence within " +
                          std::to_string(config.max_iterations) + " iterations (last "
                          "successive difference " + std::to_string(history.back()) + ")",
                      history);

  // sample the fixed point onto the output grid and assemble derivatives
  for (int col = 0; col < C; ++col)
    for (int k = 0; k < K; ++k) {
      const int nd = grid.node(k, col);
      const int kf = k * ov;
      for (int c = 0; c < n; ++c) {
        grid.f_at(nd)[c] = f[col][kf * n + c];
        grid.lambda_at(nd)[c] = lam[col][kf * n + c];
      }
      grid.covered_flags[nd] = 1;
      PhaseState s{Vec(grid.f_at(nd).begin(), grid.f_at(nd).end()),
                   Vec(grid.lambda_at(nd).begin(), grid.lambda_at(nd).end())};
      const PhaseDerivative d = geodesic_rhs(conn, s);
      double* h = grid.hess.data() + static_cast<std::size_t>(nd) * n * n * n;
      for (int c = 0; c < n; ++c) h[c * n * n] = d.dlambda[c];
    }
  assemble_grid_derivatives(grid);

  PicardResult result;
  result.grid = std::move(grid);
  result.history = std::move(history);
  result.iterations = static_cast<int>(result.history.size());
  return result;
}

Vec invert_transform(const TransformGrid& grid, std::span<const double> old_point) {
  const int n = grid.n;
  if (static_cast<int>(old_point.size()) != n)
    throw ValidationError("invert_transform: point dimension mismatch");

  // start from the nearest regular node
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int nd = 0; nd < grid.nodes(); ++nd) {
    if (!grid.regular(nd)) continue;
    const auto fx = grid.f_at(nd);
    double d = 0.0;
    for (int c = 0; c < n; ++c) d = std::max(d, std::abs(fx[c] - old_point[c]));
    if (d < best_d) {
      best_d = d;
      best = nd;
    }
  }
  if (best < 0) throw InversionError("invert_transform: grid has no regular nodes");

  Vec xp = grid.new_coords(best / grid.columns(), best % grid.columns());
  Vec fx(n), residual(n);
  Vec jac_entries(n * n);
  GridCell cell;
  for (int iter = 0; iter < 50; ++iter) {
    // keep the iterate inside the chart box so the cell lookup stays valid
    xp[0] = std::clamp(xp[0], grid.tau.front(), grid.tau.back());
    for (int a = 0; a + 1 < n; ++a)
      xp[a + 1] = std::clamp(xp[a + 1], grid.labels[a].front(), grid.labels[a].back());
    cell = locate_cell(grid, xp);
    if (!cell.in_bounds) throw InversionError("invert_transform: iterate left the grid");
    interpolate_cell(grid.f, n, cell, fx);
    double rmax = 0.0;
    for (int c = 0; c < n; ++c) {
      residual[c] = fx[c] - old_point[c];
      rmax = std::max(rmax, std::abs(residual[c]));
    }
    if (rmax < 1e-10) {
      // a converged point on a cell face may floor into the neighbouring
      // cell; only corners that actually carry weight must be regular
      double irregular_weight = 0.0;
      for (std::size_t c = 0; c < cell.corner_nodes.size(); ++c)
        if (!grid.regular(cell.corner_nodes[c]))
          irregular_weight += std::abs(cell.weights[c]);
      if (irregular_weight > 1e-9)
        throw InversionError("invert_transform: target lies in an irregular cell");
      return xp;
    }
    interpolate_cell(grid.jac, n * n, cell, jac_entries);
    Mat J(n, n);
    std::copy(jac_entries.begin(), jac_entries.end(), J.data().begin());
    Vec delta;
    try {
      delta = solve(J, residual);
    } catch (const NumericsError&) {
      throw InversionError("invert_transform: singular interpolated Jacobian");
    }
    for (int c = 0; c < n; ++c) xp[c] -= delta[c];
  }
  throw InversionError("invert_transform: Newton did not converge in 50 iterations "
                       "(point outside the chart image?)");
}

FirstIntegralResiduals first_integral_residuals(const TransformGrid& grid,
                                                const VectorFieldGrid& field) {
  const int n = grid.n;
  if (field.n != n) throw ValidationError("first_integral_residuals: dimension mismatch");
  const double step = grid.tau[1] - grid.tau[0];

  FirstIntegralResiduals out;
  const int K = grid.tau_count();
  for (int k = 3; k <= K - 4; k += 2) {
    for (int col = 0; col < grid.columns(); ++col) {
      if (!grid.column_interior(col, 2)) continue;
      const int nd = grid.node(k, col);
      if (!grid.regular(nd)) continue;
      const std::vector<int> cc = grid.column_coords(col);
      bool skip = false;
      for (int a = 0; a < grid.label_axis_count(); ++a) skip = skip || (cc[a] % 2 != 0);
      if (skip) continue;

      const auto fx = grid.f_at(nd);
      const Vec x(fx.begin(), fx.end());
      ++out.attempted;
      Mat grad(n, n);  // grad(i, a) = dF^i/dx^a
      bool ok = true;
      const Vec guess = grid.new_coords(k, col);
      for (int a = 0; a < n && ok; ++a) {
        Vec xp = x, xm = x;
        xp[a] += step;
        xm[a] -= step;
        try {
          const Vec Fp = invert_transform(grid, xp);
          const Vec Fm = invert_transform(grid, xm);
          for (int i = 0; i < n; ++i) grad(i, a) = (Fp[i] - Fm[i]) / (2.0 * step);
        } catch (const InversionError&) {
          ok = false;
        }
      }
      if (!ok) {
        ++out.failed;
        continue;
      }
      const Vec xiv = field.value(x);
      double r1 = 0.0;
      for (int a = 0; a < n; ++a) r1 += grad(0, a) * xiv[a];
      r1 = std::abs(r1 - 1.0);
      double r0 = 0.0;
      for (int i = 1; i < n; ++i) {
        double s = 0.0;
        for (int a = 0; a < n; ++a) s += grad(i, a) * xiv[a];
        r0 = std::max(r0, std::abs(s));
      }
      out.points.push_back(x);
      out.r0.push_back(r0);
      out.r1.push_back(r1);
      out.max_r0 = std::max(out.max_r0, r0);
      out.max_r1 = std::max(out.max_r1, r1);
    }
  }
  if (out.attempted == 0)
    throw InversionError("first_integral_residuals: no usable sample points");
  if (out.failed > 0.1 * out.attempted)
    throw InversionError("first_integral_residuals: inversion failed at " +
                         std::to_string(out.failed) + " of " +
                         std::to_string(out.attempted) + " sample points");
  return out;
}

}  // namespace semigeo
