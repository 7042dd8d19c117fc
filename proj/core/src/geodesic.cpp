#include "semigeo/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "semigeo/errors.hpp"

namespace semigeo {

std::vector<double> GridAxis::samples() const {
  std::vector<double> s(count);
  for (int k = 0; k < count; ++k) s[k] = lo + k * spacing();
  s.back() = hi;
  return s;
}

void GridAxis::validate(const char* what) const {
  if (count < 2) throw ValidationError(std::string(what) + ": axis needs at least 2 samples");
  if (!(lo < hi)) throw ValidationError(std::string(what) + ": axis has lo >= hi");
}

TransformGrid::TransformGrid(int dim, const GridAxis& tau_axis,
                             const std::vector<GridAxis>& label_axes)
    : n(dim) {
  tau_axis.validate("tau axis");
  if (static_cast<int>(label_axes.size()) != dim - 1)
    throw ValidationError("grid needs n-1 label axes");
  tau = tau_axis.samples();
  // seeded constructions start on the tau = 0 slice; identity grids and other
  // analytic fills work without one (zero_index stays -1)
  zero_index = -1;
  for (int k = 0; k < tau_axis.count; ++k)
    if (std::abs(tau[k]) < 1e-9 * std::max(1.0, std::abs(tau_axis.hi - tau_axis.lo))) {
      zero_index = k;
      tau[k] = 0.0;
      break;
    }
  for (const GridAxis& a : label_axes) {
    a.validate("label axis");
    labels.push_back(a.samples());
  }
  const int total = nodes();
  f.assign(total * n, 0.0);
  lambda.assign(total * n, 0.0);
  jac.assign(total * n * n, 0.0);
  hess.assign(total * n * n * n, 0.0);
  det_jac.assign(total, 0.0);
  cond_jac.assign(total, 0.0);
  covered_flags.assign(total, 0);
  regular_flags.assign(total, 0);
}

int TransformGrid::columns() const {
  int c = 1;
  for (const auto& ax : labels) c *= static_cast<int>(ax.size());
  return c;
}

int TransformGrid::label_stride(int axis) const {
  int s = 1;
  for (int a = axis + 1; a < label_axis_count(); ++a) s *= static_cast<int>(labels[a].size());
  return s;
}

std::vector<int> TransformGrid::column_coords(int column) const {
  std::vector<int> c(label_axis_count());
  for (int a = label_axis_count() - 1; a >= 0; --a) {
    const int size = static_cast<int>(labels[a].size());
    c[a] = column % size;
    column /= size;
  }
  return c;
}

Vec TransformGrid::label_values(int column) const {
  const std::vector<int> c = column_coords(column);
  Vec v(label_axis_count());
  for (int a = 0; a < label_axis_count(); ++a) v[a] = labels[a][c[a]];
  return v;
}

Vec TransformGrid::new_coords(int tau_idx, int column) const {
  Vec v(n);
  v[0] = tau[tau_idx];
  const Vec lv = label_values(column);
  for (int a = 0; a < n - 1; ++a) v[a + 1] = lv[a];
  return v;
}

bool TransformGrid::column_interior(int column, int margin) const {
  const std::vector<int> c = column_coords(column);
  for (int a = 0; a < label_axis_count(); ++a) {
    const int size = static_cast<int>(labels[a].size());
    if (c[a] < margin || c[a] > size - 1 - margin) return false;
  }
  return true;
}

Mat TransformGrid::jac_at(int node) const {
  Mat m(n, n);
  const double* base = jac.data() + node * n * n;
  std::copy(base, base + n * n, m.data().begin());
  return m;
}

void TransformGrid::set_jac(int node, const Mat& m) {
  std::copy(m.data().begin(), m.data().end(), jac.begin() + node * n * n);
}

Tensor3 TransformGrid::hess_at(int node) const {
  Tensor3 t(n);
  const double* base = hess.data() + node * n * n * n;
  std::copy(base, base + n * n * n, t.data().begin());
  return t;
}

void TransformGrid::set_hess(int node, const Tensor3& t) {
  std::copy(t.data().begin(), t.data().end(), hess.begin() + node * n * n * n);
}

namespace {

Vec embed_labels(std::span<const double> label_values, int n) {
  Vec p(n, 0.0);
  for (int a = 0; a + 1 < n; ++a) p[a + 1] = label_values[a];
  return p;
}

OdeRhs make_geodesic_rhs(const ConnectionField& conn) {
  const int n = conn.dim();
  return [&conn, n](double, std::span<const double> y, std::span<double> dy) {
    if (!conn.domain().contains(y.subspan(0, n))) throw DomainExit{};
    PhaseState s{Vec(y.begin(), y.begin() + n), Vec(y.begin() + n, y.end())};
    PhaseDerivative d = geodesic_rhs(conn, s);
    std::copy(d.dx.begin(), d.dx.end(), dy.begin());
    std::copy(d.dlambda.begin(), d.dlambda.end(), dy.begin() + n);
  };
}

}  // namespace

Trajectory integrate_geodesic(const ConnectionField& conn, const PhaseState& init,
                              double tau_from, double tau_to, double step) {
  const int n = conn.dim();
  if (static_cast<int>(init.x.size()) != n || static_cast<int>(init.lambda.size()) != n)
    throw ValidationError("integrate_geodesic: initial state dimension mismatch");
  if (!conn.domain().contains(init.x))
    throw ValidationError("integrate_geodesic: initial position outside the domain");
  bool nonzero = false;
  for (double v : init.lambda) nonzero = nonzero || v != 0.0;
  if (!nonzero) throw ValidationError("integrate_geodesic: initial velocity is zero");

  OdeProblem p;
  p.rhs = make_geodesic_rhs(conn);
  p.t0 = tau_from;
  p.t_end = tau_to;
  p.step = step;
  p.y0.assign(2 * n, 0.0);
  std::copy(init.x.begin(), init.x.end(), p.y0.begin());
  std::copy(init.lambda.begin(), init.lambda.end(), p.y0.begin() + n);

  Trajectory t = integrate(p);
  if (t.ts.size() < 2 && t.truncated)
    throw ConstructionError("integrate_geodesic: immediate exit (initial point on the "
                            "boundary pointing outward)");
  return t;
}

TransformGrid shoot_congruence(const ConnectionField& conn, const HypersurfaceSeed& seed,
                               const GridAxis& tau_axis,
                               const std::vector<GridAxis>& label_axes,
                               const ShootOptions& options) {
  const int n = conn.dim();
  if (static_cast<int>(seed.lambda.size()) != n)
    throw ValidationError("shoot_congruence: seed needs n direction components");
  if (seed.tilde_domain.dim() != n - 1)
    throw ValidationError("shoot_congruence: tilde domain must have n-1 axes");
  TransformGrid grid(n, tau_axis, label_axes);
  if (grid.zero_index < 0)
    throw ValidationError("shoot_congruence: the tau grid must include 0");
  const int C = grid.columns();
  const int K = grid.tau_count();
  const int k0 = grid.zero_index;
  const double dtau = tau_axis.spacing();
  const double step = dtau / options.oversampling;

  // seed invariants per column: Lambda != 0 and transversality
  // Lambda^1 - sum_i dphi/dx^i Lambda^i != 0
  std::vector<Vec> x0(C), lam0(C);
  for (int col = 0; col < C; ++col) {
    const Vec lv = grid.label_values(col);
    if (!seed.tilde_domain.contains(lv))
      throw ValidationError("shoot_congruence: label grid leaves the seed tilde domain");
    const Vec emb = embed_labels(lv, n);
    Vec l(n);
    double lmax = 0.0;
    for (int h = 0; h < n; ++h) {
      l[h] = seed.lambda[h](emb);
      lmax = std::max(lmax, std::abs(l[h]));
    }
    if (lmax < 1e-12)
      throw ConstructionError("shoot_congruence: seed direction vanishes at a label node");
    double transversal = l[0];
    for (int a = 0; a + 1 < n; ++a) {
      const double h = 1e-6 * std::max(1.0, seed.tilde_domain.extent(a));
      Vec ep = emb, em = emb;
      ep[a + 1] += h;
      em[a + 1] -= h;
      const double dphi = (seed.phi(ep) - seed.phi(em)) / (2.0 * h);
      transversal -= dphi * l[a + 1];
    }
    if (std::abs(transversal) < 1e-10)
      throw ConstructionError("shoot_congruence: seed direction is tangent to the "
                              "hypersurface at a label node");
    Vec x(n);
    x[0] = seed.phi(emb);
    for (int a = 0; a + 1 < n; ++a) x[a + 1] = lv[a];
    x0[col] = std::move(x);
    lam0[col] = std::move(l);
  }

  // one geodesic per label column; columns are independent ODE problems
  std::vector<std::exception_ptr> failures(C);
  auto shoot_column = [&](int col) {
    const int nd0 = grid.node(k0, col);
    std::copy(x0[col].begin(), x0[col].end(), grid.f_at(nd0).begin());
    std::copy(lam0[col].begin(), lam0[col].end(), grid.lambda_at(nd0).begin());
    grid.covered_flags[nd0] = 1;

    auto place = [&](const Trajectory& t, int dir) {
      const int reach = dir > 0 ? K - 1 - k0 : k0;
      for (int d = 1; d <= reach; ++d) {
        const std::size_t s = static_cast<std::size_t>(d) * options.oversampling;
        if (s >= t.ys.size()) break;
        const Vec& y = t.ys[s];
        const int nd = grid.node(k0 + dir * d, col);
        for (int c = 0; c < n; ++c) {
          grid.f_at(nd)[c] = y[c];
          grid.lambda_at(nd)[c] = dir > 0 ? y[n + c] : -y[n + c];
        }
        grid.covered_flags[nd] = 1;
      }
    };
    // an immediate exit leaves the column uncovered instead of aborting the
    // whole congruence; the aggregate guard below catches mass failures
    if (k0 < K - 1) {
      try {
        PhaseState init{x0[col], lam0[col]};
        place(integrate_geodesic(conn, init, 0.0, grid.tau.back(), step), +1);
      } catch (const ConstructionError&) {
      }
    }
    if (k0 > 0) {
      // the reversed curve is a geodesic of the same connection with -lambda
      try {
        Vec neg = lam0[col];
        for (double& v : neg) v = -v;
        PhaseState init{x0[col], neg};
        place(integrate_geodesic(conn, init, 0.0, -grid.tau.front(), step), -1);
      } catch (const ConstructionError&) {
      }
    }
    // exact second tau-derivative along the geodesic: hess(:,0,0) = -Gamma(f) l l
    for (int k = 0; k < K; ++k) {
      const int nd = grid.node(k, col);
      if (!grid.covered(nd)) continue;
      PhaseState s{Vec(grid.f_at(nd).begin(), grid.f_at(nd).end()),
                   Vec(grid.lambda_at(nd).begin(), grid.lambda_at(nd).end())};
      const PhaseDerivative d = geodesic_rhs(conn, s);
      double* h = grid.hess.data() + static_cast<std::size_t>(nd) * n * n * n;
      for (int c = 0; c < n; ++c) h[c * n * n] = d.dlambda[c];
    }
  };

  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int workers = std::min(hw, C);
  if (workers <= 1) {
    for (int col = 0; col < C; ++col) shoot_column(col);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int col = w; col < C; col += workers) {
          try {
            shoot_column(col);
          } catch (...) {
            failures[col] = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    for (int col = 0; col < C; ++col)
      if (failures[col]) std::rethrow_exception(failures[col]);
  }

  int uncovered = 0;
  for (int nd = 0; nd < grid.nodes(); ++nd) uncovered += grid.covered(nd) ? 0 : 1;
  if (uncovered > options.max_uncovered_fraction * grid.nodes())
    throw ConstructionError("shoot_congruence: " + std::to_string(uncovered) + " of " +
                            std::to_string(grid.nodes()) +
                            " nodes left the domain before covering the tau grid");

  assemble_grid_derivatives(grid);
  return grid;
}

TransformGrid identity_grid(int n, const GridAxis& tau_axis,
                            const std::vector<GridAxis>& label_axes) {
  TransformGrid grid(n, tau_axis, label_axes);
  const Mat id = Mat::identity(n);
  for (int k = 0; k < grid.tau_count(); ++k)
    for (int col = 0; col < grid.columns(); ++col) {
      const int nd = grid.node(k, col);
      const Vec xc = grid.new_coords(k, col);
      std::copy(xc.begin(), xc.end(), grid.f_at(nd).begin());
      grid.lambda_at(nd)[0] = 1.0;
      grid.set_jac(nd, id);
      grid.det_jac[nd] = 1.0;
      grid.cond_jac[nd] = 1.0;
      grid.covered_flags[nd] = 1;
      grid.regular_flags[nd] = 1;
    }
  return grid;
}

void assemble_grid_derivatives(TransformGrid& grid) {
  const int n = grid.n;
  const int K = grid.tau_count();
  const int C = grid.columns();
  const int m = grid.label_axis_count();

  for (int k = 0; k < K; ++k)
    for (int col = 0; col < C; ++col) {
      const int nd = grid.node(k, col);
      grid.regular_flags[nd] = 0;
      if (!grid.covered(nd)) continue;

      const std::vector<int> cc = grid.column_coords(col);
      bool stencil = true;
      for (int a = 0; a < m; ++a) {
        const int size = static_cast<int>(grid.labels[a].size());
        if (cc[a] < 1 || cc[a] > size - 2) stencil = false;
      }
      if (!stencil) continue;  // label-boundary node: insufficient stencil

      auto covered_nb = [&](int da, int a, int db = 0, int b = 0) {
        int c2 = col + da * grid.label_stride(a);
        if (db != 0) c2 += db * grid.label_stride(b);
        return grid.covered(grid.node(k, c2)) ? grid.node(k, c2) : -1;
      };
      bool ok = true;
      for (int a = 0; a < m && ok; ++a)
        ok = covered_nb(+1, a) >= 0 && covered_nb(-1, a) >= 0;
      for (int a = 0; a < m && ok; ++a)
        for (int b = a + 1; b < m && ok; ++b)
          ok = covered_nb(+1, a, +1, b) >= 0 && covered_nb(+1, a, -1, b) >= 0 &&
               covered_nb(-1, a, +1, b) >= 0 && covered_nb(-1, a, -1, b) >= 0;
      if (!ok) continue;

      Mat J(n, n);
      Tensor3 H = grid.hess_at(nd);  // (:,0,0) pre-seeded by the construction
      for (int c = 0; c < n; ++c) J(c, 0) = grid.lambda_at(nd)[c];

      for (int a = 0; a < m; ++a) {
        const int i = a + 1;
        const double ha = grid.labels[a][1] - grid.labels[a][0];
        const auto fp = grid.f_at(covered_nb(+1, a));
        const auto fm = grid.f_at(covered_nb(-1, a));
        const auto f0 = grid.f_at(nd);
        const auto lp = grid.lambda_at(covered_nb(+1, a));
        const auto lm = grid.lambda_at(covered_nb(-1, a));
        for (int c = 0; c < n; ++c) {
          J(c, i) = (fp[c] - fm[c]) / (2.0 * ha);
          const double dl = (lp[c] - lm[c]) / (2.0 * ha);
          H(c, 0, i) = dl;
          H(c, i, 0) = dl;
          H(c, i, i) = (fp[c] - 2.0 * f0[c] + fm[c]) / (ha * ha);
        }
        for (int b = a + 1; b < m; ++b) {
          const int j = b + 1;
          const double hb = grid.labels[b][1] - grid.labels[b][0];
          const auto fpp = grid.f_at(covered_nb(+1, a, +1, b));
          const auto fpm = grid.f_at(covered_nb(+1, a, -1, b));
          const auto fmp = grid.f_at(covered_nb(-1, a, +1, b));
          const auto fmm = grid.f_at(covered_nb(-1, a, -1, b));
          for (int c = 0; c < n; ++c) {
            const double v = (fpp[c] - fpm[c] - fmp[c] + fmm[c]) / (4.0 * ha * hb);
            H(c, i, j) = v;
            H(c, j, i) = v;
          }
        }
      }

      grid.set_jac(nd, J);
      grid.set_hess(nd, H);
      grid.det_jac[nd] = det(J);
      grid.cond_jac[nd] = cond_inf(J);
      grid.regular_flags[nd] = (std::abs(grid.det_jac[nd]) > kMinJacobianDet &&
                                grid.cond_jac[nd] < kMaxJacobianCondition)
                                   ? 1
                                   : 0;
    }
}

GridCell locate_cell(const TransformGrid& grid, std::span<const double> new_point) {
  const int n = grid.n;
  GridCell cell;
  if (static_cast<int>(new_point.size()) != n) return cell;

  std::vector<int> base(n);
  std::vector<double> w(n);
  auto locate_axis = [](const std::vector<double>& axis, double v, int& idx, double& weight) {
    const double h = axis[1] - axis[0];
    const double slack = 1e-9 * std::max(1.0, std::abs(axis.back() - axis.front()));
    if (v < axis.front() - slack || v > axis.back() + slack) return false;
    int i = static_cast<int>(std::floor((v - axis.front()) / h));
    i = std::clamp(i, 0, static_cast<int>(axis.size()) - 2);
    idx = i;
    weight = (v - axis[i]) / h;
    return true;
  };

  if (!locate_axis(grid.tau, new_point[0], base[0], w[0])) return cell;
  for (int a = 0; a < n - 1; ++a)
    if (!locate_axis(grid.labels[a], new_point[a + 1], base[a + 1], w[a + 1])) return cell;

  const int corners = 1 << n;
  cell.corner_nodes.resize(corners);
  cell.weights.resize(corners);
  for (int mask = 0; mask < corners; ++mask) {
    double weight = (mask & 1) ? w[0] : 1.0 - w[0];
    int col = 0;
    for (int a = 0; a < n - 1; ++a) {
      const int bit = (mask >> (a + 1)) & 1;
      weight *= bit ? w[a + 1] : 1.0 - w[a + 1];
      col += (base[a + 1] + bit) * grid.label_stride(a);
    }
    cell.corner_nodes[mask] = grid.node(base[0] + (mask & 1), col);
    cell.weights[mask] = weight;
  }
  cell.in_bounds = true;
  return cell;
}

void interpolate_cell(std::span<const double> data, int stride, const GridCell& cell,
                      std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t c = 0; c < cell.corner_nodes.size(); ++c) {
    const double w = cell.weights[c];
    if (w == 0.0) continue;
    const double* base = data.data() + static_cast<std::size_t>(cell.corner_nodes[c]) * stride;
    for (int j = 0; j < stride; ++j) out[j] += w * base[j];
  }
}

bool cell_regular(const TransformGrid& grid, const GridCell& cell) {
  if (!cell.in_bounds) return false;
  for (int nd : cell.corner_nodes)
    if (!grid.regular(nd)) return false;
  return true;
}

}  // namespace semigeo
