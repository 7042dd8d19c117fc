#include "semigeo/connection.hpp"

#include <cmath>
#include <utility>

#include <json.hpp>

#include "semigeo/errors.hpp"

namespace semigeo {

Box::Box(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size() || lo_.empty())
    throw ValidationError("box bounds must be non-empty and of equal length");
  for (std::size_t i = 0; i < lo_.size(); ++i)
    if (!(lo_[i] < hi_[i]))
      throw ValidationError("box axis " + std::to_string(i + 1) + " has lo >= hi");
}

bool Box::contains(std::span<const double> x, double margin) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo_[i] + margin || x[i] > hi_[i] - margin) return false;
  return true;
}

ScalarField::ScalarField(int dimension, Fn fn, std::string source)
    : dim_(dimension), fn_(std::move(fn)), source_(std::move(source)) {}

ScalarField ScalarField::from_expr(const Expr& e) {
  return ScalarField(
      e.dimension(), [e](std::span<const double> x) { return e.eval(x); }, e.to_string());
}

ScalarField ScalarField::from_source(std::string_view source, int dimension) {
  Expr e = Expr::parse(source, dimension);
  return ScalarField(
      dimension, [e](std::span<const double> x) { return e.eval(x); }, std::string(source));
}

ScalarField ScalarField::constant(int dimension, double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return ScalarField(
      dimension, [value](std::span<const double>) { return value; }, buf);
}

namespace {

// Coarse sample lattice used for load-time checks; kept small for n > 3.
std::vector<Vec> coarse_grid(const Box& box, int per_axis) {
  const int n = box.dim();
  std::vector<Vec> pts;
  std::vector<int> idx(n, 0);
  while (true) {
    Vec p(n);
    for (int a = 0; a < n; ++a)
      p[a] = box.lo(a) + box.extent(a) * (idx[a] + 0.5) / per_axis;
    pts.push_back(std::move(p));
    int a = n - 1;
    while (a >= 0 && ++idx[a] == per_axis) idx[a--] = 0;
    if (a < 0) break;
  }
  return pts;
}

}  // namespace

ConnectionField::ConnectionField(int n, Box domain, std::vector<ScalarField> components,
                                 bool declared_symmetric)
    : n_(n), domain_(std::move(domain)), symmetric_(declared_symmetric),
      comps_(std::move(components)) {
  if (n_ < 2) throw ValidationError("connection dimension must be at least 2");
  if (domain_.dim() != n_) throw ValidationError("connection domain dimension mismatch");
  if (static_cast<int>(comps_.size()) != n_ * n_ * n_)
    throw ValidationError("connection needs n^3 components");
  for (const ScalarField& c : comps_)
    if (!c.valid() || c.dimension() != n_)
      throw ValidationError("connection component has wrong dimension");

  const int per_axis = n_ <= 3 ? 4 : 2;
  for (const Vec& p : coarse_grid(domain_, per_axis)) {
    for (int h = 0; h < n_; ++h)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
          const double v = gamma(h, i, j, p);
          if (!std::isfinite(v))
            throw ValidationError("connection component is not finite inside the domain");
          if (symmetric_ && j < i && v != gamma(h, j, i, p))
            throw ValidationError("connection declared symmetric but Gamma^" +
                                  std::to_string(h + 1) + "_{" + std::to_string(i + 1) +
                                  std::to_string(j + 1) + "} != Gamma^" + std::to_string(h + 1) +
                                  "_{" + std::to_string(j + 1) + std::to_string(i + 1) + "}");
        }
  }
}

Tensor3 ConnectionField::gamma_all(std::span<const double> x) const {
  Tensor3 g(n_);
  for (int h = 0; h < n_; ++h)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) g(h, i, j) = gamma(h, i, j, x);
  return g;
}

MetricField::MetricField(int n, Box domain, std::vector<ScalarField> g, int e)
    : n_(n), domain_(std::move(domain)), e_(e), g_(std::move(g)) {
  if (n_ < 2) throw ValidationError("metric dimension must be at least 2");
  if (static_cast<int>(g_.size()) != n_ * n_)
    throw ValidationError("metric needs n^2 components");
  if (e_ != 1 && e_ != -1) throw ValidationError("metric signature sign must be +1 or -1");
  for (const Vec& p : coarse_grid(domain_, n_ <= 3 ? 4 : 2)) {
    Mat m = value(p);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < i; ++j)
        if (m(i, j) != m(j, i)) throw ValidationError("metric is not symmetric");
    if (std::abs(det(m)) < 1e-14)
      throw ValidationError("metric is singular inside the domain");
  }
}

Mat MetricField::value(std::span<const double> x) const {
  Mat m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = g_[i * n_ + j](x);
  return m;
}

ConnectionField connection_from_spec(std::string_view json_document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_document);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("connection spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("domain"))
    throw ValidationError("connection spec must be an object with \"n\" and \"domain\"");
  const int n = doc["n"].get<int>();
  if (n < 2) throw ValidationError("connection spec: n must be >= 2");

  const auto& dom = doc["domain"];
  if (!dom.is_array() || static_cast<int>(dom.size()) != n)
    throw ValidationError("connection spec: \"domain\" must list one [lo,hi] per coordinate");
  Vec lo(n), hi(n);
  for (int a = 0; a < n; ++a) {
    if (!dom[a].is_array() || dom[a].size() != 2)
      throw ValidationError("connection spec: domain entries must be [lo,hi]");
    lo[a] = dom[a][0].get<double>();
    hi[a] = dom[a][1].get<double>();
  }

  const bool symmetric = doc.value("symmetric", false);
  std::vector<ScalarField> comps(static_cast<std::size_t>(n) * n * n);
  std::vector<bool> seen(comps.size(), false);
  if (doc.contains("gamma")) {
    if (!doc["gamma"].is_array())
      throw ValidationError("connection spec: \"gamma\" must be an array");
    for (const auto& entry : doc["gamma"]) {
      if (!entry.is_object() || !entry.contains("h") || !entry.contains("i") ||
          !entry.contains("j") || !entry.contains("expr"))
        throw ValidationError("connection spec: gamma entries need h, i, j, expr");
      const int h = entry["h"].get<int>();
      const int i = entry["i"].get<int>();
      const int j = entry["j"].get<int>();
      if (h < 1 || h > n || i < 1 || i > n || j < 1 || j > n)
        throw ValidationError("connection spec: gamma index out of range (1-based)");
      const std::size_t flat = ((h - 1) * n + (i - 1)) * n + (j - 1);
      if (seen[flat])
        throw ValidationError("connection spec: duplicate gamma entry for (" +
                              std::to_string(h) + "," + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      seen[flat] = true;
      const std::string src = entry["expr"].get<std::string>();
      try {
        comps[flat] = ScalarField::from_source(src, n);
      } catch (const ParseError& e) {
        throw ValidationError("connection spec: component (" + std::to_string(h) + "," +
                              std::to_string(i) + "," + std::to_string(j) + "): " + e.what());
      }
    }
  }
  for (ScalarField& c : comps)
    if (!c.valid()) c = ScalarField::zero(n);

  return ConnectionField(n, Box(std::move(lo), std::move(hi)), std::move(comps), symmetric);
}

Tensor3 christoffel_from_metric(const MetricField& metric, std::span<const double> x) {
  const int n = metric.dim();
  const Box& box = metric.domain();
  Vec h(n);
  for (int a = 0; a < n; ++a) h[a] = 1e-5 * box.extent(a);
  if (!box.contains(x, 0.0))
    throw ValidationError("christoffel_from_metric: point outside the metric domain");
  for (int a = 0; a < n; ++a)
    if (x[a] - h[a] < box.lo(a) || x[a] + h[a] > box.hi(a))
      throw ValidationError("christoffel_from_metric: point too close to the boundary "
                            "for the finite-difference stencil");

  // dg[a](i,j) = d g_ij / d x^a by central differences
  std::vector<Mat> dg(n);
  Vec p(x.begin(), x.end());
  for (int a = 0; a < n; ++a) {
    p[a] = x[a] + h[a];
    Mat plus = metric.value(p);
    p[a] = x[a] - h[a];
    Mat minus = metric.value(p);
    p[a] = x[a];
    dg[a] = Mat(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dg[a](i, j) = (plus(i, j) - minus(i, j)) / (2.0 * h[a]);
  }

  const Mat g = metric.value(x);
  if (std::abs(det(g)) < 1e-14)
    throw NumericsError("christoffel_from_metric: singular metric at the point");

  Tensor3 out(n);
  Vec rhs(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k)
        rhs[k] = 0.5 * (dg[i](j, k) + dg[j](i, k) - dg[k](i, j));
      Vec col = solve(g, rhs);
      for (int hh = 0; hh < n; ++hh) out(hh, i, j) = col[hh];
    }
  return out;
}

PhaseDerivative geodesic_rhs(const ConnectionField& conn, const PhaseState& state) {
  const int n = conn.dim();
  PhaseDerivative d{state.lambda, Vec(n, 0.0)};
  const Tensor3 g = conn.gamma_all(state.x);
  for (int h = 0; h < n; ++h) {
    double acc = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) acc += g(h, a, b) * state.lambda[a] * state.lambda[b];
    d.dlambda[h] = -acc;
  }
  return d;
}

Tensor3 torsion_at(const ConnectionField& conn, std::span<const double> x) {
  const int n = conn.dim();
  const Tensor3 g = conn.gamma_all(x);
  Tensor3 t(n);
  for (int h = 0; h < n; ++h)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t(h, i, j) = g(h, i, j) - g(h, j, i);
  return t;
}

Tensor3 transform_components(const Tensor3& gamma, const Mat& jac, const Tensor3& hess) {
  const int n = gamma.dim();
  const double cond = cond_inf(jac);
  if (!(cond < kMaxJacobianCondition))
    throw NumericsError("transform_components: Jacobian condition number " +
                        std::to_string(cond) + " exceeds " +
                        std::to_string(kMaxJacobianCondition));
  const Mat inv = inverse(jac);

  Tensor3 out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // a(c) = gamma(c,a,b) jac(a,i) jac(b,j) + hess(c,i,j)
      Vec a(n, 0.0);
      for (int c = 0; c < n; ++c) {
        double s = hess(c, i, j);
        for (int al = 0; al < n; ++al) {
          if (jac(al, i) == 0.0) continue;
          for (int be = 0; be < n; ++be)
            s += gamma(c, al, be) * jac(al, i) * jac(be, j);
        }
        a[c] = s;
      }
      for (int h = 0; h < n; ++h) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) s += inv(h, c) * a[c];
        out(h, i, j) = s;
      }
    }
  return out;
}

Tensor3 transform_connection_at(const ConnectionField& conn,
                                std::span<const double> old_point, const Mat& jac,
                                const Tensor3& hess) {
  return transform_components(conn.gamma_all(old_point), jac, hess);
}

}  // namespace semigeo
