#include "semigeo/fixtures.hpp"

#include <cmath>
#include <numbers>

#include "semigeo/errors.hpp"

namespace semigeo {

Vec ClosedFormTransform::f_at(std::span<const double> xp) const {
  Vec v(f.size());
  for (std::size_t c = 0; c < f.size(); ++c) v[c] = f[c](xp);
  return v;
}

Mat ClosedFormTransform::jac_at(std::span<const double> xp) const {
  const int n = static_cast<int>(f.size());
  Mat m(n, n);
  for (int c = 0; c < n; ++c)
    for (int i = 0; i < n; ++i) m(c, i) = jac[c * n + i](xp);
  return m;
}

Tensor3 ClosedFormTransform::hess_at(std::span<const double> xp) const {
  const int n = static_cast<int>(f.size());
  Tensor3 t(n);
  for (int c = 0; c < n; ++c)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t(c, i, j) = hess[(c * n + i) * n + j](xp);
  return t;
}

namespace {

std::vector<ScalarField> gamma_components(int n,
                                          std::initializer_list<std::pair<std::array<int, 3>,
                                                                          const char*>> entries) {
  std::vector<ScalarField> comps(static_cast<std::size_t>(n) * n * n);
  for (const auto& [idx, src] : entries)
    comps[((idx[0] - 1) * n + (idx[1] - 1)) * n + (idx[2] - 1)] =
        ScalarField::from_source(src, n);
  for (auto& c : comps)
    if (!c.valid()) c = ScalarField::zero(n);
  return comps;
}

std::vector<ScalarField> metric_components(int n, std::initializer_list<const char*> row_major) {
  std::vector<ScalarField> g;
  for (const char* src : row_major) g.push_back(ScalarField::from_source(src, n));
  (void)n;
  return g;
}

ClosedFormTransform sheared_transform() {
  ClosedFormTransform t;
  const int n = 2;
  auto field = [&](const char* src) { return ScalarField::from_source(src, n); };
  t.f = {field("x1"), field("x2 - x1^2/2")};
  t.jac = {field("1"), field("0"), field("-x1"), field("1")};
  t.hess.assign(n * n * n, ScalarField::zero(n));
  t.hess[(1 * n + 0) * n + 0] = field("-1");  // d2 x^2 / dx'1 dx'1
  return t;
}

HypersurfaceSeed straight_seed(int n, double phi_value, Box tilde_domain) {
  HypersurfaceSeed seed;
  seed.phi = ScalarField::constant(n, phi_value);
  seed.lambda.resize(n);
  seed.lambda[0] = ScalarField::constant(n, 1.0);
  for (int h = 1; h < n; ++h) seed.lambda[h] = ScalarField::zero(n);
  seed.tilde_domain = std::move(tilde_domain);
  return seed;
}

Box unit_box(int n, double lo = -1.0, double hi = 1.0) {
  return Box(Vec(n, lo), Vec(n, hi));
}

Fixture make_flat(int n, std::string name) {
  Fixture fx{std::move(name),
             ConnectionField(n, unit_box(n), gamma_components(n, {}), true),
             std::nullopt,
             std::nullopt,
             std::nullopt,
             true,
             true,
             true,
             straight_seed(n, 0.0, unit_box(n - 1, -0.5, 0.5))};
  std::vector<ScalarField> g(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g[i * n + j] = ScalarField::constant(n, i == j ? 1.0 : 0.0);
  fx.metric = MetricField(n, unit_box(n), std::move(g));
  fx.geodesics = GeodesicFamily{
      [n](double c, double tau) {
        PhaseState s{Vec(n, 0.0), Vec(n, 0.0)};
        s.x[0] = tau;
        if (n > 1) s.x[1] = c;
        s.lambda[0] = 1.0;
        return s;
      },
      -0.5, 0.5, -0.9, 0.9};
  return fx;
}

Fixture make_sheared(bool with_torsion) {
  const int n = 2;
  std::vector<ScalarField> comps =
      with_torsion ? gamma_components(n, {{{2, 1, 1}, "1"},
                                          {{1, 1, 2}, "0.5"},
                                          {{1, 2, 1}, "-0.5"}})
                   : gamma_components(n, {{{2, 1, 1}, "1"}});
  Fixture fx{with_torsion ? "torsion2" : "sheared2",
             ConnectionField(n, unit_box(n), std::move(comps), !with_torsion),
             std::nullopt,
             sheared_transform(),
             std::nullopt,
             !with_torsion,
             !with_torsion,
             false,
             straight_seed(n, 0.0, unit_box(1, -0.5, 0.5))};
  fx.geodesics = GeodesicFamily{
      [](double c, double tau) {
        return PhaseState{{tau, c - 0.5 * tau * tau}, {1.0, -tau}};
      },
      -0.5, 0.5, -0.9, 0.9};
  return fx;
}

Fixture make_polar() {
  const int n = 2;
  Box dom({0.5, -1.0}, {2.0, 1.0});
  Fixture fx{"polar2",
             ConnectionField(n, dom,
                             gamma_components(n, {{{1, 2, 2}, "-x1"},
                                                  {{2, 1, 2}, "1/x1"},
                                                  {{2, 2, 1}, "1/x1"}}),
                             true),
             MetricField(n, dom, metric_components(n, {"1", "0", "0", "x1^2"})),
             std::nullopt,
             std::nullopt,
             true,
             true,
             true,
             straight_seed(n, 1.0, unit_box(1, -0.5, 0.5))};
  fx.geodesics = GeodesicFamily{
      [](double c, double tau) {
        return PhaseState{{1.0 + tau, c}, {1.0, 0.0}};  // radial lines
      },
      -0.5, 0.5, -0.45, 0.9};
  return fx;
}

Fixture make_sphere() {
  const int n = 2;
  const double half_pi = std::numbers::pi / 2.0;
  Box dom({0.5, -1.0}, {2.5, 1.0});
  Fixture fx{"sphere2",
             ConnectionField(n, dom,
                             gamma_components(n, {{{1, 2, 2}, "-sin(x1)*cos(x1)"},
                                                  {{2, 1, 2}, "cos(x1)/sin(x1)"},
                                                  {{2, 2, 1}, "cos(x1)/sin(x1)"}}),
                             true),
             MetricField(n, dom, metric_components(n, {"1", "0", "0", "sin(x1)^2"})),
             std::nullopt,
             std::nullopt,
             true,
             true,
             true,
             straight_seed(n, half_pi, unit_box(1, -0.5, 0.5))};
  fx.geodesics = GeodesicFamily{
      [half_pi](double c, double tau) {
        return PhaseState{{half_pi + tau, c}, {1.0, 0.0}};  // meridians
      },
      -0.5, 0.5, -0.9, 0.9};
  return fx;
}

Fixture make_noneq() {
  const int n = 2;
  Fixture fx{"noneq2",
             ConnectionField(n, unit_box(n), gamma_components(n, {{{1, 1, 1}, "x2"}}), true),
             std::nullopt,
             std::nullopt,
             std::nullopt,
             true,
             false,
             false,
             straight_seed(n, 0.0, unit_box(1, -0.5, 0.5))};
  fx.geodesics = GeodesicFamily{
      [](double c, double tau) {
        return PhaseState{{c, tau}, {0.0, 1.0}};  // x2-lines never excite Gamma^1_11
      },
      -0.5, 0.5, -0.9, 0.9};
  return fx;
}

}  // namespace

Fixture builtin(std::string_view name) {
  if (name == "flat2") return make_flat(2, "flat2");
  if (name == "flat3") return make_flat(3, "flat3");
  if (name == "sheared2") return make_sheared(false);
  if (name == "torsion2") return make_sheared(true);
  if (name == "polar2") return make_polar();
  if (name == "sphere2") return make_sphere();
  if (name == "noneq2") return make_noneq();
  throw ValidationError("unknown fixture '" + std::string(name) + "'");
}

std::vector<std::string> builtin_names() {
  return {"flat2", "flat3", "sheared2", "polar2", "sphere2", "torsion2", "noneq2"};
}

}  // namespace semigeo
