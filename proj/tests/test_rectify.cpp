#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "semigeo/errors.hpp"
#include "semigeo/fixtures.hpp"
#include "semigeo/rectify.hpp"

using namespace semigeo;

namespace {

VectorFieldGrid make_field(int n, Box domain, std::vector<const char*> sources) {
  VectorFieldGrid f;
  f.n = n;
  f.domain = std::move(domain);
  for (const char* src : sources) f.xi.push_back(ScalarField::from_source(src, n));
  return f;
}

std::vector<ScalarField> default_phi(int n) {
  return PicardConfig::with_default_data(n, {}, {}).phi0;
}

double sup_f_difference(const TransformGrid& a, const TransformGrid& b) {
  double worst = 0.0;
  for (int nd = 0; nd < a.nodes(); ++nd) {
    if (!a.covered(nd) || !b.covered(nd)) continue;
    for (int c = 0; c < a.n; ++c)
      worst = std::max(worst, std::abs(a.f_at(nd)[c] - b.f_at(nd)[c]));
  }
  return worst;
}

}  // namespace

TEST_CASE("rectify_flow") {
  SUBCASE("an already straight field gives the identity chart") {
    const VectorFieldGrid field = make_field(2, Box({-1, -1}, {1, 1}), {"1", "0"});
    const TransformGrid g =
        rectify_flow(field, default_phi(2), {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
    for (int k = 0; k < g.tau_count(); ++k)
      for (int col = 0; col < g.columns(); ++col) {
        const int nd = g.node(k, col);
        const Vec xc = g.new_coords(k, col);
        REQUIRE(std::abs(g.f_at(nd)[0] - xc[0]) < 1e-13);
        REQUIRE(std::abs(g.f_at(nd)[1] - xc[1]) < 1e-13);
      }
  }
  SUBCASE("xi = (1, x1) matches the closed-form flow") {
    const VectorFieldGrid field = make_field(2, Box({-1, -1}, {1, 1}), {"1", "x1"});
    const TransformGrid g =
        rectify_flow(field, default_phi(2), {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
    for (int k = 0; k < g.tau_count(); ++k)
      for (int col = 0; col < g.columns(); ++col) {
        const int nd = g.node(k, col);
        const double tau = g.tau[k];
        const double lb = g.label_values(col)[0];
        REQUIRE(std::abs(g.f_at(nd)[0] - tau) < 1e-9);
        REQUIRE(std::abs(g.f_at(nd)[1] - (lb + 0.5 * tau * tau)) < 1e-9);
      }
  }
  SUBCASE("straightening: the pushforward of xi is the first basis vector") {
    const VectorFieldGrid field =
        make_field(2, Box({-1.5, -1.5}, {1.5, 1.5}), {"1 + 0.2*x2", "x1 - 0.1*x2"});
    const TransformGrid g =
        rectify_flow(field, default_phi(2), {-0.4, 0.4, 33}, {{-0.5, 0.5, 21}});
    for (int nd = 0; nd < g.nodes(); ++nd) {
      if (!g.regular(nd)) continue;
      const Vec xi_val = field.value(g.f_at(nd));
      const Vec pushed = solve(g.jac_at(nd), xi_val);
      REQUIRE(std::abs(pushed[0] - 1.0) < 1e-5);
      REQUIRE(std::abs(pushed[1]) < 1e-5);
    }
  }
  SUBCASE("vanishing field at a base point is an error") {
    const VectorFieldGrid field = make_field(2, Box({-1, -1}, {1, 1}), {"x1", "x2"});
    CHECK_THROWS_AS(rectify_flow(field, default_phi(2), {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}}),
                    ConstructionError);
  }
}

TEST_CASE("picard_solve") {
  SUBCASE("flat connection: iterate 2 is already the fixed point") {
    const Fixture flat = builtin("flat2");
    PicardConfig cfg = PicardConfig::with_default_data(2, {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
    const PicardResult r = picard_solve(flat.connection, cfg);
    REQUIRE(r.iterations <= 4);
    for (int k = 0; k < r.grid.tau_count(); ++k)
      for (int col = 0; col < r.grid.columns(); ++col) {
        const int nd = r.grid.node(k, col);
        const Vec xc = r.grid.new_coords(k, col);
        REQUIRE(std::abs(r.grid.f_at(nd)[0] - xc[0]) < 1e-14);
        REQUIRE(std::abs(r.grid.f_at(nd)[1] - xc[1]) < 1e-14);
      }
  }
  SUBCASE("sheared fixture agrees with the shooting route") {
    const Fixture sheared = builtin("sheared2");
    const GridAxis tau{-0.5, 0.5, 41};
    const std::vector<GridAxis> labels{{-0.5, 0.5, 21}};
    const TransformGrid shoot =
        shoot_congruence(sheared.connection, sheared.default_seed, tau, labels);
    PicardConfig cfg = PicardConfig::with_default_data(2, tau, labels);
    const PicardResult r = picard_solve(sheared.connection, cfg);
    CHECK(sup_f_difference(shoot, r.grid) < 1e-6);
  }
  SUBCASE("tilted seed on the sphere fixture vs the RK4 oracle") {
    // sigma: theta = pi/4 with an asymmetric tau span inside |tau| <= 0.4
    // (the two-sided tube would leave the fixture domain box)
    const Fixture sphere = builtin("sphere2");
    const double alpha = 0.3;
    HypersurfaceSeed seed;
    seed.phi = ScalarField::constant(2, std::numbers::pi / 4.0);
    seed.lambda = {ScalarField::constant(2, std::cos(alpha)),
                   ScalarField::constant(2, std::sin(alpha))};
    seed.tilde_domain = Box({-0.6}, {0.6});
    const GridAxis tau{-0.2, 0.4, 31};
    const std::vector<GridAxis> labels{{-0.5, 0.5, 21}};
    const TransformGrid shoot = shoot_congruence(sphere.connection, seed, tau, labels);

    PicardConfig cfg = PicardConfig::with_default_data(2, tau, labels);
    cfg.phi0[0] = seed.phi;
    cfg.phi1 = seed.lambda;
    const PicardResult r = picard_solve(sphere.connection, cfg);

    CHECK(sup_f_difference(shoot, r.grid) < 1e-5);
    REQUIRE(r.history.size() >= 5);
    // ratios after iteration 3 sit well inside the contraction regime
    for (std::size_t i = 3; i < r.history.size(); ++i) {
      if (r.history[i - 1] == 0.0) break;
      CHECK(r.history[i] / r.history[i - 1] < 0.5);
    }
  }
  SUBCASE("contraction on every two-dimensional fixture") {
    for (const char* name : {"flat2", "sheared2", "polar2", "sphere2", "torsion2", "noneq2"}) {
      const Fixture fx = builtin(name);
      const GridAxis tau{-0.4, 0.4, 33};
      const std::vector<GridAxis> labels{{-0.5, 0.5, 11}};
      PicardConfig cfg = PicardConfig::with_default_data(2, tau, labels);
      cfg.phi0[0] = fx.default_seed.phi;
      cfg.phi1 = fx.default_seed.lambda;
      const PicardResult r = picard_solve(fx.connection, cfg);
      // eventually monotone with ratio < 0.9
      for (std::size_t i = 3; i < r.history.size(); ++i) {
        if (r.history[i - 1] == 0.0) break;
        REQUIRE(r.history[i] / r.history[i - 1] < 0.9);
      }
      // and the routes agree
      const TransformGrid shoot =
          shoot_congruence(fx.connection, fx.default_seed, tau, labels);
      REQUIRE(sup_f_difference(shoot, r.grid) < 1e-5);
    }
  }
  SUBCASE("non-convergence raises PicardError with the history") {
    const Fixture sheared = builtin("sheared2");
    PicardConfig cfg = PicardConfig::with_default_data(2, {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
    cfg.max_iterations = 2;
    try {
      picard_solve(sheared.connection, cfg);
      FAIL("expected PicardError");
    } catch (const PicardError& e) {
      CHECK(e.history().size() == 2);
    }
  }
}

TEST_CASE("invert_transform") {
  SUBCASE("identity grid") {
    const TransformGrid g = identity_grid(2, {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
    const Vec xp = invert_transform(g, Vec{0.3, 0.4});
    CHECK(xp[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(xp[1] == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("sheared congruence grid: the label is v + u^2/2") {
    const Fixture sheared = builtin("sheared2");
    const TransformGrid g = shoot_congruence(sheared.connection, sheared.default_seed,
                                             {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
    const Vec xp = invert_transform(g, Vec{0.4, 0.12});
    CHECK(xp[0] == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(xp[1] == doctest::Approx(0.2).epsilon(1e-6));
  }
  SUBCASE("points outside the tube are rejected") {
    const Fixture sheared = builtin("sheared2");
    const TransformGrid g = shoot_congruence(sheared.connection, sheared.default_seed,
                                             {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
    CHECK_THROWS_AS(invert_transform(g, Vec{0.0, 5.0}), InversionError);
  }
  SUBCASE("round trip at random regular nodes and cell-interior points") {
    const Fixture sheared = builtin("sheared2");
    const TransformGrid g = shoot_congruence(sheared.connection, sheared.default_seed,
                                             {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> pick(0, g.nodes() - 1);
    int done = 0;
    while (done < 100) {
      const int nd = pick(rng);
      if (!g.regular(nd)) continue;
      ++done;
      const Vec xc = g.new_coords(nd / g.columns(), nd % g.columns());
      const Vec back = invert_transform(g, g.f_at(nd));
      REQUIRE(std::abs(back[0] - xc[0]) < 1e-8);
      REQUIRE(std::abs(back[1] - xc[1]) < 1e-8);
    }
    // interpolation-consistent round trip inside regular cells
    std::uniform_real_distribution<double> ut(-0.4, 0.4), ul(-0.35, 0.35);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec xp{ut(rng), ul(rng)};
      const GridCell cell = locate_cell(g, xp);
      REQUIRE(cell.in_bounds);
      if (!cell_regular(g, cell)) continue;
      Vec fx(2);
      interpolate_cell(g.f, 2, cell, fx);
      const Vec back = invert_transform(g, fx);
      REQUIRE(std::abs(back[0] - xp[0]) < 1e-8);
      REQUIRE(std::abs(back[1] - xp[1]) < 1e-8);
    }
  }
}

TEST_CASE("first_integral_residuals") {
  SUBCASE("identity grid with the straight field is exact") {
    const TransformGrid g = identity_grid(2, {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
    const VectorFieldGrid field = make_field(2, Box({-1, -1}, {1, 1}), {"1", "0"});
    const FirstIntegralResiduals r = first_integral_residuals(g, field);
    CHECK(r.attempted > 20);
    CHECK(r.failed == 0);
    // exact up to grid-coordinate rounding (lo + k*h is not associative)
    CHECK(r.max_r0 < 1e-14);
    CHECK(r.max_r1 < 1e-14);
  }
  SUBCASE("rectified flow for xi = (1, x1)") {
    const VectorFieldGrid field = make_field(2, Box({-1, -1}, {1, 1}), {"1", "x1"});
    const TransformGrid g =
        rectify_flow(field, default_phi(2), {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
    const FirstIntegralResiduals r = first_integral_residuals(g, field);
    CHECK(r.max_r0 < 1e-5);
    CHECK(r.max_r1 < 1e-5);
  }
  SUBCASE("geodesic labels are first integrals of the velocity field") {
    // fixture B congruence with xi = the geodesic velocity field (1, -x1)
    const Fixture sheared = builtin("sheared2");
    const TransformGrid g = shoot_congruence(sheared.connection, sheared.default_seed,
                                             {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
    const VectorFieldGrid field = make_field(2, Box({-1, -1}, {1, 1}), {"1", "-x1"});
    const FirstIntegralResiduals r = first_integral_residuals(g, field);
    CHECK(r.max_r0 < 1e-5);
    CHECK(r.max_r1 < 1e-5);
  }
}
