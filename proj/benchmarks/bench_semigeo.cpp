#include <benchmark/benchmark.h>

#include <numbers>

#include "semigeo/expr.hpp"
#include "semigeo/fixtures.hpp"
#include "semigeo/geodesic.hpp"
#include "semigeo/ode.hpp"
#include "semigeo/rectify.hpp"
#include "semigeo/verify.hpp"

using namespace semigeo;

static void BM_ExprEval(benchmark::State& state) {
  const Expr e = Expr::parse("-sin(x1)*cos(x1) + x2^2/(1 + cosh(x1))", 2);
  const Vec p{0.7, -0.3};
  for (auto _ : state) benchmark::DoNotOptimize(e.eval(p));
}
BENCHMARK(BM_ExprEval);

static void BM_GeodesicRhs(benchmark::State& state) {
  const Fixture sphere = builtin("sphere2");
  const PhaseState s{{1.1, 0.3}, {0.9, 0.2}};
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_rhs(sphere.connection, s));
}
BENCHMARK(BM_GeodesicRhs);

static void BM_IntegrateGeodesic(benchmark::State& state) {
  const Fixture sphere = builtin("sphere2");
  const PhaseState init{{std::numbers::pi / 2.0, 0.0}, {1.0, 0.2}};
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_geodesic(sphere.connection, init, 0.0, 0.5, 2.5e-3));
}
BENCHMARK(BM_IntegrateGeodesic);

static void BM_ShootCongruence(benchmark::State& state) {
  const Fixture sheared = builtin("sheared2");
  for (auto _ : state)
    benchmark::DoNotOptimize(shoot_congruence(sheared.connection, sheared.default_seed,
                                              {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}}));
}
BENCHMARK(BM_ShootCongruence);

static void BM_PicardSphere(benchmark::State& state) {
  const Fixture sphere = builtin("sphere2");
  PicardConfig cfg = PicardConfig::with_default_data(2, {-0.4, 0.4, 41}, {{-0.5, 0.5, 21}});
  cfg.phi0[0] = ScalarField::constant(2, std::numbers::pi / 2.0);
  cfg.phi1 = {ScalarField::constant(2, 0.955336489125606), // cos 0.3
              ScalarField::constant(2, 0.29552020666133955)};  // sin 0.3
  for (auto _ : state) benchmark::DoNotOptimize(picard_solve(sphere.connection, cfg));
}
BENCHMARK(BM_PicardSphere);

static void BM_EvaluateTransformed(benchmark::State& state) {
  const Fixture sheared = builtin("sheared2");
  const TransformGrid grid = shoot_congruence(sheared.connection, sheared.default_seed,
                                              {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
  for (auto _ : state)
    benchmark::DoNotOptimize(evaluate_transformed(sheared.connection, grid));
}
BENCHMARK(BM_EvaluateTransformed);

static void BM_InvertTransform(benchmark::State& state) {
  const Fixture sheared = builtin("sheared2");
  const TransformGrid grid = shoot_congruence(sheared.connection, sheared.default_seed,
                                              {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});
  const Vec target{0.31, 0.07};
  for (auto _ : state) benchmark::DoNotOptimize(invert_transform(grid, target));
}
BENCHMARK(BM_InvertTransform);

BENCHMARK_MAIN();
