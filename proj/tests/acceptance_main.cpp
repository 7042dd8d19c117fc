// Acceptance suite: end-to-end checks of the chart-construction toolkit, one
// criterion per line. Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "semigeo/errors.hpp"
#include "semigeo/fixtures.hpp"
#include "semigeo/ode.hpp"
#include "semigeo/pipeline.hpp"
#include "semigeo/rectify.hpp"
#include "semigeo/verify.hpp"

using namespace semigeo;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  if (!pass) ++g_failures;
}

void run_criterion(int criterion, const std::function<std::pair<bool, std::string>()>& fn) {
  try {
    const auto [pass, detail] = fn();
    report(criterion, pass, detail);
  } catch (const std::exception& e) {
    report(criterion, false, std::string("exception: ") + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

RunConfig tilted_sphere_config() {
  RunConfig cfg;
  cfg.input = "sphere2";
  cfg.seed = R"json({"phi":"1.5707963267948966","Lambda":["cos(0.3)","sin(0.3)"]})json";
  cfg.tau_axis = {-0.4, 0.4, 41};
  cfg.route = Route::kBoth;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- criteria -------------------------------------------------------------

std::pair<bool, std::string> criterion1_sheared_flattening() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  cfg.input = "sheared2";  // sigma: x1 = 0, Lambda = e1, 41 x 21 grid
  const PipelineResult r = run_pipeline(cfg);
  const double elapsed = seconds_since(t0);

  double sup = 0.0;  // against the closed form f = (tau, label - tau^2/2)
  const TransformGrid& g = r.grid;
  for (int k = 0; k < g.tau_count(); ++k)
    for (int col = 0; col < g.columns(); ++col) {
      const int nd = g.node(k, col);
      if (!g.covered(nd)) continue;
      const double tau = g.tau[k];
      const double lb = g.label_values(col)[0];
      sup = std::max(sup, std::abs(g.f_at(nd)[0] - tau));
      sup = std::max(sup, std::abs(g.f_at(nd)[1] - (lb - 0.5 * tau * tau)));
    }

  const bool pass = r.report.gamma11_max < 1e-3 && r.report.gamma11_mean < 1e-4 &&
                    sup < 1e-6 && elapsed < 2.0;
  return {pass, "sheared2 flattening: max|G'_11|=" + fmt(r.report.gamma11_max) +
                    " mean=" + fmt(r.report.gamma11_mean) + " |f-oracle|=" + fmt(sup) +
                    " (" + fmt(elapsed) + " s)"};
}

std::pair<bool, std::string> criterion2_already_presemigeodesic() {
  double worst = 0.0;
  {
    const Fixture polar = builtin("polar2");
    const TransformGrid g = identity_grid(2, {0.6, 1.9, 27}, {{-0.9, 0.9, 19}});
    const TransformedConnection tc = evaluate_transformed(polar.connection, g);
    for (int nd = 0; nd < g.nodes(); ++nd) worst = std::max(worst, tc.residual_gamma11[nd]);
  }
  {
    const Fixture sphere = builtin("sphere2");
    const TransformGrid g = identity_grid(2, {0.6, 2.4, 27}, {{-0.9, 0.9, 19}});
    const TransformedConnection tc = evaluate_transformed(sphere.connection, g);
    for (int nd = 0; nd < g.nodes(); ++nd) worst = std::max(worst, tc.residual_gamma11[nd]);
  }
  return {worst < 1e-10,
          "polar2/sphere2 identity transform: max|G'_11|=" + fmt(worst) + " < 1e-10"};
}

std::pair<bool, std::string> criterion3_route_agreement() {
  const auto t0 = std::chrono::steady_clock::now();

  RunConfig sheared;
  sheared.input = "sheared2";
  sheared.route = Route::kBoth;
  const PipelineResult rs = run_pipeline(sheared);

  const PipelineResult rt = run_pipeline(tilted_sphere_config());
  const double elapsed = seconds_since(t0);

  bool pass = rs.exit_status == 0 && rt.exit_status == 0;
  const double agree_sheared = rs.report.route_agreement.value_or(1.0);
  const double agree_sphere = rt.report.route_agreement.value_or(1.0);
  pass = pass && agree_sheared < 1e-5 && agree_sphere < 1e-5;

  // successive-difference ratios < 0.9 from iteration 3 onward, converged
  // below 1e-8 within 25 iterations
  bool ratios_ok = true, converged = false;
  const std::vector<double>& h = rt.picard_history;
  for (std::size_t i = 2; i < h.size(); ++i) {
    if (h[i - 1] == 0.0) break;
    ratios_ok = ratios_ok && (h[i] / h[i - 1] < 0.9);
  }
  for (std::size_t i = 0; i < h.size() && i < 25; ++i) converged = converged || h[i] < 1e-8;
  pass = pass && ratios_ok && converged && elapsed < 5.0;

  return {pass, "route agreement: sheared2=" + fmt(agree_sheared) + " sphere2(tilted)=" +
                    fmt(agree_sphere) + " ratios<0.9=" + (ratios_ok ? "yes" : "no") +
                    " conv<1e-8 in " + std::to_string(h.size()) + " iters (" + fmt(elapsed) +
                    " s)"};
}

std::pair<bool, std::string> criterion4_straight_line_characterization() {
  // forward: constructions that pass the residual bound keep lines straight
  RunConfig cfg;
  cfg.input = "sheared2";
  const PipelineResult rs = run_pipeline(cfg);
  const PipelineResult rt = run_pipeline(tilted_sphere_config());
  bool pass = rs.report.gamma11_max < 1e-3 && rs.report.straight_deviation < 1e-3 &&
              rt.report.gamma11_max < 1e-3 && rt.report.straight_deviation < 1e-3;

  // converse (detection power): the identity chart on sheared2 must fail loudly
  const Fixture sheared = builtin("sheared2");
  const TransformGrid g = identity_grid(2, {-0.5, 0.5, 41}, {{-0.875, 0.875, 29}});
  const TransformedConnection tc = evaluate_transformed(sheared.connection, g);
  std::vector<int> middle{13, 14, 15};
  const double dev = check_straight_geodesics(g, tc, middle, -0.5, 0.5, 0.0025);
  pass = pass && dev >= 0.1;

  return {pass, "straight lines: constructed dev=" + fmt(rs.report.straight_deviation) + "/" +
                    fmt(rt.report.straight_deviation) + " < 1e-3; identity-chart dev=" +
                    fmt(dev) + " >= 0.1"};
}

std::pair<bool, std::string> criterion5_geodesic_correspondence() {
  double worst = 0.0;
  std::string worst_at = "-";
  for (const std::string& name : builtin_names()) {
    for (Route route : {Route::kShoot, Route::kPicard}) {
      RunConfig cfg;
      cfg.input = name;
      cfg.route = route;
      const PipelineResult r = run_pipeline(cfg);
      if (r.report.correspondence > worst) {
        worst = r.report.correspondence;
        worst_at = name + "/" + route_name(route);
      }
      if (r.report.correspondence >= 1e-4)
        return {false, "correspondence " + fmt(r.report.correspondence) + " at " + name + "/" +
                           route_name(route)};
    }
  }
  // the tilted sphere runs from criterion 3: both grids
  const PipelineResult rt = run_pipeline(tilted_sphere_config());
  const Fixture sphere = builtin("sphere2");
  const double shoot_corr = rt.report.correspondence;
  const double picard_corr =
      check_geodesic_correspondence(sphere.connection, *rt.picard_grid);
  if (std::max(shoot_corr, picard_corr) > worst) {
    worst = std::max(shoot_corr, picard_corr);
    worst_at = "sphere2(tilted)";
  }
  const bool pass = worst < 1e-4;
  return {pass, "correspondence residual: worst=" + fmt(worst) + " at " + worst_at +
                    " (both routes, all fixtures)"};
}

std::pair<bool, std::string> criterion6_torsion_pipeline() {
  RunConfig cfg;
  cfg.input = "torsion2";
  cfg.route = Route::kBoth;
  const PipelineResult r = run_pipeline(cfg);
  const bool pass = r.exit_status == 0 && r.report.gamma11_max < 1e-3 &&
                    r.report.torsion_tensoriality < 1e-6;
  return {pass, "torsion2 end-to-end: max|G'_11|=" + fmt(r.report.gamma11_max) +
                    " torsion-tensoriality=" + fmt(r.report.torsion_tensoriality) +
                    " exit=" + std::to_string(r.exit_status)};
}

std::pair<bool, std::string> criterion7_rectification() {
  VectorFieldGrid field;
  field.n = 2;
  field.domain = Box({-1, -1}, {1, 1});
  field.xi = {ScalarField::from_source("1", 2), ScalarField::from_source("x1", 2)};
  const PicardConfig defaults = PicardConfig::with_default_data(2, {}, {});
  const TransformGrid g =
      rectify_flow(field, defaults.phi0, {-0.5, 0.5, 41}, {{-0.5, 0.5, 21}});

  double sup = 0.0;  // closed-form flow (tau, label + tau^2/2)
  for (int k = 0; k < g.tau_count(); ++k)
    for (int col = 0; col < g.columns(); ++col) {
      const int nd = g.node(k, col);
      const double tau = g.tau[k];
      const double lb = g.label_values(col)[0];
      sup = std::max(sup, std::abs(g.f_at(nd)[0] - tau));
      sup = std::max(sup, std::abs(g.f_at(nd)[1] - (lb + 0.5 * tau * tau)));
    }

  double push_dev = 0.0;  // |jac^-1 xi(f) - e1|
  for (int nd = 0; nd < g.nodes(); ++nd) {
    if (!g.regular(nd)) continue;
    const Vec pushed = solve(g.jac_at(nd), field.value(g.f_at(nd)));
    push_dev = std::max(push_dev, std::abs(pushed[0] - 1.0));
    push_dev = std::max(push_dev, std::abs(pushed[1]));
  }

  const FirstIntegralResiduals fir = first_integral_residuals(g, field);
  const bool pass = sup < 1e-9 && push_dev < 1e-5 && fir.max_r0 < 1e-5 && fir.max_r1 < 1e-5;
  return {pass, "rectify xi=(1,x1): |f-oracle|=" + fmt(sup) + " pushforward=" + fmt(push_dev) +
                    " r0=" + fmt(fir.max_r0) + " r1=" + fmt(fir.max_r1)};
}

std::pair<bool, std::string> criterion8_structure_reports() {
  bool pass = true;
  for (int n = 2; n <= 6; ++n) {
    const DofReport r = dof_report(n, false, false);
    const long long N = n;
    pass = pass && r.general_count == N * N * N;
    pass = pass && r.torsion_free_count == N * N * (N + 1) / 2;
    pass = pass && r.presemigeodesic_general == N * (N * N - 1);
    pass = pass && r.presemigeodesic_torsion_free == N * (N - 1) * (N - 1) / 2;
    pass = pass && r.equiaffine_reduction == N - 1;
  }
  pass = pass && dof_report(3, true, true).applicable == 4;

  const bool flat_eq = equiaffine_check(builtin("flat2").connection).flag;
  const bool polar_eq = equiaffine_check(builtin("polar2").connection).flag;
  const bool sphere_eq = equiaffine_check(builtin("sphere2").connection).flag;
  const EquiaffineCheck noneq = equiaffine_check(builtin("noneq2").connection);
  pass = pass && flat_eq && polar_eq && sphere_eq && !noneq.flag &&
         std::abs(noneq.residual - 1.0) <= 1e-6;
  return {pass, std::string("dof counts exact for n=2..6; equiaffine flags ") +
                    (flat_eq && polar_eq && sphere_eq ? "+++" : "???") + " noneq residual=" +
                    fmt(noneq.residual)};
}

std::pair<bool, std::string> criterion9_integrator_and_determinism() {
  auto exp_err = [](double step) {
    OdeProblem p;
    p.rhs = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0]; };
    p.y0 = {1.0};
    p.t_end = 1.0;
    p.step = step;
    return std::abs(integrate(p).back()[0] - std::numbers::e);
  };
  const double ratio = exp_err(0.05) / exp_err(0.025);
  bool pass = ratio >= 12.0 && ratio <= 20.0;

  // byte-identical reports on re-run
  RunConfig cfg = tilted_sphere_config();
  const fs::path dir1 = fs::temp_directory_path() / "semigeo_acc_det1";
  const fs::path dir2 = fs::temp_directory_path() / "semigeo_acc_det2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  cfg.out_dir = dir1.string();
  run_pipeline(cfg);
  cfg.out_dir = dir2.string();
  run_pipeline(cfg);
  const bool identical = slurp(dir1 / "report.json") == slurp(dir2 / "report.json") &&
                         slurp(dir1 / "transform_grid.csv") == slurp(dir2 / "transform_grid.csv");
  pass = pass && identical;
  return {pass, "RK4 halving ratio=" + fmt(ratio) + " in [12,20]; reports byte-identical=" +
                    (identical ? "yes" : "no")};
}

}  // namespace

int main() {
  run_criterion(1, criterion1_sheared_flattening);
  run_criterion(2, criterion2_already_presemigeodesic);
  run_criterion(3, criterion3_route_agreement);
  run_criterion(4, criterion4_straight_line_characterization);
  run_criterion(5, criterion5_geodesic_correspondence);
  run_criterion(6, criterion6_torsion_pipeline);
  run_criterion(7, criterion7_rectification);
  run_criterion(8, criterion8_structure_reports);
  run_criterion(9, criterion9_integrator_and_determinism);

  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", g_failures);
  return 1;
}
