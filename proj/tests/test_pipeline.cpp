#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "semigeo/errors.hpp"
#include "semigeo/pipeline.hpp"

using namespace semigeo;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("semigeo_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("flat fixture passes with zero residuals") {
  RunConfig cfg;
  cfg.input = "flat2";
  const PipelineResult r = run_pipeline(cfg);
  CHECK(r.exit_status == 0);
  CHECK(r.report.all_pass);
  CHECK(r.report.gamma11_max == 0.0);
  CHECK(r.report.straight_deviation < 1e-12);
  CHECK(!r.report.route_agreement.has_value());
}

TEST_CASE("sheared fixture with both routes") {
  RunConfig cfg;
  cfg.input = "sheared2";
  cfg.route = Route::kBoth;
  const PipelineResult r = run_pipeline(cfg);
  CHECK(r.exit_status == 0);
  REQUIRE(r.report.route_agreement.has_value());
  CHECK(*r.report.route_agreement < 1e-5);
  CHECK(r.report.pass_route_agreement);
  CHECK(r.picard_grid.has_value());
  CHECK(!r.picard_history.empty());
}

TEST_CASE("connection spec file with an out-of-range variable") {
  const fs::path dir = temp_dir("badspec");
  const fs::path spec = dir / "bad.json";
  {
    std::ofstream out(spec);
    out << R"({"n":2,"domain":[[-1,1],[-1,1]],
               "gamma":[{"h":1,"i":1,"j":1,"expr":"x3"}]})";
  }
  RunConfig cfg;
  cfg.input = spec.string();
  try {
    run_pipeline(cfg);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("(1,1,1)") != std::string::npos);
    CHECK(what.find("offset") != std::string::npos);
  }
}

TEST_CASE("connection spec file runs end to end") {
  const fs::path dir = temp_dir("goodspec");
  const fs::path spec = dir / "sheared.json";
  {
    std::ofstream out(spec);
    out << R"({"n":2,"domain":[[-1,1],[-1,1]],"symmetric":true,
               "gamma":[{"h":2,"i":1,"j":1,"expr":"1"}]})";
  }
  RunConfig cfg;
  cfg.input = spec.string();
  const PipelineResult r = run_pipeline(cfg);
  CHECK(r.exit_status == 0);
}

TEST_CASE("seed validation") {
  RunConfig cfg;
  cfg.input = "flat2";
  SUBCASE("seed expressions must not use x1") {
    cfg.seed = R"({"phi":"x1","Lambda":["1","0"]})";
    CHECK_THROWS_AS(run_pipeline(cfg), ValidationError);
  }
  SUBCASE("Lambda needs n entries") {
    cfg.seed = R"({"phi":"0","Lambda":["1"]})";
    CHECK_THROWS_AS(run_pipeline(cfg), ValidationError);
  }
  SUBCASE("a valid inline seed is accepted") {
    cfg.seed = R"({"phi":"0.1*x2","Lambda":["1","0.2*x2"]})";
    const PipelineResult r = run_pipeline(cfg);
    CHECK(r.exit_status == 0);
  }
}

TEST_CASE("reports are byte-identical across runs") {
  RunConfig cfg;
  cfg.input = "sheared2";
  cfg.route = Route::kBoth;
  cfg.tau_axis = {-0.4, 0.4, 21};
  cfg.label_count = 11;

  const fs::path dir1 = temp_dir("det1");
  const fs::path dir2 = temp_dir("det2");
  cfg.out_dir = dir1.string();
  run_pipeline(cfg);
  cfg.out_dir = dir2.string();
  run_pipeline(cfg);

  // the out_dir is not part of the serialized report, so the bytes must match
  CHECK(slurp(dir1 / "report.json") == slurp(dir2 / "report.json"));
  CHECK(slurp(dir1 / "transform_grid.csv") == slurp(dir2 / "transform_grid.csv"));
  CHECK(slurp(dir1 / "gamma_prime.csv") == slurp(dir2 / "gamma_prime.csv"));
  CHECK(slurp(dir1 / "picard_history.csv") == slurp(dir2 / "picard_history.csv"));
}

TEST_CASE("output files and headers") {
  RunConfig cfg;
  cfg.input = "sheared2";
  cfg.route = Route::kPicard;
  cfg.tau_axis = {-0.4, 0.4, 21};
  cfg.label_count = 11;
  cfg.emit_plots = true;
  const fs::path dir = temp_dir("files");
  cfg.out_dir = dir.string();
  const PipelineResult r = run_pipeline(cfg);
  CHECK(r.exit_status == 0);

  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "transform_grid.csv"));
  CHECK(fs::exists(dir / "gamma_prime.csv"));
  CHECK(fs::exists(dir / "picard_history.csv"));
  CHECK(fs::exists(dir / "geodesics.csv"));

  const std::string grid = slurp(dir / "transform_grid.csv");
  CHECK(grid.rfind("tau,label2,f1,f2,det_jac,regular\n", 0) == 0);
  const std::string gamma = slurp(dir / "gamma_prime.csv");
  CHECK(gamma.rfind("tau,label2,g111,g112,g121,g122,g211,g212,g221,g222,residual_gamma11\n",
                    0) == 0);
  const std::string hist = slurp(dir / "picard_history.csv");
  CHECK(hist.rfind("iteration,sup_diff\n", 0) == 0);

  const std::string report = slurp(dir / "report.json");
  CHECK(report.find("\"route\": \"picard\"") != std::string::npos);
  CHECK(report.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("exit status reflects check failures") {
  RunConfig cfg;
  cfg.input = "sheared2";
  // an impossible tolerance forces a check failure without a construction error
  cfg.tol.correspondence = 1e-30;
  const PipelineResult r = run_pipeline(cfg);
  CHECK(r.exit_status == 1);
  CHECK(!r.report.all_pass);
  CHECK(!r.report.pass_correspondence);
}

TEST_CASE("unknown input throws") {
  RunConfig cfg;
  cfg.input = "definitely_not_a_fixture_or_file";
  CHECK_THROWS_AS(run_pipeline(cfg), ValidationError);
}
