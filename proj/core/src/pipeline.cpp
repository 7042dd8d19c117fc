#include "semigeo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "semigeo/errors.hpp"

namespace semigeo {

std::string route_name(Route r) {
  switch (r) {
    case Route::kShoot: return "shoot";
    case Route::kPicard: return "picard";
    case Route::kBoth: return "both";
  }
  return "?";
}

Route route_from_name(std::string_view name) {
  if (name == "shoot") return Route::kShoot;
  if (name == "picard") return Route::kPicard;
  if (name == "both") return Route::kBoth;
  throw ValidationError("unknown route '" + std::string(name) +
                        "' (expected shoot, picard or both)");
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScalarField label_field(std::string_view source, int n) {
  Expr e = Expr::parse(source, n);
  if (e.uses_variable(1))
    throw ValidationError("seed expression '" + std::string(source) +
                          "' must depend on the labels x2..xn only");
  return ScalarField::from_expr(e);
}

HypersurfaceSeed default_seed(int n, const Box& tilde_domain) {
  HypersurfaceSeed seed;
  seed.phi = ScalarField::zero(n);
  seed.lambda.resize(n);
  seed.lambda[0] = ScalarField::constant(n, 1.0);
  for (int h = 1; h < n; ++h) seed.lambda[h] = ScalarField::zero(n);
  seed.tilde_domain = tilde_domain;
  return seed;
}

}  // namespace

HypersurfaceSeed parse_seed_spec(std::string_view json_text, int n, const Box& tilde_domain) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("seed spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("phi") || !doc.contains("Lambda"))
    throw ValidationError("seed spec needs \"phi\" and \"Lambda\"");
  if (!doc["Lambda"].is_array() || static_cast<int>(doc["Lambda"].size()) != n)
    throw ValidationError("seed spec: \"Lambda\" must list n expressions");
  HypersurfaceSeed seed;
  seed.phi = label_field(doc["phi"].get<std::string>(), n);
  seed.lambda.resize(n);
  for (int h = 0; h < n; ++h)
    seed.lambda[h] = label_field(doc["Lambda"][h].get<std::string>(), n);
  seed.tilde_domain = tilde_domain;
  return seed;
}

namespace {

struct LoadedInput {
  ConnectionField connection;
  HypersurfaceSeed seed;
};

LoadedInput load_input(const RunConfig& config, double label_lo, double label_hi) {
  const auto names = builtin_names();
  const bool is_fixture =
      std::find(names.begin(), names.end(), config.input) != names.end();
  std::optional<Fixture> fx;
  std::optional<ConnectionField> conn;
  if (is_fixture) {
    fx = builtin(config.input);
  } else {
    conn = connection_from_spec(read_file(config.input));
  }
  const int n = is_fixture ? fx->connection.dim() : conn->dim();
  Box tilde_domain(Vec(n - 1, label_lo), Vec(n - 1, label_hi));

  HypersurfaceSeed seed;
  if (!config.seed.empty()) {
    const std::string text = config.seed.front() == '{' ? config.seed : read_file(config.seed);
    seed = parse_seed_spec(text, n, tilde_domain);
  } else if (is_fixture) {
    seed = fx->default_seed;
    seed.tilde_domain = tilde_domain;  // the run's label box is the tube base
  } else {
    seed = default_seed(n, tilde_domain);
  }
  return {is_fixture ? std::move(fx->connection) : std::move(*conn), std::move(seed)};
}

std::vector<int> pick_straight_columns(const TransformGrid& grid, int wanted) {
  std::vector<int> interior;
  for (int col = 0; col < grid.columns(); ++col)
    if (grid.column_interior(col, 2)) interior.push_back(col);
  if (interior.empty())
    for (int col = 0; col < grid.columns(); ++col)
      if (grid.column_interior(col, 1)) interior.push_back(col);
  if (static_cast<int>(interior.size()) <= wanted) return interior;
  const int m = static_cast<int>(interior.size());
  if (wanted <= 1) return {interior[m / 2]};
  std::vector<int> picked;
  for (int s = 0; s < wanted; ++s) picked.push_back(interior[(s * (m - 1)) / (wanted - 1)]);
  picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
  return picked;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config) {
  if (config.input.empty()) throw ValidationError("run_pipeline: empty input");
  if (config.label_count < 3)
    throw ValidationError("run_pipeline: label grids need at least 3 samples");
  config.tau_axis.validate("tau axis");

  PipelineResult result;
  const Route route = config.route;

  LoadedInput loaded = load_input(config, config.label_lo, config.label_hi);
  const int n = loaded.connection.dim();
  const ConnectionField& conn = loaded.connection;
  const HypersurfaceSeed& seed = loaded.seed;

  std::vector<GridAxis> label_axes(n - 1,
                                   GridAxis{config.label_lo, config.label_hi, config.label_count});
  ShootOptions shoot_opt;
  shoot_opt.oversampling = config.oversampling;

  std::optional<TransformGrid> shoot_grid_opt;
  std::optional<TransformGrid> picard_grid_opt;
  if (route == Route::kShoot || route == Route::kBoth)
    shoot_grid_opt = shoot_congruence(conn, seed, config.tau_axis, label_axes, shoot_opt);
  if (route == Route::kPicard || route == Route::kBoth) {
    PicardConfig pc;
    pc.tau_axis = config.tau_axis;
    pc.label_axes = label_axes;
    pc.max_iterations = config.picard_max_iterations;
    pc.convergence_tol = config.picard_tol;
    pc.oversampling = config.oversampling;
    pc.phi0.resize(n);
    pc.phi1 = seed.lambda;
    pc.phi0[0] = seed.phi;
    for (int h = 1; h < n; ++h)
      pc.phi0[h] = ScalarField(
          n, [h](std::span<const double> p) { return p[h]; }, "x" + std::to_string(h + 1));
    PicardResult pr = picard_solve(conn, pc);
    picard_grid_opt = std::move(pr.grid);
    result.picard_history = std::move(pr.history);
    result.report.picard_iterations = pr.iterations;
    result.report.picard_final_diff =
        result.picard_history.empty() ? 0.0 : result.picard_history.back();
  }

  if (route == Route::kBoth) {
    double agreement = 0.0;
    const TransformGrid& a = *shoot_grid_opt;
    const TransformGrid& b = *picard_grid_opt;
    for (int nd = 0; nd < a.nodes(); ++nd) {
      if (!a.covered(nd) || !b.covered(nd)) continue;
      for (int c = 0; c < n; ++c)
        agreement = std::max(agreement, std::abs(a.f_at(nd)[c] - b.f_at(nd)[c]));
    }
    result.report.route_agreement = agreement;
  }

  result.grid = route == Route::kPicard ? std::move(*picard_grid_opt)
                                        : std::move(*shoot_grid_opt);
  if (route == Route::kBoth) result.picard_grid = std::move(picard_grid_opt);
  const TransformGrid& grid = result.grid;

  result.transformed = evaluate_transformed(conn, grid);
  VerificationReport& rep = result.report;
  rep.total_nodes = grid.nodes();
  for (int nd = 0; nd < grid.nodes(); ++nd) rep.regular_nodes += grid.regular(nd) ? 1 : 0;
  rep.gamma11_max = result.transformed.stats.max;
  rep.gamma11_mean = result.transformed.stats.mean;

  const std::vector<int> lines = pick_straight_columns(grid, config.straight_lines);
  rep.straight_deviation =
      check_straight_geodesics(grid, result.transformed, lines, grid.tau.front(),
                               grid.tau.back(), config.tau_axis.spacing() / config.oversampling);
  rep.correspondence = check_geodesic_correspondence(conn, grid);
  rep.torsion_tensoriality = torsion_tensoriality_residual(conn, grid, result.transformed);

  rep.equiaffine_applicable = conn.declared_symmetric();
  if (rep.equiaffine_applicable) {
    const EquiaffineCheck eq = equiaffine_check(conn);
    rep.equiaffine_flag = eq.flag;
    rep.equiaffine_residual = eq.residual;
  }
  result.dof = dof_report(n, conn.declared_symmetric(),
                          rep.equiaffine_applicable && rep.equiaffine_flag);

  rep.pass_gamma11_max = rep.gamma11_max < config.tol.gamma11_max;
  rep.pass_gamma11_mean = rep.gamma11_mean < config.tol.gamma11_mean;
  rep.pass_straight = rep.straight_deviation < config.tol.straight_deviation;
  rep.pass_correspondence = rep.correspondence < config.tol.correspondence;
  rep.pass_torsion = rep.torsion_tensoriality < config.tol.torsion_tensoriality;
  if (rep.route_agreement)
    rep.pass_route_agreement =
        *rep.route_agreement < std::max(config.tol.route_agreement, 10.0 * config.picard_tol);
  rep.all_pass = rep.pass_gamma11_max && rep.pass_gamma11_mean && rep.pass_straight &&
                 rep.pass_correspondence && rep.pass_torsion && rep.pass_route_agreement;
  result.exit_status = rep.all_pass ? 0 : 1;

  if (!config.out_dir.empty()) write_output_files(config, seed, result);
  return result;
}

namespace {

void json_check(std::ostringstream& os, const char* name, double value, double tol, bool pass,
                bool trailing_comma) {
  os << "    \"" << name << "\": {\"value\": " << fmt17(value)
     << ", \"tolerance\": " << fmt17(tol) << ", \"pass\": " << (pass ? "true" : "false") << "}"
     << (trailing_comma ? "," : "") << "\n";
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string report_to_json(const RunConfig& config, const HypersurfaceSeed& seed,
                           const PipelineResult& result) {
  const VerificationReport& rep = result.report;
  std::ostringstream os;
  os << "{\n";
  os << "  \"input\": \"" << json_escape(config.input) << "\",\n";
  os << "  \"route\": \"" << route_name(config.route) << "\",\n";
  os << "  \"n\": " << result.grid.n << ",\n";
  os << "  \"grid\": {\"tau_lo\": " << fmt17(config.tau_axis.lo)
     << ", \"tau_hi\": " << fmt17(config.tau_axis.hi) << ", \"tau_count\": "
     << config.tau_axis.count << ", \"label_lo\": " << fmt17(config.label_lo)
     << ", \"label_hi\": " << fmt17(config.label_hi) << ", \"label_count\": "
     << config.label_count << ", \"oversampling\": " << config.oversampling << "},\n";
  os << "  \"seed\": {\"phi\": \"" << json_escape(seed.phi.source()) << "\", \"Lambda\": [";
  for (std::size_t h = 0; h < seed.lambda.size(); ++h)
    os << (h ? ", " : "") << "\"" << json_escape(seed.lambda[h].source()) << "\"";
  os << "]},\n";
  os << "  \"nodes\": {\"total\": " << rep.total_nodes << ", \"regular\": " << rep.regular_nodes
     << ", \"stat_interior\": " << result.transformed.stats.count << "},\n";
  if (config.route != Route::kShoot) {
    os << "  \"picard\": {\"iterations\": " << rep.picard_iterations << ", \"final_diff\": "
       << fmt17(rep.picard_final_diff.value_or(0.0)) << "},\n";
  }
  os << "  \"checks\": {\n";
  json_check(os, "gamma11_max", rep.gamma11_max, config.tol.gamma11_max, rep.pass_gamma11_max,
             true);
  json_check(os, "gamma11_mean", rep.gamma11_mean, config.tol.gamma11_mean,
             rep.pass_gamma11_mean, true);
  json_check(os, "straight_deviation", rep.straight_deviation, config.tol.straight_deviation,
             rep.pass_straight, true);
  json_check(os, "correspondence", rep.correspondence, config.tol.correspondence,
             rep.pass_correspondence, true);
  const bool have_agreement = rep.route_agreement.has_value();
  json_check(os, "torsion_tensoriality", rep.torsion_tensoriality,
             config.tol.torsion_tensoriality, rep.pass_torsion, have_agreement);
  if (have_agreement)
    json_check(os, "route_agreement", *rep.route_agreement,
               std::max(config.tol.route_agreement, 10.0 * config.picard_tol),
               rep.pass_route_agreement, false);
  os << "  },\n";
  os << "  \"equiaffine\": {\"applicable\": " << (rep.equiaffine_applicable ? "true" : "false")
     << ", \"flag\": " << (rep.equiaffine_flag ? "true" : "false")
     << ", \"residual\": " << fmt17(rep.equiaffine_residual) << "},\n";
  os << "  \"dof\": {\"n\": " << result.dof.n << ", \"general\": " << result.dof.general_count
     << ", \"torsion_free\": " << result.dof.torsion_free_count
     << ", \"presemigeodesic_general\": " << result.dof.presemigeodesic_general
     << ", \"presemigeodesic_torsion_free\": " << result.dof.presemigeodesic_torsion_free
     << ", \"equiaffine_reduction\": " << result.dof.equiaffine_reduction
     << ", \"applicable\": " << result.dof.applicable << "},\n";
  os << "  \"pass\": " << (rep.all_pass ? "true" : "false") << "\n";
  os << "}\n";
  return os.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

std::string grid_csv(const TransformGrid& grid) {
  std::ostringstream os;
  os << "tau";
  for (int a = 0; a + 1 < grid.n; ++a) os << ",label" << a + 2;
  for (int c = 0; c < grid.n; ++c) os << ",f" << c + 1;
  os << ",det_jac,regular\n";
  for (int k = 0; k < grid.tau_count(); ++k)
    for (int col = 0; col < grid.columns(); ++col) {
      const int nd = grid.node(k, col);
      os << fmt17(grid.tau[k]);
      const Vec lv = grid.label_values(col);
      for (double v : lv) os << "," << fmt17(v);
      for (int c = 0; c < grid.n; ++c) os << "," << fmt17(grid.f_at(nd)[c]);
      os << "," << fmt17(grid.det_jac[nd]) << "," << (grid.regular(nd) ? 1 : 0) << "\n";
    }
  return os.str();
}

std::string gamma_csv(const TransformGrid& grid, const TransformedConnection& tc) {
  const int n = grid.n;
  std::ostringstream os;
  os << "tau";
  for (int a = 0; a + 1 < n; ++a) os << ",label" << a + 2;
  for (int h = 1; h <= n; ++h)
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) os << ",g" << h << i << j;
  os << ",residual_gamma11\n";
  for (int k = 0; k < grid.tau_count(); ++k)
    for (int col = 0; col < grid.columns(); ++col) {
      const int nd = grid.node(k, col);
      if (!grid.regular(nd)) continue;  // gamma' only exists on the regular mask
      os << fmt17(grid.tau[k]);
      const Vec lv = grid.label_values(col);
      for (double v : lv) os << "," << fmt17(v);
      const auto gp = tc.gamma_at(nd);
      for (double v : gp) os << "," << fmt17(v);
      os << "," << fmt17(tc.residual_gamma11[nd]) << "\n";
    }
  return os.str();
}

std::string history_csv(const std::vector<double>& history) {
  std::ostringstream os;
  os << "iteration,sup_diff\n";
  for (std::size_t i = 0; i < history.size(); ++i)
    os << i + 1 << "," << fmt17(history[i]) << "\n";
  return os.str();
}

std::string geodesics_csv(const TransformGrid& grid) {
  std::ostringstream os;
  os << "column,tau";
  for (int c = 0; c < grid.n; ++c) os << ",f" << c + 1;
  os << "\n";
  for (int col = 0; col < grid.columns(); ++col)
    for (int k = 0; k < grid.tau_count(); ++k) {
      const int nd = grid.node(k, col);
      if (!grid.covered(nd)) continue;
      os << col << "," << fmt17(grid.tau[k]);
      for (int c = 0; c < grid.n; ++c) os << "," << fmt17(grid.f_at(nd)[c]);
      os << "\n";
    }
  return os.str();
}

}  // namespace

void write_output_files(const RunConfig& config, const HypersurfaceSeed& seed,
                        const PipelineResult& result) {
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", report_to_json(config, seed, result));
  write_text(dir / "transform_grid.csv", grid_csv(result.grid));
  write_text(dir / "gamma_prime.csv", gamma_csv(result.grid, result.transformed));
  if (config.route != Route::kShoot)
    write_text(dir / "picard_history.csv", history_csv(result.picard_history));
  if (config.emit_plots) write_text(dir / "geodesics.csv", geodesics_csv(result.grid));
}

}  // namespace semigeo
