#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semigeo/fixtures.hpp"
#include "semigeo/rectify.hpp"
#include "semigeo/verify.hpp"

namespace semigeo {

enum class Route { kShoot, kPicard, kBoth };

std::string route_name(Route r);
Route route_from_name(std::string_view name);

struct Tolerances {
  double gamma11_max = 1e-3;
  double gamma11_mean = 1e-4;
  double straight_deviation = 1e-3;
  double correspondence = 1e-4;
  double torsion_tensoriality = 1e-6;
  double route_agreement = 1e-5;  // effective bound: max(this, 10 * picard_tol)
};

struct RunConfig {
  std::string input;  // built-in fixture name or connection spec path
  std::string seed;   // optional: inline JSON ({"phi": ..., "Lambda": [...]}) or a path
  Route route = Route::kShoot;
  GridAxis tau_axis{-0.5, 0.5, 41};
  double label_lo = -0.5;
  double label_hi = 0.5;
  int label_count = 21;
  Tolerances tol;
  std::string out_dir;  // empty: write nothing
  bool emit_plots = false;
  int oversampling = 10;
  int picard_max_iterations = 40;
  double picard_tol = 1e-10;
  int straight_lines = 9;  // label columns sampled by the straight-line check
};

struct PipelineResult {
  VerificationReport report;
  TransformGrid grid;  // the verified construction (shoot grid when route=both)
  std::optional<TransformGrid> picard_grid;
  std::vector<double> picard_history;
  TransformedConnection transformed;
  DofReport dof;
  int exit_status = 0;  // 0 iff all configured checks pass, else 1
};

// End-to-end: load -> construct (shoot and/or picard) -> transform -> verify
// -> serialize. Throws (ValidationError / ConstructionError / ...) on
// construction failure; the CLI maps those to exit status 2.
PipelineResult run_pipeline(const RunConfig& config);

// Seed document { "phi": "expr in x2..xn", "Lambda": ["expr", ...] }.
HypersurfaceSeed parse_seed_spec(std::string_view json_text, int n, const Box& tilde_domain);

// Deterministic serialization: fixed field order, floats with 17 significant
// digits, so identical configs yield byte-identical files.
std::string report_to_json(const RunConfig& config, const HypersurfaceSeed& seed,
                           const PipelineResult& result);
void write_output_files(const RunConfig& config, const HypersurfaceSeed& seed,
                        const PipelineResult& result);

}  // namespace semigeo
