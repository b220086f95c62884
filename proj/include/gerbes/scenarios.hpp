#pragma once

#include "gerbes/family.hpp"
#include "gerbes/vendor_json_fwd.hpp"

namespace gerbes {

struct ScenarioConfig {
  std::string scenario = "ex7_1";  // see scenario_ids()
  unsigned param = 0;              // g or k where applicable (0 = default)
  std::string backend = "all";     // exact | numeric | formal | all
  int quad_order = 8;
  double tolerance = 1e-9;
  unsigned cover_arcs = 3;
  std::string pou = "c1cubic";  // c1cubic | pl
  std::string report_path;
  std::string csv_dir;
  std::string custom_file;  // for scenario = custom
  bool timings = true;
};

ScenarioConfig config_from_json(const nlohmann::json& j, ScenarioConfig base = {});

struct ReportCheck {
  std::string name;
  std::string source;  // closed_form | definition | oracle
  std::string expected;
  std::string computed;
  double residual = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::string scenario;
  bool pass = true;
  std::vector<ReportCheck> checks;
  nlohmann::json environment;
  std::vector<std::pair<std::string, double>> timings;

  void add(const std::string& name, const std::string& source, const std::string& expected,
           const std::string& computed, bool ok, double residual = 0.0) {
    checks.push_back({name, source, expected, computed, residual, ok});
    pass = pass && ok;
  }
  nlohmann::json to_json(bool with_timings) const;
};

std::vector<std::string> scenario_ids();

// Runs the registered scenario; deterministic content for a fixed config
// (timings aside); throws on configuration errors.
VerificationReport run_scenario(const ScenarioConfig& cfg);

// Backend comparison harness: exact staircase vs classical vs numeric
// quadrature, and partition-of-unity independence where applicable.
VerificationReport compare_backends(const ScenarioConfig& cfg);

// CSV table of a form's coefficients (one row per wedge monomial piece).
std::string form_to_csv(const ExteriorForm& a);

// wire formats
nlohmann::json line_bundle_to_json(const CoverContext& ctx, const LineBundleData& lb);
nlohmann::json deligne_to_json(const CoverContext& ctx, const DeligneCocycle& dc,
                               const std::string& cover_id);

}  // namespace gerbes
