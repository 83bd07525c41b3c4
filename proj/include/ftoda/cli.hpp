#pragma once

// Configuration, dispatch and reports for the command-line tool.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftoda/grading.hpp"
#include "ftoda/linalg.hpp"
#include "ftoda/poly.hpp"

namespace ftoda::cli {

inline constexpr const char* kReportVersion = "1.0";
inline constexpr long kDefaultDenominatorBound = 1000000;

inline const std::vector<std::string>& modes() {
  static const std::vector<std::string> m{"frenet", "toda-solve", "verify-frenet",
                                          "verify-toda", "gauss", "grading"};
  return m;
}

struct GridConfig {
  Complex center{0.0, 0.0};
  double radius = 1.0;
  int nx = 1;
  int ny = 1;
};

struct Tolerances {
  double rank_tol = kDefaultRankTol;
  double fd_step = 1e-4;
  double residual_tol = 1e-5;
};

struct IntegrationConfig {
  Complex basepoint{0.0, 0.0};
  int steps = 1000;
};

struct SeedConfig {
  int l = 2;
  bool hermitian = true;
  std::optional<PolyMatrix> c_minus;
  std::optional<PolyMatrix> c_plus_bar;
  std::optional<PolyMatrix> gamma_minus;
  std::optional<PolyMatrix> gamma_plus_bar;
  std::optional<CMatrix> g0;
};

struct GaussConfig {
  std::vector<int> blocks;
  std::optional<CMatrix> matrix;  // otherwise `samples` random matrices
  int samples = 1;
  std::uint64_t seed = 0;
};

struct JobConfig {
  std::string mode;
  std::optional<PolyMatrix> curve;
  std::optional<GradationSpec> gradation;
  std::optional<CMatrix> metric_h;
  GridConfig grid;
  Tolerances tol;
  IntegrationConfig integration;
  SeedConfig seeds;
  std::optional<GaussConfig> gauss;
};

/// Validates and converts a JSON document. Throws ConfigError naming the
/// offending field (e.g. "grid.nx", "curve[1][0][2]").
JobConfig parse_config(const nlohmann::json& doc, const std::string& mode_override = "");

/// Per grid point (or per sample in gauss mode).
struct PointRecord {
  int index = 0;
  Complex z{0.0, 0.0};
  std::string status = "ok";  // "ok", "NearRankDrop", or an error tag
  std::string message;
  std::map<std::string, double> residuals;
  std::vector<double> g;            // induced metrics g_0..g_{t-1}
  std::vector<double> ln_det_beta;  // ln |det beta_a|, a = 0..t

  bool operator==(const PointRecord&) const = default;
};

struct Summary {
  std::map<std::string, double> max_residuals;
  int failed_points = 0;
  int skipped_points = 0;
  std::vector<int> partition;
  std::optional<bool> linear_full;
  std::vector<std::string> warnings;
  bool passed = false;

  bool operator==(const Summary&) const = default;
};

struct Report {
  std::string spec_version = kReportVersion;
  std::string mode;
  std::string timestamp;
  /// Residual names checked in this mode, sorted; fixes the CSV columns.
  std::vector<std::string> residual_names;
  std::vector<PointRecord> points;
  Summary summary;
  nlohmann::json data = nlohmann::json::object();  // mode-specific results

  bool operator==(const Report&) const = default;
};

/// Runs the configured pipeline. Per-point failures are recorded in the
/// report; whole-job failures (e.g. an unusable curve) propagate.
Report run(const JobConfig& config, int threads = 1);

nlohmann::json to_json(const Report& report);
Report from_json(const nlohmann::json& doc);
std::string to_csv(const Report& report);

/// 0 if the report passed, 1 otherwise.
int exit_code(const Report& report);

/// Worker count from FTODA_THREADS, defaulting to the hardware concurrency.
int threads_from_env();

}  // namespace ftoda::cli
