#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "subeq/certificate.hpp"

namespace subeq::app {

enum ExitCode : int {
  kPass = 0,
  kAuditFailed = 1,
  kPropertyFails = 2,
  kNumericalFailure = 3,
  kInputError = 4,
};

struct RunOptions {
  std::optional<std::filesystem::path> out;  // overrides the scenario's "output"
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool plots = true;
};

struct Outcome {
  int exit_code = kPass;
  nlohmann::json report;  // without timestamp
  double wall_time = 0;
};

const nlohmann::json& scenario_schema();
const nlohmann::json& report_schema();

nlohmann::json certificate_json(const Certificate& c);

/// Runs a scenario document; writes report.json, timing.json, CSVs and plots into the output directory.
Outcome run_scenario(const nlohmann::json& doc, const RunOptions& opt);
/// Reads, parses and runs a scenario file. Parse failures become exit 4 with a report when possible.
Outcome run_file(const std::filesystem::path& file, const RunOptions& opt);

struct AuditOptions {
  std::optional<double> tol;  // unset: 1e-9 for the jet suites, 1e-8 for the solver suites
  std::uint64_t seed = 0;
  int threads = 1;
  bool inject_dual_sign_bug = false;  // mutation check: a dual that drops its outer sign joins the catalog
};

/// All built-in suites. Deterministic for fixed seed and threads = 1; wall times live in "timing" only
/// when with_timing is set.
nlohmann::json audit_report(const AuditOptions& opt, bool with_timing = false);
/// Prints the summary table; returns 0 iff every suite passes.
int print_audit(const nlohmann::json& report, std::ostream& os);

std::string utc_timestamp();

}  // namespace subeq::app
