#pragma once

// Scenario configuration files and report serialization.

#include "trackfuse/scenarios.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace trackfuse {

inline constexpr const char* kReportSchema = "trackfuse-report v1";

/// Parses a JSON scenario description. The "scenario" key selects the built-in
/// defaults; every other key present overrides the corresponding default.
[[nodiscard]] ScenarioConfig config_from_json(const std::string& text);
[[nodiscard]] ScenarioConfig load_config(const std::filesystem::path& path);

/// Full configuration as compact JSON (single line, stable key order).
[[nodiscard]] std::string config_to_json(const ScenarioConfig& cfg);

/// Shortest round-trip decimal representation.
[[nodiscard]] std::string format_double(double v);

/// CSV text for one fuser and one metric.
[[nodiscard]] std::string metric_csv(const RunReport& report, const FuserReport& fuser, const std::string& metric);

/// Writes one CSV per (scenario, fuser, metric), plus ellipse and summary JSON
/// files. Returns the written paths.
std::vector<std::filesystem::path> write_report(const RunReport& report, const std::filesystem::path& out_dir);

} // namespace trackfuse
