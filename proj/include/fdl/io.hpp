#pragma once

#include <filesystem>
#include <string>

#include "fdl/analysis.hpp"
#include "fdl/config.hpp"
#include "fdl/sim.hpp"

namespace fdl {

/// Version string stamped into every metadata file.
std::string code_version();

// Files written by write_run() inside the output directory.
inline constexpr const char* kLogFile = "log.csv";
inline constexpr const char* kCheckpointFile = "checkpoints.csv";
inline constexpr const char* kMeanWeightFile = "mean_weights.csv";
inline constexpr const char* kMetadataFile = "metadata.json";

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// CSV text of the time series (header + one row per log entry).
std::string log_csv(const RunLog& log);

/// Writes log.csv, checkpoints.csv, mean_weights.csv (when present) and
/// metadata.json. Throws IoError.
void write_run(const std::filesystem::path& dir, const ScenarioConfig& config, const RunLog& log);

/// Reads a run directory back. Throws IoError for missing or malformed files,
/// a schema version mismatch or a non-increasing time column.
RunLog read_run(const std::filesystem::path& dir);

/// Config echo stored in a run's metadata.
Json read_run_config(const std::filesystem::path& dir);

/// report.json (summary and verdicts) plus tracking.csv, estimation.csv,
/// consensus.csv and approximation.csv. Throws IoError.
void write_report(const std::filesystem::path& dir, const MetricReport& report, const RunLog& log);

Json report_json(const MetricReport& report);

} // namespace fdl
