/// @file artifacts.hpp
/// Run artifacts: the trajectory CSV, the resolved config, the summary
/// document, and the two-run comparison report.
#pragma once

#include <filesystem>
#include <string>

#include "bastion/config.hpp"
#include "bastion/sim.hpp"

namespace bastion {

/// Fixed 28-column header shared by every trajectory CSV.
std::string csv_header();

/// Renders the logged rows at full precision. Columns absent from the
/// scenario (second state, barrier channels, spare weight slots) are zero.
std::string format_csv(const RunResult& res);

struct CsvCheck {
  bool ok = false;
  long rows = 0;
  std::string message;
};

/// Validates header equality, column count, finiteness, and strictly
/// increasing time for a trajectory file.
CsvCheck check_csv(const std::filesystem::path& path);

struct RunManifest {
  std::string scenario;
  std::string config_source;  ///< path or preset name the run was started from
  std::string out_dir;
  std::string config_hash;  ///< git blob hash of resolved-config.json
  std::string created_utc;  ///< the only timestamp in any artifact
};

/// Summary document: manifest, status, metrics, learning diagnostics,
/// stack history, and final weights.
std::string summary_json(const RunResult& res, const RunManifest& manifest);

struct WrittenArtifacts {
  std::filesystem::path dir;
  std::filesystem::path config_file;
  std::filesystem::path trajectory_file;
  std::filesystem::path summary_file;
  std::string config_hash;
};

/// Writes exactly resolved-config.json, trajectory.csv, and summary.json
/// into out_dir (created if needed). config_source names where the config
/// came from; the resolved bytes are serialized from res.config.
WrittenArtifacts write_run_artifacts(const RunResult& res, const std::string& config_source,
                                     const std::filesystem::path& out_dir);

struct CompareReport {
  std::string table;  ///< fixed-width, human-oriented
  std::string json;   ///< same content plus a safety verdict
};

/// Reads two run directories' summary.json files and reports headline
/// metrics side by side. The safer run is the one with the larger minimum
/// constraint margin.
CompareReport compare_runs(const std::filesystem::path& dir_a,
                           const std::filesystem::path& dir_b);

}  // namespace bastion
