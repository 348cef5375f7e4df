#pragma once

// Run artifacts on disk: one CSV per table plus manifest.json, which echoes
// the config and lists every data file with its SHA-256.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "svlaser/config.hpp"
#include "svlaser/scenarios.hpp"

namespace svl {

inline constexpr const char* kArtifactName = "svlaser";
inline constexpr const char* kArtifactVersion = "1.0.0";

// Header row, then rows with 17 significant digits; NaN is an empty cell.
std::string to_csv(const Table& table);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct WrittenFile {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunRecord {
  std::filesystem::path directory;
  std::vector<WrittenFile> files;
  std::filesystem::path manifest;
};

// Writes <dir>/<table>.csv for every table and <dir>/manifest.json.
RunRecord write_run(const std::filesystem::path& dir, const ScenarioConfig& config, const ScenarioResult& result,
                    double wall_clock_seconds);

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> problems;
};

// Recomputes the checksums listed in <dir>/manifest.json.
VerifyReport verify_checksums(const std::filesystem::path& dir);

// The config recorded in a manifest (parsed from its echo).
ScenarioConfig config_from_manifest(const std::filesystem::path& dir);

}  // namespace svl
