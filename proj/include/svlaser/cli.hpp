#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svlaser/config.hpp"
#include "svlaser/output.hpp"

namespace svl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

// Environment variable naming the default output root.
inline constexpr const char* kOutputEnv = "SVLASER_OUT";

int exit_code_for(const std::exception& e);

// --out, else $SVLASER_OUT/<scenario>, else ./out/<scenario>.
std::filesystem::path output_directory(const std::optional<std::string>& out_flag, const std::string& scenario);

// Loads `config_path` (or the defaults when empty) and applies overrides.
ScenarioConfig resolve_config(const std::string& scenario, const std::string& config_path,
                              const std::vector<std::string>& overrides);

// Runs the scenario, timing it, and writes the artifacts.
RunRecord execute(const ScenarioConfig& config, const std::filesystem::path& dir);

// Full command line, including the program name in argv[0].
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace svl
