#pragma once

// Flat `section.key = value` scenario configuration with a per-scenario
// schema. Unknown keys are rejected; every key has a default, so the resolved
// config (echo()) fully describes a run.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace svl {

struct LambdaSystemParams;

enum class KeyKind { real, integer, text, choice, flag, real_list, index_pairs };

struct KeySpec {
  std::string key;
  KeyKind kind;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;  // KeyKind::choice only
  bool allow_auto = false;           // real/integer keys that accept "auto"
};

const std::vector<std::string>& scenario_names();
// Throws ConfigError for an unknown scenario.
const std::vector<KeySpec>& scenario_schema(const std::string& scenario);

class ScenarioConfig {
 public:
  // Every schema key at its default.
  explicit ScenarioConfig(const std::string& scenario);

  // Parses `key = value` lines ('#' starts a comment). The text must name its
  // scenario unless `scenario` is given; a mismatch is a ConfigError.
  static ScenarioConfig parse(std::string_view text, const std::string& scenario = "",
                              std::string_view source = "<config>");
  static ScenarioConfig load(const std::filesystem::path& path, const std::string& scenario = "");

  const std::string& scenario() const noexcept { return scenario_; }

  // Override one key (validated against the schema).
  void set(const std::string& key, const std::string& value);
  // "key=value"
  void set_assignment(const std::string& assignment);

  bool is_auto(const std::string& key) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::pair<int, int>> index_pairs(const std::string& key) const;

  // Model constraint checks for this scenario; throws ConfigError or
  // UnphysicalParameterError (ConstraintViolation names the relation).
  void validate() const;

  // Canonical text: `scenario = ...` then every key in schema order.
  std::string echo() const;
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return values_; }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

 private:
  std::string scenario_;
  std::vector<std::pair<std::string, std::string>> values_;  // schema order

  const KeySpec& spec(const std::string& key) const;
  const std::string& raw(const std::string& key) const;
};

// The lambda.* keys of a validate-effective config.
LambdaSystemParams lambda_params_from(const ScenarioConfig& config);

}  // namespace svl
