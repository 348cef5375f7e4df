#pragma once

// Named experiments. Each run returns tables (written as CSV by the output
// layer) and named scalar records for the manifest; nothing here touches the
// filesystem.

#include <string>
#include <utility>
#include <vector>

#include "svlaser/config.hpp"
#include "svlaser/integrators.hpp"

namespace svl {

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // NaN marks an undefined entry

  std::size_t column_index(const std::string& column) const;
  std::vector<double> column(const std::string& column) const;
};

using Quantities = std::vector<std::pair<std::string, double>>;

struct ScenarioResult {
  std::vector<Table> tables;
  Quantities derived;
  Quantities numerics;
  Quantities metrics;
  std::vector<std::string> notes;

  const Table& table(const std::string& name) const;
  double derived_value(const std::string& name) const;
  double numeric(const std::string& name) const;
  double metric(const std::string& name) const;
};

// g t = axis_scale * (axis value): 2 pi for "cycles", 1 for "radians".
double axis_scale(const ScenarioConfig& config);

// integrator.* keys with "auto" resolved to the given defaults.
IntegratorConfig integrator_from(const ScenarioConfig& config, double auto_max_step, double auto_fixed_step);

// Validates the config, then dispatches on its scenario name.
ScenarioResult run_scenario(const ScenarioConfig& config);

ScenarioResult run_validate_effective(const ScenarioConfig& config);
ScenarioResult run_laser(const ScenarioConfig& config);
ScenarioResult run_compare_states(const ScenarioConfig& config);
ScenarioResult run_reservoir_baseline(const ScenarioConfig& config);

}  // namespace svl
