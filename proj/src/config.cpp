#include "svlaser/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "svlaser/errors.hpp"
#include "svlaser/models.hpp"

namespace svl {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> parse_integer(std::string_view s) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad_value(const KeySpec& k, const std::string& value, const std::string& why) {
  std::ostringstream os;
  os << "key '" << k.key << "': invalid value '" << value << "' (" << why << ")";
  throw ConfigError(os.str());
}

// Validates `value` against `k` and returns its canonical spelling.
std::string canonical(const KeySpec& k, const std::string& value) {
  if (k.allow_auto && value == "auto") return value;
  switch (k.kind) {
    case KeyKind::real: {
      auto v = parse_real(value);
      if (!v) bad_value(k, value, "expected a finite real number");
      return shortest(*v);
    }
    case KeyKind::integer: {
      auto v = parse_integer(value);
      if (!v) bad_value(k, value, "expected an integer");
      return std::to_string(*v);
    }
    case KeyKind::text:
      if (value.empty()) bad_value(k, value, "empty");
      return value;
    case KeyKind::choice: {
      if (std::find(k.choices.begin(), k.choices.end(), value) == k.choices.end()) {
        std::string all;
        for (const auto& c : k.choices) all += (all.empty() ? "" : "|") + c;
        bad_value(k, value, "expected one of " + all);
      }
      return value;
    }
    case KeyKind::flag:
      if (value == "true" || value == "false") return value;
      bad_value(k, value, "expected true or false");
    case KeyKind::real_list: {
      std::string out;
      for (const auto& item : split(value, ',')) {
        auto v = parse_real(item);
        if (!v) bad_value(k, value, "expected comma-separated reals");
        out += (out.empty() ? "" : ",") + shortest(*v);
      }
      return out;
    }
    case KeyKind::index_pairs: {
      std::string out;
      for (const auto& item : split(value, ',')) {
        auto parts = split(item, ':');
        if (parts.size() != 2) bad_value(k, value, "expected comma-separated i:j pairs");
        auto i = parse_integer(parts[0]);
        auto j = parse_integer(parts[1]);
        if (!i || !j || *i < 0 || *j < 0) bad_value(k, value, "expected non-negative integer pairs");
        out += (out.empty() ? "" : ",") + std::to_string(*i) + ":" + std::to_string(*j);
      }
      return out;
    }
  }
  return value;
}

KeySpec real_key(std::string key, double def, std::string help) {
  return {std::move(key), KeyKind::real, shortest(def), std::move(help), {}, false};
}
KeySpec auto_real_key(std::string key, std::string help) {
  return {std::move(key), KeyKind::real, "auto", std::move(help), {}, true};
}
KeySpec int_key(std::string key, long long def, std::string help) {
  return {std::move(key), KeyKind::integer, std::to_string(def), std::move(help), {}, false};
}
KeySpec choice_key(std::string key, std::vector<std::string> choices, std::string help) {
  std::string def = choices.front();
  return {std::move(key), KeyKind::choice, def, std::move(help), std::move(choices), false};
}

void add_integrator(std::vector<KeySpec>& s, const std::string& unit) {
  s.push_back(choice_key("integrator.method", {"adaptive", "fixed"}, "adaptive Dormand-Prince or fixed-step RK4"));
  s.push_back(real_key("integrator.rel_tol", 1e-8, "relative tolerance (adaptive)"));
  s.push_back(real_key("integrator.abs_tol", 1e-10, "absolute tolerance (adaptive)"));
  s.push_back(auto_real_key("integrator.max_step", "largest step, " + unit));
  s.push_back(real_key("integrator.min_step", 1e-12, "step-size floor before a stiffness error, " + unit));
  s.push_back(auto_real_key("integrator.fixed_step", "RK4 step in fixed mode, " + unit));
}

void add_wigner(std::vector<KeySpec>& s) {
  s.push_back(real_key("wigner.x_min", -3.0, "grid lower edge along X1"));
  s.push_back(real_key("wigner.x_max", 3.0, "grid upper edge along X1"));
  s.push_back(real_key("wigner.p_min", -3.0, "grid lower edge along X2"));
  s.push_back(real_key("wigner.p_max", 3.0, "grid upper edge along X2"));
  s.push_back(int_key("wigner.resolution", 121, "points per axis"));
}

std::vector<KeySpec> validate_effective_schema() {
  const LambdaSystemParams p = LambdaSystemParams::from_design(1.0, 40.0, 1000.0, 600.0);
  std::vector<KeySpec> s;
  s.push_back(choice_key("units.time_axis", {"cycles", "radians"}, "time axis: g t / 2 pi (cycles) or g t (radians)"));
  s.push_back(real_key("lambda.lambda_g", p.lambda_g, "cavity coupling of the g-i transition (frequency unit)"));
  s.push_back(real_key("lambda.lambda_e", p.lambda_e, "cavity coupling of the e-i transition"));
  s.push_back(real_key("lambda.Omega_g1", p.Omega_g1, "drive amplitude"));
  s.push_back(real_key("lambda.Omega_g2", p.Omega_g2, "drive amplitude"));
  s.push_back(real_key("lambda.Omega_e1", p.Omega_e1, "drive amplitude"));
  s.push_back(real_key("lambda.Omega_e2", p.Omega_e2, "drive amplitude"));
  s.push_back(real_key("lambda.delta_g1", p.delta_g1, "drive detuning"));
  s.push_back(real_key("lambda.delta_g2", p.delta_g2, "drive detuning"));
  s.push_back(real_key("lambda.delta_e1", p.delta_e1, "drive detuning"));
  s.push_back(real_key("lambda.delta_e2", p.delta_e2, "drive detuning"));
  s.push_back(real_key("lambda.Delta_g", p.Delta_g, "cavity detuning from the g-i transition"));
  s.push_back(real_key("lambda.Delta_e", p.Delta_e, "cavity detuning from the e-i transition"));
  s.push_back(auto_real_key("lambda.omega", "cavity frequency (optional, checked against Delta_g/Delta_e)"));
  s.push_back(auto_real_key("lambda.omega_0", "e-g splitting (optional)"));
  s.push_back(auto_real_key("lambda.omega_i", "i level frequency (optional)"));
  s.push_back(int_key("field.dim", 120, "Fock truncation; Fock-vacuum start spreads over high generalized levels"));
  s.push_back(choice_key("atom.initial", {"e", "g"}, "initial atomic level (field starts in vacuum)"));
  s.push_back(real_key("run.t_end", 10.0, "duration on the time axis"));
  s.push_back(real_key("output.sample_dt", 0.05, "sample spacing on the time axis (rounded to whole drive periods)"));
  s.push_back(real_key("metrics.t_max", 5.0, "divergence metrics cover [0, t_max] on the time axis"));
  s.push_back({"diagnostics.stark", KeyKind::flag, "true", "also evolve the effective model plus cavity Stark terms", {}, false});
  add_integrator(s, "1/lambda");
  return s;
}

std::vector<KeySpec> run_laser_schema() {
  std::vector<KeySpec> s;
  s.push_back(choice_key("units.time_axis", {"cycles", "radians"}, "time axis: g t / 2 pi (cycles) or g t (radians)"));
  s.push_back(real_key("laser.kappa", 0.6, "Bogoliubov parameter"));
  s.push_back(real_key("laser.C", 0.35, "cavity loss rate / g"));
  s.push_back(real_key("laser.R", 92.0, "pump rate R = K p, per g"));
  s.push_back(real_key("laser.gamma", 0.5, "atomic decay rate / g"));
  s.push_back(real_key("laser.p", 1.0, "excitation probability (reported K = R/p)"));
  s.push_back(auto_real_key("laser.k", "excited-atom injection rate per g (auto: R)"));
  s.push_back(int_key("field.dim", 60, "Fock truncation"));
  s.push_back(choice_key("field.initial", {"vacuum", "generalized_vacuum"}, "initial field state"));
  s.push_back(choice_key("atom.initial", {"e", "g"}, "state of every injected atom"));
  s.push_back(real_key("run.t_end", 7.0, "duration on the time axis"));
  s.push_back({"run.atoms", KeyKind::integer, "auto", "atom count (auto: round(k t_end))", {}, true});
  s.push_back(real_key("output.sample_dt", 0.01, "sample spacing on the time axis (rounded to whole atoms)"));
  s.push_back(real_key("steady.window", 1.0, "steady-state window on the time axis"));
  s.push_back(real_key("steady.eps", 0.02, "steady-state spread threshold for <a^dag a>"));
  s.push_back(real_key("fidelity.r", 0.69, "squeeze parameter of the reference S(r)|0>"));
  s.push_back({"coherence.pairs", KeyKind::index_pairs, "0:8,4:6", "Fock-basis elements to track", {}, false});
  add_wigner(s);
  add_integrator(s, "time-axis units");
  return s;
}

std::vector<KeySpec> compare_states_schema() {
  std::vector<KeySpec> s;
  s.push_back(real_key("states.kappa", 0.6, "Bogoliubov parameter"));
  s.push_back(real_key("states.alpha_re", 0.18, "generalized coherent amplitude, real part"));
  s.push_back(real_key("states.alpha_im", 0.0, "generalized coherent amplitude, imaginary part"));
  s.push_back(int_key("field.dim", 60, "Fock truncation"));
  add_wigner(s);
  return s;
}

std::vector<KeySpec> reservoir_schema() {
  std::vector<KeySpec> s;
  s.push_back(real_key("reservoir.kappa", 0.6, "Bogoliubov parameter"));
  s.push_back(real_key("reservoir.Gamma", 1.0, "engineered decay rate (time unit 1/Gamma)"));
  s.push_back({"reservoir.ratios", KeyKind::real_list, "0,0.01,0.05,0.1", "Gamma_tilde / Gamma sweep", {}, false});
  s.push_back(choice_key("reservoir.method", {"evolve", "liouvillian"}, "time evolution or direct null vector (dim <= 24)"));
  s.push_back(int_key("field.dim", 40, "Fock truncation"));
  s.push_back(real_key("run.t_end", 50.0, "evolution time in units of 1/Gamma"));
  s.push_back(real_key("output.sample_dt", 1.0, "fidelity sample spacing in units of 1/Gamma"));
  add_integrator(s, "1/Gamma");
  return s;
}

const std::map<std::string, std::vector<KeySpec>>& schemas() {
  static const std::map<std::string, std::vector<KeySpec>> all{
      {"validate-effective", validate_effective_schema()},
      {"run-laser", run_laser_schema()},
      {"compare-states", compare_states_schema()},
      {"reservoir-baseline", reservoir_schema()},
  };
  return all;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"validate-effective", "run-laser", "compare-states",
                                              "reservoir-baseline"};
  return names;
}

const std::vector<KeySpec>& scenario_schema(const std::string& scenario) {
  auto it = schemas().find(scenario);
  if (it == schemas().end()) throw ConfigError("unknown scenario '" + scenario + "'");
  return it->second;
}

ScenarioConfig::ScenarioConfig(const std::string& scenario) : scenario_(scenario) {
  for (const auto& k : scenario_schema(scenario)) values_.emplace_back(k.key, k.default_value);
}

ScenarioConfig ScenarioConfig::parse(std::string_view text, const std::string& scenario, std::string_view source) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, int> seen;
  std::string named;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    std::ostringstream where;
    where << source << ":" << lineno;
    if (eq == std::string::npos) throw ConfigError(where.str() + ": expected 'key = value'");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(where.str() + ": empty key");
    if (seen.count(key)) {
      std::ostringstream os;
      os << where.str() << ": key '" << key << "' repeats line " << seen[key];
      throw ConfigError(os.str());
    }
    seen[key] = lineno;
    if (key == "scenario")
      named = value;
    else
      entries.emplace_back(key, value);
  }
  std::string name = scenario.empty() ? named : scenario;
  if (name.empty()) throw ConfigError(std::string(source) + ": no scenario named");
  if (!scenario.empty() && !named.empty() && named != scenario)
    throw ConfigError(std::string(source) + ": config is for '" + named + "', not '" + scenario + "'");
  ScenarioConfig cfg(name);
  for (const auto& [k, v] : entries) cfg.set(k, v);
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path, const std::string& scenario) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << f.rdbuf();
  return parse(text.str(), scenario, path.string());
}

const KeySpec& ScenarioConfig::spec(const std::string& key) const {
  for (const auto& k : scenario_schema(scenario_))
    if (k.key == key) return k;
  throw ConfigError("unknown key '" + key + "' for scenario " + scenario_);
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
  const KeySpec& k = spec(key);
  const std::string canon = canonical(k, trim(value));
  for (auto& [name, v] : values_)
    if (name == key) v = canon;
}

void ScenarioConfig::set_assignment(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  set(trim(std::string_view(assignment).substr(0, eq)), trim(std::string_view(assignment).substr(eq + 1)));
}

const std::string& ScenarioConfig::raw(const std::string& key) const {
  spec(key);
  for (const auto& [name, v] : values_)
    if (name == key) return v;
  throw ConfigError("unknown key '" + key + "'");
}

bool ScenarioConfig::is_auto(const std::string& key) const { return raw(key) == "auto"; }

double ScenarioConfig::real(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "auto") throw ConfigError("key '" + key + "' is auto; resolve it before reading a number");
  return *parse_real(v);
}

long long ScenarioConfig::integer(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "auto") throw ConfigError("key '" + key + "' is auto; resolve it before reading a number");
  return *parse_integer(v);
}

const std::string& ScenarioConfig::text(const std::string& key) const { return raw(key); }

bool ScenarioConfig::flag(const std::string& key) const { return raw(key) == "true"; }

std::vector<double> ScenarioConfig::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split(raw(key), ',')) out.push_back(*parse_real(item));
  return out;
}

std::vector<std::pair<int, int>> ScenarioConfig::index_pairs(const std::string& key) const {
  std::vector<std::pair<int, int>> out;
  for (const auto& item : split(raw(key), ',')) {
    auto parts = split(item, ':');
    out.emplace_back(static_cast<int>(*parse_integer(parts[0])), static_cast<int>(*parse_integer(parts[1])));
  }
  return out;
}

std::string ScenarioConfig::echo() const {
  std::ostringstream os;
  os << "scenario = " << scenario_ << "\n";
  for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void require_positive(const ScenarioConfig& c, const std::string& key) {
  require(c.real(key) > 0.0, key + " must be positive");
}

void validate_integrator(const ScenarioConfig& c) {
  require_positive(c, "integrator.rel_tol");
  require_positive(c, "integrator.abs_tol");
  require_positive(c, "integrator.min_step");
  if (!c.is_auto("integrator.max_step")) require_positive(c, "integrator.max_step");
  if (!c.is_auto("integrator.fixed_step")) require_positive(c, "integrator.fixed_step");
}

void validate_wigner(const ScenarioConfig& c) {
  require(c.real("wigner.x_max") > c.real("wigner.x_min"), "wigner.x_max must exceed wigner.x_min");
  require(c.real("wigner.p_max") > c.real("wigner.p_min"), "wigner.p_max must exceed wigner.p_min");
  require(c.integer("wigner.resolution") >= 3, "wigner.resolution must be at least 3");
}

void validate_dim(const ScenarioConfig& c) {
  require(c.integer("field.dim") >= 2 && c.integer("field.dim") <= 4000, "field.dim must lie in [2, 4000]");
}

void require_kappa(double kappa, const std::string& key) {
  if (!(kappa >= 0.0 && kappa < 1.0))
    throw ConstraintViolation("0 <= kappa < 1", key + " = " + std::to_string(kappa));
}

}  // namespace

void ScenarioConfig::validate() const {
  if (scenario_ == "validate-effective") {
    validate_dim(*this);
    validate_integrator(*this);
    require_positive(*this, "run.t_end");
    require_positive(*this, "output.sample_dt");
    require_positive(*this, "metrics.t_max");
    lambda_params_from(*this).validate();
  } else if (scenario_ == "run-laser") {
    validate_dim(*this);
    validate_integrator(*this);
    validate_wigner(*this);
    require_kappa(real("laser.kappa"), "laser.kappa");
    if (real("laser.C") < 0.0) throw UnphysicalParameterError("laser.C must be non-negative");
    if (real("laser.R") < 0.0) throw UnphysicalParameterError("laser.R must be non-negative");
    if (!(real("laser.gamma") > 0.0)) throw UnphysicalParameterError("laser.gamma must be positive");
    const double p = real("laser.p");
    if (!(p > 0.0 && p <= 1.0)) throw UnphysicalParameterError("laser.p must lie in (0, 1]");
    if (!is_auto("laser.k") && !(real("laser.k") > 0.0))
      throw UnphysicalParameterError("laser.k must be positive");
    if (is_auto("laser.k") && !(real("laser.R") > 0.0) && !(!is_auto("run.atoms") && integer("run.atoms") == 0))
      throw UnphysicalParameterError("laser.k = auto needs laser.R > 0");
    if (!is_auto("run.atoms")) require(integer("run.atoms") >= 0, "run.atoms must be non-negative");
    require(real("run.t_end") >= 0.0, "run.t_end must be non-negative");
    require_positive(*this, "output.sample_dt");
    require_positive(*this, "steady.window");
    require(real("steady.eps") >= 0.0, "steady.eps must be non-negative");
    require(real("fidelity.r") >= 0.0, "fidelity.r must be non-negative");
    for (auto [i, j] : index_pairs("coherence.pairs"))
      require(i < integer("field.dim") && j < integer("field.dim"), "coherence.pairs index beyond field.dim");
    LaserRateParams::derive(1.0, real("laser.gamma"), real("laser.C"), real("laser.R") / p, p).validate();
  } else if (scenario_ == "compare-states") {
    validate_dim(*this);
    validate_wigner(*this);
    require_kappa(real("states.kappa"), "states.kappa");
  } else if (scenario_ == "reservoir-baseline") {
    validate_dim(*this);
    validate_integrator(*this);
    require_kappa(real("reservoir.kappa"), "reservoir.kappa");
    if (!(real("reservoir.Gamma") > 0.0)) throw UnphysicalParameterError("reservoir.Gamma must be positive");
    const auto ratios = reals("reservoir.ratios");
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      if (ratios[i] < 0.0) throw UnphysicalParameterError("reservoir.ratios must be non-negative");
      require(i == 0 || ratios[i] > ratios[i - 1], "reservoir.ratios must increase strictly");
    }
    require_positive(*this, "run.t_end");
    require_positive(*this, "output.sample_dt");
  }
}

LambdaSystemParams lambda_params_from(const ScenarioConfig& c) {
  LambdaSystemParams p;
  p.lambda_g = c.real("lambda.lambda_g");
  p.lambda_e = c.real("lambda.lambda_e");
  p.Omega_g1 = c.real("lambda.Omega_g1");
  p.Omega_g2 = c.real("lambda.Omega_g2");
  p.Omega_e1 = c.real("lambda.Omega_e1");
  p.Omega_e2 = c.real("lambda.Omega_e2");
  p.delta_g1 = c.real("lambda.delta_g1");
  p.delta_g2 = c.real("lambda.delta_g2");
  p.delta_e1 = c.real("lambda.delta_e1");
  p.delta_e2 = c.real("lambda.delta_e2");
  p.Delta_g = c.real("lambda.Delta_g");
  p.Delta_e = c.real("lambda.Delta_e");
  if (!c.is_auto("lambda.omega")) p.omega = c.real("lambda.omega");
  if (!c.is_auto("lambda.omega_0")) p.omega_0 = c.real("lambda.omega_0");
  if (!c.is_auto("lambda.omega_i")) p.omega_i = c.real("lambda.omega_i");
  return p;
}

}  // namespace svl
