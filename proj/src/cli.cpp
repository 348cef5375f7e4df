#include "svlaser/cli.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <future>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "svlaser/errors.hpp"

namespace svl {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const UnphysicalParameterError*>(&e) ||
      dynamic_cast<const InvalidSpaceError*>(&e) || dynamic_cast<const InvalidShapeError*>(&e) ||
      dynamic_cast<const IndexError*>(&e))
    return kExitConfig;
  return kExitNumerical;
}

std::filesystem::path output_directory(const std::optional<std::string>& out_flag, const std::string& scenario) {
  if (out_flag && !out_flag->empty()) return *out_flag;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return std::filesystem::path(env) / scenario;
  return std::filesystem::path("out") / scenario;
}

ScenarioConfig resolve_config(const std::string& scenario, const std::string& config_path,
                              const std::vector<std::string>& overrides) {
  ScenarioConfig c = config_path.empty() ? ScenarioConfig(scenario) : ScenarioConfig::load(config_path, scenario);
  for (const auto& o : overrides) c.set_assignment(o);
  c.validate();
  return c;
}

RunRecord execute(const ScenarioConfig& config, const std::filesystem::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioResult result = run_scenario(config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return write_run(dir, config, result, wall);
}

namespace {

void summarize(std::ostream& out, const RunRecord& rec) {
  out << "wrote " << rec.manifest.string() << "\n";
  for (const auto& f : rec.files) out << "  " << f.name << "  " << f.bytes << " bytes  sha256 " << f.sha256 << "\n";
}

int verify(const std::filesystem::path& dir, bool rerun, std::ostream& out, std::ostream& err) {
  VerifyReport report = verify_checksums(dir);
  for (const auto& p : report.problems) err << "verify: " << p << "\n";
  if (report.ok) out << "checksums match in " << dir.string() << "\n";
  if (!rerun) return report.ok ? kExitOk : kExitMismatch;

  const ScenarioConfig cfg = config_from_manifest(dir);
  const auto scratch = dir / "rerun";
  const RunRecord again = execute(cfg, scratch);
  bool same = true;
  for (const auto& f : again.files) {
    const auto original = dir / f.name;
    if (!std::filesystem::exists(original) || sha256_file(original) != f.sha256) {
      err << "verify: rerun differs for " << f.name << "\n";
      same = false;
    }
  }
  if (same) out << "rerun reproduces every data file bit for bit\n";
  return report.ok && same ? kExitOk : kExitMismatch;
}

// Runs independent configs on a small worker pool; one output directory and
// manifest per config.
int sweep(const std::vector<std::string>& configs, const std::vector<std::string>& overrides,
          const std::optional<std::string>& out_root, unsigned jobs, std::ostream& out, std::ostream& err) {
  const std::filesystem::path root = out_root ? std::filesystem::path(*out_root) : output_directory({}, "sweep");
  std::atomic<std::size_t> next{0};
  std::mutex io;
  std::vector<int> codes(configs.size(), kExitOk);
  auto worker = [&] {
    for (std::size_t i; (i = next++) < configs.size();) {
      try {
        ScenarioConfig c = resolve_config("", configs[i], overrides);
        const auto dir = root / std::filesystem::path(configs[i]).stem();
        RunRecord rec = execute(c, dir);
        std::lock_guard lock(io);
        summarize(out, rec);
      } catch (const std::exception& e) {
        std::lock_guard lock(io);
        err << configs[i] << ": " << e.what() << "\n";
        codes[i] = exit_code_for(e);
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::future<void>> pool;
  for (unsigned w = 0; w < n; ++w) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();
  int worst = kExitOk;
  for (int c : codes) worst = std::max(worst, c);
  return worst;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Squeezed-vacuum laser simulations"};
  app.require_subcommand(1);

  struct ScenarioArgs {
    std::string config;
    std::optional<std::string> out;
    std::vector<std::string> overrides;
    bool echo = false;
  };
  std::vector<std::pair<CLI::App*, ScenarioArgs>> scenario_cmds;
  scenario_cmds.reserve(scenario_names().size());
  for (const auto& name : scenario_names()) {
    scenario_cmds.emplace_back(app.add_subcommand(name, "run the " + name + " scenario"), ScenarioArgs{});
    auto& [cmd, args] = scenario_cmds.back();
    cmd->add_option("--config,-c", args.config, "config file (defaults when omitted)");
    cmd->add_option("--out,-o", args.out, std::string("output directory (default $") + kOutputEnv + "/<scenario> or out/<scenario>)");
    cmd->add_option("--set,-s", args.overrides, "override one key: key=value")->take_all();
    cmd->add_flag("--echo-config", args.echo, "print the resolved config and exit");
  }

  std::string verify_dir;
  bool rerun = false;
  CLI::App* verify_cmd = app.add_subcommand("verify", "recompute the checksums listed in a run manifest");
  verify_cmd->add_option("dir", verify_dir, "run directory")->required();
  verify_cmd->add_flag("--rerun", rerun, "also re-run the recorded config and compare outputs");

  std::vector<std::string> sweep_configs, sweep_overrides;
  std::optional<std::string> sweep_out;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run several config files, one manifest each");
  sweep_cmd->add_option("configs", sweep_configs, "config files (each names its scenario)")->required();
  sweep_cmd->add_option("--out,-o", sweep_out, "output root; each run goes to <root>/<config stem>");
  sweep_cmd->add_option("--set,-s", sweep_overrides, "override applied to every config")->take_all();
  sweep_cmd->add_option("--jobs,-j", jobs, "worker count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (verify_cmd->parsed()) return verify(verify_dir, rerun, out, err);
    if (sweep_cmd->parsed()) return sweep(sweep_configs, sweep_overrides, sweep_out, jobs, out, err);
    for (auto& [cmd, args] : scenario_cmds) {
      if (!cmd->parsed()) continue;
      const std::string scenario = cmd->get_name();
      ScenarioConfig cfg = resolve_config(scenario, args.config, args.overrides);
      if (args.echo) {
        out << cfg.echo();
        return kExitOk;
      }
      summarize(out, execute(cfg, output_directory(args.out, scenario)));
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitConfig;
}

}  // namespace svl
