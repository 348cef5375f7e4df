#include "svlaser/output.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "svlaser/errors.hpp"

namespace svl {

namespace {

using json = nlohmann::ordered_json;

void append_number(std::string& out, double v) {
  if (std::isnan(v)) return;
  std::array<char, 40> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw NumericDomainError("to_csv: cannot format value");
  out.append(buf.data(), end);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << bytes;
  if (!out) throw ConfigError("write failed for " + path.string());
}

// JSON has no NaN; undefined quantities become null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json quantities(const Quantities& q) {
  json o = json::object();
  for (const auto& [k, v] : q) o[k] = number_or_null(v);
  return o;
}

json load_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw InvalidShapeError("table '" + table.name + "': row width differs from header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      append_number(out, row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw NumericalFailure("sha256: digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

RunRecord write_run(const std::filesystem::path& dir, const ScenarioConfig& config, const ScenarioResult& result,
                    double wall_clock_seconds) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());

  RunRecord rec;
  rec.directory = dir;
  for (const auto& t : result.tables) {
    const std::string bytes = to_csv(t);
    const std::string name = t.name + ".csv";
    write_file(dir / name, bytes);
    rec.files.push_back({name, sha256_hex(bytes), bytes.size()});
  }

  json m;
  m["artifact"] = {{"name", kArtifactName}, {"version", kArtifactVersion}};
  m["scenario"] = config.scenario();
  m["config_echo"] = config.echo();
  json keys = json::object();
  for (const auto& [k, v] : config.entries()) keys[k] = v;
  m["config"] = keys;
  m["derived"] = quantities(result.derived);
  m["numerics"] = quantities(result.numerics);
  m["metrics"] = quantities(result.metrics);
  m["notes"] = result.notes;
  m["wall_clock_seconds"] = wall_clock_seconds;
  json files = json::array();
  for (const auto& f : rec.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  m["files"] = files;
  rec.manifest = dir / "manifest.json";
  write_file(rec.manifest, m.dump(2) + "\n");
  return rec;
}

VerifyReport verify_checksums(const std::filesystem::path& dir) {
  VerifyReport report;
  const json m = load_manifest(dir);
  if (!m.contains("files") || !m["files"].is_array()) {
    report.ok = false;
    report.problems.push_back("manifest lists no files");
    return report;
  }
  for (const auto& f : m["files"]) {
    const std::string name = f.at("name").get<std::string>();
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) {
      report.ok = false;
      report.problems.push_back(name + ": missing");
      continue;
    }
    const std::string actual = sha256_file(path);
    if (actual != f.at("sha256").get<std::string>()) {
      report.ok = false;
      report.problems.push_back(name + ": checksum mismatch");
    }
  }
  return report;
}

ScenarioConfig config_from_manifest(const std::filesystem::path& dir) {
  const json m = load_manifest(dir);
  return ScenarioConfig::parse(m.at("config_echo").get<std::string>(), "", (dir / "manifest.json").string());
}

}  // namespace svl
