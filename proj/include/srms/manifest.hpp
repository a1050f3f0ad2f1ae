#pragma once

// Experiment manifests (JSON, schema version 1) and path dumps (CSV).
// save(load(text)) reproduces text byte for byte when text came from save().

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "srms/errors.hpp"
#include "srms/pathsim.hpp"
#include "srms/rng.hpp"
#include "srms/version.hpp"

namespace srms {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum class Verdict { Pass, Fail, Diagnostic };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Diagnostic: return "diagnostic";
  }
  return "diagnostic";
}

inline Verdict verdict_from_string(const std::string& s) {
  if (s == "pass") return Verdict::Pass;
  if (s == "fail") return Verdict::Fail;
  if (s == "diagnostic") return Verdict::Diagnostic;
  throw SchemaError("unknown verdict '" + s + "'");
}

inline Verdict pass_if(bool ok) { return ok ? Verdict::Pass : Verdict::Fail; }

struct ResultRecord {
  std::string name;
  double estimate = 0.0;
  std::optional<std::array<double, 2>> ci;
  std::optional<double> target;
  Verdict verdict = Verdict::Diagnostic;
  std::string detail;

  friend bool operator==(const ResultRecord& a, const ResultRecord& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.name == b.name && same(a.estimate, b.estimate) && a.ci == b.ci && a.target == b.target &&
           a.verdict == b.verdict && a.detail == b.detail;
  }
};

struct ExperimentManifest {
  int schema_version = kSchemaVersion;
  std::string experiment_id;
  std::string kind;
  std::string tool_version = kVersion;
  std::string started_at;
  std::string finished_at;
  Json config = Json::object();
  std::vector<std::string> artifacts;
  std::vector<ResultRecord> results;

  bool all_passed() const {
    for (const auto& r : results)
      if (r.verdict == Verdict::Fail) return false;
    return true;
  }
  friend bool operator==(const ExperimentManifest&, const ExperimentManifest&) = default;
};

namespace detail {

inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline double number_from(const Json& j, const char* field) {
  if (j.is_null()) return std::nan("");
  if (!j.is_number()) throw SchemaError(std::string("field '") + field + "' must be a number");
  return j.get<double>();
}

template <class T>
T required(const Json& j, const char* field) {
  if (!j.contains(field)) throw SchemaError(std::string("missing field '") + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(std::string("field '") + field + "' has the wrong type");
  }
}

inline void reject_unknown(const Json& j, std::initializer_list<const char*> known, const std::string& where) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw SchemaError("unknown field '" + key + "' in " + where);
}

}  // namespace detail

inline Json to_json(const ResultRecord& r) {
  Json j;
  j["name"] = r.name;
  j["estimate"] = detail::number_or_null(r.estimate);
  j["ci"] = r.ci ? Json::array({detail::number_or_null((*r.ci)[0]), detail::number_or_null((*r.ci)[1])})
                 : Json(nullptr);
  j["target"] = r.target ? detail::number_or_null(*r.target) : Json(nullptr);
  j["verdict"] = to_string(r.verdict);
  j["detail"] = r.detail;
  return j;
}

inline Json to_json(const ExperimentManifest& m) {
  Json j;
  j["schema_version"] = m.schema_version;
  j["experiment_id"] = m.experiment_id;
  j["kind"] = m.kind;
  j["tool_version"] = m.tool_version;
  j["generator"] = {{"name", std::string(CounterRng::kGeneratorName)},
                    {"version", CounterRng::kGeneratorVersion},
                    {"stream_derivation", std::string(CounterRng::kStreamDerivation)}};
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["config"] = m.config;
  j["artifacts"] = m.artifacts;
  Json results = Json::array();
  for (const auto& r : m.results) results.push_back(to_json(r));
  j["results"] = results;
  return j;
}

inline std::string save_manifest(const ExperimentManifest& m) { return to_json(m).dump(2) + "\n"; }

inline ExperimentManifest manifest_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("manifest must be a JSON object");
  const int version = detail::required<int>(j, "schema_version");
  if (version != kSchemaVersion)
    throw SchemaError("unsupported schema_version " + std::to_string(version) + " (this build reads " +
                      std::to_string(kSchemaVersion) + ")");
  detail::reject_unknown(j,
                         {"schema_version", "experiment_id", "kind", "tool_version", "generator", "started_at",
                          "finished_at", "config", "artifacts", "results"},
                         "manifest");
  const Json& gen = detail::required<Json>(j, "generator");
  detail::reject_unknown(gen, {"name", "version", "stream_derivation"}, "generator");
  if (detail::required<std::string>(gen, "name") != CounterRng::kGeneratorName ||
      detail::required<int>(gen, "version") != CounterRng::kGeneratorVersion)
    throw SchemaError("manifest was produced with a different random generator");

  ExperimentManifest m;
  m.schema_version = version;
  m.experiment_id = detail::required<std::string>(j, "experiment_id");
  m.kind = detail::required<std::string>(j, "kind");
  m.tool_version = detail::required<std::string>(j, "tool_version");
  m.started_at = detail::required<std::string>(j, "started_at");
  m.finished_at = detail::required<std::string>(j, "finished_at");
  m.config = detail::required<Json>(j, "config");
  if (!m.config.is_object()) throw SchemaError("field 'config' must be an object");
  m.artifacts = detail::required<std::vector<std::string>>(j, "artifacts");
  const Json& results = detail::required<Json>(j, "results");
  if (!results.is_array()) throw SchemaError("field 'results' must be an array");
  for (const auto& rj : results) {
    if (!rj.is_object()) throw SchemaError("result entries must be objects");
    detail::reject_unknown(rj, {"name", "estimate", "ci", "target", "verdict", "detail"}, "result");
    ResultRecord r;
    r.name = detail::required<std::string>(rj, "name");
    r.estimate = detail::number_from(detail::required<Json>(rj, "estimate"), "estimate");
    const Json& ci = detail::required<Json>(rj, "ci");
    if (!ci.is_null()) {
      if (!ci.is_array() || ci.size() != 2) throw SchemaError("field 'ci' must be null or a pair");
      r.ci = std::array<double, 2>{detail::number_from(ci[0], "ci"), detail::number_from(ci[1], "ci")};
    }
    const Json& target = detail::required<Json>(rj, "target");
    if (!target.is_null()) r.target = detail::number_from(target, "target");
    r.verdict = verdict_from_string(detail::required<std::string>(rj, "verdict"));
    r.detail = detail::required<std::string>(rj, "detail");
    m.results.push_back(std::move(r));
  }
  return m;
}

inline ExperimentManifest parse_manifest(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("manifest is not valid JSON: ") + e.what());
  }
  return manifest_from_json(j);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline ExperimentManifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_file(path)); }

inline void write_manifest(const std::filesystem::path& path, const ExperimentManifest& m) {
  write_file(path, save_manifest(m));
}

/// FNV-1a over kind and the compact config text: a stable id for a configuration.
inline std::string experiment_id(const std::string& kind, const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : kind + "|" + config.dump()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return kind + "-" + buf;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// "replicate,k,X_k" rows with 17 significant digits.
inline std::string paths_to_csv(std::span<const SamplePath> paths) {
  std::string out = "replicate,k,X_k\n";
  char buf[64];
  for (std::size_t r = 0; r < paths.size(); ++r) {
    const auto& v = paths[r].values;
    for (std::size_t k = 0; k < v.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g\n", r, k, v[k]);
      out += buf;
    }
  }
  return out;
}

}  // namespace srms
