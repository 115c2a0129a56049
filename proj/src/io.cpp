#include "logel/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace logel {

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError(path, "write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError(path, "rename failed: " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "missing or unreadable");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path, e.what());
  }
}

std::string trajectory_file_name(int checkpoint) {
  char name[32];
  std::snprintf(name, sizeof name, "trajectories_%03d.jsonl", checkpoint);
  return name;
}

nlohmann::json stamp_json(const ArtifactStamp& stamp) {
  return {{"config_hash", stamp.config_hash}, {"seed", stamp.seed}, {"format_version", kFormatVersion}};
}

ArtifactStamp read_stamp(const nlohmann::json& j, const fs::path& file) {
  try {
    return {j.at("config_hash").get<std::string>(), j.at("seed").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw IoError(file, std::string("missing config hash or seed: ") + e.what());
  }
}

std::string manifest_text(const RunManifest& manifest) {
  nlohmann::json j = stamp_json(manifest.stamp);
  j["environment"] = manifest.environment;
  j["learner"] = manifest.learner;
  j["state_kind"] = manifest.state_kind;
  j["steps"] = manifest.steps;
  j["run_seed"] = manifest.run_seed;
  j["config"] = manifest.config;
  j["files"] = manifest.file_hashes;
  return j.dump(2) + "\n";
}

RunManifest read_manifest(const fs::path& run_dir) {
  const fs::path file = run_dir / kManifestFile;
  if (fs::exists(run_dir / kFailedMarker))
    throw IoError(run_dir, "run is marked FAILED; regenerate it");
  if (!fs::exists(file)) throw IoError(file, "missing; the run directory is incomplete");
  RunManifest m;
  try {
    const auto j = nlohmann::json::parse(read_file(file));
    if (j.at("format_version").get<int>() != kFormatVersion) throw IoError(file, "unsupported format version");
    m.stamp = read_stamp(j, file);
    m.environment = j.at("environment").get<std::string>();
    m.learner = j.at("learner").get<std::string>();
    m.state_kind = j.at("state_kind").get<std::string>();
    m.steps = j.at("steps").get<int>();
    m.run_seed = j.at("run_seed").get<std::uint64_t>();
    m.config = j.at("config").get<ConfigMap>();
    m.file_hashes = j.at("files").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(file, e.what());
  }
  if (m.steps < 1) throw IoError(file, "a run needs at least one step");
  return m;
}

void verify_run_files(const fs::path& run_dir, const RunManifest& manifest) {
  for (int k = 0; k <= manifest.steps; ++k)
    if (!manifest.file_hashes.count(trajectory_file_name(k)))
      throw IoError(run_dir / kManifestFile, "does not list " + trajectory_file_name(k));
  for (const char* required : {"policies.jsonl", "reward.json"})
    if (!manifest.file_hashes.count(required))
      throw IoError(run_dir / kManifestFile, std::string("does not list ") + required);
  for (const auto& [name, hash] : manifest.file_hashes) {
    const fs::path file = run_dir / name;
    if (hex64(fnv1a(read_file(file))) != hash) throw IoError(file, "content hash mismatch (corrupted file)");
  }
}

namespace {

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string observer_json(const ObserverOutput& output, const ArtifactStamp& stamp,
                          const ConfigMap& observer_settings) {
  nlohmann::json j = stamp_json(stamp);
  j["weights"] = to_std(output.weights);
  j["normalized_weights"] = to_std(output.normalized_weights);
  j["rates"] = to_std(output.rates);
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : output.params) params.push_back(to_std(p));
  j["params"] = params;
  j["trace"] = output.trace;
  j["settings"] = observer_settings;
  const ObserverDiagnostics& d = output.diagnostics;
  j["diagnostics"] = {{"estimator", d.estimator},
                      {"cloned", d.cloned},
                      {"cloning_converged", d.cloning_converged},
                      {"unvisited_states", d.unvisited_states},
                      {"zeroed_delta_components", d.zeroed_delta_components},
                      {"known_rates", d.known_rates},
                      {"iterations", d.iterations},
                      {"converged", d.converged},
                      {"ridge_fallback", d.ridge_fallback},
                      {"ridge", d.ridge},
                      {"degenerate_rate_steps", d.degenerate_rate_steps},
                      {"condition", d.condition},
                      {"min_singular_value", d.min_singular_value},
                      {"no_learning_signal", d.no_learning_signal}};
  return j.dump(2) + "\n";
}

ObserverOutput read_observer(const fs::path& file, ArtifactStamp* stamp) {
  ObserverOutput out;
  try {
    const auto j = nlohmann::json::parse(read_file(file));
    if (stamp) *stamp = read_stamp(j, file);
    out.weights = to_eigen(j.at("weights").get<std::vector<double>>());
    out.normalized_weights = to_eigen(j.at("normalized_weights").get<std::vector<double>>());
    out.rates = to_eigen(j.at("rates").get<std::vector<double>>());
    for (const auto& p : j.at("params")) out.params.push_back(to_eigen(p.get<std::vector<double>>()));
    out.trace = j.at("trace").get<std::vector<double>>();
    const auto& d = j.at("diagnostics");
    ObserverDiagnostics& diag = out.diagnostics;
    diag.estimator = d.at("estimator").get<std::string>();
    diag.cloned = d.at("cloned").get<bool>();
    diag.cloning_converged = d.at("cloning_converged").get<bool>();
    diag.unvisited_states = d.at("unvisited_states").get<int>();
    diag.zeroed_delta_components = d.at("zeroed_delta_components").get<int>();
    diag.known_rates = d.at("known_rates").get<bool>();
    diag.iterations = d.at("iterations").get<int>();
    diag.converged = d.at("converged").get<bool>();
    diag.ridge_fallback = d.at("ridge_fallback").get<bool>();
    diag.ridge = d.at("ridge").get<double>();
    diag.degenerate_rate_steps = d.at("degenerate_rate_steps").get<int>();
    diag.condition = d.at("condition").get<double>();
    diag.min_singular_value = d.at("min_singular_value").get<double>();
    diag.no_learning_signal = d.at("no_learning_signal").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(file, e.what());
  }
  return out;
}

std::string metrics_csv(const std::vector<MetricRow>& rows, const ArtifactStamp& stamp) {
  std::string out = "# config_hash=" + stamp.config_hash + " seed=" + std::to_string(stamp.seed) + "\n";
  out += kMetricsHeader;
  out += "\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%llu,%d,%d,%d,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<unsigned long long>(r.seed), r.m, r.n, r.batch, r.weight_error,
                  r.learner_return, r.observer_return, r.normalized_score);
    out += buf;
  }
  return out;
}

}  // namespace logel
