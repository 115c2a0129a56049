#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "logel/config.hpp"

namespace logel {

namespace fs = std::filesystem;

/// Unreadable, missing or corrupted artifact; what() names the file.
class IoError : public std::runtime_error {
 public:
  IoError(const fs::path& file, const std::string& message)
      : std::runtime_error(file.string() + ": " + message), file_(file) {}
  const fs::path& file() const { return file_; }

 private:
  fs::path file_;
};

/// Write through a sibling temp file and rename it into place.
void write_file_atomic(const fs::path& path, const std::string& contents);
std::string read_file(const fs::path& path);
nlohmann::json read_json(const fs::path& path);

/// What every artifact carries so runs and outputs can be matched up.
struct ArtifactStamp {
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Contents of manifest.json.
struct RunManifest {
  ArtifactStamp stamp;
  std::string environment;
  std::string learner;
  std::string state_kind;  ///< "tabular" or "continuous"
  int steps = 0;
  std::uint64_t run_seed = 0;  ///< seed the learner actually used
  ConfigMap config;
  std::map<std::string, std::string> file_hashes;  ///< file name -> FNV-1a of its bytes
};

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kFailedMarker = "FAILED";
inline constexpr int kFormatVersion = 1;

std::string trajectory_file_name(int checkpoint);

nlohmann::json stamp_json(const ArtifactStamp& stamp);
ArtifactStamp read_stamp(const nlohmann::json& j, const fs::path& file);

std::string manifest_text(const RunManifest& manifest);
RunManifest read_manifest(const fs::path& run_dir);
/// Run directory named in `manifest` is complete and every listed file matches its hash.
void verify_run_files(const fs::path& run_dir, const RunManifest& manifest);

namespace detail {

template <typename S, typename A>
std::string dataset_jsonl(const Dataset<S, A>& data, const ArtifactStamp& stamp, int checkpoint) {
  nlohmann::json header = stamp_json(stamp);
  header["checkpoint"] = checkpoint;
  header["policy_id"] = data.policy_id;
  header["dataset_seed"] = data.seed;
  std::string out = header.dump() + "\n";
  for (const auto& traj : data.trajectories) {
    nlohmann::json rec;
    rec["states"] = traj.states;
    rec["actions"] = traj.actions;
    out += rec.dump() + "\n";
  }
  return out;
}

template <typename S, typename A>
Dataset<S, A> parse_dataset_jsonl(const std::string& text, const fs::path& file) {
  Dataset<S, A> data;
  std::size_t pos = 0;
  bool header = true;
  int line_no = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string line = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    pos = end == std::string::npos ? text.size() : end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (header) {
        data.policy_id = j.at("policy_id").get<std::string>();
        data.seed = j.at("dataset_seed").get<std::uint64_t>();
        header = false;
        continue;
      }
      Trajectory<S, A> traj;
      traj.states = j.at("states").get<std::vector<S>>();
      traj.actions = j.at("actions").get<std::vector<A>>();
      if (traj.states.size() != traj.actions.size())
        throw IoError(file, "line " + std::to_string(line_no) + ": states and actions differ in length");
      data.trajectories.push_back(std::move(traj));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(file, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (header) throw IoError(file, "missing header record");
  if (data.trajectories.empty()) throw IoError(file, "no trajectories");
  return data;
}

}  // namespace detail

/// Serialize a learning run into `run_dir`: one trajectories_NNN.jsonl per
/// checkpoint, policies.jsonl, rates.json (gradient learners), and the
/// manifest last. Any failure leaves a FAILED marker and no manifest.
template <typename S, typename A>
void write_run(const fs::path& run_dir, const LearningRun<S, A>& run, const ExperimentConfig& config) {
  run.validate();
  const ArtifactStamp stamp{config_hash(config), config.seed};
  fs::create_directories(run_dir);
  fs::remove(run_dir / kManifestFile);
  fs::remove(run_dir / kFailedMarker);
  try {
    RunManifest manifest;
    manifest.stamp = stamp;
    manifest.environment = run.environment;
    manifest.learner = to_string(run.learner);
    manifest.state_kind = std::is_same_v<S, int> ? "tabular" : "continuous";
    manifest.steps = run.steps();
    manifest.run_seed = run.seed;
    manifest.config = to_config_map(config);
    auto emit = [&](const std::string& name, const std::string& contents) {
      write_file_atomic(run_dir / name, contents);
      manifest.file_hashes[name] = hex64(fnv1a(contents));
    };

    for (std::size_t k = 0; k < run.datasets.size(); ++k)
      emit(trajectory_file_name(static_cast<int>(k)),
           detail::dataset_jsonl(run.datasets[k], stamp, static_cast<int>(k)));

    std::string policies = stamp_json(stamp).dump() + "\n";
    for (std::size_t k = 0; k < run.policies.size(); ++k) {
      const VectorXd& theta = run.policies[k];
      nlohmann::json rec;
      rec["checkpoint"] = k;
      rec["params"] = std::vector<double>(theta.data(), theta.data() + theta.size());
      policies += rec.dump() + "\n";
    }
    emit("policies.jsonl", policies);

    if (run.rates) {
      nlohmann::json rates = stamp_json(stamp);
      rates["rates"] = *run.rates;
      emit("rates.json", rates.dump(2) + "\n");
    }

    nlohmann::json reward = stamp_json(stamp);
    reward["weights"] = std::vector<double>(run.reward.weights.data(),
                                            run.reward.weights.data() + run.reward.weights.size());
    emit("reward.json", reward.dump(2) + "\n");

    write_file_atomic(run_dir / kManifestFile, manifest_text(manifest));
  } catch (...) {
    write_file_atomic(run_dir / kFailedMarker, "run did not complete\n");
    throw;
  }
}

/// Load a run written by write_run. Every file is checked against the
/// manifest hash first, so a corrupted file fails with its own name.
template <typename S, typename A>
LearningRun<S, A> read_run(const fs::path& run_dir, RunManifest* manifest_out = nullptr) {
  const RunManifest manifest = read_manifest(run_dir);
  const std::string expected_kind = std::is_same_v<S, int> ? "tabular" : "continuous";
  if (manifest.state_kind != expected_kind)
    throw IoError(run_dir / kManifestFile, "run holds " + manifest.state_kind + " data, expected " + expected_kind);
  verify_run_files(run_dir, manifest);

  LearningRun<S, A> run;
  run.environment = manifest.environment;
  run.learner = parse_learner_algorithm(manifest.learner);
  run.seed = manifest.run_seed;

  for (int k = 0; k <= manifest.steps; ++k) {
    const fs::path file = run_dir / trajectory_file_name(k);
    run.datasets.push_back(detail::parse_dataset_jsonl<S, A>(read_file(file), file));
  }

  const fs::path policy_file = run_dir / "policies.jsonl";
  {
    const std::string text = read_file(policy_file);
    std::size_t pos = text.find('\n');
    while (pos != std::string::npos && pos + 1 < text.size()) {
      const std::size_t end = text.find('\n', pos + 1);
      const std::string line = text.substr(pos + 1, end == std::string::npos ? std::string::npos : end - pos - 1);
      pos = end;
      if (line.empty()) continue;
      try {
        const auto params = nlohmann::json::parse(line).at("params").get<std::vector<double>>();
        run.policies.push_back(Eigen::Map<const VectorXd>(params.data(), static_cast<Eigen::Index>(params.size())));
      } catch (const nlohmann::json::exception& e) {
        throw IoError(policy_file, e.what());
      }
    }
  }

  if (manifest.file_hashes.count("rates.json")) {
    const fs::path file = run_dir / "rates.json";
    try {
      run.rates = read_json(file).at("rates").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw IoError(file, e.what());
    }
  }
  {
    const fs::path file = run_dir / "reward.json";
    try {
      const auto w = read_json(file).at("weights").get<std::vector<double>>();
      run.reward.weights = Eigen::Map<const VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(file, e.what());
    }
  }
  try {
    run.validate();
  } catch (const DomainError& e) {
    throw IoError(run_dir, e.what());
  }
  if (manifest_out) *manifest_out = manifest;
  return run;
}

/// observer.json: weights, rates, cloned parameters, trace and diagnostics.
std::string observer_json(const ObserverOutput& output, const ArtifactStamp& stamp,
                          const ConfigMap& observer_settings);
ObserverOutput read_observer(const fs::path& file, ArtifactStamp* stamp = nullptr);

struct MetricRow {
  std::uint64_t seed = 0;
  int m = 0;
  int n = 0;
  int batch = 0;
  double weight_error = 0.0;
  double learner_return = 0.0;
  double observer_return = 0.0;
  double normalized_score = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "seed,m,n,batch,weight_error,learner_return,observer_return,normalized_score";

/// A "# config_hash=... seed=..." comment line, the header, then one line per row.
std::string metrics_csv(const std::vector<MetricRow>& rows, const ArtifactStamp& stamp);

}  // namespace logel
