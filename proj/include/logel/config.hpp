#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "logel/pipeline.hpp"

namespace logel {

/// Invalid configuration value; field() is the dotted key, e.g. "learner.m".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class EnvironmentKind { Gridworld, LinearPoint };

std::string to_string(EnvironmentKind kind);

struct EnvironmentSpec {
  EnvironmentKind kind = EnvironmentKind::Gridworld;
  double discount = 0.96;
  int horizon = 20;
  double noise_sigma = 0.1;  ///< point task only
};

struct ObserverSpec {
  GradientEstimator estimator = GradientEstimator::Gpomdp;
  bool baseline = true;  ///< per-step baseline in the Jacobian estimate
  SolverConfig solver;
  MleOptions cloning;
  bool oracle_params = false;
  bool oracle_gradients = false;  ///< exact Jacobians (finite MDPs)
  bool known_rates = false;       ///< use the stored rates instead of estimating them
};

struct EvaluationSpec {
  int seeds = 20;
  bool retrain = true;
  int retrain_m = 100;  ///< long enough for the reference agent to settle
  int retrain_n = 50;
  double retrain_alpha = 1.0;
  bool retrain_exact = false;
  int mc_episodes = 10000;  ///< Monte-Carlo anchors on continuous tasks
};

/// Gridworld learners step along exact gradients unless told otherwise, so
/// the observer's oracle mode has an exact target.
inline LearnerConfig default_learner() {
  LearnerConfig c;
  c.exact_gradients = true;
  return c;
}

struct ExperimentConfig {
  EnvironmentSpec env;
  LearnerConfig learner = default_learner();
  ObserverSpec observer;
  EvaluationSpec eval;
  std::string output_dir = "runs";
  std::uint64_t seed = 0;

  /// Checks every section; throws ConfigError naming the offending key.
  void validate() const;
};

using ConfigMap = std::map<std::string, std::string>;

/// Parse "key = value" lines; '#' starts a comment, blank lines are skipped.
ConfigMap parse_config_text(const std::string& text);
ConfigMap read_config_map(const std::string& path);

/// Apply entries on top of `base`. Unknown keys and malformed values throw ConfigError.
/// Entries that name env.name but not learner.exact_gradients get the
/// environment's default (exact on gridworld, estimated on the point task).
ExperimentConfig apply_config(const ConfigMap& entries, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path);

/// Every key with its canonical value, sorted.
ConfigMap to_config_map(const ExperimentConfig& config);
std::string to_config_text(const ExperimentConfig& config);

/// FNV-1a over the keys that determine a learning run (env.*, learner.*, seed).
/// Observer and evaluation settings may change without invalidating a run.
std::string config_hash(const ExperimentConfig& config);

std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t value);

/// Solver and cloning settings of the observer as pipeline options.
PipelineOptions pipeline_options(const ObserverSpec& spec);

/// Learner settings used to retrain an agent on recovered weights.
LearnerConfig retrain_config(const ExperimentConfig& config);

}  // namespace logel
