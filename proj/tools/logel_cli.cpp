// logel: simulate learners, run the observer, score it, reproduce the gridworld sweeps.
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "logel/experiments.hpp"

using namespace logel;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

fs::path output_root(const ExperimentConfig& config) {
  if (const char* env = std::getenv("LOGEL_OUTPUT_ROOT"); env && *env) return env;
  return config.output_dir;
}

ExperimentConfig base_config(const std::string& config_path, std::optional<std::uint64_t> seed) {
  ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : apply_config(read_config_map(config_path));
  if (seed) config.seed = *seed;
  config.validate();
  return config;
}

bool is_tabular(const RunManifest& manifest) { return manifest.state_kind == "tabular"; }

/// Config stored with a run, with an optional file layered on top. A changed
/// run-defining key is refused unless `force`.
ExperimentConfig run_config(const fs::path& run_dir, const RunManifest& manifest, const std::string& config_path,
                            bool force) {
  ExperimentConfig config = apply_config(manifest.config);
  if (!config_path.empty()) config = apply_config(read_config_map(config_path), config);
  config.validate();
  const std::string hash = config_hash(config);
  if (hash != manifest.stamp.config_hash && !force)
    throw ConfigError("--config", "config hash " + hash + " does not match the run in " + run_dir.string() +
                                      " (" + manifest.stamp.config_hash + "); pass --force to override");
  return config;
}

ConfigMap observer_settings(const ExperimentConfig& config) {
  ConfigMap out;
  for (const auto& [key, value] : to_config_map(config))
    if (key.rfind("observer.", 0) == 0) out[key] = value;
  return out;
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string run_dir;
  std::string observer_file;
  std::string estimator;
  std::string figure;
  bool oracle_params = false;
  bool oracle_gradients = false;
  bool known_rates = false;
  bool force = false;
  std::optional<int> seeds;
};

int cmd_simulate(const Options& o) {
  const ExperimentConfig config = base_config(o.config, o.seed);
  const fs::path dir = o.out.empty() ? output_root(config) / ("run-" + config_hash(config)) : fs::path(o.out);
  if (fs::exists(dir / kManifestFile) && !o.force)
    throw ConfigError("--out", dir.string() + " already holds a run; pass --force to overwrite");
  if (config.env.kind == EnvironmentKind::Gridworld)
    write_run(dir, simulate_gridworld(config), config);
  else
    write_run(dir, simulate_point(config), config);
  std::cout << dir.string() << "\n";
  return kOk;
}

int cmd_observe(const Options& o) {
  const fs::path run_dir = o.run_dir;
  const RunManifest manifest = read_manifest(run_dir);
  ExperimentConfig config = run_config(run_dir, manifest, o.config, o.force);
  if (o.oracle_params) config.observer.oracle_params = true;
  if (o.oracle_gradients) config.observer.oracle_gradients = true;
  if (o.known_rates) config.observer.known_rates = true;
  if (!o.estimator.empty()) {
    try {
      config.observer.estimator = parse_gradient_estimator(o.estimator);
    } catch (const DomainError& e) {
      throw ConfigError("--estimator", e.what());
    }
  }
  config.validate();

  const ObserverOutput out = is_tabular(manifest) ? observe_run(config, read_run<int, int>(run_dir))
                                                  : observe_run(config, read_run<double, double>(run_dir));
  const fs::path file = o.out.empty() ? run_dir / "observer.json" : fs::path(o.out);
  write_file_atomic(file, observer_json(out, manifest.stamp, observer_settings(config)));
  std::cout << file.string() << "\n";
  return kOk;
}

int cmd_evaluate(const Options& o) {
  const fs::path run_dir = o.run_dir;
  const RunManifest manifest = read_manifest(run_dir);
  const ExperimentConfig config = run_config(run_dir, manifest, o.config, o.force);
  const fs::path observer_file = o.observer_file.empty() ? run_dir / "observer.json" : fs::path(o.observer_file);
  ArtifactStamp stamp;
  const ObserverOutput observed = read_observer(observer_file, &stamp);
  if (stamp.config_hash != manifest.stamp.config_hash && !o.force)
    throw ConfigError("--observer", observer_file.string() + " was produced from a different run; pass --force");

  const MetricRow row = is_tabular(manifest)
                            ? evaluate_run(config, read_run<int, int>(run_dir), observed, manifest.stamp.seed)
                            : evaluate_run(config, read_run<double, double>(run_dir), observed, manifest.stamp.seed);
  const fs::path file = o.out.empty() ? run_dir / "metrics.csv" : fs::path(o.out);
  write_file_atomic(file, metrics_csv({row}, manifest.stamp));
  std::cout << file.string() << "\n";
  return kOk;
}

int cmd_reproduce(const Options& o) {
  const Figure figure = parse_figure(o.figure);
  const ExperimentConfig config = base_config(o.config, o.seed);
  const int seeds = o.seeds.value_or(config.eval.seeds);
  if (seeds < 1) throw ConfigError("--seeds", "must be at least 1");
  const fs::path dir = o.out.empty() ? output_root(config) / to_string(figure) : fs::path(o.out);
  fs::create_directories(dir);
  for (const Panel& panel : reproduce(figure, config, seeds)) {
    const fs::path file = dir / (panel.name + ".csv");
    write_file_atomic(file, metrics_csv(panel.rows, {config_hash(panel.config), config.seed}));
    std::cout << file.string() << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recover a learner's reward weights from its sequence of policies."};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
  };
  auto add_seed = [&](CLI::App* cmd) { cmd->add_option("--seed", o.seed, "master seed"); };

  auto* simulate = app.add_subcommand("simulate", "run a learner and store its trajectories and policies");
  add_config(simulate);
  add_seed(simulate);
  simulate->add_option("--out", o.out, "run directory (default <output root>/run-<config hash>)");
  simulate->add_flag("--force", o.force, "overwrite an existing run");

  auto* observe = app.add_subcommand("observe", "recover reward weights from a stored run");
  observe->add_option("run", o.run_dir, "run directory")->required();
  add_config(observe);
  observe->add_option("--out", o.out, "observer file (default <run>/observer.json)");
  observe->add_flag("--oracle-params", o.oracle_params, "use the stored policy parameters, skip cloning");
  observe->add_flag("--oracle-gradients", o.oracle_gradients, "use exact Jacobians (gridworld)");
  observe->add_flag("--known-rates", o.known_rates, "use the stored learning rates");
  observe->add_option("--estimator", o.estimator, "gradient estimator")
      ->check(CLI::IsMember({"gpomdp", "reinforce"}));
  observe->add_flag("--force", o.force, "accept a config whose hash differs from the run");

  auto* evaluate = app.add_subcommand("evaluate", "score an observer output against the true reward");
  evaluate->add_option("run", o.run_dir, "run directory")->required();
  add_config(evaluate);
  evaluate->add_option("--observer", o.observer_file, "observer file (default <run>/observer.json)");
  evaluate->add_option("--out", o.out, "metrics CSV (default <run>/metrics.csv)");
  evaluate->add_flag("--force", o.force, "accept mismatched config hashes");

  auto* repro = app.add_subcommand("reproduce", "run a full gridworld sweep and write one CSV per panel");
  repro->add_option("figure", o.figure, "fig1-batch, fig1-steps or fig3")
      ->required()
      ->check(CLI::IsMember({"fig1-batch", "fig1-steps", "fig3"}));
  add_config(repro);
  add_seed(repro);
  repro->add_option("--seeds", o.seeds, "number of seeds (default eval.seeds)");
  repro->add_option("--out", o.out, "output directory (default <output root>/<figure>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*simulate) return cmd_simulate(o);
    if (*observe) return cmd_observe(o);
    if (*evaluate) return cmd_evaluate(o);
    return cmd_reproduce(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidation;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
