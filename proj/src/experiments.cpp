#include "logel/experiments.hpp"

#include <cmath>
#include <limits>

namespace logel {

VectorXd point_true_weights() {
  VectorXd w(2);
  w << 1.0, 0.1;
  return w;
}

GridworldSetup make_gridworld_task(const EnvironmentSpec& spec) {
  return gridworld_default(spec.discount, spec.horizon);
}

LinearPointEnv make_point_task(const EnvironmentSpec& spec) {
  return LinearPointEnv(spec.noise_sigma, spec.discount, spec.horizon);
}

namespace {

void require_kind(const ExperimentConfig& config, EnvironmentKind kind) {
  if (config.env.kind != kind)
    throw ConfigError("env.name", "run is " + to_string(kind) + " but the config says " + to_string(config.env.kind));
}

template <typename Run>
PipelineOptions observer_options(const ExperimentConfig& config, const Run& run) {
  PipelineOptions options = pipeline_options(config.observer);
  if (config.observer.oracle_params) options.oracle_params = run.policies;
  if (config.observer.known_rates) {
    if (!run.rates) throw ConfigError("observer.known_rates", "the run stores no learning rates");
    options.known_rates = *run.rates;
  }
  return options;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

template <typename Run>
MetricRow base_row(const ExperimentConfig& config, const Run& run, const ObserverOutput& observed,
                   std::uint64_t seed) {
  MetricRow row;
  row.seed = seed;
  row.m = run.steps();
  row.n = static_cast<int>(run.datasets.front().size());
  row.batch = config.learner.shares_dataset() ? row.n : config.learner.batch;
  row.weight_error = observed.weights.norm() > 0.0 ? weight_error(observed.weights, run.reward.weights) : 2.0;
  row.observer_return = nan();
  row.normalized_score = nan();
  return row;
}

}  // namespace

TabularRun simulate_gridworld(const ExperimentConfig& config) {
  config.validate();
  require_kind(config, EnvironmentKind::Gridworld);
  const GridworldSetup task = make_gridworld_task(config.env);
  return generate_learning_run(config.learner, task.mdp, task.reward, config.seed);
}

ContinuousRun simulate_point(const ExperimentConfig& config) {
  config.validate();
  require_kind(config, EnvironmentKind::LinearPoint);
  return generate_learning_run(config.learner, make_point_task(config.env), RewardModel{point_true_weights()},
                               config.seed);
}

ObserverOutput observe_run(const ExperimentConfig& config, const TabularRun& run) {
  config.validate();
  require_kind(config, EnvironmentKind::Gridworld);
  const GridworldSetup task = make_gridworld_task(config.env);
  const BoltzmannPolicy prototype(task.mdp.num_states(), task.mdp.num_actions());
  JacobianOracle<BoltzmannPolicy> oracle;
  if (config.observer.oracle_gradients) oracle = exact_jacobian_oracle(task.mdp);
  return logel_pipeline(task.mdp, run.datasets, prototype, observer_options(config, run), oracle);
}

ObserverOutput observe_run(const ExperimentConfig& config, const ContinuousRun& run) {
  config.validate();
  require_kind(config, EnvironmentKind::LinearPoint);
  const LinearPointEnv env = make_point_task(config.env);
  const GaussianPolicy prototype = make_point_policy(env, VectorXd::Zero(2), config.learner.policy_sigma);
  return logel_pipeline(env, run.datasets, prototype, observer_options(config, run));
}

MetricRow evaluate_run(const ExperimentConfig& config, const TabularRun& run, const ObserverOutput& observed,
                       std::uint64_t seed) {
  const GridworldSetup task = make_gridworld_task(config.env);
  MetricRow row = base_row(config, run, observed, seed);
  const RewardModel truth{run.reward.weights};
  const BoltzmannPolicy last(task.mdp.num_states(), task.mdp.num_actions(), run.policies.back());
  row.learner_return = expected_return_exact(task.mdp, last, truth);
  if (config.eval.retrain) {
    const RetrainResult r =
        retrain_and_score(task.mdp, observed.weights, truth.weights, retrain_config(config), seed);
    row.observer_return = r.returns.back();
    row.normalized_score = r.final_score();
  }
  return row;
}

MetricRow evaluate_run(const ExperimentConfig& config, const ContinuousRun& run,
                       const ObserverOutput& observed, std::uint64_t seed) {
  const LinearPointEnv env = make_point_task(config.env);
  MetricRow row = base_row(config, run, observed, seed);
  const RewardModel truth{run.reward.weights};
  Rng rng(substream_seed(seed, 0xe7a1));
  row.learner_return =
      expected_return_mc(env, make_point_policy(env, run.policies.back(), config.learner.policy_sigma), truth,
                         config.eval.mc_episodes, env.horizon(), rng)
          .mean;
  if (config.eval.retrain) {
    const RetrainResult r = retrain_and_score(env, observed.weights, truth.weights, retrain_config(config), seed,
                                              config.eval.mc_episodes);
    row.observer_return = r.returns.back();
    row.normalized_score = r.final_score();
  }
  return row;
}

std::string to_string(Figure figure) {
  switch (figure) {
    case Figure::Fig1Batch: return "fig1-batch";
    case Figure::Fig1Steps: return "fig1-steps";
    case Figure::Fig3: return "fig3";
  }
  return "?";
}

Figure parse_figure(const std::string& name) {
  if (name == "fig1-batch") return Figure::Fig1Batch;
  if (name == "fig1-steps") return Figure::Fig1Steps;
  if (name == "fig3") return Figure::Fig3;
  throw ConfigError("figure", "expected fig1-batch, fig1-steps or fig3, got '" + name + "'");
}

MetricRow run_cell(const ExperimentConfig& config) {
  if (config.env.kind == EnvironmentKind::Gridworld) {
    const TabularRun run = simulate_gridworld(config);
    return evaluate_run(config, run, observe_run(config, run), config.seed);
  }
  const ContinuousRun run = simulate_point(config);
  return evaluate_run(config, run, observe_run(config, run), config.seed);
}

ExperimentConfig fig1_config(const ExperimentConfig& base, int m, int n) {
  ExperimentConfig c = base;
  c.env.kind = EnvironmentKind::Gridworld;
  c.learner.algorithm = LearnerAlgorithm::Gpomdp;
  c.learner.m = m;
  c.learner.n = n;
  c.learner.exact_gradients = true;
  c.observer.oracle_params = true;
  c.observer.known_rates = true;
  c.observer.oracle_gradients = false;
  return c;
}

ExperimentConfig fig3_config(const ExperimentConfig& base, LearnerAlgorithm algorithm) {
  ExperimentConfig c = base;
  c.env.kind = EnvironmentKind::Gridworld;
  c.learner.algorithm = algorithm;
  c.learner.m = 10;
  c.learner.n = 50;
  // Unit steps keep each update large next to the cloning noise.
  c.learner.alpha = 1.0;
  // Softer snapshots for the value-based learners: a near-greedy policy makes
  // cloning see mostly one action per state and the Jacobian loses rank.
  c.learner.temperature = 2.0;
  c.learner.exploration = 2.0;
  c.learner.episodes = 600;
  c.learner.exact_gradients = false;
  c.observer.oracle_params = false;
  c.observer.known_rates = false;
  c.observer.oracle_gradients = false;
  c.eval.retrain = true;
  return c;
}

std::vector<Panel> reproduce(Figure figure, const ExperimentConfig& base, int seeds) {
  if (seeds < 1) throw ConfigError("eval.seeds", "must be at least 1");
  std::vector<Panel> panels;
  auto sweep = [&](Panel& panel, const ExperimentConfig& cell) {
    for (int s = 0; s < seeds; ++s) {
      ExperimentConfig c = cell;
      c.seed = base.seed + static_cast<std::uint64_t>(s);
      panel.rows.push_back(run_cell(c));
    }
  };
  switch (figure) {
    case Figure::Fig1Batch: {
      Panel panel{"fig1-batch", fig1_config(base, 1, 5), {}};
      for (int n : {5, 10, 20, 30, 40, 50}) sweep(panel, fig1_config(base, 1, n));
      panels.push_back(std::move(panel));
      break;
    }
    case Figure::Fig1Steps: {
      Panel panel{"fig1-steps", fig1_config(base, 2, 5), {}};
      for (int m : {2, 4, 6, 8, 10}) sweep(panel, fig1_config(base, m, 5));
      panels.push_back(std::move(panel));
      break;
    }
    case Figure::Fig3:
      for (LearnerAlgorithm a : {LearnerAlgorithm::QLearning, LearnerAlgorithm::Gpomdp,
                                 LearnerAlgorithm::SoftPolicyImprovement, LearnerAlgorithm::SoftValueIteration}) {
        Panel panel{"fig3-" + to_string(a), fig3_config(base, a), {}};
        sweep(panel, panel.config);
        panels.push_back(std::move(panel));
      }
      break;
  }
  return panels;
}

}  // namespace logel
