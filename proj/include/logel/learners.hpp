#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "logel/estimators.hpp"
#include "logel/planning.hpp"

namespace logel {

enum class LearnerAlgorithm { Gpomdp, QLearning, SoftPolicyImprovement, SoftValueIteration };

std::string to_string(LearnerAlgorithm algorithm);
LearnerAlgorithm parse_learner_algorithm(const std::string& name);

struct LearnerConfig {
  LearnerAlgorithm algorithm = LearnerAlgorithm::Gpomdp;
  int m = 10;         ///< policy updates; m + 1 checkpoints are recorded
  int n = 5;          ///< trajectories in each recorded dataset
  int horizon = 20;   ///< trajectory length

  // G(PO)MDP
  double alpha = 0.1;
  int batch = 0;      ///< independent gradient batch size; 0 means the step uses the recorded dataset
  GradientEstimator estimator = GradientEstimator::Gpomdp;
  bool exact_gradients = false;  ///< step along the exact Jacobian (finite MDPs only)

  // Q-learning
  int episodes = 300;
  double learning_rate = 0.2;
  double exploration = 5.0;  ///< Boltzmann temperature over Q for acting and for snapshots

  // Soft policy improvement / soft value iteration
  double temperature = 1.0;
  double temperature_decay = 0.9;
  int sweeps_per_step = 1;

  /// Initial policy parameters; empty means zeros.
  VectorXd initial_params;
  /// Gaussian learners only: fixed action noise.
  double policy_sigma = 0.5;

  bool shares_dataset() const { return batch == 0; }
  void validate() const;
};

/// Policies and datasets observed along one learning process.
template <typename StateT, typename ActionT>
struct LearningRun {
  using State = StateT;
  using Action = ActionT;

  std::string environment;
  LearnerAlgorithm learner = LearnerAlgorithm::Gpomdp;
  RewardModel reward;
  std::vector<VectorXd> policies;                  ///< theta_1 .. theta_{m+1}
  std::vector<Dataset<State, Action>> datasets;   ///< D_1 .. D_{m+1}
  std::optional<std::vector<double>> rates;        ///< alpha_1 .. alpha_m, gradient learners only
  std::uint64_t seed = 0;

  int steps() const { return static_cast<int>(policies.size()) - 1; }

  void validate() const {
    if (policies.size() < 2) throw DomainError("a learning run needs at least one update");
    if (datasets.size() != policies.size())
      throw DomainError("a learning run needs one dataset per policy");
    if (rates) {
      if (rates->size() + 1 != policies.size())
        throw DomainError("a learning run needs exactly m learning rates");
      for (double a : *rates)
        if (!(a > 0.0)) throw DomainError("learning rates must be positive");
    }
  }

  bool operator==(const LearningRun& other) const {
    return environment == other.environment && learner == other.learner &&
           reward.weights == other.reward.weights && policies == other.policies &&
           datasets == other.datasets && rates == other.rates && seed == other.seed;
  }
};

using TabularRun = LearningRun<int, int>;
using ContinuousRun = LearningRun<double, double>;

/// theta + alpha * J * omega
inline VectorXd gradient_update(const VectorXd& theta, const MatrixXd& jacobian,
                                const VectorXd& omega, double alpha) {
  return theta + alpha * (jacobian * omega);
}

template <Environment E>
struct GradientStep {
  VectorXd theta;
  DatasetFor<E> batch;
  JacobianEstimate jacobian;
};

/// One G(PO)MDP ascent step on a fresh batch: theta' = theta + alpha * J_hat * omega.
template <Environment E, Policy P>
GradientStep<E> gpomdp_step(const P& policy, const RewardModel& reward, const E& env, int batch_n,
                            int horizon, double alpha, Rng& rng,
                            GradientEstimator estimator = GradientEstimator::Gpomdp) {
  if (!(alpha > 0.0)) throw DomainError("learning rate must be positive");
  if (batch_n < 1) throw DomainError("gradient batch must hold at least one trajectory");
  GradientStep<E> out;
  out.batch = sample_trajectories(env, policy, batch_n, horizon, rng, "gradient-batch");
  out.jacobian = estimate_jacobian(estimator, env, out.batch, policy, env.discount());
  out.theta = gradient_update(policy.params(), out.jacobian.value, reward.weights, alpha);
  return out;
}

/// Jacobian provider used in place of the sampled estimate (test hook / exact setting).
template <Policy P>
using JacobianOracle = std::function<MatrixXd(const P&)>;

/// Gradient-ascent learner. Checkpoint k records theta_k and a dataset of n
/// trajectories; the step from theta_k is estimated on that same dataset, or
/// on an independent batch of `batch` trajectories when batch > 0.
template <Environment E, Policy P>
LearningRun<typename E::State, typename E::Action> run_gradient_learner(
    const E& env, const P& init, const RewardModel& reward, const LearnerConfig& config,
    std::uint64_t seed, const JacobianOracle<P>& oracle = {}) {
  config.validate();
  LearningRun<typename E::State, typename E::Action> run;
  run.environment = env.descriptor();
  run.learner = LearnerAlgorithm::Gpomdp;
  run.reward = reward;
  run.seed = seed;
  run.rates = std::vector<double>();
  P policy = init;
  for (int k = 0; k <= config.m; ++k) {
    Rng data_rng(substream_seed(seed, 2 * static_cast<std::uint64_t>(k)));
    run.policies.push_back(policy.params());
    run.datasets.push_back(sample_trajectories(env, policy, config.n, config.horizon, data_rng,
                                               "checkpoint-" + std::to_string(k)));
    if (k == config.m) break;
    VectorXd next;
    if (oracle) {
      next = gradient_update(policy.params(), oracle(policy), reward.weights, config.alpha);
    } else if (config.shares_dataset()) {
      const MatrixXd jac = estimate_jacobian(config.estimator, env, run.datasets.back(), policy,
                                             env.discount())
                               .value;
      next = gradient_update(policy.params(), jac, reward.weights, config.alpha);
    } else {
      Rng step_rng(substream_seed(seed, 2 * static_cast<std::uint64_t>(k) + 1));
      next = gpomdp_step(policy, reward, env, config.batch, config.horizon, config.alpha, step_rng,
                         config.estimator)
                 .theta;
    }
    run.rates->push_back(config.alpha);
    policy = policy.with_params(std::move(next));
  }
  return run;
}

/// Tabular Q-learning with a Boltzmann-over-Q behavior policy; snapshots
/// theta = Q / exploration at m + 1 evenly spaced episode counts.
TabularRun q_learning_run(const FiniteMdp& mdp, const RewardModel& reward,
                          const LearnerConfig& config, std::uint64_t seed);

/// pi_{t+1}(a|s) proportional to pi_t(a|s) exp(Q^{pi_t}(s,a) / temperature_t),
/// with Q^{pi_t} evaluated exactly (infinite horizon).
TabularRun soft_policy_improvement_run(const FiniteMdp& mdp, const RewardModel& reward,
                                       const LearnerConfig& config, std::uint64_t seed);

/// Soft Bellman backups V(s) = temperature log sum_a exp(Q(s,a) / temperature);
/// snapshots theta = Q / temperature_t.
TabularRun soft_value_iteration_run(const FiniteMdp& mdp, const RewardModel& reward,
                                    const LearnerConfig& config, std::uint64_t seed);

/// Dispatch on config.algorithm.
TabularRun generate_learning_run(const LearnerConfig& config, const FiniteMdp& mdp,
                                 const RewardModel& reward, std::uint64_t seed);

/// G(PO)MDP learner on the 1-D point task with a linear-Gaussian policy; the
/// other algorithms need a finite MDP and throw UnsupportedEnvironment.
ContinuousRun generate_learning_run(const LearnerConfig& config, const LinearPointEnv& env,
                                    const RewardModel& reward, std::uint64_t seed);

/// Exact-Jacobian oracle for tabular policies on `mdp`.
JacobianOracle<BoltzmannPolicy> exact_jacobian_oracle(const FiniteMdp& mdp);

}  // namespace logel
