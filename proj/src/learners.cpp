#include "logel/learners.hpp"

#include <cmath>

namespace logel {

std::string to_string(LearnerAlgorithm algorithm) {
  switch (algorithm) {
    case LearnerAlgorithm::Gpomdp: return "gpomdp";
    case LearnerAlgorithm::QLearning: return "qlearning";
    case LearnerAlgorithm::SoftPolicyImprovement: return "spi";
    case LearnerAlgorithm::SoftValueIteration: return "svi";
  }
  return "unknown";
}

LearnerAlgorithm parse_learner_algorithm(const std::string& name) {
  if (name == "gpomdp") return LearnerAlgorithm::Gpomdp;
  if (name == "qlearning") return LearnerAlgorithm::QLearning;
  if (name == "spi") return LearnerAlgorithm::SoftPolicyImprovement;
  if (name == "svi") return LearnerAlgorithm::SoftValueIteration;
  throw DomainError("unknown learner algorithm '" + name + "'");
}

void LearnerConfig::validate() const {
  if (m < 1) throw DomainError("learner.m must be at least 1");
  if (n < 1) throw DomainError("learner.n must be at least 1");
  if (horizon < 1) throw DomainError("learner.horizon must be at least 1");
  if (!(alpha > 0.0)) throw DomainError("learner.alpha must be positive");
  if (batch < 0) throw DomainError("learner.batch must be nonnegative");
  if (episodes < 0) throw DomainError("learner.episodes must be nonnegative");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw DomainError("learner.learning_rate must lie in (0, 1]");
  if (!(exploration > 0.0)) throw DomainError("learner.exploration must be positive");
  if (!(temperature > 0.0)) throw DomainError("learner.temperature must be positive");
  if (!(temperature_decay > 0.0)) throw DomainError("learner.temperature_decay must be positive");
  if (sweeps_per_step < 1) throw DomainError("learner.sweeps_per_step must be at least 1");
  if (!(policy_sigma > 0.0)) throw DomainError("learner.policy_sigma must be positive");
}

namespace {

BoltzmannPolicy initial_tabular_policy(const FiniteMdp& mdp, const LearnerConfig& config) {
  BoltzmannPolicy policy(mdp.num_states(), mdp.num_actions());
  if (config.initial_params.size() > 0) policy = policy.with_params(config.initial_params);
  return policy;
}

TabularRun empty_run(const FiniteMdp& mdp, const RewardModel& reward, LearnerAlgorithm algorithm,
                     std::uint64_t seed) {
  TabularRun run;
  run.environment = mdp.descriptor();
  run.learner = algorithm;
  run.reward = reward;
  run.seed = seed;
  return run;
}

void record_checkpoint(TabularRun& run, const FiniteMdp& mdp, const BoltzmannPolicy& policy,
                       const LearnerConfig& config, int k) {
  Rng data_rng(substream_seed(run.seed, 2 * static_cast<std::uint64_t>(k)));
  run.policies.push_back(policy.params());
  run.datasets.push_back(sample_trajectories(mdp, policy, config.n, config.horizon, data_rng,
                                             "checkpoint-" + std::to_string(k)));
}

}  // namespace

TabularRun q_learning_run(const FiniteMdp& mdp, const RewardModel& reward,
                          const LearnerConfig& config, std::uint64_t seed) {
  config.validate();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const MatrixXd rewards = reward_table(mdp, reward);
  const double gamma = mdp.discount();
  const double tau = config.exploration;

  TabularRun run = empty_run(mdp, reward, LearnerAlgorithm::QLearning, seed);
  MatrixXd q = MatrixXd::Zero(S, A);
  auto snapshot = [&] { return BoltzmannPolicy(S, A, flatten_table(q) / tau); };

  Rng train_rng(substream_seed(seed, 0x5157ULL));
  int done = 0;
  for (int k = 0; k <= config.m; ++k) {
    const int target = static_cast<int>(std::llround(static_cast<double>(k) * config.episodes / config.m));
    for (; done < target; ++done) {
      int s = mdp.reset(train_rng);
      for (int t = 0; t < config.horizon; ++t) {
        const VectorXd p = ((q.row(s).array() - q.row(s).maxCoeff()) / tau).exp().matrix().transpose();
        const int a = sample_categorical(p, train_rng);
        double td_target = rewards(s, a);
        const bool terminal = mdp.is_terminal(s);
        int next = s;
        if (!terminal) {
          next = mdp.step(s, a, train_rng);
          td_target += gamma * q.row(next).maxCoeff();
        }
        q(s, a) += config.learning_rate * (td_target - q(s, a));
        if (terminal) break;
        s = next;
      }
    }
    record_checkpoint(run, mdp, snapshot(), config, k);
  }
  return run;
}

TabularRun soft_policy_improvement_run(const FiniteMdp& mdp, const RewardModel& reward,
                                       const LearnerConfig& config, std::uint64_t seed) {
  config.validate();
  const MatrixXd rewards = reward_table(mdp, reward);
  TabularRun run = empty_run(mdp, reward, LearnerAlgorithm::SoftPolicyImprovement, seed);
  BoltzmannPolicy policy = initial_tabular_policy(mdp, config);
  double tau = config.temperature;
  for (int k = 0; k <= config.m; ++k) {
    record_checkpoint(run, mdp, policy, config, k);
    if (k == config.m) break;
    const ValueFunction vf =
        policy_evaluation(mdp, policy.probability_table(), rewards, mdp.discount(), kInfiniteHorizon);
    // log pi_{t+1} = log pi_t + Q / tau, up to a per-state constant
    policy = policy.with_params(policy.params() + flatten_table(vf.actions) / tau);
    tau *= config.temperature_decay;
  }
  return run;
}

TabularRun soft_value_iteration_run(const FiniteMdp& mdp, const RewardModel& reward,
                                    const LearnerConfig& config, std::uint64_t seed) {
  config.validate();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const MatrixXd rewards = reward_table(mdp, reward);
  TabularRun run = empty_run(mdp, reward, LearnerAlgorithm::SoftValueIteration, seed);
  double tau = config.temperature;
  MatrixXd q = MatrixXd::Zero(S, A);
  if (config.initial_params.size() > 0)
    q = config.initial_params.reshaped<Eigen::RowMajor>(S, A) * tau;
  for (int k = 0; k <= config.m; ++k) {
    record_checkpoint(run, mdp, BoltzmannPolicy(S, A, flatten_table(q) / tau), config, k);
    if (k == config.m) break;
    const double next_tau = tau * config.temperature_decay;
    for (int sweep = 0; sweep < config.sweeps_per_step; ++sweep)
      q = soft_bellman_backup(mdp, rewards, q, next_tau, mdp.discount());
    tau = next_tau;
  }
  return run;
}

TabularRun generate_learning_run(const LearnerConfig& config, const FiniteMdp& mdp,
                                 const RewardModel& reward, std::uint64_t seed) {
  switch (config.algorithm) {
    case LearnerAlgorithm::Gpomdp: {
      const BoltzmannPolicy init = initial_tabular_policy(mdp, config);
      if (config.exact_gradients)
        return run_gradient_learner(mdp, init, reward, config, seed, exact_jacobian_oracle(mdp));
      return run_gradient_learner(mdp, init, reward, config, seed);
    }
    case LearnerAlgorithm::QLearning: return q_learning_run(mdp, reward, config, seed);
    case LearnerAlgorithm::SoftPolicyImprovement:
      return soft_policy_improvement_run(mdp, reward, config, seed);
    case LearnerAlgorithm::SoftValueIteration:
      return soft_value_iteration_run(mdp, reward, config, seed);
  }
  throw DomainError("unknown learner algorithm");
}

ContinuousRun generate_learning_run(const LearnerConfig& config, const LinearPointEnv& env,
                                    const RewardModel& reward, std::uint64_t seed) {
  if (config.algorithm != LearnerAlgorithm::Gpomdp)
    throw UnsupportedEnvironment(to_string(config.algorithm) +
                                 " needs a finite MDP; the point task is continuous");
  if (config.exact_gradients)
    throw UnsupportedEnvironment("exact gradients are only available on finite MDPs");
  VectorXd theta = config.initial_params.size() > 0 ? config.initial_params : VectorXd::Zero(2);
  return run_gradient_learner(env, make_point_policy(env, std::move(theta), config.policy_sigma),
                              reward, config, seed);
}

JacobianOracle<BoltzmannPolicy> exact_jacobian_oracle(const FiniteMdp& mdp) {
  return [mdp](const BoltzmannPolicy& policy) { return exact_jacobian(mdp, policy).value; };
}

}  // namespace logel
