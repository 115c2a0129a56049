#include "logel/evaluation.hpp"

#include "logel/solver.hpp"

namespace logel {

double expected_return_exact(const FiniteMdp& mdp, const BoltzmannPolicy& policy,
                             const RewardModel& reward, Horizon horizon) {
  if (reward.weights.size() != mdp.num_features())
    throw DomainError("reward weights do not match the MDP feature dimension");
  return reward.weights.dot(exact_feature_expectations(mdp, policy, mdp.discount(), horizon));
}

double expected_return_exact(const FiniteMdp& mdp, const BoltzmannPolicy& policy,
                             const RewardModel& reward) {
  return expected_return_exact(mdp, policy, reward, mdp.horizon());
}

double weight_error(const VectorXd& estimate, const VectorXd& truth) {
  if (estimate.size() != truth.size()) throw DomainError("weight vectors differ in dimension");
  return (normalize_weights(estimate) - normalize_weights(truth)).norm();
}

namespace {

std::vector<double> exact_returns(const FiniteMdp& mdp, const TabularRun& run,
                                  const RewardModel& truth) {
  std::vector<double> out;
  for (const auto& theta : run.policies)
    out.push_back(expected_return_exact(
        mdp, BoltzmannPolicy(mdp.num_states(), mdp.num_actions(), theta), truth));
  return out;
}

std::vector<double> mc_returns(const LinearPointEnv& env, const ContinuousRun& run,
                               const RewardModel& truth, double sigma, int episodes,
                               std::uint64_t seed) {
  std::vector<double> out;
  for (std::size_t k = 0; k < run.policies.size(); ++k) {
    Rng rng(substream_seed(seed, k));
    out.push_back(expected_return_mc(env, make_point_policy(env, run.policies[k], sigma), truth,
                                     episodes, env.horizon(), rng)
                      .mean);
  }
  return out;
}

RetrainResult normalize_trace(std::vector<double> returns, const std::vector<double>& reference) {
  RetrainResult out;
  out.returns = std::move(returns);
  out.reference_initial = reference.front();
  out.reference_final = reference.back();
  const double span = out.reference_final - out.reference_initial;
  for (double r : out.returns)
    out.normalized.push_back(span != 0.0 ? (r - out.reference_initial) / span : 0.0);
  return out;
}

}  // namespace

RetrainResult retrain_and_score(const FiniteMdp& mdp, const VectorXd& estimate,
                                const VectorXd& truth, const LearnerConfig& learner,
                                std::uint64_t seed) {
  LearnerConfig config = learner;
  config.algorithm = LearnerAlgorithm::Gpomdp;
  const RewardModel true_reward{truth};

  const TabularRun reference =
      generate_learning_run(config, mdp, RewardModel{normalize_weights(truth)}, seed);
  const std::vector<double> reference_returns = exact_returns(mdp, reference, true_reward);

  if (estimate.norm() == 0.0)
    return normalize_trace(std::vector<double>(reference_returns.size(), reference_returns.front()),
                           reference_returns);
  const TabularRun observer =
      generate_learning_run(config, mdp, RewardModel{normalize_weights(estimate)}, seed);
  return normalize_trace(exact_returns(mdp, observer, true_reward), reference_returns);
}

RetrainResult retrain_and_score(const LinearPointEnv& env, const VectorXd& estimate,
                                const VectorXd& truth, const LearnerConfig& learner,
                                std::uint64_t seed, int mc_episodes) {
  LearnerConfig config = learner;
  config.algorithm = LearnerAlgorithm::Gpomdp;
  const RewardModel true_reward{truth};
  // Evaluation draws use a stream unrelated to the training seed.
  const std::uint64_t eval_seed = substream_seed(seed, 0x5eed);

  const ContinuousRun reference =
      generate_learning_run(config, env, RewardModel{normalize_weights(truth)}, seed);
  const std::vector<double> reference_returns =
      mc_returns(env, reference, true_reward, config.policy_sigma, mc_episodes, eval_seed);
  if (estimate.norm() == 0.0)
    return normalize_trace(std::vector<double>(reference_returns.size(), reference_returns.front()),
                           reference_returns);
  const ContinuousRun observer =
      generate_learning_run(config, env, RewardModel{normalize_weights(estimate)}, seed);
  return normalize_trace(mc_returns(env, observer, true_reward, config.policy_sigma, mc_episodes, eval_seed),
                         reference_returns);
}

}  // namespace logel
