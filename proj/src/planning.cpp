#include "logel/planning.hpp"

#include <cmath>

namespace logel {

MatrixXd reward_table(const FiniteMdp& mdp, const RewardModel& reward) {
  if (reward.weights.size() != mdp.num_features())
    throw DomainError("reward weights do not match the MDP feature dimension");
  const VectorXd flat = mdp.feature_matrix() * reward.weights;
  return flat.reshaped<Eigen::RowMajor>(mdp.num_states(), mdp.num_actions());
}

VectorXd flatten_table(const MatrixXd& table) {
  return table.reshaped<Eigen::RowMajor>();
}

MatrixXd bellman_lookahead(const FiniteMdp& mdp, const MatrixXd& rewards, const VectorXd& values,
                           double gamma) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const VectorXd next = mdp.transitions() * values;  // (S*A) entries
  MatrixXd q = rewards;
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int a = 0; a < A; ++a) q(s, a) += gamma * next(s * A + a);
  }
  return q;
}

ValueFunction policy_evaluation(const FiniteMdp& mdp, const MatrixXd& policy_table,
                                const MatrixXd& rewards, double gamma, Horizon horizon) {
  const int S = mdp.num_states();
  const VectorXd expected_reward = (policy_table.array() * rewards.array()).rowwise().sum();
  if (!horizon) {
    const MatrixXd kernel = continuation_kernel(mdp, policy_table);
    const MatrixXd system = MatrixXd::Identity(S, S) - gamma * kernel;
    VectorXd v = system.partialPivLu().solve(expected_reward);
    MatrixXd q = bellman_lookahead(mdp, rewards, v, gamma);
    return {std::move(v), std::move(q)};
  }
  VectorXd v = VectorXd::Zero(S);
  MatrixXd q = rewards;
  for (int k = 0; k < *horizon; ++k) {
    q = bellman_lookahead(mdp, rewards, v, gamma);
    v = (policy_table.array() * q.array()).rowwise().sum();
  }
  return {std::move(v), std::move(q)};
}

ValueFunction value_iteration(const FiniteMdp& mdp, const MatrixXd& rewards, double gamma,
                              double tolerance, int max_iterations) {
  VectorXd v = VectorXd::Zero(mdp.num_states());
  MatrixXd q = rewards;
  for (int k = 0; k < max_iterations; ++k) {
    q = bellman_lookahead(mdp, rewards, v, gamma);
    VectorXd next = q.rowwise().maxCoeff();
    const double change = (next - v).lpNorm<Eigen::Infinity>();
    v.swap(next);
    if (change < tolerance) break;
  }
  q = bellman_lookahead(mdp, rewards, v, gamma);
  return {std::move(v), std::move(q)};
}

MatrixXd greedy_policy_table(const MatrixXd& q_values) {
  MatrixXd table = MatrixXd::Zero(q_values.rows(), q_values.cols());
  for (Eigen::Index s = 0; s < q_values.rows(); ++s) {
    Eigen::Index best = 0;
    q_values.row(s).maxCoeff(&best);
    table(s, best) = 1.0;
  }
  return table;
}

VectorXd soft_state_values(const MatrixXd& q_values, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  VectorXd v(q_values.rows());
  for (Eigen::Index s = 0; s < q_values.rows(); ++s) {
    const double top = q_values.row(s).maxCoeff();
    v(s) = top + temperature * std::log(((q_values.row(s).array() - top) / temperature).exp().sum());
  }
  return v;
}

MatrixXd soft_bellman_backup(const FiniteMdp& mdp, const MatrixXd& rewards,
                             const MatrixXd& q_values, double temperature, double gamma) {
  return bellman_lookahead(mdp, rewards, soft_state_values(q_values, temperature), gamma);
}

}  // namespace logel
