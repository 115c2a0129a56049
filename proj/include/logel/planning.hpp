#pragma once

#include "logel/estimators.hpp"

namespace logel {

/// S x A table of R_w(s, a).
MatrixXd reward_table(const FiniteMdp& mdp, const RewardModel& reward);

struct ValueFunction {
  VectorXd values;   ///< V(s)
  MatrixXd actions;  ///< Q(s, a)
};

/// Exact V^pi and Q^pi. A finite horizon gives the values at the first step
/// of a T-step episode; terminal states contribute only their own reward.
ValueFunction policy_evaluation(const FiniteMdp& mdp, const MatrixXd& policy_table,
                                const MatrixXd& rewards, double gamma, Horizon horizon);

/// Infinite-horizon optimal values by value iteration to a sup-norm change of `tolerance`.
ValueFunction value_iteration(const FiniteMdp& mdp, const MatrixXd& rewards, double gamma,
                              double tolerance = 1e-12, int max_iterations = 100000);

/// Deterministic greedy policy table argmax_a Q(s, a), ties to the lowest action.
MatrixXd greedy_policy_table(const MatrixXd& q_values);

/// temperature * log sum_a exp(Q(s, a) / temperature), computed stably.
VectorXd soft_state_values(const MatrixXd& q_values, double temperature);

/// Q'(s, a) = r(s, a) + gamma [s not terminal] sum_s' P(s'|s,a) V_soft(s').
MatrixXd soft_bellman_backup(const FiniteMdp& mdp, const MatrixXd& rewards,
                             const MatrixXd& q_values, double temperature, double gamma);

/// One-step lookahead r + gamma [not terminal] P V.
MatrixXd bellman_lookahead(const FiniteMdp& mdp, const MatrixXd& rewards, const VectorXd& values,
                           double gamma);

/// Flatten an S x A table row-major into tabular policy parameters.
VectorXd flatten_table(const MatrixXd& table);

}  // namespace logel
