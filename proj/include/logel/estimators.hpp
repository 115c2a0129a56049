#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logel/policies.hpp"

namespace logel {

enum class JacobianSource { Reinforce, Gpomdp, Exact, FiniteDifference };

std::string to_string(JacobianSource source);

/// d x q matrix d psi / d theta together with where it came from.
struct JacobianEstimate {
  MatrixXd value;
  JacobianSource source = JacobianSource::Exact;
  std::size_t samples = 0;

  Eigen::Index rows() const { return value.rows(); }
  Eigen::Index cols() const { return value.cols(); }
};

enum class GradientEstimator { Gpomdp, Reinforce };

std::string to_string(GradientEstimator estimator);
GradientEstimator parse_gradient_estimator(const std::string& name);

struct EstimatorOptions {
  /// Subtract the batch mean of the (per-step, for G(PO)MDP) discounted
  /// features. Off by default: the plain estimators are unbiased.
  bool baseline = false;
};

/// Episode length. std::nullopt means an infinite horizon.
using Horizon = std::optional<int>;
inline constexpr Horizon kInfiniteHorizon = std::nullopt;

namespace detail {

/// Row t holds gamma^t phi(s_t, a_t).
template <Environment E>
MatrixXd discounted_features(const E& env, const Trajectory<typename E::State, typename E::Action>& traj,
                             double gamma) {
  const int q = env.num_features();
  MatrixXd out(static_cast<Eigen::Index>(traj.size()), q);
  double discount = 1.0;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const VectorXd phi = env.features(traj.states[t], traj.actions[t]);
    if (phi.size() != q)
      throw EstimationError("feature vector of size " + std::to_string(phi.size()) +
                            " where q = " + std::to_string(q));
    out.row(static_cast<Eigen::Index>(t)) = discount * phi.transpose();
    discount *= gamma;
  }
  return out;
}

template <typename D>
void require_nonempty(const D& data) {
  if (data.empty()) throw EstimationError("dataset is empty");
  for (const auto& traj : data.trajectories)
    if (traj.size() == 0 || traj.states.size() != traj.actions.size())
      throw EstimationError("dataset holds an empty or malformed trajectory");
}

}  // namespace detail

/// (1/n) sum_i sum_t gamma^t phi(s_it, a_it).
template <Environment E>
VectorXd estimate_feature_expectations(const E& env, const DatasetFor<E>& data, double gamma) {
  detail::require_nonempty(data);
  VectorXd psi = VectorXd::Zero(env.num_features());
  for (const auto& traj : data.trajectories)
    psi += detail::discounted_features(env, traj, gamma).colwise().sum().transpose();
  return psi / static_cast<double>(data.size());
}

/// Whole-trajectory score times discounted feature sum, averaged over trajectories.
template <Environment E, Policy P>
JacobianEstimate estimate_jacobian_reinforce(const E& env, const DatasetFor<E>& data,
                                             const P& policy, double gamma,
                                             EstimatorOptions options = {}) {
  detail::require_nonempty(data);
  const int q = env.num_features();
  std::vector<RowVectorXd> totals;
  totals.reserve(data.size());
  RowVectorXd baseline = RowVectorXd::Zero(q);
  for (const auto& traj : data.trajectories) {
    totals.push_back(detail::discounted_features(env, traj, gamma).colwise().sum());
    baseline += totals.back();
  }
  baseline /= static_cast<double>(data.size());
  if (!options.baseline) baseline.setZero();

  MatrixXd jac = MatrixXd::Zero(policy.dim(), q);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& traj = data.trajectories[i];
    const RowVectorXd weight = totals[i] - baseline;
    for (std::size_t l = 0; l < traj.size(); ++l)
      policy.add_score_outer(traj.states[l], traj.actions[l], weight, jac);
  }
  jac /= static_cast<double>(data.size());
  return {std::move(jac), JacobianSource::Reinforce, data.size()};
}

/// Causal form: each gamma^t phi_t pairs with the scores of steps l <= t.
/// Evaluated as sum_l score_l * (sum_{t >= l} gamma^t phi_t).
template <Environment E, Policy P>
JacobianEstimate estimate_jacobian_gpomdp(const E& env, const DatasetFor<E>& data,
                                          const P& policy, double gamma,
                                          EstimatorOptions options = {}) {
  detail::require_nonempty(data);
  const int q = env.num_features();
  std::vector<MatrixXd> discounted;
  discounted.reserve(data.size());
  std::size_t longest = 0;
  for (const auto& traj : data.trajectories) {
    discounted.push_back(detail::discounted_features(env, traj, gamma));
    longest = std::max(longest, traj.size());
  }

  MatrixXd baseline = MatrixXd::Zero(static_cast<Eigen::Index>(longest), q);
  if (options.baseline) {
    VectorXd counts = VectorXd::Zero(static_cast<Eigen::Index>(longest));
    for (const auto& f : discounted) {
      baseline.topRows(f.rows()) += f;
      counts.head(f.rows()).array() += 1.0;
    }
    baseline.array().colwise() /= counts.array();
  }

  MatrixXd jac = MatrixXd::Zero(policy.dim(), q);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& traj = data.trajectories[i];
    const MatrixXd& f = discounted[i];
    RowVectorXd tail = RowVectorXd::Zero(q);
    for (Eigen::Index l = f.rows() - 1; l >= 0; --l) {
      tail += f.row(l) - baseline.row(l);
      const auto idx = static_cast<std::size_t>(l);
      policy.add_score_outer(traj.states[idx], traj.actions[idx], tail, jac);
    }
  }
  jac /= static_cast<double>(data.size());
  return {std::move(jac), JacobianSource::Gpomdp, data.size()};
}

template <Environment E, Policy P>
JacobianEstimate estimate_jacobian(GradientEstimator estimator, const E& env,
                                   const DatasetFor<E>& data, const P& policy, double gamma,
                                   EstimatorOptions options = {}) {
  return estimator == GradientEstimator::Gpomdp
             ? estimate_jacobian_gpomdp(env, data, policy, gamma, options)
             : estimate_jacobian_reinforce(env, data, policy, gamma, options);
}

/// Scalar-reward policy gradient sum_t gamma^t r_t sum_{l<=t} score_l, computed
/// with forward running score sums (independent of the Jacobian path).
template <Environment E, Policy P>
VectorXd estimate_policy_gradient(const E& env, const DatasetFor<E>& data, const P& policy,
                                  const RewardModel& reward, double gamma) {
  detail::require_nonempty(data);
  VectorXd grad = VectorXd::Zero(policy.dim());
  for (const auto& traj : data.trajectories) {
    VectorXd running = VectorXd::Zero(policy.dim());
    double discount = 1.0;
    for (std::size_t t = 0; t < traj.size(); ++t) {
      running += policy.score(traj.states[t], traj.actions[t]);
      grad += discount * reward(env, traj.states[t], traj.actions[t]) * running;
      discount *= gamma;
    }
  }
  return grad / static_cast<double>(data.size());
}

// Exact quantities on finite MDPs ---------------------------------------------

/// S x S matrix K(s, s') = [s not terminal] sum_a pi(a|s) P(s'|s,a).
MatrixXd continuation_kernel(const FiniteMdp& mdp, const MatrixXd& policy_table);

/// sum_t gamma^t P(s_t = s, episode alive at t), per state.
VectorXd exact_state_occupancy(const FiniteMdp& mdp, const BoltzmannPolicy& policy, double gamma,
                               Horizon horizon);
VectorXd exact_state_occupancy(const FiniteMdp& mdp, const BoltzmannPolicy& policy);

/// psi(theta) = sum_{s,a} d(s) pi(a|s) phi(s,a) from the discounted occupancy.
VectorXd exact_feature_expectations(const FiniteMdp& mdp, const BoltzmannPolicy& policy,
                                    double gamma, Horizon horizon);
VectorXd exact_feature_expectations(const FiniteMdp& mdp, const BoltzmannPolicy& policy);

/// Analytic d psi / d theta via forward recursion on state probabilities and
/// expected accumulated scores. Infinite horizons are truncated once the
/// remaining discounted mass drops below 1e-16.
JacobianEstimate exact_jacobian(const FiniteMdp& mdp, const BoltzmannPolicy& policy, double gamma,
                                Horizon horizon);
JacobianEstimate exact_jacobian(const FiniteMdp& mdp, const BoltzmannPolicy& policy);

/// Central differences of exact_feature_expectations, one theta component at a time.
JacobianEstimate exact_jacobian_fd(const FiniteMdp& mdp, const BoltzmannPolicy& policy,
                                   double gamma, double h, Horizon horizon);
JacobianEstimate exact_jacobian_fd(const FiniteMdp& mdp, const BoltzmannPolicy& policy,
                                   double h = 1e-5);

}  // namespace logel
