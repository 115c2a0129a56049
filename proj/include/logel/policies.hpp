#pragma once

#include <functional>
#include <string>

#include "logel/mdp.hpp"

namespace logel {

enum class PolicyFamily { Boltzmann, Gaussian };

std::string to_string(PolicyFamily family);
PolicyFamily parse_policy_family(const std::string& name);

/// Differentiable parametric policy pi_theta(a | s).
///
/// add_score_outer(s, a, w, out) performs out += score(s, a) * w for a row
/// vector w; families with sparse scores override the dense update.
template <typename P>
concept Policy = requires(const P& p, typename P::State s, typename P::Action a, Rng& rng,
                          const RowVectorXd& w, MatrixXd& out, VectorXd theta) {
  { p.dim() } -> std::convertible_to<int>;
  { p.params() } -> std::convertible_to<VectorXd>;
  { p.log_prob(s, a) } -> std::convertible_to<double>;
  { p.score(s, a) } -> std::convertible_to<VectorXd>;
  { p.sample(s, rng) } -> std::convertible_to<typename P::Action>;
  p.add_score_outer(s, a, w, out);
  { p.with_params(theta) } -> std::same_as<P>;
};

/// Tabular softmax policy: one logit per (state, action), theta[s * A + a].
class BoltzmannPolicy {
 public:
  using State = int;
  using Action = int;
  static constexpr PolicyFamily family = PolicyFamily::Boltzmann;

  BoltzmannPolicy(int num_states, int num_actions);
  BoltzmannPolicy(int num_states, int num_actions, VectorXd theta);

  int dim() const { return num_states_ * num_actions_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  const VectorXd& params() const { return theta_; }
  BoltzmannPolicy with_params(VectorXd theta) const;

  auto logits(State s) const {
    return theta_.segment(static_cast<Eigen::Index>(s) * num_actions_, num_actions_);
  }

  /// pi(. | s), computed from max-shifted logits.
  VectorXd action_distribution(State s) const;
  /// S x A table of action probabilities.
  MatrixXd probability_table() const;

  double log_prob(State s, Action a) const;
  VectorXd score(State s, Action a) const;
  void add_score_outer(State s, Action a, const RowVectorXd& w, MatrixXd& out) const;
  Action sample(State s, Rng& rng) const;

 private:
  void check(State s, Action a) const;

  int num_states_;
  int num_actions_;
  VectorXd theta_;
};

struct NormalDistribution {
  double mean;
  double stddev;
};

/// Linear-Gaussian policy a ~ N(theta . f(s), sigma^2) with fixed, known sigma.
class GaussianPolicy {
 public:
  using State = double;
  using Action = double;
  using StateFeatures = std::function<VectorXd(double)>;
  static constexpr PolicyFamily family = PolicyFamily::Gaussian;

  /// `feature_bound` is M_S, a bound on |f_j(s)| over the reachable states.
  GaussianPolicy(VectorXd theta, double sigma, StateFeatures features, double feature_bound);

  int dim() const { return static_cast<int>(theta_.size()); }
  const VectorXd& params() const { return theta_; }
  double sigma() const { return sigma_; }
  double feature_bound() const { return feature_bound_; }
  const StateFeatures& state_features() const { return features_; }
  GaussianPolicy with_params(VectorXd theta) const;

  VectorXd state_feature(State s) const;
  double mean(State s) const;
  NormalDistribution action_distribution(State s) const;

  double log_prob(State s, Action a) const;
  VectorXd score(State s, Action a) const;
  void add_score_outer(State s, Action a, const RowVectorXd& w, MatrixXd& out) const;
  Action sample(State s, Rng& rng) const;

 private:
  VectorXd theta_;
  double sigma_;
  StateFeatures features_;
  double feature_bound_;
};

/// f(x) = (x, 1), bounded by max(state_bound, 1).
GaussianPolicy::StateFeatures affine_state_features();

/// Gaussian policy over affine features for the 1-D point task.
GaussianPolicy make_point_policy(const LinearPointEnv& env, VectorXd theta, double sigma);

/// Roll out n independent episodes of at most `horizon` steps. Trajectory i
/// uses its own substream seeded from (one draw of `rng`, i), so results do
/// not depend on how the loop is scheduled. An episode stops after the
/// action taken in a terminal state.
template <Environment E, Policy P>
  requires std::same_as<typename E::State, typename P::State> &&
           std::same_as<typename E::Action, typename P::Action>
DatasetFor<E> sample_trajectories(const E& env, const P& policy, int n, int horizon, Rng& rng,
                                  std::string policy_id = {}) {
  if (n < 1) throw DomainError("sample_trajectories needs n >= 1");
  if (horizon < 1) throw DomainError("sample_trajectories needs horizon >= 1");
  DatasetFor<E> data;
  data.seed = rng();
  data.policy_id = std::move(policy_id);
  data.trajectories.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng stream(substream_seed(data.seed, static_cast<std::uint64_t>(i)));
    auto& traj = data.trajectories[static_cast<std::size_t>(i)];
    traj.states.reserve(static_cast<std::size_t>(horizon));
    traj.actions.reserve(static_cast<std::size_t>(horizon));
    auto s = env.reset(stream);
    for (int t = 0; t < horizon; ++t) {
      const auto a = policy.sample(s, stream);
      traj.states.push_back(s);
      traj.actions.push_back(a);
      if (env.is_terminal(s) || t + 1 == horizon) break;
      s = env.step(s, a, stream);
    }
  }
  return data;
}

/// Sum of log pi(a | s) over every pair in the dataset, divided by the
/// number of trajectories.
template <Policy P>
double mean_log_likelihood(const P& policy,
                           const Dataset<typename P::State, typename P::Action>& data) {
  double total = 0.0;
  for (const auto& traj : data.trajectories)
    for (std::size_t t = 0; t < traj.size(); ++t) total += policy.log_prob(traj.states[t], traj.actions[t]);
  return total / static_cast<double>(data.size());
}

}  // namespace logel
