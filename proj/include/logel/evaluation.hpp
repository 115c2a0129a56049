#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "logel/learners.hpp"

namespace logel {

/// J(theta, w) = w . psi(theta), with psi evaluated exactly.
double expected_return_exact(const FiniteMdp& mdp, const BoltzmannPolicy& policy,
                             const RewardModel& reward, Horizon horizon);
double expected_return_exact(const FiniteMdp& mdp, const BoltzmannPolicy& policy,
                             const RewardModel& reward);

struct ReturnEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Mean and standard error of sum_t gamma^t R_w(s_t, a_t) over n episodes.
template <Environment E, Policy P>
ReturnEstimate expected_return_mc(const E& env, const P& policy, const RewardModel& reward, int n,
                                  int horizon, Rng& rng) {
  const auto data = sample_trajectories(env, policy, n, horizon, rng);
  std::vector<double> returns;
  returns.reserve(data.size());
  for (const auto& traj : data.trajectories) {
    double g = 0.0;
    double discount = 1.0;
    for (std::size_t t = 0; t < traj.size(); ++t) {
      g += discount * reward(env, traj.states[t], traj.actions[t]);
      discount *= env.discount();
    }
    returns.push_back(g);
  }
  // shifted by the first return, so identical returns give exactly zero spread
  const double shift = returns.front();
  double sum = 0.0, sq = 0.0;
  for (double g : returns) {
    sum += g - shift;
    sq += (g - shift) * (g - shift);
  }
  ReturnEstimate out;
  const double nd = static_cast<double>(n);
  out.mean = shift + sum / nd;
  if (n > 1) {
    const double var = std::max(0.0, (sq - sum * sum / nd) / (nd - 1.0));
    out.stderr_ = std::sqrt(var / nd);
  }
  return out;
}

/// || w_hat / |w_hat| - w / |w| ||_2, in [0, 2].
double weight_error(const VectorXd& estimate, const VectorXd& truth);

struct RetrainResult {
  std::vector<double> returns;     ///< observer agent, exact return under the true weights, per checkpoint
  std::vector<double> normalized;  ///< (return - reference_initial) / (reference_final - reference_initial)
  double reference_initial = 0.0;  ///< reference learner trained on the true weights, first checkpoint
  double reference_final = 0.0;    ///< same, last checkpoint

  double final_score() const { return normalized.back(); }
};

/// Train a fresh G(PO)MDP agent on the recovered weights and score each
/// checkpoint under the true weights. Both the observer agent and the
/// reference agent (trained on the true weights, same seed) see unit-norm
/// weights, so the reference's own trace normalizes to exactly 0 -> 1.
/// A zero estimate trains nothing: the trace stays at its initial value.
RetrainResult retrain_and_score(const FiniteMdp& mdp, const VectorXd& estimate,
                                const VectorXd& truth, const LearnerConfig& learner,
                                std::uint64_t seed);

/// Continuous version: checkpoint returns are Monte-Carlo means over
/// `mc_episodes` episodes, each checkpoint on its own substream.
RetrainResult retrain_and_score(const LinearPointEnv& env, const VectorXd& estimate,
                                const VectorXd& truth, const LearnerConfig& learner,
                                std::uint64_t seed, int mc_episodes = 10000);

}  // namespace logel
