#pragma once

#include <vector>

#include "logel/policies.hpp"

namespace logel {

struct MleOptions {
  double tolerance = 1e-9;  ///< stop when the gradient infinity-norm drops below this
  int max_iterations = 100; ///< Newton iterations (per state for the tabular family)
  double l2 = 1e-6;         ///< penalty on Boltzmann logits; ignored by the Gaussian family
};

template <typename P>
struct MleResult {
  P policy;
  double log_likelihood = 0.0;          ///< (1/n) sum log pi at the fit
  double initial_log_likelihood = 0.0;  ///< same at the initial parameters
  double objective = 0.0;               ///< penalized objective at the fit
  double initial_objective = 0.0;
  double gradient_norm = 0.0;           ///< infinity norm of the objective gradient
  int iterations = 0;
  bool converged = false;
  std::vector<int> unvisited_states{};  ///< tabular only: logits left at their (centered) init
};

/// Maximum-likelihood fit of a tabular softmax policy: an independent
/// multinomial logistic regression per visited state, solved by damped
/// Newton ascent on the (strictly concave, L2-penalized) log-likelihood.
/// Logits are centered per state afterwards.
MleResult<BoltzmannPolicy> fit_policy_mle(const TabularDataset& data, const BoltzmannPolicy& init,
                                          const MleOptions& options = {});

/// Maximum-likelihood fit of a linear-Gaussian policy by Newton ascent on
/// the score-function gradient.
MleResult<GaussianPolicy> fit_policy_mle(const ContinuousDataset& data, const GaussianPolicy& init,
                                         const MleOptions& options = {});

/// Gaussian MLE recast as ordinary least squares of actions on state
/// features, solved by column-pivoted QR. Throws SingularSystemError when
/// the design matrix does not have full column rank.
VectorXd gaussian_mle_ols(const ContinuousDataset& data, const GaussianPolicy::StateFeatures& features);

/// Per-state visit counts of a tabular dataset.
Eigen::VectorXi state_visits(const TabularDataset& data, int num_states);

}  // namespace logel
