#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logel/cloning.hpp"
#include "logel/learners.hpp"
#include "logel/solver.hpp"

namespace logel {

/// Error raised inside one stage of the observer; what() starts with the stage name.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineOptions {
  GradientEstimator estimator = GradientEstimator::Gpomdp;
  EstimatorOptions estimator_options;
  MleOptions cloning;
  SolverConfig solver;
  /// Known policy parameters theta_1..theta_{m+1}; skips behavioral cloning.
  std::optional<std::vector<VectorXd>> oracle_params;
  /// Known learning rates; replaces the alternating solve by one closed-form solve.
  std::optional<std::vector<double>> known_rates;
};

struct ObserverDiagnostics {
  std::string estimator;
  bool cloned = true;
  bool cloning_converged = true;
  int unvisited_states = 0;            ///< summed over checkpoints
  int zeroed_delta_components = 0;     ///< Delta entries on states neither dataset visited
  bool known_rates = false;
  int iterations = 0;
  bool converged = false;
  bool ridge_fallback = false;
  double ridge = 0.0;
  int degenerate_rate_steps = 0;
  double condition = 0.0;              ///< of sum_t alpha_t^2 J_t^T J_t at the solution
  double min_singular_value = 0.0;     ///< of the stacked system [alpha_t J_t]
  bool no_learning_signal = false;     ///< all Delta vanish or the weights came out zero
};

struct ObserverOutput {
  VectorXd weights;
  VectorXd normalized_weights;  ///< empty when the weights are zero
  VectorXd rates;
  std::vector<VectorXd> params; ///< cloned (or oracle) theta_1..theta_{m+1}
  std::vector<double> trace;
  ObserverDiagnostics diagnostics;
};

namespace detail {

/// Parameter entries that belong to states a tabular dataset never visits.
inline std::vector<bool> unvisited_params(const BoltzmannPolicy& policy, const TabularDataset& data) {
  const Eigen::VectorXi visits = state_visits(data, policy.num_states());
  std::vector<bool> mask(static_cast<std::size_t>(policy.dim()), false);
  for (int s = 0; s < policy.num_states(); ++s)
    if (visits(s) == 0)
      for (int a = 0; a < policy.num_actions(); ++a)
        mask[static_cast<std::size_t>(s * policy.num_actions() + a)] = true;
  return mask;
}

inline std::vector<bool> unvisited_params(const GaussianPolicy& policy, const ContinuousDataset&) {
  return std::vector<bool>(static_cast<std::size_t>(policy.dim()), false);
}

template <typename Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}

}  // namespace detail

/// Recover reward weights from the datasets of a learning process:
/// clone theta_hat_t from every dataset, estimate J_t at theta_hat_t from
/// D_t, then solve for (omega, A) on Delta_t = theta_hat_{t+1} - theta_hat_t.
template <Environment E, Policy P>
ObserverOutput logel_pipeline(const E& env, const std::vector<DatasetFor<E>>& datasets,
                              const P& prototype, const PipelineOptions& options = {},
                              const JacobianOracle<P>& jacobian_oracle = {}) {
  if (datasets.size() < 2) throw PipelineError("input", "need at least two datasets (m >= 1)");
  const std::size_t m = datasets.size() - 1;
  ObserverOutput out;
  ObserverDiagnostics& diag = out.diagnostics;
  diag.estimator = jacobian_oracle ? "exact" : to_string(options.estimator);

  // Stage 1: policy parameters.
  std::vector<P> policies;
  if (options.oracle_params) {
    if (options.oracle_params->size() != datasets.size())
      throw PipelineError("input", "oracle parameters must match the number of datasets");
    diag.cloned = false;
    for (const auto& theta : *options.oracle_params) policies.push_back(prototype.with_params(theta));
  } else {
    for (const auto& data : datasets) {
      auto fit = detail::staged("cloning", [&] { return fit_policy_mle(data, prototype, options.cloning); });
      diag.cloning_converged = diag.cloning_converged && fit.converged;
      diag.unvisited_states += static_cast<int>(fit.unvisited_states.size());
      policies.push_back(std::move(fit.policy));
    }
  }
  for (const auto& p : policies) out.params.push_back(p.params());

  // Stage 2: Jacobians at theta_1..theta_m and parameter differences.
  std::vector<MatrixXd> jacobians;
  std::vector<VectorXd> deltas;
  for (std::size_t t = 0; t < m; ++t) {
    jacobians.push_back(detail::staged("jacobian", [&] {
      return jacobian_oracle ? jacobian_oracle(policies[t])
                             : estimate_jacobian(options.estimator, env, datasets[t], policies[t],
                                                 env.discount(), options.estimator_options)
                                   .value;
    }));
    VectorXd delta = out.params[t + 1] - out.params[t];
    if (diag.cloned) {
      const auto before = detail::unvisited_params(policies[t], datasets[t]);
      const auto after = detail::unvisited_params(policies[t + 1], datasets[t + 1]);
      for (Eigen::Index i = 0; i < delta.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (before[k] && after[k]) {
          delta(i) = 0.0;
          ++diag.zeroed_delta_components;
        }
      }
    }
    deltas.push_back(std::move(delta));
  }

  double largest_delta = 0.0;
  for (const auto& d : deltas) largest_delta = std::max(largest_delta, d.lpNorm<Eigen::Infinity>());

  // Stage 3: weights and learning rates.
  detail::staged("solver", [&] {
    if (options.known_rates) {
      if (options.known_rates->size() != m)
        throw DomainError("known rates must have one entry per learning step");
      const VectorXd alphas = Eigen::Map<const VectorXd>(options.known_rates->data(),
                                                         static_cast<Eigen::Index>(m));
      diag.known_rates = true;
      diag.ridge = options.solver.ridge;
      if (diag.ridge > 0.0) {
        out.weights = solve_weights_ridge(deltas, jacobians, alphas, diag.ridge);
      } else {
        try {
          out.weights = solve_weights(deltas, jacobians, alphas, options.solver.condition_limit);
        } catch (const SingularSystemError&) {
          diag.ridge = options.solver.fallback_ridge;
          diag.ridge_fallback = true;
          out.weights = solve_weights_ridge(deltas, jacobians, alphas, diag.ridge);
        }
      }
      out.rates = alphas;
      out.trace = {weights_objective(deltas, jacobians, alphas, out.weights) +
                   diag.ridge * out.weights.squaredNorm()};
      diag.converged = true;
      const NormalSystem<double> sys = normal_system(deltas, jacobians, alphas);
      diag.condition = condition_number(sys.gram);
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sys.gram, Eigen::EigenvaluesOnly);
      diag.min_singular_value = std::sqrt(std::max(0.0, eig.eigenvalues().minCoeff()));
    } else {
      AlternatingResult<double> res = alternating_solve(deltas, jacobians, options.solver);
      out.weights = std::move(res.weights);
      out.rates = std::move(res.rates);
      out.trace = std::move(res.trace);
      diag.iterations = res.iterations;
      diag.converged = res.converged;
      diag.ridge = res.ridge;
      diag.ridge_fallback = res.ridge_fallback;
      diag.degenerate_rate_steps = res.degenerate_rate_steps;
      diag.condition = res.condition;
      diag.min_singular_value = res.min_singular_value;
    }
    return 0;
  });

  const double scale = 1.0 + std::max(1.0, largest_delta);
  diag.no_learning_signal = largest_delta <= 1e-12 * scale || out.weights.norm() <= 1e-12;
  if (out.weights.norm() > 0.0) out.normalized_weights = normalize_weights(out.weights);
  return out;
}

}  // namespace logel
