#include "logel/cloning.hpp"

#include <cmath>

namespace logel {

Eigen::VectorXi state_visits(const TabularDataset& data, int num_states) {
  Eigen::VectorXi visits = Eigen::VectorXi::Zero(num_states);
  for (const auto& traj : data.trajectories)
    for (int s : traj.states) {
      if (s < 0 || s >= num_states) throw DomainError("dataset state outside the policy's state space");
      ++visits(s);
    }
  return visits;
}

namespace {

struct StateFit {
  double objective;
  VectorXd gradient;
};

// Per-state penalized objective (1/n)[c.z - N lse(z)] - l2/2 |z|^2 and its gradient.
StateFit state_objective(const VectorXd& z, const VectorXd& counts, double total, double n,
                         double l2) {
  const double shift = z.maxCoeff();
  const VectorXd e = (z.array() - shift).exp().matrix();
  const double lse = shift + std::log(e.sum());
  const VectorXd p = e / e.sum();
  return {(counts.dot(z) - total * lse) / n - 0.5 * l2 * z.squaredNorm(),
          (counts - total * p) / n - l2 * z};
}

}  // namespace

MleResult<BoltzmannPolicy> fit_policy_mle(const TabularDataset& data, const BoltzmannPolicy& init,
                                          const MleOptions& options) {
  if (data.empty()) throw DomainError("cannot clone a policy from an empty dataset");
  const int S = init.num_states();
  const int A = init.num_actions();
  const double n = static_cast<double>(data.size());

  MatrixXd counts = MatrixXd::Zero(S, A);
  for (const auto& traj : data.trajectories)
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const int s = traj.states[t];
      const int a = traj.actions[t];
      if (s < 0 || s >= S || a < 0 || a >= A)
        throw DomainError("dataset pair outside the policy's state/action space");
      counts(s, a) += 1.0;
    }

  MleResult<BoltzmannPolicy> result{init};
  result.initial_log_likelihood = mean_log_likelihood(init, data);
  if (!std::isfinite(result.initial_log_likelihood))
    throw EstimationError("log-likelihood at the initial parameters is not finite");

  VectorXd theta = init.params();
  result.converged = true;
  double objective = 0.0;
  double initial_objective = 0.0;
  for (int s = 0; s < S; ++s) {
    const VectorXd c = counts.row(s).transpose();
    const double total = c.sum();
    VectorXd z = theta.segment(s * A, A);
    if (total == 0.0) {
      result.unvisited_states.push_back(s);
      theta.segment(s * A, A) = (z.array() - z.mean()).matrix();
      continue;
    }
    StateFit fit = state_objective(z, c, total, n, options.l2);
    initial_objective += fit.objective;
    int iter = 0;
    for (; iter < options.max_iterations && fit.gradient.lpNorm<Eigen::Infinity>() >= options.tolerance;
         ++iter) {
      const double shift = z.maxCoeff();
      VectorXd p = (z.array() - shift).exp().matrix();
      p /= p.sum();
      MatrixXd neg_hessian = (total / n) * (MatrixXd(p.asDiagonal()) - p * p.transpose());
      neg_hessian.diagonal().array() += options.l2;
      const VectorXd direction = neg_hessian.ldlt().solve(fit.gradient);
      // Backtracking keeps every accepted step an ascent step.
      double step = 1.0;
      const double slope = fit.gradient.dot(direction);
      StateFit trial = state_objective(z + direction, c, total, n, options.l2);
      while (trial.objective < fit.objective + 1e-4 * step * slope && step > 1e-12) {
        step *= 0.5;
        trial = state_objective(z + step * direction, c, total, n, options.l2);
      }
      if (trial.objective < fit.objective) break;
      z += step * direction;
      fit = trial;
    }
    result.iterations = std::max(result.iterations, iter);
    result.gradient_norm = std::max(result.gradient_norm, fit.gradient.lpNorm<Eigen::Infinity>());
    if (fit.gradient.lpNorm<Eigen::Infinity>() >= options.tolerance) result.converged = false;
    objective += fit.objective;
    theta.segment(s * A, A) = (z.array() - z.mean()).matrix();
  }

  result.policy = init.with_params(std::move(theta));
  result.log_likelihood = mean_log_likelihood(result.policy, data);
  result.objective = objective;
  result.initial_objective = initial_objective;
  if (!std::isfinite(result.log_likelihood)) throw EstimationError("fitted log-likelihood is not finite");
  return result;
}

MleResult<GaussianPolicy> fit_policy_mle(const ContinuousDataset& data, const GaussianPolicy& init,
                                         const MleOptions& options) {
  if (data.empty()) throw DomainError("cannot clone a policy from an empty dataset");
  const double n = static_cast<double>(data.size());
  const int d = init.dim();

  auto gradient_and_curvature = [&](const GaussianPolicy& policy, VectorXd& grad, MatrixXd& curv) {
    grad.setZero(d);
    curv.setZero(d, d);
    for (const auto& traj : data.trajectories)
      for (std::size_t t = 0; t < traj.size(); ++t) {
        grad += policy.score(traj.states[t], traj.actions[t]);
        const VectorXd f = policy.state_feature(traj.states[t]);
        curv.noalias() += f * f.transpose();
      }
    grad /= n;
    curv /= n * policy.sigma() * policy.sigma();
  };

  MleResult<GaussianPolicy> result{init};
  result.initial_log_likelihood = mean_log_likelihood(init, data);
  if (!std::isfinite(result.initial_log_likelihood))
    throw EstimationError("log-likelihood at the initial parameters is not finite");
  result.initial_objective = result.initial_log_likelihood;

  GaussianPolicy policy = init;
  VectorXd grad;
  MatrixXd curv;
  gradient_and_curvature(policy, grad, curv);
  const auto ldlt = curv.ldlt();
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
    throw SingularSystemError("state features do not span the parameter space; the Gaussian MLE is not unique");
  int iter = 0;
  while (iter < options.max_iterations && grad.lpNorm<Eigen::Infinity>() >= options.tolerance) {
    const double before = mean_log_likelihood(policy, data);
    GaussianPolicy next = policy.with_params(policy.params() + ldlt.solve(grad));
    ++iter;
    if (!(mean_log_likelihood(next, data) >= before)) break;
    policy = std::move(next);
    gradient_and_curvature(policy, grad, curv);
  }

  result.policy = policy;
  result.iterations = iter;
  result.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  result.converged = result.gradient_norm < options.tolerance;
  result.log_likelihood = mean_log_likelihood(policy, data);
  result.objective = result.log_likelihood;
  if (!std::isfinite(result.log_likelihood)) throw EstimationError("fitted log-likelihood is not finite");
  return result;
}

VectorXd gaussian_mle_ols(const ContinuousDataset& data, const GaussianPolicy::StateFeatures& features) {
  if (data.empty()) throw DomainError("cannot clone a policy from an empty dataset");
  std::size_t rows = 0;
  for (const auto& traj : data.trajectories) rows += traj.size();
  const Eigen::Index d = features(data.trajectories.front().states.front()).size();
  MatrixXd design(static_cast<Eigen::Index>(rows), d);
  VectorXd actions(static_cast<Eigen::Index>(rows));
  Eigen::Index r = 0;
  for (const auto& traj : data.trajectories)
    for (std::size_t t = 0; t < traj.size(); ++t, ++r) {
      design.row(r) = features(traj.states[t]).transpose();
      actions(r) = traj.actions[t];
    }
  const Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  if (qr.rank() < d)
    throw SingularSystemError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                              " < " + std::to_string(d) + "); add a ridge term");
  return qr.solve(actions);
}

}  // namespace logel
