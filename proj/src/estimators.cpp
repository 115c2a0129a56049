#include "logel/estimators.hpp"

#include <cmath>

namespace logel {

std::string to_string(JacobianSource source) {
  switch (source) {
    case JacobianSource::Reinforce: return "reinforce";
    case JacobianSource::Gpomdp: return "gpomdp";
    case JacobianSource::Exact: return "exact";
    case JacobianSource::FiniteDifference: return "finite-difference";
  }
  return "unknown";
}

std::string to_string(GradientEstimator estimator) {
  return estimator == GradientEstimator::Gpomdp ? "gpomdp" : "reinforce";
}

GradientEstimator parse_gradient_estimator(const std::string& name) {
  if (name == "gpomdp") return GradientEstimator::Gpomdp;
  if (name == "reinforce") return GradientEstimator::Reinforce;
  throw DomainError("unknown gradient estimator '" + name + "'");
}

namespace {

void check_policy_shape(const FiniteMdp& mdp, const BoltzmannPolicy& policy) {
  if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
    throw DomainError("policy shape does not match the MDP");
}

// Horizon after which the tail of an infinite discounted sum is negligible.
int effective_steps(double gamma, Horizon horizon) {
  if (horizon) return *horizon;
  if (gamma == 0.0) return 1;
  // gamma^t * (t + 1) < 1e-16
  int t = 0;
  double g = 1.0;
  while (g * (t + 1) >= 1e-16) {
    g *= gamma;
    ++t;
  }
  return t;
}

}  // namespace

MatrixXd continuation_kernel(const FiniteMdp& mdp, const MatrixXd& policy_table) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  MatrixXd kernel = MatrixXd::Zero(S, S);
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int a = 0; a < A; ++a)
      kernel.row(s) += policy_table(s, a) * mdp.transitions().row(s * A + a);
  }
  return kernel;
}

VectorXd exact_state_occupancy(const FiniteMdp& mdp, const BoltzmannPolicy& policy, double gamma,
                               Horizon horizon) {
  check_policy_shape(mdp, policy);
  const MatrixXd kernel = continuation_kernel(mdp, policy.probability_table());
  const VectorXd& mu = mdp.initial_distribution();
  if (!horizon) {
    const MatrixXd system =
        MatrixXd::Identity(mdp.num_states(), mdp.num_states()) - gamma * kernel.transpose();
    return system.partialPivLu().solve(mu);
  }
  VectorXd occupancy = VectorXd::Zero(mdp.num_states());
  VectorXd state = mu;
  double discount = 1.0;
  for (int t = 0; t < *horizon; ++t) {
    occupancy += discount * state;
    state = kernel.transpose() * state;
    discount *= gamma;
  }
  return occupancy;
}

VectorXd exact_state_occupancy(const FiniteMdp& mdp, const BoltzmannPolicy& policy) {
  return exact_state_occupancy(mdp, policy, mdp.discount(), mdp.horizon());
}

VectorXd exact_feature_expectations(const FiniteMdp& mdp, const BoltzmannPolicy& policy,
                                    double gamma, Horizon horizon) {
  const VectorXd occupancy = exact_state_occupancy(mdp, policy, gamma, horizon);
  const MatrixXd table = policy.probability_table();
  const int A = mdp.num_actions();
  VectorXd psi = VectorXd::Zero(mdp.num_features());
  for (int s = 0; s < mdp.num_states(); ++s)
    for (int a = 0; a < A; ++a)
      psi += occupancy(s) * table(s, a) * mdp.feature_matrix().row(s * A + a).transpose();
  return psi;
}

VectorXd exact_feature_expectations(const FiniteMdp& mdp, const BoltzmannPolicy& policy) {
  return exact_feature_expectations(mdp, policy, mdp.discount(), mdp.horizon());
}

JacobianEstimate exact_jacobian(const FiniteMdp& mdp, const BoltzmannPolicy& policy, double gamma,
                                Horizon horizon) {
  check_policy_shape(mdp, policy);
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int d = policy.dim();
  const int q = mdp.num_features();
  const MatrixXd table = policy.probability_table();
  const MatrixXd& P = mdp.transitions();
  const MatrixXd& phi = mdp.feature_matrix();

  // prob(s) = P(s_t = s, alive); acc.row(s) = E[1{s_t = s, alive} sum_{l<t} score_l]
  VectorXd prob = mdp.initial_distribution();
  MatrixXd acc = MatrixXd::Zero(S, d);
  MatrixXd jac = MatrixXd::Zero(d, q);
  const int steps = effective_steps(gamma, horizon);
  double discount = 1.0;
  VectorXd v(d);
  for (int t = 0; t < steps; ++t) {
    VectorXd next_prob = VectorXd::Zero(S);
    MatrixXd next_acc = MatrixXd::Zero(S, d);
    for (int s = 0; s < S; ++s) {
      if (prob(s) == 0.0 && acc.row(s).isZero(0.0)) continue;
      for (int a = 0; a < A; ++a) {
        const double pa = table(s, a);
        if (pa == 0.0) continue;
        // v = acc(s) + prob(s) * score(s, a), score sparse in block s
        v = acc.row(s).transpose();
        v.segment(s * A, A) -= prob(s) * table.row(s).transpose();
        v(s * A + a) += prob(s);
        jac.noalias() += (discount * pa) * v * phi.row(s * A + a);
        if (mdp.is_terminal(s)) continue;
        for (int sn = 0; sn < S; ++sn) {
          const double p = P(s * A + a, sn);
          if (p == 0.0) continue;
          next_prob(sn) += pa * p * prob(s);
          next_acc.row(sn) += (pa * p) * v.transpose();
        }
      }
    }
    prob.swap(next_prob);
    acc.swap(next_acc);
    discount *= gamma;
  }
  return {std::move(jac), JacobianSource::Exact, 0};
}

JacobianEstimate exact_jacobian(const FiniteMdp& mdp, const BoltzmannPolicy& policy) {
  return exact_jacobian(mdp, policy, mdp.discount(), mdp.horizon());
}

JacobianEstimate exact_jacobian_fd(const FiniteMdp& mdp, const BoltzmannPolicy& policy,
                                   double gamma, double h, Horizon horizon) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  const int d = policy.dim();
  MatrixXd jac(d, mdp.num_features());
  VectorXd theta = policy.params();
  for (int k = 0; k < d; ++k) {
    const double saved = theta(k);
    theta(k) = saved + h;
    const VectorXd up = exact_feature_expectations(mdp, policy.with_params(theta), gamma, horizon);
    theta(k) = saved - h;
    const VectorXd down = exact_feature_expectations(mdp, policy.with_params(theta), gamma, horizon);
    theta(k) = saved;
    jac.row(k) = ((up - down) / (2.0 * h)).transpose();
  }
  return {std::move(jac), JacobianSource::FiniteDifference, 0};
}

JacobianEstimate exact_jacobian_fd(const FiniteMdp& mdp, const BoltzmannPolicy& policy, double h) {
  return exact_jacobian_fd(mdp, policy, mdp.discount(), h, mdp.horizon());
}

}  // namespace logel
