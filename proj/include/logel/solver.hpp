#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "logel/types.hpp"

namespace logel {

/// Settings of the block-coordinate solve over (omega, A).
struct SolverConfig {
  double epsilon = 1e-6;           ///< lower bound on every learning rate
  double ridge = 0.0;              ///< L2 penalty on omega; 0 means plain least squares
  double tolerance = 1e-10;        ///< stop when one sweep lowers the objective by less than this fraction
  int max_iterations = 1000;       ///< full (A, omega) sweeps
  double initial_rate = 1.0;       ///< A starts at initial_rate * ones
  double condition_limit = 1e12;   ///< normal matrices above this condition number count as singular
  double fallback_ridge = 1e-8;    ///< used when the omega-step is singular and ridge == 0

  void validate() const {
    if (!(epsilon > 0.0)) throw DomainError("solver epsilon must be positive");
    if (!(ridge >= 0.0)) throw DomainError("solver ridge must be nonnegative");
    if (!(tolerance >= 0.0)) throw DomainError("solver tolerance must be nonnegative");
    if (max_iterations < 1) throw DomainError("solver max_iterations must be at least 1");
    if (!(initial_rate >= epsilon)) throw DomainError("initial rate must be at least epsilon");
    if (!(condition_limit > 1.0)) throw DomainError("condition limit must exceed 1");
    if (!(fallback_ridge > 0.0)) throw DomainError("fallback ridge must be positive");
  }
};

template <typename Scalar>
struct NormalSystem {
  Matrix<Scalar> gram;  ///< sum_t alpha_t^2 J_t^T J_t
  Vector<Scalar> rhs;   ///< sum_t alpha_t J_t^T Delta_t
};

namespace detail {

template <typename Scalar>
void check_step_shapes(const std::vector<Vector<Scalar>>& deltas,
                       const std::vector<Matrix<Scalar>>& jacobians) {
  if (deltas.empty()) throw DomainError("at least one learning step is required");
  if (deltas.size() != jacobians.size())
    throw DomainError("got " + std::to_string(deltas.size()) + " parameter differences but " +
                      std::to_string(jacobians.size()) + " Jacobians");
  const auto d = jacobians.front().rows();
  const auto q = jacobians.front().cols();
  for (std::size_t t = 0; t < deltas.size(); ++t) {
    if (jacobians[t].rows() != d || jacobians[t].cols() != q)
      throw DomainError("Jacobian " + std::to_string(t) + " has inconsistent shape");
    if (deltas[t].size() != d)
      throw DomainError("parameter difference " + std::to_string(t) + " has wrong dimension");
  }
}

template <typename Scalar>
void check_rates(const Vector<Scalar>& alphas, std::size_t m) {
  if (static_cast<std::size_t>(alphas.size()) != m)
    throw DomainError("expected " + std::to_string(m) + " learning rates");
}

}  // namespace detail

template <typename Scalar>
NormalSystem<Scalar> normal_system(const std::vector<Vector<Scalar>>& deltas,
                                   const std::vector<Matrix<Scalar>>& jacobians,
                                   const Vector<Scalar>& alphas) {
  detail::check_step_shapes(deltas, jacobians);
  detail::check_rates(alphas, deltas.size());
  const auto q = jacobians.front().cols();
  NormalSystem<Scalar> sys{Matrix<Scalar>::Zero(q, q), Vector<Scalar>::Zero(q)};
  for (std::size_t t = 0; t < deltas.size(); ++t) {
    const Scalar a = alphas(static_cast<Eigen::Index>(t));
    sys.gram.noalias() += (a * a) * jacobians[t].transpose() * jacobians[t];
    sys.rhs.noalias() += a * jacobians[t].transpose() * deltas[t];
  }
  return sys;
}

/// Ratio of extreme eigenvalues of a symmetric PSD matrix; infinity when singular.
template <typename Scalar>
Scalar condition_number(const Matrix<Scalar>& gram) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(gram, Eigen::EigenvaluesOnly);
  const Scalar lo = eig.eigenvalues().minCoeff();
  const Scalar hi = eig.eigenvalues().maxCoeff();
  if (!(lo > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
  return hi / lo;
}

/// sum_t || Delta_t - alpha_t J_t omega ||^2
template <typename Scalar>
Scalar weights_objective(const std::vector<Vector<Scalar>>& deltas,
                         const std::vector<Matrix<Scalar>>& jacobians,
                         const Vector<Scalar>& alphas, const Vector<Scalar>& omega) {
  detail::check_step_shapes(deltas, jacobians);
  detail::check_rates(alphas, deltas.size());
  Scalar total(0);
  for (std::size_t t = 0; t < deltas.size(); ++t)
    total += (deltas[t] - alphas(static_cast<Eigen::Index>(t)) * (jacobians[t] * omega)).squaredNorm();
  return total;
}

/// Closed-form least-squares weights at fixed learning rates:
/// omega = (sum alpha^2 J^T J)^{-1} (sum alpha J^T Delta).
/// Throws SingularSystemError when the normal matrix is singular or its
/// condition number exceeds `condition_limit`; use solve_weights_ridge then.
template <typename Scalar>
Vector<Scalar> solve_weights(const std::vector<Vector<Scalar>>& deltas,
                             const std::vector<Matrix<Scalar>>& jacobians,
                             const Vector<Scalar>& alphas, Scalar condition_limit = Scalar(1e12)) {
  const NormalSystem<Scalar> sys = normal_system(deltas, jacobians, alphas);
  const Scalar cond = condition_number(sys.gram);
  if (!(cond <= condition_limit))
    throw SingularSystemError("normal matrix is singular or ill-conditioned (condition number " +
                              std::to_string(static_cast<double>(cond)) +
                              "); use the ridge-regularized solve");
  return sys.gram.ldlt().solve(sys.rhs);
}

/// omega = (sum alpha^2 J^T J + lambda I)^{-1} (sum alpha J^T Delta).
template <typename Scalar>
Vector<Scalar> solve_weights_ridge(const std::vector<Vector<Scalar>>& deltas,
                                   const std::vector<Matrix<Scalar>>& jacobians,
                                   const Vector<Scalar>& alphas, Scalar lambda) {
  if (!(lambda >= Scalar(0))) throw DomainError("ridge penalty must be nonnegative");
  NormalSystem<Scalar> sys = normal_system(deltas, jacobians, alphas);
  sys.gram.diagonal().array() += lambda;
  if (lambda == Scalar(0) && !(condition_number(sys.gram) < std::numeric_limits<Scalar>::infinity()))
    throw SingularSystemError("ridge solve with lambda = 0 on a singular normal matrix");
  return sys.gram.ldlt().solve(sys.rhs);
}

/// Exact minimizer over one learning rate: the projection coefficient of
/// Delta_t on u = J_t omega, clipped below at epsilon.
template <typename Scalar>
Scalar solve_alpha(const Vector<Scalar>& delta, const Matrix<Scalar>& jacobian,
                   const Vector<Scalar>& omega, Scalar epsilon) {
  if (!(epsilon > Scalar(0))) throw DomainError("epsilon must be positive");
  if (jacobian.rows() != delta.size() || jacobian.cols() != omega.size())
    throw DomainError("solve_alpha: inconsistent shapes");
  const Vector<Scalar> u = jacobian * omega;
  const Scalar uu = u.squaredNorm();
  if (!(uu > Scalar(0)))
    throw DegenerateDirectionError("J_t * omega is zero; the learning rate is undetermined");
  return std::max(epsilon, u.dot(delta) / uu);
}

template <typename Scalar>
Vector<Scalar> normalize_weights(const Vector<Scalar>& omega) {
  const Scalar norm = omega.norm();
  if (!(norm > Scalar(0))) throw DomainError("cannot normalize a zero weight vector");
  return omega / norm;
}

template <typename Scalar>
struct AlternatingResult {
  Vector<Scalar> weights;
  Vector<Scalar> rates;
  /// Objective after the initial omega-step and after every later half-step.
  /// Includes ridge * ||omega||^2 when a ridge penalty is active.
  std::vector<Scalar> trace;
  int iterations = 0;
  bool converged = false;
  Scalar ridge = Scalar(0);      ///< penalty actually applied to the omega-steps
  bool ridge_fallback = false;   ///< the plain omega-step was singular
  int degenerate_rate_steps = 0; ///< alpha-steps where J_t omega vanished (alpha set to epsilon)
  Scalar condition = Scalar(0);  ///< condition number of the final normal matrix
  Scalar min_singular_value = Scalar(0);  ///< of the stacked system [alpha_t J_t]
};

/// Alternate the closed-form omega-step (rates fixed) and per-step alpha
/// updates (omega fixed) until one full sweep lowers the objective by less
/// than `tolerance` relative to its previous value.
template <typename Scalar>
AlternatingResult<Scalar> alternating_solve(const std::vector<Vector<Scalar>>& deltas,
                                            const std::vector<Matrix<Scalar>>& jacobians,
                                            const SolverConfig& config = {}) {
  config.validate();
  detail::check_step_shapes(deltas, jacobians);
  const auto m = static_cast<Eigen::Index>(deltas.size());
  const Scalar eps(config.epsilon);

  AlternatingResult<Scalar> out;
  out.rates = Vector<Scalar>::Constant(m, Scalar(config.initial_rate));
  out.ridge = Scalar(config.ridge);

  auto omega_step = [&] {
    if (out.ridge > Scalar(0)) {
      out.weights = solve_weights_ridge(deltas, jacobians, out.rates, out.ridge);
      return;
    }
    try {
      out.weights = solve_weights(deltas, jacobians, out.rates, Scalar(config.condition_limit));
    } catch (const SingularSystemError&) {
      out.ridge = Scalar(config.fallback_ridge);
      out.ridge_fallback = true;
      out.weights = solve_weights_ridge(deltas, jacobians, out.rates, out.ridge);
    }
  };
  auto alpha_step = [&] {
    for (Eigen::Index t = 0; t < m; ++t) {
      const auto idx = static_cast<std::size_t>(t);
      try {
        out.rates(t) = solve_alpha(deltas[idx], jacobians[idx], out.weights, eps);
      } catch (const DegenerateDirectionError&) {
        out.rates(t) = eps;
        ++out.degenerate_rate_steps;
      }
    }
  };
  auto objective = [&] {
    return weights_objective(deltas, jacobians, out.rates, out.weights) +
           out.ridge * out.weights.squaredNorm();
  };

  omega_step();
  Scalar previous = objective();
  out.trace.push_back(previous);
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    out.degenerate_rate_steps = 0;
    alpha_step();
    out.trace.push_back(objective());
    omega_step();
    const Scalar current = objective();
    out.trace.push_back(current);
    out.iterations = iter;
    if (current == Scalar(0) || previous - current <= Scalar(config.tolerance) * previous) {
      out.converged = true;
      break;
    }
    previous = current;
  }

  const NormalSystem<Scalar> sys = normal_system(deltas, jacobians, out.rates);
  out.condition = condition_number(sys.gram);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(sys.gram, Eigen::EigenvaluesOnly);
  out.min_singular_value = std::sqrt(std::max(Scalar(0), eig.eigenvalues().minCoeff()));
  return out;
}

}  // namespace logel
