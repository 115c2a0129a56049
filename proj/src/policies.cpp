#include "logel/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace logel {

std::string to_string(PolicyFamily family) {
  return family == PolicyFamily::Boltzmann ? "boltzmann" : "gaussian";
}

PolicyFamily parse_policy_family(const std::string& name) {
  if (name == "boltzmann") return PolicyFamily::Boltzmann;
  if (name == "gaussian") return PolicyFamily::Gaussian;
  throw DomainError("unknown policy family '" + name + "'");
}

// Boltzmann ------------------------------------------------------------------

BoltzmannPolicy::BoltzmannPolicy(int num_states, int num_actions)
    : BoltzmannPolicy(num_states, num_actions,
                      VectorXd::Zero(static_cast<Eigen::Index>(num_states) * num_actions)) {}

BoltzmannPolicy::BoltzmannPolicy(int num_states, int num_actions, VectorXd theta)
    : num_states_(num_states), num_actions_(num_actions), theta_(std::move(theta)) {
  if (num_states_ < 1 || num_actions_ < 1) throw DomainError("Boltzmann policy needs S, A >= 1");
  if (theta_.size() != dim())
    throw DomainError("Boltzmann parameters must have S*A = " + std::to_string(dim()) + " entries");
}

BoltzmannPolicy BoltzmannPolicy::with_params(VectorXd theta) const {
  return BoltzmannPolicy(num_states_, num_actions_, std::move(theta));
}

void BoltzmannPolicy::check(State s, Action a) const {
  if (s < 0 || s >= num_states_) throw DomainError("state index out of range");
  if (a < 0 || a >= num_actions_) throw DomainError("action index out of range");
}

VectorXd BoltzmannPolicy::action_distribution(State s) const {
  if (s < 0 || s >= num_states_) throw DomainError("state index out of range");
  const auto z = logits(s);
  VectorXd p = (z.array() - z.maxCoeff()).exp().matrix();
  return p / p.sum();
}

MatrixXd BoltzmannPolicy::probability_table() const {
  MatrixXd table(num_states_, num_actions_);
  for (int s = 0; s < num_states_; ++s) table.row(s) = action_distribution(s).transpose();
  return table;
}

double BoltzmannPolicy::log_prob(State s, Action a) const {
  check(s, a);
  const auto z = logits(s);
  const double shift = z.maxCoeff();
  const double lse = shift + std::log((z.array() - shift).exp().sum());
  return z(a) - lse;
}

VectorXd BoltzmannPolicy::score(State s, Action a) const {
  check(s, a);
  VectorXd g = VectorXd::Zero(dim());
  const Eigen::Index off = static_cast<Eigen::Index>(s) * num_actions_;
  g.segment(off, num_actions_) = -action_distribution(s);
  g(off + a) += 1.0;
  return g;
}

void BoltzmannPolicy::add_score_outer(State s, Action a, const RowVectorXd& w,
                                      MatrixXd& out) const {
  check(s, a);
  const Eigen::Index off = static_cast<Eigen::Index>(s) * num_actions_;
  const VectorXd p = action_distribution(s);
  out.middleRows(off, num_actions_).noalias() -= p * w;
  out.row(off + a) += w;
}

BoltzmannPolicy::Action BoltzmannPolicy::sample(State s, Rng& rng) const {
  return sample_categorical(action_distribution(s), rng);
}

// Gaussian -------------------------------------------------------------------

GaussianPolicy::GaussianPolicy(VectorXd theta, double sigma, StateFeatures features,
                               double feature_bound)
    : theta_(std::move(theta)),
      sigma_(sigma),
      features_(std::move(features)),
      feature_bound_(feature_bound) {
  if (!(sigma_ > 0.0)) throw DomainError("Gaussian policy sigma must be positive");
  if (!features_) throw DomainError("Gaussian policy needs a state feature map");
  if (theta_.size() < 1) throw DomainError("Gaussian policy needs at least one parameter");
}

GaussianPolicy GaussianPolicy::with_params(VectorXd theta) const {
  return GaussianPolicy(std::move(theta), sigma_, features_, feature_bound_);
}

VectorXd GaussianPolicy::state_feature(State s) const {
  VectorXd f = features_(s);
  if (f.size() != theta_.size()) throw DomainError("state feature dimension does not match theta");
  return f;
}

double GaussianPolicy::mean(State s) const { return theta_.dot(state_feature(s)); }

NormalDistribution GaussianPolicy::action_distribution(State s) const {
  return {mean(s), sigma_};
}

double GaussianPolicy::log_prob(State s, Action a) const {
  const double z = (a - mean(s)) / sigma_;
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sigma_) - 0.5 * z * z;
}

VectorXd GaussianPolicy::score(State s, Action a) const {
  const VectorXd f = state_feature(s);
  return f * ((a - theta_.dot(f)) / (sigma_ * sigma_));
}

void GaussianPolicy::add_score_outer(State s, Action a, const RowVectorXd& w,
                                     MatrixXd& out) const {
  out.noalias() += score(s, a) * w;
}

GaussianPolicy::Action GaussianPolicy::sample(State s, Rng& rng) const {
  return mean(s) + sigma_ * standard_normal(rng);
}

GaussianPolicy::StateFeatures affine_state_features() {
  return [](double x) {
    VectorXd f(2);
    f << x, 1.0;
    return f;
  };
}

GaussianPolicy make_point_policy(const LinearPointEnv& env, VectorXd theta, double sigma) {
  return GaussianPolicy(std::move(theta), sigma, affine_state_features(),
                        std::max(env.state_bound(), 1.0));
}

}  // namespace logel
