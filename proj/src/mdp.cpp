#include "logel/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace logel {

FiniteMdp::FiniteMdp(int num_states, int num_actions, MatrixXd transitions, VectorXd initial,
                     MatrixXd features, double discount, int horizon,
                     std::vector<bool> terminal, std::string name)
    : num_states_(num_states),
      num_actions_(num_actions),
      transitions_(std::move(transitions)),
      initial_(std::move(initial)),
      features_(std::move(features)),
      discount_(discount),
      horizon_(horizon),
      terminal_(std::move(terminal)),
      name_(std::move(name)) {
  if (terminal_.empty()) terminal_.assign(static_cast<std::size_t>(num_states_), false);
  validate();
}

void FiniteMdp::validate() const {
  if (num_states_ < 1 || num_actions_ < 1)
    throw DomainError("finite MDP needs at least one state and one action");
  const Eigen::Index rows = static_cast<Eigen::Index>(num_states_) * num_actions_;
  if (transitions_.rows() != rows || transitions_.cols() != num_states_)
    throw DomainError("transition matrix must be (S*A) x S");
  if (features_.rows() != rows || features_.cols() < 1)
    throw DomainError("feature matrix must be (S*A) x q with q >= 1");
  if (initial_.size() != num_states_) throw DomainError("initial distribution must have S entries");
  if (!(discount_ >= 0.0 && discount_ < 1.0)) throw DomainError("discount must lie in [0, 1)");
  if (horizon_ < 1) throw DomainError("horizon must be at least 1");
  if (terminal_.size() != static_cast<std::size_t>(num_states_))
    throw DomainError("terminal mask must have S entries");
  if ((transitions_.array() < 0.0).any()) throw DomainError("negative transition probability");
  for (Eigen::Index r = 0; r < rows; ++r)
    if (std::abs(transitions_.row(r).sum() - 1.0) > 1e-12)
      throw DomainError("transition row " + std::to_string(r) + " does not sum to 1");
  if ((initial_.array() < 0.0).any() || std::abs(initial_.sum() - 1.0) > 1e-12)
    throw DomainError("initial distribution is not a probability vector");
  if (!features_.allFinite()) throw DomainError("features must be finite");
}

std::string FiniteMdp::descriptor() const {
  std::ostringstream os;
  os << name_ << ":S=" << num_states_ << ":A=" << num_actions_ << ":q=" << num_features()
     << ":gamma=" << discount_ << ":T=" << horizon_;
  return os.str();
}

void FiniteMdp::check_state(State s) const {
  if (s < 0 || s >= num_states_) throw DomainError("state index " + std::to_string(s) + " out of range");
}

void FiniteMdp::check_action(Action a) const {
  if (a < 0 || a >= num_actions_)
    throw DomainError("action index " + std::to_string(a) + " out of range");
}

FiniteMdp::State FiniteMdp::reset(Rng& rng) const { return sample_categorical(initial_, rng); }

FiniteMdp::State FiniteMdp::step(State s, Action a, Rng& rng) const {
  check_state(s);
  check_action(a);
  return sample_categorical(transitions_.row(static_cast<Eigen::Index>(s) * num_actions_ + a), rng);
}

VectorXd FiniteMdp::features(State s, Action a) const {
  check_state(s);
  check_action(a);
  return features_.row(static_cast<Eigen::Index>(s) * num_actions_ + a).transpose();
}

FiniteMdp FiniteMdp::with_discount(double discount) const {
  FiniteMdp copy = *this;
  copy.discount_ = discount;
  copy.validate();
  return copy;
}

FiniteMdp FiniteMdp::with_horizon(int horizon) const {
  FiniteMdp copy = *this;
  copy.horizon_ = horizon;
  copy.validate();
  return copy;
}

FiniteMdp FiniteMdp::with_features(MatrixXd features) const {
  FiniteMdp copy = *this;
  copy.features_ = std::move(features);
  copy.validate();
  return copy;
}

FiniteMdp FiniteMdp::with_initial(VectorXd initial) const {
  FiniteMdp copy = *this;
  copy.initial_ = std::move(initial);
  copy.validate();
  return copy;
}

// Gridworld -----------------------------------------------------------------

GridworldLayout default_gridworld_layout() {
  using R = Region;
  constexpr R O = R::Orange, L = R::LightGrey, D = R::DarkGrey, B = R::Blue, G = R::Green;
  GridworldLayout layout;
  layout.cells = {O, O, L, L, L,
                  O, O, L, L, L,
                  D, D, D, L, L,
                  L, L, D, B, B,
                  L, L, D, B, G};
  return layout;
}

FiniteMdp make_gridworld(const GridworldLayout& layout, double discount, int horizon) {
  const int S = layout.rows * layout.cols;
  constexpr int A = 4;
  constexpr int Q = 5;
  if (static_cast<int>(layout.cells.size()) != S)
    throw DomainError("layout cell count does not match its dimensions");

  const int start = layout.index(layout.start_row, layout.start_col);
  MatrixXd transitions = MatrixXd::Zero(S * A, S);
  MatrixXd features = MatrixXd::Zero(S * A, Q);
  std::vector<bool> terminal(static_cast<std::size_t>(S), false);

  for (int r = 0; r < layout.rows; ++r) {
    for (int c = 0; c < layout.cols; ++c) {
      const int s = layout.index(r, c);
      const Region region = layout.region(s);
      terminal[static_cast<std::size_t>(s)] = region == Region::Green;
      for (int a = 0; a < A; ++a) {
        int nr = r, nc = c;
        switch (a) {
          case Up: nr = std::max(r - 1, 0); break;
          case Down: nr = std::min(r + 1, layout.rows - 1); break;
          case Left: nc = std::max(c - 1, 0); break;
          case Right: nc = std::min(c + 1, layout.cols - 1); break;
        }
        const int next = region == Region::Green ? start : layout.index(nr, nc);
        transitions(s * A + a, next) = 1.0;
        features(s * A + a, static_cast<int>(region)) = 1.0;
      }
    }
  }
  VectorXd initial = VectorXd::Zero(S);
  initial(start) = 1.0;
  return FiniteMdp(S, A, std::move(transitions), std::move(initial), std::move(features), discount,
                   horizon, std::move(terminal), "gridworld");
}

GridworldSetup gridworld_default(double discount, int horizon) {
  GridworldLayout layout = default_gridworld_layout();
  FiniteMdp mdp = make_gridworld(layout, discount, horizon);
  VectorXd w(5);
  w << -3.0, -1.0, -5.0, 7.0, 0.0;
  return GridworldSetup{std::move(layout), std::move(mdp), RewardModel{std::move(w)}};
}

// Linear point task ----------------------------------------------------------

LinearPointEnv::LinearPointEnv(double noise_sigma, double discount, int horizon,
                               double state_bound, double action_bound,
                               double initial_half_width)
    : noise_sigma_(noise_sigma),
      discount_(discount),
      horizon_(horizon),
      state_bound_(state_bound),
      action_bound_(action_bound),
      initial_half_width_(initial_half_width) {
  if (!(noise_sigma_ >= 0.0)) throw DomainError("noise_sigma must be nonnegative");
  if (!(discount_ >= 0.0 && discount_ < 1.0)) throw DomainError("discount must lie in [0, 1)");
  if (horizon_ < 1) throw DomainError("horizon must be at least 1");
  if (!(state_bound_ > 0.0) || !(action_bound_ > 0.0))
    throw DomainError("state and action bounds must be positive");
  if (!(initial_half_width_ >= 0.0) || initial_half_width_ > state_bound_)
    throw DomainError("initial interval must lie inside the state box");
}

std::string LinearPointEnv::descriptor() const {
  std::ostringstream os;
  os << "linear_point:sigma=" << noise_sigma_ << ":gamma=" << discount_ << ":T=" << horizon_
     << ":box=" << state_bound_ << ":abox=" << action_bound_;
  return os.str();
}

double LinearPointEnv::feature_bound() const {
  return std::max(state_bound_ * state_bound_, action_bound_ * action_bound_);
}

LinearPointEnv::State LinearPointEnv::reset(Rng& rng) const {
  return initial_half_width_ * (2.0 * uniform01(rng) - 1.0);
}

LinearPointEnv::State LinearPointEnv::step(State x, Action a, Rng& rng) const {
  if (!std::isfinite(x) || !std::isfinite(a)) throw DomainError("non-finite state or action");
  const double u = std::clamp(a, -action_bound_, action_bound_);
  const double noise = noise_sigma_ > 0.0 ? noise_sigma_ * standard_normal(rng) : 0.0;
  return std::clamp(x + u + noise, -state_bound_, state_bound_);
}

VectorXd LinearPointEnv::features(State x, Action a) const {
  const double u = std::clamp(a, -action_bound_, action_bound_);
  VectorXd phi(2);
  phi << -x * x, -u * u;
  return phi;
}

LinearPointEnv linear_point_env(double noise_sigma) { return LinearPointEnv(noise_sigma); }

}  // namespace logel
