#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logel/types.hpp"

namespace logel {

/// Anything that can be rolled out: reset/step samplers plus the linear
/// reward feature map phi(s, a) of dimension num_features().
template <typename E>
concept Environment = requires(const E& env, typename E::State s, typename E::Action a,
                               Rng& rng) {
  { env.reset(rng) } -> std::convertible_to<typename E::State>;
  { env.step(s, a, rng) } -> std::convertible_to<typename E::State>;
  { env.features(s, a) } -> std::convertible_to<VectorXd>;
  { env.is_terminal(s) } -> std::convertible_to<bool>;
  { env.num_features() } -> std::convertible_to<int>;
  { env.discount() } -> std::convertible_to<double>;
  { env.horizon() } -> std::convertible_to<int>;
  { env.descriptor() } -> std::convertible_to<std::string>;
};

/// Finite state/action MDP with explicit transition rows.
///
/// Transition row (s * A + a) holds P(. | s, a). Feature row (s * A + a) holds
/// phi(s, a). A terminal state ends the episode after the action taken in it;
/// its transition row is still defined so that step() works in continuing use.
class FiniteMdp {
 public:
  using State = int;
  using Action = int;

  FiniteMdp(int num_states, int num_actions, MatrixXd transitions, VectorXd initial,
            MatrixXd features, double discount, int horizon,
            std::vector<bool> terminal = {}, std::string name = "finite");

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int num_features() const { return static_cast<int>(features_.cols()); }
  double discount() const { return discount_; }
  int horizon() const { return horizon_; }
  std::string descriptor() const;

  State reset(Rng& rng) const;
  State step(State s, Action a, Rng& rng) const;
  VectorXd features(State s, Action a) const;
  bool is_terminal(State s) const { return terminal_[static_cast<std::size_t>(s)]; }

  /// max_{s,a,j} |phi_j(s, a)|, by exhaustion.
  double feature_bound() const { return features_.cwiseAbs().maxCoeff(); }

  const MatrixXd& transitions() const { return transitions_; }
  const VectorXd& initial_distribution() const { return initial_; }
  const MatrixXd& feature_matrix() const { return features_; }
  const std::vector<bool>& terminal_mask() const { return terminal_; }

  FiniteMdp with_discount(double discount) const;
  FiniteMdp with_horizon(int horizon) const;
  FiniteMdp with_features(MatrixXd features) const;
  FiniteMdp with_initial(VectorXd initial) const;

  void check_state(State s) const;
  void check_action(Action a) const;

 private:
  void validate() const;

  int num_states_;
  int num_actions_;
  MatrixXd transitions_;
  VectorXd initial_;
  MatrixXd features_;
  double discount_;
  int horizon_;
  std::vector<bool> terminal_;
  std::string name_;
};

/// R_w(s, a) = w . phi(s, a)
struct RewardModel {
  VectorXd weights;

  template <Environment E>
  double operator()(const E& env, typename E::State s, typename E::Action a) const {
    const VectorXd phi = env.features(s, a);
    if (phi.size() != weights.size())
      throw DomainError("reward weights have dimension " + std::to_string(weights.size()) +
                        " but features have " + std::to_string(phi.size()));
    return weights.dot(phi);
  }
};

// Gridworld -----------------------------------------------------------------

enum class Region : int { Orange = 0, LightGrey = 1, DarkGrey = 2, Blue = 3, Green = 4 };

enum GridAction : int { Up = 0, Down = 1, Left = 2, Right = 3 };

struct GridworldLayout {
  int rows = 5;
  int cols = 5;
  std::vector<Region> cells;  // row-major
  int start_row = 1;
  int start_col = 1;

  int index(int row, int col) const { return row * cols + col; }
  Region region(int state) const { return cells[static_cast<std::size_t>(state)]; }
};

/// The 5x5 region map:
///
///   O O L L L
///   O O L L L
///   D D D L L
///   L L D B B
///   L L D B G
///
/// O orange, L light grey, D dark grey, B blue, G green. Start is (1,1).
GridworldLayout default_gridworld_layout();

/// Deterministic moves with border clamping; every action from a green cell
/// leads back to the start cell, and a green cell ends the episode.
FiniteMdp make_gridworld(const GridworldLayout& layout, double discount = 0.96, int horizon = 20);

struct GridworldSetup {
  GridworldLayout layout;
  FiniteMdp mdp;
  RewardModel reward;
};

/// Learner weights (-3, -1, -5, 7, 0) over (orange, light grey, dark grey, blue, green).
GridworldSetup gridworld_default(double discount = 0.96, int horizon = 20);

// Continuous 1-D task ------------------------------------------------------

/// x' = clip(x + clip(a) + noise), phi(x, a) = (-x^2, -clip(a)^2).
class LinearPointEnv {
 public:
  using State = double;
  using Action = double;

  explicit LinearPointEnv(double noise_sigma, double discount = 0.96, int horizon = 20,
                          double state_bound = 2.0, double action_bound = 2.0,
                          double initial_half_width = 1.0);

  int num_features() const { return 2; }
  double discount() const { return discount_; }
  int horizon() const { return horizon_; }
  double noise_sigma() const { return noise_sigma_; }
  double state_bound() const { return state_bound_; }
  double action_bound() const { return action_bound_; }
  double initial_half_width() const { return initial_half_width_; }
  std::string descriptor() const;

  /// Feature bound M_r given the clipping boxes.
  double feature_bound() const;

  State reset(Rng& rng) const;
  State step(State x, Action a, Rng& rng) const;
  VectorXd features(State x, Action a) const;
  bool is_terminal(State) const { return false; }

 private:
  double noise_sigma_;
  double discount_;
  int horizon_;
  double state_bound_;
  double action_bound_;
  double initial_half_width_;
};

LinearPointEnv linear_point_env(double noise_sigma);

// Trajectories ---------------------------------------------------------------

template <typename StateT, typename ActionT>
struct Trajectory {
  using State = StateT;
  using Action = ActionT;

  std::vector<State> states;
  std::vector<Action> actions;

  std::size_t size() const { return actions.size(); }
  bool operator==(const Trajectory&) const = default;
};

template <typename StateT, typename ActionT>
struct Dataset {
  using State = StateT;
  using Action = ActionT;
  using TrajectoryType = Trajectory<State, Action>;

  std::vector<TrajectoryType> trajectories;
  std::string policy_id;
  std::uint64_t seed = 0;

  std::size_t size() const { return trajectories.size(); }
  bool empty() const { return trajectories.empty(); }
  bool operator==(const Dataset&) const = default;
};

using TabularTrajectory = Trajectory<int, int>;
using TabularDataset = Dataset<int, int>;
using ContinuousTrajectory = Trajectory<double, double>;
using ContinuousDataset = Dataset<double, double>;

template <Environment E>
using DatasetFor = Dataset<typename E::State, typename E::Action>;

}  // namespace logel
