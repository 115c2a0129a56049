#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "logel/experiments.hpp"

using namespace logel;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

LearnerConfig retrain_learner() {
  ExperimentConfig c;
  c.eval.retrain_m = 30;
  return retrain_config(c);
}

}  // namespace

TEST_CASE("exact return: closed cases") {
  const GridworldSetup g = gridworld_default();
  const BoltzmannPolicy pi(25, 4);
  CHECK(expected_return_exact(g.mdp, pi, RewardModel{VectorXd::Zero(5)}) == 0.0);

  const FiniteMdp one(1, 1, MatrixXd::Ones(1, 1), VectorXd::Ones(1), MatrixXd::Ones(1, 1), 0.9, 20);
  CHECK(expected_return_exact(one, BoltzmannPolicy(1, 1), RewardModel{vec({2.5})}, kInfiniteHorizon) ==
        doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("exact return is linear in the weights") {
  const GridworldSetup g = gridworld_default();
  Rng rng(1);
  const BoltzmannPolicy pi(25, 4, testing::random_vector(100, rng, 0.5));
  const VectorXd a = testing::random_vector(5, rng), b = testing::random_vector(5, rng);
  const double sum = expected_return_exact(g.mdp, pi, RewardModel{a + b});
  CHECK(std::abs(sum - expected_return_exact(g.mdp, pi, RewardModel{a}) -
                 expected_return_exact(g.mdp, pi, RewardModel{b})) < 1e-10);
}

TEST_CASE("Monte-Carlo return") {
  const GridworldSetup g = gridworld_default();
  Rng rng(2);
  const BoltzmannPolicy pi(25, 4, testing::random_vector(100, rng, 0.5));
  SUBCASE("agrees with the exact value") {
    const ReturnEstimate mc = expected_return_mc(g.mdp, pi, g.reward, 100000, 20, rng);
    CHECK(mc.stderr_ > 0.0);
    CHECK(std::abs(mc.mean - expected_return_exact(g.mdp, pi, g.reward)) <= 3 * mc.stderr_);
  }
  SUBCASE("zero weights") {
    const ReturnEstimate mc = expected_return_mc(g.mdp, pi, RewardModel{VectorXd::Zero(5)}, 100, 20, rng);
    CHECK(mc.mean == 0.0);
  }
  SUBCASE("deterministic chain") {
    const FiniteMdp one(1, 1, MatrixXd::Ones(1, 1), VectorXd::Ones(1), MatrixXd::Ones(1, 1), 0.9, 20);
    const ReturnEstimate mc = expected_return_mc(one, BoltzmannPolicy(1, 1), RewardModel{vec({1.0})}, 50, 20, rng);
    CHECK(mc.stderr_ == 0.0);
    CHECK(mc.mean == doctest::Approx((1 - std::pow(0.9, 20)) / 0.1));
  }
}

TEST_CASE("weight error") {
  const VectorXd w = vec({-3, -1, -5, 7, 0});
  CHECK(weight_error(2.5 * w, w) < 1e-15);
  CHECK(weight_error(-w, w) == doctest::Approx(2.0));
  CHECK(weight_error(vec({1, 0}), vec({1, 1})) == doctest::Approx(std::sqrt(2 - std::sqrt(2.0))).epsilon(1e-14));
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const VectorXd a = testing::random_vector(5, rng), b = testing::random_vector(5, rng);
    const double e = weight_error(a, b);
    CHECK(e >= 0.0);
    CHECK(e <= 2.0);
    CHECK(std::abs(weight_error(3.7 * a, 0.2 * b) - e) < 1e-12);
  }
  CHECK_THROWS_AS(weight_error(VectorXd::Zero(2), vec({1, 1})), DomainError);
  CHECK_THROWS_AS(weight_error(vec({1, 1}), VectorXd::Zero(2)), DomainError);
}

TEST_CASE("retraining on the true weights scores near one") {
  const GridworldSetup g = gridworld_default();
  std::vector<double> scores;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    scores.push_back(retrain_and_score(g.mdp, 3.0 * g.reward.weights, g.reward.weights, retrain_learner(), seed)
                         .final_score());
  CHECK(testing::median(scores) >= 0.9);
}

TEST_CASE("reference learner's own trace runs from 0 to 1") {
  const GridworldSetup g = gridworld_default();
  const RetrainResult r = retrain_and_score(g.mdp, g.reward.weights, g.reward.weights, retrain_learner(), 4);
  CHECK(r.normalized.front() == 0.0);
  CHECK(r.final_score() == 1.0);
}

TEST_CASE("a zero estimate never moves") {
  const GridworldSetup g = gridworld_default();
  const RetrainResult r = retrain_and_score(g.mdp, VectorXd::Zero(5), g.reward.weights, retrain_learner(), 5);
  for (double v : r.normalized) CHECK(v == r.normalized.front());
  CHECK(r.normalized.front() == 0.0);
}

TEST_CASE("continuous retraining") {
  const LinearPointEnv env(0.1, 0.96, 20);
  const VectorXd truth = point_true_weights();
  LearnerConfig c = retrain_learner();
  c.m = 10;
  const RetrainResult r = retrain_and_score(env, truth, truth, c, 6, 2000);
  CHECK(r.normalized.front() == 0.0);
  CHECK(r.final_score() == 1.0);
  const RetrainResult flat = retrain_and_score(env, VectorXd::Zero(2), truth, c, 6, 2000);
  for (double v : flat.normalized) CHECK(v == 0.0);
}
