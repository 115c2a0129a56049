#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "logel/evaluation.hpp"

using namespace logel;

namespace {

BoltzmannPolicy random_policy(int S, int A, std::uint64_t seed, double scale = 0.5) {
  Rng rng(seed);
  return BoltzmannPolicy(S, A, testing::random_vector(S * A, rng, scale));
}

double rel_err(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("zero features give zero estimates") {
  const FiniteMdp mdp = gridworld_default().mdp;
  const FiniteMdp flat = mdp.with_features(MatrixXd::Zero(100, 5));
  const BoltzmannPolicy pi = random_policy(25, 4, 1);
  Rng rng(2);
  const TabularDataset data = sample_trajectories(flat, pi, 20, 20, rng);
  CHECK(estimate_feature_expectations(flat, data, 0.96).isZero(0.0));
  CHECK(estimate_jacobian_reinforce(flat, data, pi, 0.96).value.isZero(0.0));
  CHECK(estimate_jacobian_gpomdp(flat, data, pi, 0.96).value.isZero(0.0));
  CHECK(exact_jacobian_fd(flat, pi).value.isZero(0.0));
  CHECK(exact_jacobian(flat, pi).value.isZero(0.0));
}

TEST_CASE("one-step trajectories") {
  const FiniteMdp mdp = testing::random_mdp(3, 2, 2, 4);
  MatrixXd phi = mdp.feature_matrix();
  phi.row(1 * 2 + 0) << 1.0, 0.0;
  const FiniteMdp env = mdp.with_features(phi);
  const BoltzmannPolicy pi = random_policy(3, 2, 5);
  TabularDataset data;
  data.trajectories.push_back({{1}, {0}});
  VectorXd expected(2);
  expected << 1.0, 0.0;
  CHECK(estimate_feature_expectations(env, data, 0.9) == expected);
  const MatrixXd reinforce = estimate_jacobian_reinforce(env, data, pi, 0.9).value;
  CHECK((reinforce - pi.score(1, 0) * expected.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((estimate_jacobian_gpomdp(env, data, pi, 0.9).value - reinforce).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("empty datasets are rejected") {
  const FiniteMdp mdp = gridworld_default().mdp;
  const BoltzmannPolicy pi(25, 4);
  TabularDataset empty;
  CHECK_THROWS_AS(estimate_jacobian_gpomdp(mdp, empty, pi, 0.9), EstimationError);
  CHECK_THROWS_AS(estimate_jacobian_reinforce(mdp, empty, pi, 0.9), EstimationError);
  CHECK_THROWS_AS(estimate_feature_expectations(mdp, empty, 0.9), EstimationError);
}

TEST_CASE("sampled feature expectations match the exact ones") {
  const FiniteMdp mdp = gridworld_default().mdp;
  const BoltzmannPolicy pi = random_policy(25, 4, 6);
  Rng rng(7);
  const int n = 10000;
  const TabularDataset data = sample_trajectories(mdp, pi, n, mdp.horizon(), rng);
  MatrixXd per(n, 5);
  for (int i = 0; i < n; ++i)
    per.row(i) = detail::discounted_features(mdp, data.trajectories[static_cast<std::size_t>(i)], mdp.discount())
                     .colwise()
                     .sum();
  const VectorXd exact = exact_feature_expectations(mdp, pi);
  const VectorXd est = estimate_feature_expectations(mdp, data, mdp.discount());
  for (int j = 0; j < 5; ++j) {
    const double sd = std::sqrt((per.col(j).array() - est(j)).square().sum() / (n - 1));
    CHECK(std::abs(est(j) - exact(j)) <= 3 * sd / std::sqrt(double(n)) + 1e-12);
  }
}

TEST_CASE("exact feature expectations: closed forms") {
  SUBCASE("no discounting keeps only the first step") {
    const FiniteMdp mdp = testing::random_mdp(4, 3, 2, 8).with_discount(0.0);
    const BoltzmannPolicy pi = random_policy(4, 3, 9);
    const MatrixXd table = pi.probability_table();
    VectorXd expected = VectorXd::Zero(2);
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 3; ++a)
        expected += mdp.initial_distribution()(s) * table(s, a) * mdp.features(s, a);
    CHECK((exact_feature_expectations(mdp, pi) - expected).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("absorbing state sums a geometric series") {
    const FiniteMdp one(1, 1, MatrixXd::Ones(1, 1), VectorXd::Ones(1), MatrixXd::Ones(1, 1), 0.9, 12);
    const BoltzmannPolicy pi(1, 1);
    CHECK(exact_feature_expectations(one, pi)(0) == doctest::Approx((1 - std::pow(0.9, 12)) / 0.1).epsilon(1e-13));
    CHECK(exact_feature_expectations(one, pi, 0.9, kInfiniteHorizon)(0) == doctest::Approx(10.0).epsilon(1e-12));
  }
}

TEST_CASE("exact feature expectations agree with Monte Carlo") {
  const FiniteMdp mdp = testing::random_mdp(5, 2, 3, 10, 0.9, 10);
  const BoltzmannPolicy pi = random_policy(5, 2, 11);
  Rng rng(12);
  const int n = 100000;
  const TabularDataset data = sample_trajectories(mdp, pi, n, mdp.horizon(), rng);
  MatrixXd per(n, 3);
  for (int i = 0; i < n; ++i)
    per.row(i) = detail::discounted_features(mdp, data.trajectories[static_cast<std::size_t>(i)], 0.9).colwise().sum();
  const VectorXd mean = per.colwise().mean().transpose();
  const VectorXd exact = exact_feature_expectations(mdp, pi);
  for (int j = 0; j < 3; ++j) {
    const double sd = std::sqrt((per.col(j).array() - mean(j)).square().sum() / (n - 1));
    CHECK(std::abs(mean(j) - exact(j)) <= 3 * sd / std::sqrt(double(n)));
  }
}

TEST_CASE("finite-difference Jacobian: step halving and the return gradient") {
  const GridworldSetup g = gridworld_default();
  const BoltzmannPolicy pi = random_policy(25, 4, 13);
  const MatrixXd jh = exact_jacobian_fd(g.mdp, pi, 1e-4).value;
  const MatrixXd jh2 = exact_jacobian_fd(g.mdp, pi, 5e-5).value;
  CHECK(rel_err(jh, jh2) < 1e-4);

  // d J / d theta by differencing the exact return directly
  const double h = 1e-5;
  VectorXd grad(100);
  for (int i = 0; i < 100; ++i) {
    VectorXd up = pi.params(), down = pi.params();
    up(i) += h;
    down(i) -= h;
    grad(i) = (expected_return_exact(g.mdp, pi.with_params(up), g.reward) -
               expected_return_exact(g.mdp, pi.with_params(down), g.reward)) /
              (2 * h);
  }
  const VectorXd via_jacobian = exact_jacobian_fd(g.mdp, pi).value * g.reward.weights;
  CHECK((via_jacobian - grad).norm() / grad.norm() < 1e-4);
}

TEST_CASE("analytic Jacobian matches finite differences") {
  for (std::uint64_t seed : {14u, 15u}) {
    const FiniteMdp mdp = testing::random_mdp(6, 3, 4, seed, 0.9, 12);
    const BoltzmannPolicy pi = random_policy(6, 3, seed + 100, 1.0);
    CHECK(rel_err(exact_jacobian(mdp, pi).value, exact_jacobian_fd(mdp, pi).value) < 1e-7);
  }
  const GridworldSetup g = gridworld_default();
  const BoltzmannPolicy pi = random_policy(25, 4, 16);
  CHECK(rel_err(exact_jacobian(g.mdp, pi).value, exact_jacobian_fd(g.mdp, pi).value) < 1e-7);
}

TEST_CASE("Jacobian times weights is the scalar policy gradient") {
  const GridworldSetup g = gridworld_default();
  const BoltzmannPolicy pi = random_policy(25, 4, 17);
  Rng rng(18);
  const TabularDataset data = sample_trajectories(g.mdp, pi, 50, 20, rng);
  const VectorXd via_jacobian = estimate_jacobian_gpomdp(g.mdp, data, pi, 0.96).value * g.reward.weights;
  const VectorXd direct = estimate_policy_gradient(g.mdp, data, pi, g.reward, 0.96);
  CHECK((via_jacobian - direct).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("estimators are linear in the features") {
  const FiniteMdp mdp = testing::random_mdp(5, 3, 3, 19);
  const FiniteMdp scaled = mdp.with_features(2.5 * mdp.feature_matrix());
  const BoltzmannPolicy pi = random_policy(5, 3, 20);
  Rng rng(21);
  const TabularDataset data = sample_trajectories(mdp, pi, 30, 10, rng);
  for (GradientEstimator e : {GradientEstimator::Gpomdp, GradientEstimator::Reinforce}) {
    const MatrixXd a = estimate_jacobian(e, mdp, data, pi, 0.9).value;
    const MatrixXd b = estimate_jacobian(e, scaled, data, pi, 0.9).value;
    CHECK((b - 2.5 * a).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("G(PO)MDP has no more variance than REINFORCE") {
  const GridworldSetup g = gridworld_default();
  const BoltzmannPolicy pi = random_policy(25, 4, 22);
  const int batches = 200;
  MatrixXd gp(batches, 500), rf(batches, 500);
  for (int b = 0; b < batches; ++b) {
    Rng rng(substream_seed(23, static_cast<std::uint64_t>(b)));
    const TabularDataset data = sample_trajectories(g.mdp, pi, 10, 20, rng);
    gp.row(b) = estimate_jacobian_gpomdp(g.mdp, data, pi, 0.96).value.reshaped().transpose();
    rf.row(b) = estimate_jacobian_reinforce(g.mdp, data, pi, 0.96).value.reshaped().transpose();
  }
  const auto trace_cov = [](const MatrixXd& x) {
    return (x.rowwise() - x.colwise().mean()).squaredNorm() / (x.rows() - 1);
  };
  CHECK(trace_cov(gp) <= trace_cov(rf));
}

TEST_CASE("estimator names round-trip") {
  CHECK(parse_gradient_estimator("gpomdp") == GradientEstimator::Gpomdp);
  CHECK(parse_gradient_estimator(to_string(GradientEstimator::Reinforce)) == GradientEstimator::Reinforce);
  CHECK_THROWS_AS(parse_gradient_estimator("ppo"), DomainError);
}
