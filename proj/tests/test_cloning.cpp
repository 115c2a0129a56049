#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "logel/cloning.hpp"
#include "logel/solver.hpp"

using namespace logel;

namespace {

VectorXd centered(const VectorXd& theta, int S, int A) {
  MatrixXd t = theta.reshaped<Eigen::RowMajor>(S, A);
  t.colwise() -= t.rowwise().mean();
  return t.reshaped<Eigen::RowMajor>();
}

ContinuousDataset random_design(const VectorXd& theta, double noise, int n, Rng& rng) {
  ContinuousDataset data;
  std::normal_distribution<double> gauss;
  for (int i = 0; i < n; ++i) {
    const double s = 2.0 * gauss(rng);
    data.trajectories.push_back({{s}, {theta(0) * s + theta(1) + noise * gauss(rng)}});
  }
  return data;
}

}  // namespace

namespace {

struct Refit {
  VectorXd error;  // per-state max abs logit error
  Eigen::VectorXi visits;
};

Refit tabular_refit(std::uint64_t seed) {
  const FiniteMdp mdp = gridworld_default().mdp;
  Rng rng(seed);
  const VectorXd truth = centered(testing::random_vector(100, rng, 0.5), 25, 4);
  const TabularDataset data = sample_trajectories(mdp, BoltzmannPolicy(25, 4, truth), 500, 20, rng);
  const auto fit = fit_policy_mle(data, BoltzmannPolicy(25, 4));
  REQUIRE(fit.converged);
  Refit r{VectorXd(25), state_visits(data, 25)};
  for (int s = 0; s < 25; ++s) r.error(s) = (fit.policy.params() - truth).segment(4 * s, 4).cwiseAbs().maxCoeff();
  return r;
}

}  // namespace

TEST_CASE("tabular refit error tracks the per-state sample size") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Refit r = tabular_refit(seed);
    for (int s = 0; s < 25; ++s) {
      if (r.visits(s) < 100) continue;
      CHECK(r.error(s) <= 5.0 * std::sqrt(4.0 / r.visits(s)));
    }
  }
}

// Logit standard errors at a few hundred visits are near 0.1 already, so a
// hard 0.1 bound over every visited state fails on most seeds.
TEST_CASE("tabular refit within 0.1 on every visited state" * doctest::may_fail()) {
  const Refit r = tabular_refit(1);
  double worst = 0.0;
  for (int s = 0; s < 25; ++s)
    if (r.visits(s) > 0) worst = std::max(worst, r.error(s));
  CHECK(worst < 0.1);
}

TEST_CASE("a single observed pair pulls probability onto that action") {
  TabularDataset data;
  data.trajectories.push_back({{2}, {1}});
  const BoltzmannPolicy init(3, 3);
  double previous = init.action_distribution(2)(1);
  for (int iterations : {1, 2, 4, 8}) {
    MleOptions options;
    options.max_iterations = iterations;
    const auto fit = fit_policy_mle(data, init, options);
    const VectorXd p = fit.policy.action_distribution(2);
    CHECK(p.maxCoeff() == p(1));
    CHECK(p(1) >= previous - 1e-12);
    previous = p(1);
  }
  CHECK(previous > 0.99);
  const auto fit = fit_policy_mle(data, init);
  CHECK(fit.unvisited_states == std::vector<int>{0, 1});
}

TEST_CASE("likelihood never drops below the initial value") {
  const FiniteMdp mdp = testing::random_mdp(6, 3, 2, 2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 10);
    const BoltzmannPolicy pi(6, 3, testing::random_vector(18, rng, 1.0));
    const TabularDataset data = sample_trajectories(mdp, pi, 20, 10, rng);
    const auto fit = fit_policy_mle(data, BoltzmannPolicy(6, 3, testing::random_vector(18, rng, 2.0)));
    CHECK(fit.log_likelihood >= fit.initial_log_likelihood);
    CHECK(fit.objective >= fit.initial_objective);
    CHECK(fit.gradient_norm < 1e-9);
  }
}

TEST_CASE("non-convergence is flagged") {
  const FiniteMdp mdp = testing::random_mdp(6, 3, 2, 3);
  Rng rng(4);
  const TabularDataset data = sample_trajectories(mdp, BoltzmannPolicy(6, 3), 20, 10, rng);
  MleOptions options;
  options.max_iterations = 1;
  options.tolerance = 1e-300;
  CHECK_FALSE(fit_policy_mle(data, BoltzmannPolicy(6, 3), options).converged);
}

TEST_CASE("least squares: closed cases") {
  const auto features = affine_state_features();
  SUBCASE("noiseless interpolation") {
    VectorXd truth(2);
    truth << -0.7, 0.3;
    Rng rng(5);
    const ContinuousDataset data = random_design(truth, 0.0, 50, rng);
    CHECK((gaussian_mle_ols(data, features) - truth).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("intercept only is the sample mean") {
    ContinuousDataset data;
    for (double a : {1.0, 2.0, 3.0}) data.trajectories.push_back({{0.0}, {a}});
    const auto ones = [](double) { return VectorXd::Ones(1); };
    CHECK(gaussian_mle_ols(data, ones)(0) == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("rank-deficient design") {
    ContinuousDataset data;
    for (double a : {1.0, 2.0, 3.0}) data.trajectories.push_back({{1.5}, {a}});
    CHECK_THROWS_AS(gaussian_mle_ols(data, features), SingularSystemError);
  }
}

TEST_CASE("least squares matches a pseudo-inverse oracle") {
  Rng rng(6);
  const int n = 1000, d = 4;
  const MatrixXd basis = testing::random_matrix(3, d, rng);
  // features of s are a fixed random map of (s, s^2, 1)
  const auto features = [basis](double s) {
    Eigen::Vector3d raw(s, s * s, 1.0);
    return VectorXd(basis.transpose() * raw);
  };
  ContinuousDataset data;
  std::normal_distribution<double> gauss;
  MatrixXd X(n, d);
  VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double s = gauss(rng);
    data.trajectories.push_back({{s}, {gauss(rng)}});
    X.row(i) = features(s).transpose();
    y(i) = data.trajectories.back().actions[0];
  }
  // d = 4 columns from a rank-3 map would be singular, so keep three
  const MatrixXd basis3 = basis.leftCols(3);
  const auto f3 = [basis3](double s) {
    Eigen::Vector3d raw(s, s * s, 1.0);
    return VectorXd(basis3.transpose() * raw);
  };
  const MatrixXd X3 = X.leftCols(3);
  const VectorXd oracle = X3.completeOrthogonalDecomposition().pseudoInverse() * y;
  CHECK((gaussian_mle_ols(data, f3) - oracle).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_THROWS_AS(gaussian_mle_ols(data, features), SingularSystemError);
}

TEST_CASE("Gaussian likelihood ascent lands on the least-squares fit") {
  const auto features = affine_state_features();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 100);
    const VectorXd truth = testing::random_vector(2, rng, 1.0);
    const ContinuousDataset data = random_design(truth, 0.3, 200, rng);
    const GaussianPolicy init(VectorXd::Zero(2), 0.3, features, 10.0);
    const auto fit = fit_policy_mle(data, init);
    CHECK(fit.converged);
    CHECK((fit.policy.params() - gaussian_mle_ols(data, features)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("trajectory order does not matter") {
  const FiniteMdp mdp = gridworld_default().mdp;
  Rng rng(7);
  const BoltzmannPolicy pi(25, 4, testing::random_vector(100, rng, 0.5));
  TabularDataset data = sample_trajectories(mdp, pi, 40, 20, rng);
  const VectorXd before = fit_policy_mle(data, BoltzmannPolicy(25, 4)).policy.params();
  std::shuffle(data.trajectories.begin(), data.trajectories.end(), rng);
  CHECK((fit_policy_mle(data, BoltzmannPolicy(25, 4)).policy.params() - before).cwiseAbs().maxCoeff() < 1e-12);

  VectorXd truth(2);
  truth << 0.4, -1.0;
  ContinuousDataset cont = random_design(truth, 0.5, 300, rng);
  const auto features = affine_state_features();
  const VectorXd ols = gaussian_mle_ols(cont, features);
  std::shuffle(cont.trajectories.begin(), cont.trajectories.end(), rng);
  CHECK((gaussian_mle_ols(cont, features) - ols).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Gaussian refit error shrinks with the sample size") {
  const auto features = affine_state_features();
  VectorXd truth(2);
  truth << -0.5, 0.2;
  std::vector<double> med;
  for (int n : {100, 1000, 10000}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(substream_seed(8, seed));
      errs.push_back((gaussian_mle_ols(random_design(truth, 0.5, n, rng), features) - truth).norm());
    }
    med.push_back(std::log(testing::median(errs)));
  }
  const double slope = (med[2] - med[0]) / (2 * std::log(10.0));
  CHECK(slope <= -0.35);
  CHECK(slope >= -0.65);
}
