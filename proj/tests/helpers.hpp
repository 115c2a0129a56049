#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "logel/learners.hpp"

namespace testing {

using namespace logel;

/// Random finite MDP: dense transition rows, uniform start, Gaussian features.
inline FiniteMdp random_mdp(int S, int A, int q, std::uint64_t seed, double gamma = 0.9, int horizon = 15) {
  Rng rng(seed);
  MatrixXd P(S * A, S);
  for (int r = 0; r < S * A; ++r) {
    for (int s = 0; s < S; ++s) P(r, s) = uniform01(rng) + 0.05;
    P.row(r) /= P.row(r).sum();
  }
  MatrixXd phi(S * A, q);
  for (int r = 0; r < S * A; ++r)
    for (int j = 0; j < q; ++j) phi(r, j) = standard_normal(rng);
  return FiniteMdp(S, A, P, VectorXd::Constant(S, 1.0 / S), phi, gamma, horizon);
}

inline VectorXd random_vector(int n, Rng& rng, double scale = 1.0) {
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * standard_normal(rng);
  return v;
}

inline MatrixXd random_matrix(int r, int c, Rng& rng) {
  MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = standard_normal(rng);
  return m;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace testing
