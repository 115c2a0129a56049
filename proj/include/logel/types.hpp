#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace logel {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// Engine used by every sampling routine. Always seeded explicitly.
using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of substream `index` under `parent`. Splitting is hierarchical:
/// master -> checkpoint -> trajectory.
constexpr std::uint64_t substream_seed(std::uint64_t parent, std::uint64_t index) {
  return mix_seed(mix_seed(parent) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

/// Inverse-CDF draw from a (not necessarily normalized) nonnegative weight vector.
template <typename Derived>
int sample_categorical(const Eigen::MatrixBase<Derived>& weights, Rng& rng) {
  const double total = weights.sum();
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  const int n = static_cast<int>(weights.size());
  for (int i = 0; i < n; ++i) {
    acc += weights(i);
    if (u < acc) return i;
  }
  // u landed on the rounding tail; return the last index with positive mass.
  for (int i = n - 1; i >= 0; --i)
    if (weights(i) > 0.0) return i;
  return n - 1;
}

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedEnvironment : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Normal matrix of the weight problem is singular or too ill-conditioned.
class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// J_t * omega vanishes, so the learning-rate step has no direction.
class DegenerateDirectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace logel
