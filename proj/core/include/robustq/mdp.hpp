#pragma once

#include "robustq/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <vector>

namespace robustq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

inline constexpr double kStochasticTol = 1e-12;

/// Finite MDP with deterministic rewards r(s, a). State-action pairs are
/// indexed state-major: x = s * A + a. Immutable once built.
class TabularMDP {
 public:
  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }
  std::size_t num_pairs() const noexcept { return num_states_ * num_actions_; }
  std::size_t pair(std::size_t s, std::size_t a) const noexcept { return s * num_actions_ + a; }

  /// (S*A) x S, row x holds P(. | x).
  const RowMatrix& kernel() const noexcept { return kernel_; }
  const Vector& reward() const noexcept { return reward_; }
  double reward(std::size_t s, std::size_t a) const { return reward_[pair(s, a)]; }
  double discount() const noexcept { return discount_; }
  const Vector& initial_dist() const noexcept { return initial_dist_; }

 private:
  friend TabularMDP build_tabular_mdp(RowMatrix, Vector, double, Vector);
  TabularMDP() = default;

  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  RowMatrix kernel_;
  Vector reward_;
  double discount_ = 0.0;
  Vector initial_dist_;
};

/// Validates and assembles an MDP. S is the kernel's column count and
/// A = rows / S. Throws Error{ShapeMismatch, RowNotStochastic, BadDiscount}.
TabularMDP build_tabular_mdp(RowMatrix kernel, Vector reward, double discount, Vector initial_dist);

/// Linear features: column x of the d x (S*A) matrix is phi(s, a).
class FeatureMap {
 public:
  static FeatureMap canonical(std::size_t num_states, std::size_t num_actions);
  /// `matrix` is d x (S*A).
  static FeatureMap from_dense(const Matrix& matrix, std::size_t num_actions);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t num_pairs() const noexcept { return static_cast<std::size_t>(matrix_.cols()); }
  std::size_t num_actions() const noexcept { return num_actions_; }
  std::size_t num_states() const noexcept { return num_pairs() / num_actions_; }
  bool is_canonical() const noexcept { return canonical_; }

  const SparseMatrix& matrix() const noexcept { return matrix_; }
  Matrix dense() const { return Matrix(matrix_); }
  const std::vector<double>& column_norms() const noexcept { return norms_; }
  double column_norm(std::size_t x) const { return norms_[x]; }

  /// phi(x)^T theta
  double dot(std::size_t x, const Vector& theta) const {
    if (canonical_) return theta[static_cast<Eigen::Index>(x)];
    double acc = 0.0;
    for (SparseMatrix::InnerIterator it(matrix_, static_cast<Eigen::Index>(x)); it; ++it)
      acc += it.value() * theta[it.index()];
    return acc;
  }

  /// theta += scale * phi(x)
  void axpy(std::size_t x, double scale, Vector& theta) const {
    if (canonical_) {
      theta[static_cast<Eigen::Index>(x)] += scale;
      return;
    }
    for (SparseMatrix::InnerIterator it(matrix_, static_cast<Eigen::Index>(x)); it; ++it)
      theta[it.index()] += scale * it.value();
  }

  /// phi(x)^T phi(y)
  double column_dot(std::size_t x, std::size_t y) const;

  template <class F>
  void for_each_nonzero(std::size_t x, F&& f) const {
    for (SparseMatrix::InnerIterator it(matrix_, static_cast<Eigen::Index>(x)); it; ++it)
      f(static_cast<std::size_t>(it.index()), it.value());
  }

 private:
  FeatureMap() = default;
  void finalize();

  SparseMatrix matrix_;
  std::vector<double> norms_;
  std::size_t num_actions_ = 1;
  bool canonical_ = false;
};

FeatureMap canonical_features(std::size_t num_states, std::size_t num_actions);

/// Stationary Markov policy, S x A table of action probabilities.
class Policy {
 public:
  explicit Policy(RowMatrix table);
  static Policy uniform(std::size_t num_states, std::size_t num_actions);
  static Policy deterministic(const std::vector<std::size_t>& actions, std::size_t num_actions);

  const RowMatrix& table() const noexcept { return table_; }
  std::size_t num_states() const noexcept { return static_cast<std::size_t>(table_.rows()); }
  std::size_t num_actions() const noexcept { return static_cast<std::size_t>(table_.cols()); }
  double prob(std::size_t s, std::size_t a) const { return table_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)); }
  bool is_deterministic() const;
  /// Action with the largest probability (lowest index on ties).
  std::size_t action(std::size_t s) const;

 private:
  RowMatrix table_;
};

struct Transition {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
  /// Episode ended at next_state; the bootstrap term is dropped. Never set
  /// for continuing tabular MDPs.
  bool terminal = false;
};

enum class TieRule { LowestIndex };

/// Index of the maximum entry, lowest index on ties.
std::size_t argmax_lowest(const double* values, std::size_t n);

Vector bellman_operator(const TabularMDP& mdp, const Vector& q);

struct ValueIterationResult {
  Vector q;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Value iteration from Q = 0 until ||Q - T(Q)||_inf <= tol. Accepts
/// gamma in [0, 1), unlike TabularMDP, so the gamma = 0 case is reachable.
ValueIterationResult value_iteration(const RowMatrix& kernel, const Vector& reward, double gamma,
                                     double tol);

Vector solve_optimal_q(const TabularMDP& mdp, double tol = 1e-10);

/// Upper bound on value-iteration sweeps for a given tolerance.
std::size_t value_iteration_bound(double gamma, double reward_sup, double tol);

Policy greedy_policy(const Vector& q, std::size_t num_actions, TieRule rule = TieRule::LowestIndex);

/// Exact Q^pi from (I - gamma P Pi) Q = r.
Vector evaluate_policy(const TabularMDP& mdp, const Policy& policy);

/// (S*A) x (S*A) transition matrix of the pair chain X_n under `behavior`.
Matrix pair_chain(const TabularMDP& mdp, const Policy& behavior);

Transition sample_step(const TabularMDP& mdp, std::size_t state, std::size_t action, RngStream& rng);
std::size_t sample_initial_state(const TabularMDP& mdp, RngStream& rng);
std::size_t sample_action(const Policy& policy, std::size_t state, RngStream& rng);

/// Inverse-CDF draw from a probability row, scanning in index order.
std::size_t sample_categorical(const double* probs, std::size_t n, RngStream& rng);

inline constexpr std::size_t kPowerIterationCap = 1'000'000;

/// Invariant distribution over state-action pairs by power iteration from
/// a point mass on pair 0. Throws Error{NotConverged} when the cap is hit
/// (periodic or otherwise non-convergent chains).
Vector stationary_distribution(const TabularMDP& mdp, const Policy& behavior, double tol = 1e-10,
                               std::size_t max_iterations = kPowerIterationCap);

/// Same, for an explicit row-stochastic matrix.
Vector stationary_distribution(const Matrix& chain, double tol = 1e-10,
                               std::size_t max_iterations = kPowerIterationCap);

}  // namespace robustq
