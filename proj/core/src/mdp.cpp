#include "robustq/mdp.hpp"

#include "robustq/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace robustq {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void check_probability_row(const double* row, std::size_t n, std::size_t which, Errc code,
                           const char* what) {
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(row[j] >= 0.0) || !std::isfinite(row[j])) {
      std::ostringstream os;
      os << what << " row " << which << " has invalid entry " << row[j] << " at column " << j;
      throw Error(code, os.str());
    }
    sum += row[j];
  }
  if (std::abs(sum - 1.0) > kStochasticTol) {
    std::ostringstream os;
    os.precision(17);
    os << what << " row " << which << " sums to " << sum;
    throw Error(code, os.str());
  }
}

}  // namespace

TabularMDP build_tabular_mdp(RowMatrix kernel, Vector reward, double discount, Vector initial_dist) {
  const auto num_states = static_cast<std::size_t>(kernel.cols());
  if (num_states == 0 || kernel.rows() == 0 || kernel.rows() % kernel.cols() != 0)
    throw Error(Errc::ShapeMismatch, "kernel must be (S*A) x S with S, A >= 1");
  const auto num_actions = static_cast<std::size_t>(kernel.rows()) / num_states;
  if (static_cast<std::size_t>(reward.size()) != num_states * num_actions)
    throw Error(Errc::ShapeMismatch, "reward length must equal S*A");
  if (static_cast<std::size_t>(initial_dist.size()) != num_states)
    throw Error(Errc::ShapeMismatch, "initial_dist length must equal S");
  if (!(discount > 0.0 && discount < 1.0))
    throw Error(Errc::BadDiscount, "discount must lie in (0, 1), got " + std::to_string(discount));
  if (!reward.allFinite()) throw Error(Errc::NonFiniteInput, "reward has non-finite entries");

  for (Index x = 0; x < kernel.rows(); ++x)
    check_probability_row(kernel.row(x).data(), num_states, static_cast<std::size_t>(x),
                          Errc::RowNotStochastic, "kernel");
  check_probability_row(initial_dist.data(), num_states, 0, Errc::RowNotStochastic, "initial_dist");

  TabularMDP mdp;
  mdp.num_states_ = num_states;
  mdp.num_actions_ = num_actions;
  mdp.kernel_ = std::move(kernel);
  mdp.reward_ = std::move(reward);
  mdp.discount_ = discount;
  mdp.initial_dist_ = std::move(initial_dist);
  return mdp;
}

// ---------------------------------------------------------------------------
// FeatureMap

FeatureMap FeatureMap::canonical(std::size_t num_states, std::size_t num_actions) {
  if (num_states == 0 || num_actions == 0)
    throw Error(Errc::ShapeMismatch, "canonical features need S, A >= 1");
  const auto n = idx(num_states * num_actions);
  FeatureMap f;
  f.matrix_.resize(n, n);
  f.matrix_.setIdentity();
  f.matrix_.makeCompressed();
  f.num_actions_ = num_actions;
  f.canonical_ = true;
  f.finalize();
  return f;
}

FeatureMap FeatureMap::from_dense(const Matrix& matrix, std::size_t num_actions) {
  if (num_actions == 0 || matrix.cols() == 0 || matrix.rows() == 0 ||
      static_cast<std::size_t>(matrix.cols()) % num_actions != 0)
    throw Error(Errc::ShapeMismatch, "feature matrix must be d x (S*A)");
  if (!matrix.allFinite()) throw Error(Errc::NonFiniteInput, "feature matrix has non-finite entries");
  FeatureMap f;
  f.matrix_ = matrix.sparseView();
  f.matrix_.makeCompressed();
  f.num_actions_ = num_actions;
  f.canonical_ = matrix.rows() == matrix.cols() && matrix.isIdentity(0.0);
  f.finalize();
  return f;
}

void FeatureMap::finalize() {
  norms_.assign(num_pairs(), 0.0);
  for (std::size_t x = 0; x < num_pairs(); ++x) {
    double sq = 0.0;
    for_each_nonzero(x, [&](std::size_t, double v) { sq += v * v; });
    norms_[x] = std::sqrt(sq);
  }
}

double FeatureMap::column_dot(std::size_t x, std::size_t y) const {
  if (canonical_) return x == y ? 1.0 : 0.0;
  SparseMatrix::InnerIterator a(matrix_, idx(x));
  SparseMatrix::InnerIterator b(matrix_, idx(y));
  double acc = 0.0;
  while (a && b) {
    if (a.index() < b.index()) {
      ++a;
    } else if (b.index() < a.index()) {
      ++b;
    } else {
      acc += a.value() * b.value();
      ++a;
      ++b;
    }
  }
  return acc;
}

FeatureMap canonical_features(std::size_t num_states, std::size_t num_actions) {
  return FeatureMap::canonical(num_states, num_actions);
}

// ---------------------------------------------------------------------------
// Policy

Policy::Policy(RowMatrix table) : table_(std::move(table)) {
  if (table_.rows() == 0 || table_.cols() == 0) throw Error(Errc::ShapeMismatch, "empty policy table");
  for (Index s = 0; s < table_.rows(); ++s)
    check_probability_row(table_.row(s).data(), num_actions(), static_cast<std::size_t>(s),
                          Errc::RowNotStochastic, "policy");
}

Policy Policy::uniform(std::size_t num_states, std::size_t num_actions) {
  RowMatrix t = RowMatrix::Constant(idx(num_states), idx(num_actions), 1.0 / static_cast<double>(num_actions));
  // 1/A * A can miss 1 by an ulp for some A; fix the last column.
  for (Index s = 0; s < t.rows(); ++s) t(s, t.cols() - 1) = 1.0 - t.row(s).head(t.cols() - 1).sum();
  return Policy(std::move(t));
}

Policy Policy::deterministic(const std::vector<std::size_t>& actions, std::size_t num_actions) {
  RowMatrix t = RowMatrix::Zero(idx(actions.size()), idx(num_actions));
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] >= num_actions) throw Error(Errc::ShapeMismatch, "action index out of range");
    t(idx(s), idx(actions[s])) = 1.0;
  }
  return Policy(std::move(t));
}

bool Policy::is_deterministic() const {
  for (Index s = 0; s < table_.rows(); ++s)
    if (table_.row(s).maxCoeff() != 1.0) return false;
  return true;
}

std::size_t Policy::action(std::size_t s) const {
  return argmax_lowest(table_.row(idx(s)).data(), num_actions());
}

// ---------------------------------------------------------------------------
// Exact solvers

std::size_t argmax_lowest(const double* values, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

namespace {

Vector state_max(const Vector& q, std::size_t num_actions) {
  const auto num_states = static_cast<std::size_t>(q.size()) / num_actions;
  Vector v(idx(num_states));
  for (std::size_t s = 0; s < num_states; ++s)
    v[idx(s)] = q.segment(idx(s * num_actions), idx(num_actions)).maxCoeff();
  return v;
}

Vector bellman(const RowMatrix& kernel, const Vector& reward, double gamma, const Vector& q) {
  const auto num_actions = static_cast<std::size_t>(kernel.rows() / kernel.cols());
  return reward + gamma * (kernel * state_max(q, num_actions));
}

}  // namespace

Vector bellman_operator(const TabularMDP& mdp, const Vector& q) {
  if (static_cast<std::size_t>(q.size()) != mdp.num_pairs())
    throw Error(Errc::DimensionMismatch, "Q length must equal S*A");
  return bellman(mdp.kernel(), mdp.reward(), mdp.discount(), q);
}

std::size_t value_iteration_bound(double gamma, double reward_sup, double tol) {
  if (gamma <= 0.0 || reward_sup <= 0.0) return 1;
  const double k = std::log(tol * (1.0 - gamma) / reward_sup) / std::log(gamma);
  return static_cast<std::size_t>(std::max(0.0, std::ceil(k))) + 1;
}

ValueIterationResult value_iteration(const RowMatrix& kernel, const Vector& reward, double gamma,
                                     double tol) {
  if (!(tol > 0.0)) throw Error(Errc::NonFiniteInput, "tolerance must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(Errc::BadDiscount, "gamma must lie in [0, 1)");
  ValueIterationResult out;
  out.q = Vector::Zero(reward.size());
  // Cap far above the analytic bound; the operator is a gamma-contraction.
  const std::size_t cap = 10 * value_iteration_bound(gamma, reward.cwiseAbs().maxCoeff(), tol) + 100;
  for (;;) {
    Vector next = bellman(kernel, reward, gamma, out.q);
    out.residual = (next - out.q).cwiseAbs().maxCoeff();
    ++out.iterations;
    out.q = std::move(next);
    // ||Q' - T(Q')|| <= gamma ||Q - T(Q)||, so stop once the prediction meets tol.
    if (gamma * out.residual <= tol || out.iterations >= cap) break;
  }
  out.residual = (bellman(kernel, reward, gamma, out.q) - out.q).cwiseAbs().maxCoeff();
  return out;
}

Vector solve_optimal_q(const TabularMDP& mdp, double tol) {
  return value_iteration(mdp.kernel(), mdp.reward(), mdp.discount(), tol).q;
}

Policy greedy_policy(const Vector& q, std::size_t num_actions, TieRule) {
  if (num_actions == 0 || q.size() == 0 || static_cast<std::size_t>(q.size()) % num_actions != 0)
    throw Error(Errc::ShapeMismatch, "Q length must be a multiple of A");
  if (!q.allFinite()) throw Error(Errc::NonFiniteInput, "Q has non-finite entries");
  const auto num_states = static_cast<std::size_t>(q.size()) / num_actions;
  std::vector<std::size_t> actions(num_states);
  for (std::size_t s = 0; s < num_states; ++s) actions[s] = argmax_lowest(q.data() + s * num_actions, num_actions);
  return Policy::deterministic(actions, num_actions);
}

namespace {

/// S x (S*A) matrix with Pi(s, (s, a)) = pi(a | s).
Matrix selection_matrix(const Policy& policy) {
  const auto S = policy.num_states();
  const auto A = policy.num_actions();
  Matrix m = Matrix::Zero(idx(S), idx(S * A));
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a) m(idx(s), idx(s * A + a)) = policy.prob(s, a);
  return m;
}

void check_policy_shape(const TabularMDP& mdp, const Policy& policy) {
  if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
    throw Error(Errc::ShapeMismatch, "policy shape does not match MDP");
}

}  // namespace

Matrix pair_chain(const TabularMDP& mdp, const Policy& behavior) {
  check_policy_shape(mdp, behavior);
  return Matrix(mdp.kernel()) * selection_matrix(behavior);
}

Vector evaluate_policy(const TabularMDP& mdp, const Policy& policy) {
  const Matrix chain = pair_chain(mdp, policy);
  const Matrix lhs = Matrix::Identity(chain.rows(), chain.cols()) - mdp.discount() * chain;
  return lhs.partialPivLu().solve(mdp.reward());
}

// ---------------------------------------------------------------------------
// Sampling

std::size_t sample_categorical(const double* probs, std::size_t n, RngStream& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (probs[j] <= 0.0) continue;
    cumulative += probs[j];
    last_positive = j;
    if (u < cumulative) return j;
  }
  return last_positive;
}

Transition sample_step(const TabularMDP& mdp, std::size_t state, std::size_t action, RngStream& rng) {
  const std::size_t x = mdp.pair(state, action);
  Transition t;
  t.state = state;
  t.action = action;
  t.reward = mdp.reward()[idx(x)];
  t.next_state = sample_categorical(mdp.kernel().row(idx(x)).data(), mdp.num_states(), rng);
  return t;
}

std::size_t sample_initial_state(const TabularMDP& mdp, RngStream& rng) {
  return sample_categorical(mdp.initial_dist().data(), mdp.num_states(), rng);
}

std::size_t sample_action(const Policy& policy, std::size_t state, RngStream& rng) {
  return sample_categorical(policy.table().row(idx(state)).data(), policy.num_actions(), rng);
}

// ---------------------------------------------------------------------------
// Stationary distribution

Vector stationary_distribution(const Matrix& chain, double tol, std::size_t max_iterations) {
  const Index n = chain.rows();
  if (n == 0 || chain.cols() != n) throw Error(Errc::ShapeMismatch, "chain must be square");
  const Matrix chain_t = chain.transpose();
  Vector mu = Vector::Zero(n);
  mu[0] = 1.0;
  Vector next(n);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    next.noalias() = chain_t * mu;
    next /= next.sum();
    const double change = (next - mu).lpNorm<1>();
    mu.swap(next);
    if (change <= tol) {
      next.noalias() = chain_t * mu;
      if ((next - mu).lpNorm<1>() <= tol) return mu;
    }
  }
  throw Error(Errc::NotConverged, "power iteration hit the iteration cap (reducible or periodic chain?)");
}

Vector stationary_distribution(const TabularMDP& mdp, const Policy& behavior, double tol,
                               std::size_t max_iterations) {
  return stationary_distribution(pair_chain(mdp, behavior), tol, max_iterations);
}

}  // namespace robustq
