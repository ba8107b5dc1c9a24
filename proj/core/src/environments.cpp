#include "robustq/environments.hpp"

#include "robustq/error.hpp"

#include <cmath>

namespace robustq {

namespace {

using Index = Eigen::Index;

void dirichlet_row(double* out, std::size_t n, double alpha, RngStream& rng) {
  for (;;) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      out[j] = rng.gamma(alpha);
      sum += out[j];
    }
    if (sum > 0.0 && std::isfinite(sum)) {
      for (std::size_t j = 0; j < n; ++j) out[j] /= sum;
      return;
    }
  }
}

}  // namespace

Environment build_baird(const BairdSpec& spec) {
  if (!(spec.reward_low <= spec.reward_high) || !std::isfinite(spec.reward_low) ||
      !std::isfinite(spec.reward_high))
    throw Error(Errc::BadBounds, "reward_low must not exceed reward_high");
  constexpr auto S = static_cast<Index>(kBairdStates);
  constexpr auto A = static_cast<Index>(kBairdActions);

  RowMatrix kernel = RowMatrix::Zero(S * A, S);
  for (Index s = 0; s < S; ++s) {
    kernel.row(s * A + 0).setConstant(1.0 / 6.0);
    kernel(s * A + 1, S - 1) = 1.0;
  }
  RngStream rng(spec.seed, "baird-rewards");
  Vector reward(S * A);
  for (Index x = 0; x < S * A; ++x) reward[x] = rng.uniform(spec.reward_low, spec.reward_high);
  Vector init = Vector::Constant(S, 1.0 / 6.0);

  TabularMDP mdp = build_tabular_mdp(std::move(kernel), std::move(reward), spec.discount, std::move(init));
  FeatureMap features = spec.feature_mode == BairdFeatureMode::Canonical
                            ? FeatureMap::canonical(kBairdStates, kBairdActions)
                            : FeatureMap::from_dense(spec.custom_features, kBairdActions);
  if (features.num_pairs() != kBairdStates * kBairdActions)
    throw Error(Errc::ShapeMismatch, "Baird features must have 12 columns");
  return {std::move(mdp), std::move(features)};
}

TabularMDP build_random_env(const RandomEnvSpec& spec) {
  if (!(spec.p >= 0.0 && spec.p < spec.q))
    throw Error(Errc::BadCoefficients, "reward coefficients must satisfy 0 <= p < q");
  if (spec.num_states == 0 || spec.num_actions == 0 || !(spec.dirichlet_alpha > 0.0))
    throw Error(Errc::ValidationError, "random environment needs S, A >= 1 and alpha > 0");
  const auto S = static_cast<Index>(spec.num_states);
  const auto A = static_cast<Index>(spec.num_actions);

  RngStream rng(spec.seed, "random-env");
  RowMatrix kernel(S * A, S);
  for (Index x = 0; x < S * A; ++x) dirichlet_row(kernel.row(x).data(), spec.num_states, spec.dirichlet_alpha, rng);
  Vector init(S);
  dirichlet_row(init.data(), spec.num_states, spec.dirichlet_alpha, rng);

  Vector reward(S * A);
  for (Index s = 0; s < S; ++s)
    for (Index a = 0; a < A; ++a) {
      const double s1 = static_cast<double>(s + 1);
      const double a1 = static_cast<double>(a + 1);
      reward[s * A + a] = -spec.q * s1 * s1 - spec.p * a1 * a1;
    }
  return build_tabular_mdp(std::move(kernel), std::move(reward), spec.discount, std::move(init));
}

std::size_t epsilon_greedy_action(std::span<const double> q_values, double epsilon, RngStream& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(Errc::ValidationError, "epsilon must lie in [0, 1]");
  if (rng.uniform() < epsilon) return rng.index(q_values.size());
  return argmax_lowest(q_values.data(), q_values.size());
}

}  // namespace robustq
