#pragma once

#include "robustq/mdp.hpp"
#include "robustq/rng.hpp"

#include <cstdint>
#include <span>

namespace robustq {

enum class BairdFeatureMode { Canonical, Custom };

/// Six states, two actions. Action 1 jumps to a uniformly random state,
/// action 2 jumps to state 6 (index 5).
struct BairdSpec {
  double reward_low = -0.05;
  double reward_high = 0.05;
  double discount = 0.8;
  BairdFeatureMode feature_mode = BairdFeatureMode::Canonical;
  /// d x 12 matrix, used when feature_mode == Custom.
  Matrix custom_features;
  std::uint64_t seed = 0;
};

struct Environment {
  TabularMDP mdp;
  FeatureMap features;
};

inline constexpr std::size_t kBairdStates = 6;
inline constexpr std::size_t kBairdActions = 2;

/// Rewards are drawn once, uniformly from [reward_low, reward_high].
/// Throws Error{BadBounds}.
Environment build_baird(const BairdSpec& spec);

/// Kernel rows and the initial distribution are independent
/// Dirichlet(alpha * 1) draws; r(s, a) = -q s^2 - p a^2 with 1-based s, a.
struct RandomEnvSpec {
  std::size_t num_states = 10;
  std::size_t num_actions = 3;
  double dirichlet_alpha = 0.1;
  double q = 0.1;
  double p = 0.01;
  double discount = 0.9;
  std::uint64_t seed = 0;
};

/// Throws Error{BadCoefficients} unless 0 <= p < q.
TabularMDP build_random_env(const RandomEnvSpec& spec);

/// Lowest-index argmax with probability 1 - epsilon, otherwise a uniform
/// action. One uniform draw decides; exploring takes a second for the action.
std::size_t epsilon_greedy_action(std::span<const double> q_values, double epsilon, RngStream& rng);

}  // namespace robustq
