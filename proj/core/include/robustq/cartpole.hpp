#pragma once

#include "robustq/rng.hpp"

#include <array>
#include <cstddef>

namespace robustq {

/// Classic cart-pole constants (Barto et al. / Gym); SI units.
struct CartPoleParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double force = 10.0;
  double tau = 0.02;
  double angle_threshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  double x_threshold = 2.4;
  double init_jitter = 0.05;
};

struct CartPoleState {
  double x = 0.0;          // m
  double x_dot = 0.0;      // m/s
  double theta = 0.0;      // rad
  double theta_dot = 0.0;  // rad/s
};

inline constexpr std::size_t kPushLeft = 0;
inline constexpr std::size_t kPushRight = 1;

struct CartPoleStep {
  CartPoleState state;
  double reward = 1.0;
  bool done = false;
};

bool cartpole_failed(const CartPoleState& s, const CartPoleParams& params = {});

/// One explicit-Euler step. Throws Error{SteppedTerminal} if `s` already
/// violates a threshold.
CartPoleStep cartpole_step(const CartPoleState& s, std::size_t action, const CartPoleParams& params = {});

/// Uniform jitter in [-init_jitter, init_jitter]^4.
CartPoleState cartpole_reset(RngStream& rng, const CartPoleParams& params = {});

/// Stateful wrapper that remembers whether the episode has ended.
class CartPoleEnv {
 public:
  explicit CartPoleEnv(CartPoleParams params = {}) : params_(params) {}

  const CartPoleState& reset(RngStream& rng);
  CartPoleStep step(std::size_t action);

  const CartPoleState& state() const noexcept { return state_; }
  bool done() const noexcept { return done_; }
  const CartPoleParams& params() const noexcept { return params_; }

 private:
  CartPoleParams params_;
  CartPoleState state_;
  bool done_ = true;
};

/// Uniform grid over the clipped state box; cells are numbered row-major
/// over (x, x_dot, theta, theta_dot).
struct Discretizer {
  std::array<std::size_t, 4> bins{10, 10, 10, 10};
  std::array<double, 4> low{-2.4, -3.0, -0.21, -3.0};
  std::array<double, 4> high{2.4, 3.0, 0.21, 3.0};
  std::size_t num_actions = 2;

  std::size_t num_cells() const;
  std::size_t dim() const { return num_cells() * num_actions; }
  std::size_t cell(const CartPoleState& s) const;
};

/// Feature index cell(s) * A + action.
std::size_t discretize(const Discretizer& disc, const CartPoleState& s, std::size_t action);

}  // namespace robustq
