#include "robustq/cartpole.hpp"

#include "robustq/error.hpp"

#include <algorithm>
#include <cmath>

namespace robustq {

bool cartpole_failed(const CartPoleState& s, const CartPoleParams& p) {
  return s.x < -p.x_threshold || s.x > p.x_threshold || s.theta < -p.angle_threshold ||
         s.theta > p.angle_threshold;
}

CartPoleStep cartpole_step(const CartPoleState& s, std::size_t action, const CartPoleParams& p) {
  if (cartpole_failed(s, p)) throw Error(Errc::SteppedTerminal, "stepping a finished cart-pole episode");
  if (action > kPushRight) throw Error(Errc::ValidationError, "cart-pole action must be 0 or 1");

  const double force = action == kPushRight ? p.force : -p.force;
  const double total_mass = p.cart_mass + p.pole_mass;
  const double pole_mass_length = p.pole_mass * p.half_length;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);

  const double temp = (force + pole_mass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_acc = (p.gravity * sin_t - cos_t * temp) /
                           (p.half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;

  CartPoleStep out;
  out.state.x = s.x + p.tau * s.x_dot;
  out.state.x_dot = s.x_dot + p.tau * x_acc;
  out.state.theta = s.theta + p.tau * s.theta_dot;
  out.state.theta_dot = s.theta_dot + p.tau * theta_acc;
  out.reward = 1.0;
  out.done = cartpole_failed(out.state, p);
  return out;
}

CartPoleState cartpole_reset(RngStream& rng, const CartPoleParams& p) {
  CartPoleState s;
  s.x = rng.uniform(-p.init_jitter, p.init_jitter);
  s.x_dot = rng.uniform(-p.init_jitter, p.init_jitter);
  s.theta = rng.uniform(-p.init_jitter, p.init_jitter);
  s.theta_dot = rng.uniform(-p.init_jitter, p.init_jitter);
  return s;
}

const CartPoleState& CartPoleEnv::reset(RngStream& rng) {
  state_ = cartpole_reset(rng, params_);
  done_ = false;
  return state_;
}

CartPoleStep CartPoleEnv::step(std::size_t action) {
  if (done_) throw Error(Errc::SteppedTerminal, "episode already finished; call reset()");
  CartPoleStep out = cartpole_step(state_, action, params_);
  state_ = out.state;
  done_ = out.done;
  return out;
}

std::size_t Discretizer::num_cells() const {
  std::size_t n = 1;
  for (std::size_t b : bins) n *= b;
  return n;
}

std::size_t Discretizer::cell(const CartPoleState& s) const {
  const std::array<double, 4> v{s.x, s.x_dot, s.theta, s.theta_dot};
  std::size_t c = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double clipped = std::clamp(v[k], low[k], high[k]);
    auto b = static_cast<std::size_t>((clipped - low[k]) / (high[k] - low[k]) * static_cast<double>(bins[k]));
    b = std::min(b, bins[k] - 1);
    c = c * bins[k] + b;
  }
  return c;
}

std::size_t discretize(const Discretizer& disc, const CartPoleState& s, std::size_t action) {
  return disc.cell(s) * disc.num_actions + action;
}

}  // namespace robustq
