#include "robustq/agents.hpp"

#include "robustq/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace robustq {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void check_dims(const AgentState& state, const FeatureMap& features, const Transition& t) {
  if (state.dim() != features.dim())
    throw Error(Errc::DimensionMismatch, "agent has " + std::to_string(state.dim()) +
                                             " parameters but features have dim " +
                                             std::to_string(features.dim()));
  const std::size_t S = features.num_states();
  if (t.state >= S || t.next_state >= S || t.action >= features.num_actions())
    throw Error(Errc::DimensionMismatch, "transition indices out of range for the feature map");
}

void expect_variant(const AgentState& state, Variant v) {
  if (state.variant != v)
    throw Error(Errc::ValidationError, std::string("agent variant is ") +
                                           std::string(variant_name(state.variant)) + ", expected " +
                                           std::string(variant_name(v)));
}

/// theta += alpha * (r + target - phi(x)^T theta) * phi(x). Returns the
/// applied coefficient alpha * td.
double td_update(Vector& theta, const FeatureMap& f, std::size_t x, double alpha, double reward,
                 double target) {
  const double td = reward + target - f.dot(x, theta);
  const double coef = alpha * td;
  f.axpy(x, coef, theta);
  return coef;
}

std::size_t greedy_action(const FeatureMap& f, std::size_t s, const Vector& theta) {
  const std::size_t A = f.num_actions();
  std::size_t best = 0;
  double best_value = f.dot(s * A, theta);
  for (std::size_t a = 1; a < A; ++a) {
    const double v = f.dot(s * A + a, theta);
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  return best;
}

double min_over_copies(const AgentState& state, const FeatureMap& f, std::size_t x) {
  double m = f.dot(x, state.thetas[0]);
  for (std::size_t i = 1; i < state.thetas.size(); ++i) m = std::min(m, f.dot(x, state.thetas[i]));
  return m;
}

double maxmin_target(const AgentState& state, const FeatureMap& f, std::size_t s) {
  const std::size_t A = f.num_actions();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < A; ++a) best = std::max(best, min_over_copies(state, f, s * A + a));
  if (!std::isfinite(best)) throw Error(Errc::NonFiniteTheta, "non-finite Maxmin target");
  return state.discount * best;
}

/// Mean over the available snapshots (at most K) of phi(y)^T theta_{n-j}.
double snapshot_mean_value(const AgentState& state, const FeatureMap& f, std::size_t y) {
  const double current = f.dot(y, state.thetas[0]);
  double total = current;
  double offset = 0.0;
  const std::size_t cap = state.history.size();
  for (std::size_t j = 0; j < state.history_size; ++j) {
    const Increment& inc = state.history[(state.history_head + cap - 1 - j) % cap];
    offset += inc.coef * f.column_dot(y, inc.pair);
    total += current - offset;
  }
  return total / static_cast<double>(state.history_size + 1);
}

double averaged_target(const AgentState& state, const FeatureMap& f, std::size_t s) {
  const std::size_t A = f.num_actions();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < A; ++a) best = std::max(best, snapshot_mean_value(state, f, s * A + a));
  if (!std::isfinite(best)) throw Error(Errc::NonFiniteTheta, "non-finite Averaged target");
  return state.discount * best;
}

void refresh_average_on(AgentState& state, const FeatureMap& f, std::size_t x) {
  const double n = static_cast<double>(state.thetas.size());
  f.for_each_nonzero(x, [&](std::size_t j, double) {
    double sum = 0.0;
    for (const Vector& th : state.thetas) sum += th[idx(j)];
    state.theta_hat[idx(j)] = sum / n;
  });
}

void fill(Vector& theta, const InitSpec& init, RngStream& rng) {
  switch (init.mode) {
    case InitMode::Zero:
      theta.setZero();
      break;
    case InitMode::Uniform:
      for (Index j = 0; j < theta.size(); ++j) theta[j] = rng.uniform(init.low, init.high);
      break;
    case InitMode::Values:
      if (init.values.size() != theta.size())
        throw Error(Errc::DimensionMismatch, "initial values have the wrong length");
      theta = init.values;
      break;
  }
}

}  // namespace

std::string_view variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::Watkins: return "watkins";
    case Variant::Double: return "double";
    case Variant::Maxmin: return "maxmin";
    case Variant::Averaged: return "averaged";
    case Variant::TwoRA: return "twora";
    case Variant::TwoRALinearized: return "twora_linearized";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::Watkins, Variant::Double, Variant::Maxmin, Variant::Averaged, Variant::TwoRA,
                    Variant::TwoRALinearized})
    if (variant_name(v) == name) return v;
  throw Error(Errc::ValidationError, "unknown agent variant '" + std::string(name) + "'");
}

AgentState make_agent(const AgentConfig& config, std::size_t dim, double discount, const InitSpec& init,
                      RngStream& rng) {
  validate(config.lr);
  validate(config.rho);
  if (dim == 0) throw Error(Errc::ValidationError, "parameter dimension must be positive");
  if (config.copies < 1) throw Error(Errc::ValidationError, "copies must be >= 1");
  if (!(discount > 0.0 && discount < 1.0)) throw Error(Errc::BadDiscount, "discount must lie in (0, 1)");
  if (config.variant == Variant::TwoRALinearized)
    throw Error(Errc::ValidationError, "use make_linearized_agent for the linearized recursion");

  AgentState s;
  s.variant = config.variant;
  s.discount = discount;
  s.lr = config.lr;
  s.rho = config.rho;

  std::size_t n_thetas = 1;
  switch (config.variant) {
    case Variant::Watkins: n_thetas = 1; break;
    case Variant::Double: n_thetas = 2; break;
    case Variant::Maxmin:
    case Variant::TwoRA:
    case Variant::TwoRALinearized: n_thetas = config.copies; break;
    case Variant::Averaged:
      n_thetas = 1;
      s.snapshots = config.copies;
      s.history.assign(config.copies - 1, Increment{});
      break;
  }

  s.thetas.assign(n_thetas, Vector::Zero(idx(dim)));
  fill(s.thetas[0], init, rng);
  for (std::size_t i = 1; i < n_thetas; ++i) {
    if (init.identical || init.mode != InitMode::Uniform)
      s.thetas[i] = s.thetas[0];
    else
      fill(s.thetas[i], init, rng);
  }
  refresh_average(s);
  return s;
}

AgentState make_linearized_agent(const AgentConfig& config, std::size_t dim, double discount,
                                 const Policy& pi_star, const InitSpec& init, RngStream& rng) {
  if (!pi_star.is_deterministic()) throw Error(Errc::ValidationError, "pi_star must be deterministic");
  AgentConfig c = config;
  c.variant = Variant::TwoRA;
  c.rho = RhoSchedule{};
  AgentState s = make_agent(c, dim, discount, init, rng);
  s.variant = Variant::TwoRALinearized;
  s.pi_star.resize(pi_star.num_states());
  for (std::size_t st = 0; st < pi_star.num_states(); ++st) s.pi_star[st] = pi_star.action(st);
  return s;
}

void refresh_average(AgentState& state) {
  if (state.variant != Variant::TwoRA && state.variant != Variant::TwoRALinearized) {
    state.theta_hat = Vector();
    return;
  }
  if (state.thetas.empty()) return;
  Vector sum = Vector::Zero(state.thetas[0].size());
  for (const Vector& th : state.thetas) sum += th;
  state.theta_hat = sum / static_cast<double>(state.thetas.size());
}

SelectorDraw draw_selector(std::size_t num_copies, RngStream& rng) { return {rng.index(num_copies)}; }

double robust_target(const FeatureMap& features, std::size_t next_state, const Vector& theta, double rho,
                     double gamma) {
  if (!(rho >= 0.0)) throw Error(Errc::ValidationError, "rho must be non-negative");
  const double radius = std::sqrt(rho);
  const std::size_t A = features.num_actions();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < A; ++a) {
    const std::size_t y = next_state * A + a;
    best = std::max(best, features.dot(y, theta) - radius * features.column_norm(y));
  }
  if (!std::isfinite(best)) throw Error(Errc::NonFiniteTheta, "non-finite value in robust target");
  return gamma * best;
}

void watkins_step(AgentState& state, const Transition& t, const FeatureMap& features) {
  expect_variant(state, Variant::Watkins);
  check_dims(state, features, t);
  const double alpha = state.current_lr();
  const double target = t.terminal ? 0.0 : robust_target(features, t.next_state, state.thetas[0], 0.0, state.discount);
  td_update(state.thetas[0], features, t.state * features.num_actions() + t.action, alpha, t.reward, target);
  ++state.step;
}

void double_step(AgentState& state, const Transition& t, const FeatureMap& features, RngStream& rng) {
  expect_variant(state, Variant::Double);
  check_dims(state, features, t);
  const double alpha = state.current_lr();
  const std::size_t block = rng.index(2);
  Vector& updated = state.thetas[block];
  const Vector& other = state.thetas[1 - block];
  double target = 0.0;
  if (!t.terminal) {
    const std::size_t a_star = greedy_action(features, t.next_state, updated);
    target = state.discount * features.dot(t.next_state * features.num_actions() + a_star, other);
    if (!std::isfinite(target)) throw Error(Errc::NonFiniteTheta, "non-finite Double target");
  }
  td_update(updated, features, t.state * features.num_actions() + t.action, alpha, t.reward, target);
  ++state.step;
}

void maxmin_step(AgentState& state, const Transition& t, const FeatureMap& features, RngStream& rng) {
  expect_variant(state, Variant::Maxmin);
  check_dims(state, features, t);
  const double alpha = state.current_lr();
  const std::size_t i = draw_selector(state.thetas.size(), rng).index;
  const double target = t.terminal ? 0.0 : maxmin_target(state, features, t.next_state);
  td_update(state.thetas[i], features, t.state * features.num_actions() + t.action, alpha, t.reward, target);
  ++state.step;
}

void averaged_step(AgentState& state, const Transition& t, const FeatureMap& features) {
  expect_variant(state, Variant::Averaged);
  check_dims(state, features, t);
  const double alpha = state.current_lr();
  const double target = t.terminal ? 0.0 : averaged_target(state, features, t.next_state);
  const std::size_t x = t.state * features.num_actions() + t.action;
  const double coef = td_update(state.thetas[0], features, x, alpha, t.reward, target);
  const std::size_t cap = state.history.size();
  if (cap > 0) {
    state.history[state.history_head] = Increment{x, coef};
    state.history_head = (state.history_head + 1) % cap;
    state.history_size = std::min(state.history_size + 1, cap);
  }
  ++state.step;
}

void twora_step(AgentState& state, const Transition& t, const FeatureMap& features, RngStream& rng) {
  expect_variant(state, Variant::TwoRA);
  check_dims(state, features, t);
  const double alpha = state.current_lr();
  const double rho = rho_at(state.rho, state.step);
  const std::size_t i = draw_selector(state.thetas.size(), rng).index;
  const double target =
      t.terminal ? 0.0 : robust_target(features, t.next_state, state.theta_hat, rho, state.discount);
  const std::size_t x = t.state * features.num_actions() + t.action;
  td_update(state.thetas[i], features, x, alpha, t.reward, target);
  refresh_average_on(state, features, x);
  ++state.step;
}

void twora_linearized_step(AgentState& state, const Transition& t, const FeatureMap& features,
                           const Policy& pi_star, RngStream& rng) {
  expect_variant(state, Variant::TwoRALinearized);
  check_dims(state, features, t);
  const double alpha = state.current_lr();
  const std::size_t i = draw_selector(state.thetas.size(), rng).index;
  double target = 0.0;
  if (!t.terminal) {
    const std::size_t y = t.next_state * features.num_actions() + pi_star.action(t.next_state);
    target = state.discount * features.dot(y, state.theta_hat);
  }
  const std::size_t x = t.state * features.num_actions() + t.action;
  td_update(state.thetas[i], features, x, alpha, t.reward, target);
  refresh_average_on(state, features, x);
  ++state.step;
}

namespace {

void twora_linearized_step_cached(AgentState& state, const Transition& t, const FeatureMap& features,
                                  RngStream& rng) {
  check_dims(state, features, t);
  if (state.pi_star.size() != features.num_states())
    throw Error(Errc::DimensionMismatch, "pi_star does not cover every state");
  const double alpha = state.current_lr();
  const std::size_t i = draw_selector(state.thetas.size(), rng).index;
  double target = 0.0;
  if (!t.terminal) {
    const std::size_t y = t.next_state * features.num_actions() + state.pi_star[t.next_state];
    target = state.discount * features.dot(y, state.theta_hat);
  }
  const std::size_t x = t.state * features.num_actions() + t.action;
  td_update(state.thetas[i], features, x, alpha, t.reward, target);
  refresh_average_on(state, features, x);
  ++state.step;
}

}  // namespace

void update(AgentState& state, const Transition& t, const FeatureMap& features, RngStream& rng) {
  switch (state.variant) {
    case Variant::Watkins: return watkins_step(state, t, features);
    case Variant::Double: return double_step(state, t, features, rng);
    case Variant::Maxmin: return maxmin_step(state, t, features, rng);
    case Variant::Averaged: return averaged_step(state, t, features);
    case Variant::TwoRA: return twora_step(state, t, features, rng);
    case Variant::TwoRALinearized: return twora_linearized_step_cached(state, t, features, rng);
  }
}

void action_values(const AgentState& state, const FeatureMap& f, std::size_t s, double* out) {
  const std::size_t A = f.num_actions();
  for (std::size_t a = 0; a < A; ++a) {
    const std::size_t x = s * A + a;
    switch (state.variant) {
      case Variant::Watkins: out[a] = f.dot(x, state.thetas[0]); break;
      case Variant::Double: out[a] = 0.5 * (f.dot(x, state.thetas[0]) + f.dot(x, state.thetas[1])); break;
      case Variant::Maxmin: out[a] = min_over_copies(state, f, x); break;
      case Variant::Averaged: out[a] = snapshot_mean_value(state, f, x); break;
      case Variant::TwoRA:
      case Variant::TwoRALinearized: out[a] = f.dot(x, state.theta_hat); break;
    }
  }
}

std::vector<double> action_values(const AgentState& state, const FeatureMap& features, std::size_t s) {
  std::vector<double> out(features.num_actions());
  action_values(state, features, s, out.data());
  return out;
}

Vector q_estimate(const AgentState& state, const FeatureMap& features) {
  Vector q(idx(features.num_pairs()));
  const std::size_t A = features.num_actions();
  for (std::size_t s = 0; s < features.num_states(); ++s) action_values(state, features, s, q.data() + s * A);
  return q;
}

Vector copy_mean(const AgentState& state) {
  if (state.variant == Variant::TwoRA || state.variant == Variant::TwoRALinearized) return state.theta_hat;
  Vector sum = Vector::Zero(state.thetas[0].size());
  for (const Vector& th : state.thetas) sum += th;
  return sum / static_cast<double>(state.thetas.size());
}

double bootstrap_estimate(const AgentState& state, const FeatureMap& features, std::size_t next_state,
                          double rho) {
  switch (state.variant) {
    case Variant::Watkins:
      return robust_target(features, next_state, state.thetas[0], 0.0, state.discount);
    case Variant::Double: {
      const std::size_t a_star = greedy_action(features, next_state, state.thetas[0]);
      return state.discount * features.dot(next_state * features.num_actions() + a_star, state.thetas[1]);
    }
    case Variant::Maxmin: return maxmin_target(state, features, next_state);
    case Variant::Averaged: return averaged_target(state, features, next_state);
    case Variant::TwoRA: return robust_target(features, next_state, state.theta_hat, rho, state.discount);
    case Variant::TwoRALinearized: {
      const std::size_t y = next_state * features.num_actions() + state.pi_star.at(next_state);
      return state.discount * features.dot(y, state.theta_hat);
    }
  }
  return 0.0;
}

std::uint64_t parameter_digest(const AgentState& state) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const void* p, std::size_t n) {
    h = fnv1a64(std::string_view(static_cast<const char*>(p), n), h);
  };
  for (const Vector& th : state.thetas) mix(th.data(), sizeof(double) * static_cast<std::size_t>(th.size()));
  for (const Increment& inc : state.history) {
    mix(&inc.pair, sizeof inc.pair);
    mix(&inc.coef, sizeof inc.coef);
  }
  mix(&state.step, sizeof state.step);
  return h;
}

}  // namespace robustq
