#pragma once

#include "robustq/mdp.hpp"
#include "robustq/rng.hpp"
#include "robustq/schedules.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace robustq {

enum class Variant { Watkins, Double, Maxmin, Averaged, TwoRA, TwoRALinearized };

std::string_view variant_name(Variant v) noexcept;
/// Accepts the names produced by variant_name ("watkins", "double", ...).
Variant parse_variant(std::string_view name);

enum class InitMode { Zero, Uniform, Values };

struct InitSpec {
  InitMode mode = InitMode::Zero;
  double low = 0.0;
  double high = 2.0;
  /// All copies start from the same draw (otherwise each copy draws its own).
  bool identical = false;
  Vector values;
};

struct AgentConfig {
  Variant variant = Variant::Watkins;
  /// N for Maxmin/TwoRA, K (snapshot count) for Averaged. Watkins uses 1,
  /// Double uses 2 regardless of this field.
  std::size_t copies = 1;
  LearningRateSchedule lr;
  RhoSchedule rho;
};

/// One past Averaged update: theta changed by coef * phi(pair).
struct Increment {
  std::size_t pair = 0;
  double coef = 0.0;
};

/// Learner state shared by all variants.
///
/// thetas holds theta^(1..N) (Watkins: 1, Double: {A, B}, Averaged: the
/// current parameter). For TwoRA and its linearization theta_hat caches
/// the copy average. Averaged keeps the last K-1 increments so the K most
/// recent parameter snapshots can be reconstructed without storing them.
struct AgentState {
  Variant variant = Variant::Watkins;
  double discount = 0.9;
  std::vector<Vector> thetas;
  Vector theta_hat;
  std::vector<Increment> history;
  std::size_t history_head = 0;
  std::size_t history_size = 0;
  std::size_t snapshots = 1;
  std::uint64_t step = 0;
  std::uint64_t episode = 0;
  LearningRateSchedule lr;
  RhoSchedule rho;
  /// TwoRALinearized only: fixed greedy-optimal action per state.
  std::vector<std::size_t> pi_star;

  std::size_t dim() const { return thetas.empty() ? 0 : static_cast<std::size_t>(thetas.front().size()); }
  std::size_t num_copies() const { return thetas.size(); }
  /// Learning rate for the next update (step or episode indexed).
  double current_lr() const { return lr_at(lr, lr.decay == DecayIndex::PerStep ? step : episode); }
};

/// Builds an agent for `dim` parameters. Throws Error{ValidationError}.
AgentState make_agent(const AgentConfig& config, std::size_t dim, double discount, const InitSpec& init,
                      RngStream& rng);

/// Linearized 2RA around a fixed optimal policy.
AgentState make_linearized_agent(const AgentConfig& config, std::size_t dim, double discount,
                                 const Policy& pi_star, const InitSpec& init, RngStream& rng);

/// Recomputes theta_hat from thetas (after deserialization or manual edits).
/// Other variants keep it empty.
void refresh_average(AgentState& state);

struct SelectorDraw {
  std::size_t index = 0;  // 0-based copy index
};

/// Uniform copy selector; draws nothing when N == 1.
SelectorDraw draw_selector(std::size_t num_copies, RngStream& rng);

/// gamma * max_a' { phi(s', a')^T theta - sqrt(rho) * ||phi(s', a')|| }.
/// The outer phi(x) factor is applied by the update.
double robust_target(const FeatureMap& features, std::size_t next_state, const Vector& theta, double rho,
                     double gamma);

void watkins_step(AgentState& state, const Transition& t, const FeatureMap& features);
void double_step(AgentState& state, const Transition& t, const FeatureMap& features, RngStream& rng);
void maxmin_step(AgentState& state, const Transition& t, const FeatureMap& features, RngStream& rng);
void averaged_step(AgentState& state, const Transition& t, const FeatureMap& features);
void twora_step(AgentState& state, const Transition& t, const FeatureMap& features, RngStream& rng);
void twora_linearized_step(AgentState& state, const Transition& t, const FeatureMap& features,
                           const Policy& pi_star, RngStream& rng);

/// Dispatches on state.variant.
void update(AgentState& state, const Transition& t, const FeatureMap& features, RngStream& rng);

/// Marks the end of an episode (advances the per-episode decay index).
inline void end_episode(AgentState& state) { ++state.episode; }

/// Value estimates phi(s, a)^T theta_est for every action of state s:
/// Watkins theta, Double (theta_A + theta_B) / 2, Maxmin min over copies,
/// Averaged the snapshot mean, TwoRA theta_hat.
void action_values(const AgentState& state, const FeatureMap& features, std::size_t s, double* out);
std::vector<double> action_values(const AgentState& state, const FeatureMap& features, std::size_t s);

/// The same estimates over every state-action pair (length S*A).
Vector q_estimate(const AgentState& state, const FeatureMap& features);

/// Mean of the parameter copies (Averaged: the current parameter).
Vector copy_mean(const AgentState& state);

/// The bootstrap value the variant would plug into its update at s'
/// (without the phi(x) factor). `rho` is used by TwoRA only. For Double
/// this is block A's cross-evaluated target.
double bootstrap_estimate(const AgentState& state, const FeatureMap& features, std::size_t next_state,
                          double rho);

/// FNV-1a digest of all parameter bytes; changes iff any parameter bit does.
std::uint64_t parameter_digest(const AgentState& state);

}  // namespace robustq
