#pragma once

#include "robustq/agents.hpp"
#include "robustq/cartpole.hpp"
#include "robustq/environments.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace robustq {

inline constexpr int kSchemaVersion = 1;

enum class EnvironmentKind { Baird, RandomEnv, CartPole };

std::string_view environment_kind_name(EnvironmentKind kind) noexcept;

struct CartPoleSpec {
  CartPoleParams params;
  Discretizer discretizer;
  double discount = 0.999;
  /// Exploration rate of the on-policy epsilon-greedy loop.
  double epsilon = 0.1;
  /// Training episodes are truncated here (no terminal flag on truncation).
  std::size_t train_step_cap = 500;
};

struct EnvironmentConfig {
  EnvironmentKind kind = EnvironmentKind::Baird;
  BairdSpec baird;
  RandomEnvSpec random_env;
  CartPoleSpec cartpole;

  double discount() const;
};

struct AgentSpec {
  std::string id;
  AgentConfig config;
  InitSpec init;
};

struct EvalProtocol {
  std::size_t eval_every = 50;
  std::size_t eval_episodes = 100;
  std::size_t eval_step_cap = 210;
  double solve_threshold = 195.0;
  std::size_t max_episodes = 3000;
};

/// Optional section consumed by `robustq bias`.
struct BiasSection {
  std::size_t pair = 0;
  std::size_t next_state = 0;
  std::uint64_t snapshot = 50'000;
  double rho = 0.0;
  std::size_t runs = 2000;
};

/// Optional section consumed by `robustq amse`.
struct AmseSection {
  std::size_t copies = 10;
  /// g = gain_factor * g0.
  double gain_factor = 2.0;
  /// alpha_n = N g / (n + offset); offset 0 picks N g.
  double offset = 0.0;
  std::size_t seeds = 200;
  std::uint64_t steps = 1'000'000;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  EnvironmentConfig environment;
  std::vector<AgentSpec> agents;
  std::size_t num_seeds = 1;
  std::uint64_t master_seed = 0;
  /// MDP environments.
  std::uint64_t max_steps = 100'000;
  /// Steps (MDP) or episodes (CartPole) between metric samples.
  std::uint64_t metric_cadence = 1000;
  EvalProtocol protocol;
  std::string output_dir = "results";
  bool svg = true;
  bool log_y = true;
  std::optional<BiasSection> bias;
  std::optional<AmseSection> amse;

  /// Canonical JSON (sorted keys, defaults filled in) and its FNV-1a hash.
  std::string canonical_json;
  std::uint64_t hash = 0;
};

/// Parses and validates a config document. Every problem found is listed
/// in the message. Throws Error{ParseError, UnknownKey, ValidationError}.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Re-derives canonical_json and hash after programmatic edits.
void rehash(ExperimentConfig& config);

std::string hash_hex(std::uint64_t hash);

}  // namespace robustq
