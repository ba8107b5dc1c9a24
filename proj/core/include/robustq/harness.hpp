#pragma once

#include "robustq/agents.hpp"
#include "robustq/analysis.hpp"
#include "robustq/cartpole.hpp"
#include "robustq/config.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace robustq {

/// One sampled series of a (seed, agent) run.
struct MetricSeries {
  std::string name;
  std::vector<std::uint64_t> steps;
  std::vector<double> values;
};

struct RunRecord {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string agent;
  /// MDP runs: "mse" against Q* every metric_cadence steps. CartPole runs:
  /// "episode_reward" per training episode and "eval_reward" per checkpoint.
  std::vector<MetricSeries> metrics;
  bool episodic = false;
  /// Episodic runs only; empty means NotSolved.
  std::optional<std::uint64_t> hit_episode;
  double wall_seconds = 0.0;
  std::uint64_t digest = 0;
};

/// Resolved environment of an MDP experiment.
struct MdpSetup {
  TabularMDP mdp;
  FeatureMap features;
  Policy behavior;
  Vector q_star;
};

/// ||q_estimate - Q*||^2 over all state-action pairs.
double mse_to_q(const AgentState& agent, const MdpSetup& setup);

/// Throws Error{EnvironmentBuildError} (wrapping the builder's message).
MdpSetup build_mdp_setup(const EnvironmentConfig& env);

/// Master stream for seed k of an experiment.
RngStream seed_stream(std::uint64_t master_seed, std::uint64_t seed);

/// One record per (seed, agent), ordered seed-major. Output does not depend
/// on `parallelism`.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, std::size_t parallelism = 1);

/// measure_bias for one configured agent using the config's bias section.
/// Every agent of a config sees the same run streams.
BiasReport run_bias(const ExperimentConfig& config, const AgentSpec& agent, std::size_t parallelism = 1);

struct LinearizedRun {
  std::size_t seeds = 200;
  std::uint64_t steps = 1'000'000;
  /// alpha_n = N g / (n + offset); 0 picks N g so the first step is 1.
  double offset = 0.0;
  /// Sampling interval of the MSE curve; 0 samples the last step only.
  std::uint64_t cadence = 0;
  std::size_t workers = 1;
};

/// n * mean ||theta_hat_n - theta*||^2 of the linearized recursion started
/// at theta*, with the model's copies and gain.
AmseCurve linearized_amse_curve(const MdpSetup& setup, const AsymptoticModel& model, const LinearizedRun& run,
                                const RngStream& master);

// ---------------------------------------------------------------------------
// CartPole

/// Greedy action-value source used by evaluation; must not mutate anything.
using GreedyPolicy = std::function<std::size_t(const CartPoleState&)>;

/// Mean undiscounted reward of `episodes` greedy episodes capped at `step_cap`.
double evaluate_greedy(const GreedyPolicy& policy, const CartPoleParams& params, std::size_t episodes,
                       std::size_t step_cap, RngStream& rng);

struct HitTimeResult {
  /// Training episodes completed when the solve threshold was first met.
  std::optional<std::uint64_t> hit_episode;
  MetricSeries episode_reward;
  MetricSeries eval_reward;
};

/// Trains `agent` on-policy with epsilon-greedy exploration and per-step
/// updates, evaluating the frozen greedy policy every eval_every episodes.
/// Streams: "reset" for training resets, "explore" for exploration draws,
/// "agent" for copy selectors, and "eval" (re-derived per checkpoint) for
/// evaluation resets.
HitTimeResult evaluate_hit_time(AgentState& agent, const CartPoleSpec& env, const EvalProtocol& protocol,
                                const RngStream& rng, std::uint64_t episode_cadence = 1);

}  // namespace robustq
