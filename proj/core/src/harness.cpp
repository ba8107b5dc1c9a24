#include "robustq/harness.hpp"

#include "robustq/error.hpp"
#include "robustq/parallel.hpp"
#include "robustq/simulate.hpp"

#include <chrono>

namespace robustq {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RunRecord run_mdp(const ExperimentConfig& config, const MdpSetup& setup, const AgentSpec& spec,
                  std::uint64_t seed) {
  const auto start = Clock::now();
  RunStreams streams = run_streams(seed_stream(config.master_seed, seed), 0);
  AgentState agent =
      make_agent(spec.config, setup.features.dim(), setup.mdp.discount(), spec.init, streams.init);
  Trajectory trajectory(setup.mdp, setup.behavior, std::move(streams.env));

  MetricSeries mse{"mse", {}, {}};
  const std::uint64_t samples = config.max_steps / config.metric_cadence;
  mse.steps.reserve(samples);
  mse.values.reserve(samples);
  train(agent, setup.features, trajectory, streams.agent, config.max_steps, config.metric_cadence,
        [&](const AgentState& a) {
          mse.steps.push_back(a.step);
          mse.values.push_back(mse_to_q(a, setup));
        });

  RunRecord rec;
  rec.config_hash = config.hash;
  rec.seed = seed;
  rec.agent = spec.id;
  rec.metrics.push_back(std::move(mse));
  rec.digest = parameter_digest(agent);
  rec.wall_seconds = seconds_since(start);
  return rec;
}

RunRecord run_cartpole(const ExperimentConfig& config, const AgentSpec& spec, std::uint64_t seed) {
  const auto start = Clock::now();
  const CartPoleSpec& env = config.environment.cartpole;
  const RngStream base = seed_stream(config.master_seed, seed);
  RngStream init_rng = base.derive("init");
  AgentState agent = make_agent(spec.config, env.discretizer.dim(), env.discount, spec.init, init_rng);
  HitTimeResult result = evaluate_hit_time(agent, env, config.protocol, base, config.metric_cadence);

  RunRecord rec;
  rec.config_hash = config.hash;
  rec.seed = seed;
  rec.agent = spec.id;
  rec.metrics.push_back(std::move(result.episode_reward));
  rec.metrics.push_back(std::move(result.eval_reward));
  rec.episodic = true;
  rec.hit_episode = result.hit_episode;
  rec.digest = parameter_digest(agent);
  rec.wall_seconds = seconds_since(start);
  return rec;
}

}  // namespace

double mse_to_q(const AgentState& agent, const MdpSetup& setup) {
  return (q_estimate(agent, setup.features) - setup.q_star).squaredNorm();
}

MdpSetup build_mdp_setup(const EnvironmentConfig& env) {
  try {
    switch (env.kind) {
      case EnvironmentKind::Baird: {
        Environment e = build_baird(env.baird);
        Policy behavior = Policy::uniform(e.mdp.num_states(), e.mdp.num_actions());
        Vector q_star = solve_optimal_q(e.mdp);
        return {std::move(e.mdp), std::move(e.features), std::move(behavior), std::move(q_star)};
      }
      case EnvironmentKind::RandomEnv: {
        TabularMDP mdp = build_random_env(env.random_env);
        FeatureMap features = canonical_features(mdp.num_states(), mdp.num_actions());
        Policy behavior = Policy::uniform(mdp.num_states(), mdp.num_actions());
        Vector q_star = solve_optimal_q(mdp);
        return {std::move(mdp), std::move(features), std::move(behavior), std::move(q_star)};
      }
      case EnvironmentKind::CartPole: break;
    }
  } catch (const Error& e) {
    throw Error(Errc::EnvironmentBuildError, e.what());
  }
  throw Error(Errc::EnvironmentBuildError, "cartpole has no tabular model");
}

RngStream seed_stream(std::uint64_t master_seed, std::uint64_t seed) {
  return RngStream(master_seed, "experiment").derive(seed);
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, std::size_t parallelism) {
  const std::size_t agents = config.agents.size();
  const std::size_t jobs = config.num_seeds * agents;
  std::vector<RunRecord> records(jobs);

  if (config.environment.kind == EnvironmentKind::CartPole) {
    parallel_for(jobs, parallelism, [&](std::size_t j) {
      records[j] = run_cartpole(config, config.agents[j % agents], j / agents);
    });
    return records;
  }

  const MdpSetup setup = build_mdp_setup(config.environment);
  for (const AgentSpec& spec : config.agents) {
    const bool feature_sized = spec.init.mode != InitMode::Values ||
                               static_cast<std::size_t>(spec.init.values.size()) == setup.features.dim();
    if (!feature_sized)
      throw Error(Errc::ValidationError, "agent '" + spec.id + "': init.values length differs from the feature dimension");
  }
  parallel_for(jobs, parallelism, [&](std::size_t j) {
    records[j] = run_mdp(config, setup, config.agents[j % agents], j / agents);
  });
  return records;
}

BiasReport run_bias(const ExperimentConfig& config, const AgentSpec& spec, std::size_t parallelism) {
  if (!config.bias) throw Error(Errc::ValidationError, "config has no bias section");
  const MdpSetup setup = build_mdp_setup(config.environment);
  const BiasSection& b = *config.bias;
  BiasQuery query;
  query.pair = b.pair;
  query.next_state = b.next_state;
  query.snapshot = b.snapshot;
  query.rho = b.rho;
  query.num_runs = b.runs;
  query.workers = parallelism;
  const AgentFactory factory = [&](RngStream& init_rng) {
    return make_agent(spec.config, setup.features.dim(), setup.mdp.discount(), spec.init, init_rng);
  };
  return measure_bias(factory, setup.mdp, setup.behavior, setup.features, query,
                      RngStream(config.master_seed, "bias"));
}

AmseCurve linearized_amse_curve(const MdpSetup& setup, const AsymptoticModel& model, const LinearizedRun& run,
                                const RngStream& master) {
  if (run.seeds < 1 || run.steps < 1) throw Error(Errc::EmptySeries, "linearized run needs seeds and steps");
  const std::size_t N = model.copies;
  const double g = model.gain;
  const double offset = run.offset > 0.0 ? run.offset : static_cast<double>(N) * g;

  AgentConfig config;
  config.variant = Variant::TwoRA;
  config.copies = N;
  config.lr.alpha0 = g / offset;
  config.lr.w_alpha = offset;
  config.lr.copies = N;
  InitSpec init;
  init.mode = InitMode::Values;
  init.values = model.theta_star;
  const Policy pi_star = Policy::deterministic(model.pi_star, setup.mdp.num_actions());

  std::vector<std::uint64_t> steps;
  if (run.cadence == 0) {
    steps.push_back(run.steps);
  } else {
    for (std::uint64_t n = run.cadence; n <= run.steps; n += run.cadence) steps.push_back(n);
  }
  std::vector<std::vector<double>> mse(run.seeds);
  parallel_for(run.seeds, run.workers, [&](std::size_t k) {
    RunStreams streams = run_streams(master, k);
    AgentState agent =
        make_linearized_agent(config, setup.features.dim(), setup.mdp.discount(), pi_star, init, streams.init);
    Trajectory trajectory(setup.mdp, setup.behavior, std::move(streams.env));
    std::vector<double>& out = mse[k];
    out.reserve(steps.size());
    const std::uint64_t cadence = run.cadence == 0 ? run.steps : run.cadence;
    train(agent, setup.features, trajectory, streams.agent, steps.back(), cadence, [&](const AgentState& a) {
      out.push_back(mse_to_optimal(a.theta_hat, model.theta_star));
    });
  });
  return empirical_amse(steps, mse);
}

// ---------------------------------------------------------------------------

double evaluate_greedy(const GreedyPolicy& policy, const CartPoleParams& params, std::size_t episodes,
                       std::size_t step_cap, RngStream& rng) {
  double total = 0.0;
  CartPoleEnv env(params);
  for (std::size_t e = 0; e < episodes; ++e) {
    env.reset(rng);
    std::size_t steps = 0;
    while (!env.done() && steps < step_cap) {
      env.step(policy(env.state()));
      ++steps;
    }
    total += static_cast<double>(steps);
  }
  return total / static_cast<double>(episodes);
}

HitTimeResult evaluate_hit_time(AgentState& agent, const CartPoleSpec& spec, const EvalProtocol& protocol,
                                const RngStream& rng, std::uint64_t episode_cadence) {
  const Discretizer& disc = spec.discretizer;
  const FeatureMap features = canonical_features(disc.num_cells(), disc.num_actions);
  if (agent.dim() != features.dim())
    throw Error(Errc::DimensionMismatch, "agent dimension differs from the discretized feature count");

  RngStream reset_rng = rng.derive("reset");
  RngStream explore_rng = rng.derive("explore");
  RngStream agent_rng = rng.derive("agent");
  const RngStream eval_base = rng.derive("eval");

  HitTimeResult out;
  out.episode_reward.name = "episode_reward";
  out.eval_reward.name = "eval_reward";

  std::vector<double> q(disc.num_actions);
  const GreedyPolicy greedy = [&](const CartPoleState& s) {
    action_values(agent, features, disc.cell(s), q.data());
    return argmax_lowest(q.data(), q.size());
  };

  CartPoleEnv env(spec.params);
  for (std::uint64_t episode = 1; episode <= protocol.max_episodes; ++episode) {
    env.reset(reset_rng);
    std::size_t steps = 0;
    while (!env.done() && steps < spec.train_step_cap) {
      const std::size_t cell = disc.cell(env.state());
      action_values(agent, features, cell, q.data());
      const std::size_t a = epsilon_greedy_action(q, spec.epsilon, explore_rng);
      const CartPoleStep step = env.step(a);
      ++steps;
      Transition t;
      t.state = cell;
      t.action = a;
      t.reward = step.reward;
      t.next_state = disc.cell(step.state);
      t.terminal = step.done;
      update(agent, t, features, agent_rng);
    }
    end_episode(agent);
    if (episode_cadence != 0 && episode % episode_cadence == 0) {
      out.episode_reward.steps.push_back(episode);
      out.episode_reward.values.push_back(static_cast<double>(steps));
    }

    if (episode % protocol.eval_every == 0) {
      RngStream eval_rng = eval_base.derive(episode);
      const double mean =
          evaluate_greedy(greedy, spec.params, protocol.eval_episodes, protocol.eval_step_cap, eval_rng);
      out.eval_reward.steps.push_back(episode);
      out.eval_reward.values.push_back(mean);
      if (mean >= protocol.solve_threshold) {
        out.hit_episode = episode;
        break;
      }
    }
  }
  return out;
}

}  // namespace robustq
