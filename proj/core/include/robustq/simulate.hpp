#pragma once

#include "robustq/agents.hpp"
#include "robustq/mdp.hpp"
#include "robustq/rng.hpp"

#include <cstdint>

namespace robustq {

/// Single behavioral trajectory on a tabular MDP: S_0 from the initial
/// distribution, A_n from the behavior policy, S_{n+1} from the kernel.
class Trajectory {
 public:
  /// Keeps references to `mdp` and `behavior`; both must outlive the trajectory.
  Trajectory(const TabularMDP& mdp, const Policy& behavior, RngStream rng);
  Trajectory(TabularMDP&&, const Policy&, RngStream) = delete;
  Trajectory(const TabularMDP&, Policy&&, RngStream) = delete;

  Transition next();
  std::size_t state() const noexcept { return state_; }

 private:
  const TabularMDP* mdp_;
  const Policy* behavior_;
  RngStream rng_;
  std::size_t state_;
};

/// Streams for one independent run, all derived from (master, run index):
/// "env" drives the trajectory, "agent" the copy selectors and coins,
/// "init" the parameter initialization.
struct RunStreams {
  RngStream env;
  RngStream agent;
  RngStream init;
};

RunStreams run_streams(const RngStream& master, std::uint64_t run);

/// Applies `steps` updates from `trajectory` to `agent`, calling
/// observe(agent) after every `cadence`-th update (cadence 0 disables).
template <class Observer>
void train(AgentState& agent, const FeatureMap& features, Trajectory& trajectory, RngStream& agent_rng,
           std::uint64_t steps, std::uint64_t cadence, Observer&& observe) {
  for (std::uint64_t k = 1; k <= steps; ++k) {
    update(agent, trajectory.next(), features, agent_rng);
    if (cadence != 0 && k % cadence == 0) observe(agent);
  }
}

inline void train(AgentState& agent, const FeatureMap& features, Trajectory& trajectory, RngStream& agent_rng,
                  std::uint64_t steps) {
  train(agent, features, trajectory, agent_rng, steps, 0, [](const AgentState&) {});
}

}  // namespace robustq
