#include "robustq/simulate.hpp"

namespace robustq {

Trajectory::Trajectory(const TabularMDP& mdp, const Policy& behavior, RngStream rng)
    : mdp_(&mdp), behavior_(&behavior), rng_(std::move(rng)), state_(sample_initial_state(mdp, rng_)) {}

Transition Trajectory::next() {
  const std::size_t a = sample_action(*behavior_, state_, rng_);
  Transition t = sample_step(*mdp_, state_, a, rng_);
  state_ = t.next_state;
  return t;
}

RunStreams run_streams(const RngStream& master, std::uint64_t run) {
  const RngStream base = master.derive(run);
  return {base.derive("env"), base.derive("agent"), base.derive("init")};
}

}  // namespace robustq
