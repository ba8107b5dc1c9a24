#pragma once

#include "robustq/agents.hpp"

#include <string>
#include <string_view>

namespace robustq {

/// Checkpoint document: variant tag, discount, every theta, step and episode
/// counters, schedule parameters, Averaged history and the fixed policy of
/// the linearized recursion. Doubles are written in shortest round-trip
/// form, so agent_from_json(agent_to_json(s)) reproduces s bit for bit.
std::string agent_to_json(const AgentState& state);
AgentState agent_from_json(std::string_view text);

}  // namespace robustq
