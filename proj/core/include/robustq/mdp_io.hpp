#pragma once

#include "robustq/mdp.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace robustq {

// JSON documents:
//   MDP:      {"num_states", "num_actions", "kernel" (row-major, (S*A) x S),
//              "reward", "discount", "initial_dist"}
//   Features: {"dim", "num_actions", "matrix" (row-major, d x (S*A))}

std::string mdp_to_json(const TabularMDP& mdp);
TabularMDP mdp_from_json(std::string_view text);

std::string features_to_json(const FeatureMap& features);
FeatureMap features_from_json(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace robustq
