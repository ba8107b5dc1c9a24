#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace robustq {

enum class DecayIndex { PerStep, PerEpisode };

/// alpha = copies * alpha0 * w_alpha / (index + w_alpha), where index is the
/// global step or the episode count. `copies` carries the N-fold scaling
/// used by methods holding N estimates; set it to 1 for the plain schedule.
struct LearningRateSchedule {
  double alpha0 = 0.01;
  double w_alpha = 1e5;
  std::size_t copies = 1;
  DecayIndex decay = DecayIndex::PerStep;
};

enum class RhoMode { Linear, Quadratic, Constant };

/// rho_n = rho0 * w_rho / (n + w_rho)     (Linear)
/// rho_n = rho0 * w_rho / (n^2 + w_rho)   (Quadratic)
/// rho_n = rho0                           (Constant)
struct RhoSchedule {
  double rho0 = 0.0;
  double w_rho = 1.0;
  RhoMode mode = RhoMode::Linear;
};

/// Throws Error{ValidationError} on non-positive parameters.
void validate(const LearningRateSchedule& schedule);
void validate(const RhoSchedule& schedule);

std::string_view rho_mode_name(RhoMode mode) noexcept;
/// "linear", "quadratic" or "constant"; throws Error{ValidationError}.
RhoMode parse_rho_mode(std::string_view name);

double lr_at(const LearningRateSchedule& schedule, std::uint64_t index);
double rho_at(const RhoSchedule& schedule, std::uint64_t n);

}  // namespace robustq
