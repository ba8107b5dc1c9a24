#include "robustq/schedules.hpp"

#include "robustq/error.hpp"

#include <string>

namespace robustq {

void validate(const LearningRateSchedule& s) {
  if (!(s.alpha0 > 0.0)) throw Error(Errc::ValidationError, "alpha0 must be positive");
  if (!(s.w_alpha > 0.0)) throw Error(Errc::ValidationError, "w_alpha must be positive");
  if (s.copies < 1) throw Error(Errc::ValidationError, "learning-rate copies must be >= 1");
}

void validate(const RhoSchedule& s) {
  if (!(s.rho0 >= 0.0)) throw Error(Errc::ValidationError, "rho0 must be non-negative");
  if (!(s.w_rho > 0.0)) throw Error(Errc::ValidationError, "w_rho must be positive");
}

std::string_view rho_mode_name(RhoMode mode) noexcept {
  switch (mode) {
    case RhoMode::Linear: return "linear";
    case RhoMode::Quadratic: return "quadratic";
    case RhoMode::Constant: return "constant";
  }
  return "linear";
}

RhoMode parse_rho_mode(std::string_view name) {
  if (name == "linear") return RhoMode::Linear;
  if (name == "quadratic") return RhoMode::Quadratic;
  if (name == "constant") return RhoMode::Constant;
  throw Error(Errc::ValidationError, "unknown rho mode '" + std::string(name) + "'");
}

double lr_at(const LearningRateSchedule& s, std::uint64_t index) {
  return static_cast<double>(s.copies) * s.alpha0 * s.w_alpha / (static_cast<double>(index) + s.w_alpha);
}

double rho_at(const RhoSchedule& s, std::uint64_t n) {
  if (s.rho0 == 0.0) return 0.0;
  if (s.mode == RhoMode::Constant) return s.rho0;
  const double nd = static_cast<double>(n);
  const double denom = s.mode == RhoMode::Linear ? nd + s.w_rho : nd * nd + s.w_rho;
  return s.rho0 * s.w_rho / denom;
}

}  // namespace robustq
