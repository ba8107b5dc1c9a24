#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace robustq {

/// 64-bit FNV-1a; used for stream keys and parameter digests.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// A named, seedable random stream. Two streams built from the same
/// (seed, name) produce identical sequences; distinct names give
/// statistically independent sequences. Conversions to doubles and indices
/// are done here rather than through <random> distributions so sampled
/// trajectories do not depend on the standard library implementation.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view name);

  /// Child stream keyed by this stream's key and `name`; does not advance *this.
  RngStream derive(std::string_view name) const;
  RngStream derive(std::uint64_t index) const;

  std::uint64_t key() const noexcept { return key_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on {0, ..., n-1}. n == 1 consumes no randomness.
  std::size_t index(std::size_t n);

  /// Gamma(shape, 1) variate; used for Dirichlet draws.
  double gamma(double shape);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  explicit RngStream(std::uint64_t key);

  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace robustq
