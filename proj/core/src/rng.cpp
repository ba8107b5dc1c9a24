#include "robustq/rng.hpp"

#include "robustq/error.hpp"

#include <cstring>

namespace robustq {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::RowNotStochastic: return "RowNotStochastic";
    case Errc::BadDiscount: return "BadDiscount";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::NotConverged: return "NotConverged";
    case Errc::NonFiniteTheta: return "NonFiniteTheta";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::BadBounds: return "BadBounds";
    case Errc::BadCoefficients: return "BadCoefficients";
    case Errc::SteppedTerminal: return "SteppedTerminal";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::InsufficientRuns: return "InsufficientRuns";
    case Errc::NonUniqueOptimalPolicy: return "NonUniqueOptimalPolicy";
    case Errc::NotErgodic: return "NotErgodic";
    case Errc::SeriesDiverged: return "SeriesDiverged";
    case Errc::GainBelowThreshold: return "GainBelowThreshold";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::EnvironmentBuildError: return "EnvironmentBuildError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t combine(std::uint64_t key, std::uint64_t salt) noexcept {
  return splitmix64(key ^ splitmix64(salt + 0x632be59bd9b4e019ULL));
}

std::mt19937_64 seeded_engine(std::uint64_t key) {
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(splitmix64(key)),
                    static_cast<std::uint32_t>(splitmix64(key) >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t key) : key_(key), engine_(seeded_engine(key)) {}

RngStream::RngStream(std::uint64_t seed, std::string_view name)
    : RngStream(combine(splitmix64(seed), fnv1a64(name))) {}

RngStream RngStream::derive(std::string_view name) const {
  return RngStream(combine(key_, fnv1a64(name)));
}

RngStream RngStream::derive(std::uint64_t index) const {
  return RngStream(combine(key_ ^ 0x5bd1e9955bd1e995ULL, index));
}

std::size_t RngStream::index(std::size_t n) {
  if (n <= 1) return 0;
  auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

double RngStream::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

}  // namespace robustq
