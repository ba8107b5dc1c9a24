#pragma once

#include "robustq/agents.hpp"
#include "robustq/mdp.hpp"
#include "robustq/rng.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace robustq {

/// ||theta_hat - theta_star||_2^2. Throws Error{DimensionMismatch}.
double mse_to_optimal(const Vector& theta_hat, const Vector& theta_star);

struct AmseCurve {
  std::vector<std::uint64_t> steps;
  std::vector<double> value;   // n * mean MSE
  std::vector<double> std_error;  // n * standard error of the mean
};

/// mse[k][j] is seed k's MSE at steps[j]. Throws Error{EmptySeries} with no
/// seeds or no steps and Error{DimensionMismatch} on ragged input.
AmseCurve empirical_amse(const std::vector<std::uint64_t>& steps, const std::vector<std::vector<double>>& mse);

// ---------------------------------------------------------------------------
// Estimation bias

/// Builds a fresh agent for one Monte-Carlo run from its init stream.
using AgentFactory = std::function<AgentState(RngStream& init_rng)>;

struct BiasQuery {
  std::size_t pair = 0;        // x, the updated pair
  std::size_t next_state = 0;  // s'
  std::uint64_t snapshot = 0;  // training steps per run
  double rho = 0.0;            // radius^2 used by the robust estimator
  std::size_t num_runs = 100;
  std::size_t workers = 1;
};

inline constexpr std::size_t kMinBiasRuns = 100;

/// Scalars are the bootstrap part of the target; the common phi(x) factor
/// is dropped.
struct BiasReport {
  std::size_t runs = 0;
  double estimator_mean = 0.0;
  double estimator_se = 0.0;
  /// gamma * max_a' phi(s', a')^T theta_bar, theta_bar the cross-run mean
  /// of the copy average (plug-in for E[theta^(i)]).
  double reference = 0.0;
  double reference_se = 0.0;
  /// reference - estimator; positive means underestimation.
  double bias = 0.0;
  /// Paired standard error of the bias.
  double bias_se = 0.0;
  double band_low = 0.0;
  /// sqrt(rho) * gamma * max_a' ||phi(s', a')||.
  double band_high = 0.0;
  /// Fraction of runs whose copy average lies within sqrt(rho) of theta_bar.
  double membership_freq = 0.0;
};

/// Runs `num_runs` independent trainings of `snapshot` steps each on a
/// behavioral trajectory and compares the variant's bootstrap estimate at
/// s' with the plug-in reference. Run k uses run_streams(master, k), so
/// results do not depend on `workers`. Throws Error{InsufficientRuns}.
BiasReport measure_bias(const AgentFactory& factory, const TabularMDP& mdp, const Policy& behavior,
                        const FeatureMap& features, const BiasQuery& query, const RngStream& master);

std::string bias_csv_header();
std::string bias_csv_row(std::string_view method, std::size_t copies, double rho, std::uint64_t snapshot,
                         const BiasReport& report);

// ---------------------------------------------------------------------------
// Asymptotic covariance

inline constexpr double kPolicyGapTol = 1e-9;

/// Second-order statistics of the TD noise at theta*, over the stationary
/// pair chain:
///   b(x, s') = phi(x) (r(x) + gamma phi(s', pi*(s'))^T theta* - phi(x)^T theta*)
///   B1 = E[b b^T],  B2 = (1/2) sum_{n>=1} E[b_n b_0^T + b_0 b_n^T].
struct NoiseStatistics {
  Matrix B1;
  Matrix B2;
  /// E[b] under stationarity; zero up to round-off.
  Vector mean;
};

/// Assembled pieces of the linear recursion
///   theta^(i) += alpha (r + gamma phi(s', pi*)^T theta_hat - phi^T theta^(i)) phi
/// around theta*, for N copies and gain g (alpha_n = N g / n).
struct AsymptoticModel {
  std::size_t copies = 1;
  double gain = 0.0;
  double discount = 0.0;
  /// Stationary distribution of the behavioral pair chain.
  Vector mu;
  std::vector<std::size_t> pi_star;
  Vector theta_star;
  Matrix A1_bar;  // Phi D Phi^T
  Matrix A2_bar;  // gamma Phi D P S_pi* Phi^T
  NoiseStatistics noise;
  /// N d x N d: diagonal blocks A2/N - A1, off-diagonal blocks A2/N.
  Matrix stacked_A;
  /// N d x N d: diagonal blocks N B1 + 2 B2, off-diagonal blocks 2 B2.
  Matrix Sigma_b;
  /// 1 / (mu_min (1 - gamma)) for canonical features, otherwise the
  /// spectral threshold.
  double g0 = 0.0;
  /// -1 / max(max Re eig(A2 - A1), max Re eig(stacked_A)).
  double g0_spectral = 0.0;

  Matrix A_bar() const { return A2_bar - A1_bar; }
};

/// Greedy optimal actions of Q*, requiring a gap above `gap_tol` between
/// the best and second-best action in every state.
/// Throws Error{NonUniqueOptimalPolicy}.
std::vector<std::size_t> unique_optimal_policy(const Vector& q_star, std::size_t num_actions,
                                               double gap_tol = kPolicyGapTol);

/// Solves (A1 - A2) theta* = Phi D r for the given policy and weighting.
Vector projected_fixed_point(const TabularMDP& mdp, const FeatureMap& features, const Vector& mu,
                             const std::vector<std::size_t>& pi_star);

/// Noise statistics with the series summed through the fundamental matrix
/// (I - P + 1 mu^T)^{-1} of the pair chain. Throws Error{SeriesDiverged}
/// if E[b] exceeds `tol` (theta* is not the fixed point).
NoiseStatistics noise_statistics(const TabularMDP& mdp, const Policy& behavior, const FeatureMap& features,
                                 const Vector& mu, const std::vector<std::size_t>& pi_star,
                                 const Vector& theta_star, double tol = 1e-8);

struct SigmaBSeries {
  Matrix B1;
  Matrix B2;
  Matrix Sigma_b;
};

/// Computes mu, pi* and theta* from the MDP and returns B1, B2 and the
/// N-block noise covariance.
SigmaBSeries sigma_b_series(const TabularMDP& mdp, const Policy& behavior, const FeatureMap& features,
                            std::size_t copies, double tol = 1e-8);

/// N-block layout helper: diag blocks `diag`, off-diagonal blocks `off`.
Matrix block_matrix(const Matrix& diag, const Matrix& off, std::size_t copies);

/// Throws Error{NotErgodic, NonUniqueOptimalPolicy, SeriesDiverged}.
AsymptoticModel build_asymptotic_model(const TabularMDP& mdp, const Policy& behavior, const FeatureMap& features,
                                       double gain, std::size_t copies, double gap_tol = kPolicyGapTol);

struct LyapunovAmse {
  /// Stationary covariance of the stacked scaled error sqrt(n)(theta - theta*).
  Matrix Sigma_inf;
  /// Trace of the averaged estimator's covariance, (1/N^2) sum_ij tr(Sigma_ij).
  double predicted_trace = 0.0;
  /// Trace from the single-copy equation with noise B1 + 2 B2.
  double watkins_trace = 0.0;
  /// Max-abs entry of the stacked equation's residual.
  double residual = 0.0;
};

/// Solves Sigma (I/2 + g A^T) + (I/2 + g A) Sigma + g^2 Sigma_b = 0 for the
/// stacked system. Throws Error{GainBelowThreshold, SingularSystem}.
LyapunovAmse lyapunov_amse(const AsymptoticModel& model);

std::string amse_csv_header();
std::string amse_csv_row(std::string_view method, std::size_t copies, double gain, std::uint64_t n,
                         double predicted_trace, double empirical_trace);

}  // namespace robustq
