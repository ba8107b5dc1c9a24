#include "robustq/analysis.hpp"

#include "robustq/error.hpp"
#include "robustq/format.hpp"
#include "robustq/lyapunov.hpp"
#include "robustq/parallel.hpp"
#include "robustq/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robustq {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

struct RunningStats {
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;

  void add(double v) {
    ++count;
    const double delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean);
  }
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double stderr_of_mean() const { return std::sqrt(variance() / static_cast<double>(count)); }
};

// Columns (s, pi*(s)) of Phi, stacked as a d x S matrix.
Matrix greedy_columns(const Matrix& phi, std::size_t num_actions, const std::vector<std::size_t>& pi_star) {
  Matrix out(phi.rows(), idx(pi_star.size()));
  for (std::size_t s = 0; s < pi_star.size(); ++s) out.col(idx(s)) = phi.col(idx(s * num_actions + pi_star[s]));
  return out;
}

}  // namespace

double mse_to_optimal(const Vector& theta_hat, const Vector& theta_star) {
  if (theta_hat.size() != theta_star.size())
    throw Error(Errc::DimensionMismatch, "mse_to_optimal: " + std::to_string(theta_hat.size()) + " vs " +
                                             std::to_string(theta_star.size()));
  return (theta_hat - theta_star).squaredNorm();
}

AmseCurve empirical_amse(const std::vector<std::uint64_t>& steps, const std::vector<std::vector<double>>& mse) {
  if (mse.empty() || steps.empty()) throw Error(Errc::EmptySeries, "empirical_amse needs >= 1 seed and >= 1 step");
  for (const auto& series : mse)
    if (series.size() != steps.size())
      throw Error(Errc::DimensionMismatch, "empirical_amse: series length differs from the step grid");

  AmseCurve curve;
  curve.steps = steps;
  curve.value.resize(steps.size());
  curve.std_error.resize(steps.size());
  for (std::size_t j = 0; j < steps.size(); ++j) {
    RunningStats stats;
    for (const auto& series : mse) stats.add(series[j]);
    const double n = static_cast<double>(steps[j]);
    curve.value[j] = n * stats.mean;
    curve.std_error[j] = n * stats.stderr_of_mean();
  }
  return curve;
}

// ---------------------------------------------------------------------------

BiasReport measure_bias(const AgentFactory& factory, const TabularMDP& mdp, const Policy& behavior,
                        const FeatureMap& features, const BiasQuery& query, const RngStream& master) {
  if (query.num_runs < kMinBiasRuns)
    throw Error(Errc::InsufficientRuns, "measure_bias needs at least " + std::to_string(kMinBiasRuns) +
                                            " runs, got " + std::to_string(query.num_runs));
  if (query.next_state >= mdp.num_states() || query.pair >= mdp.num_pairs())
    throw Error(Errc::DimensionMismatch, "bias query indexes outside the MDP");

  const std::size_t runs = query.num_runs;
  std::vector<double> estimates(runs);
  std::vector<Vector> means(runs);
  parallel_for(runs, query.workers, [&](std::size_t k) {
    RunStreams streams = run_streams(master, k);
    AgentState agent = factory(streams.init);
    Trajectory trajectory(mdp, behavior, std::move(streams.env));
    train(agent, features, trajectory, streams.agent, query.snapshot);
    estimates[k] = bootstrap_estimate(agent, features, query.next_state, query.rho);
    means[k] = copy_mean(agent);
  });

  const double gamma = mdp.discount();
  const std::size_t A = mdp.num_actions();
  Vector theta_bar = Vector::Zero(means.front().size());
  for (const auto& m : means) theta_bar += m;
  theta_bar /= static_cast<double>(runs);

  std::vector<double> scores(A);
  double max_norm = 0.0;
  for (std::size_t a = 0; a < A; ++a) {
    const std::size_t y = query.next_state * A + a;
    scores[a] = features.dot(y, theta_bar);
    max_norm = std::max(max_norm, features.column_norm(y));
  }
  const std::size_t a_star = argmax_lowest(scores.data(), A);
  const std::size_t y_star = query.next_state * A + a_star;

  BiasReport report;
  report.runs = runs;
  RunningStats est, ref, diff;
  std::size_t inside = 0;
  const double radius = std::sqrt(query.rho);
  for (std::size_t k = 0; k < runs; ++k) {
    const double r = gamma * features.dot(y_star, means[k]);
    est.add(estimates[k]);
    ref.add(r);
    diff.add(r - estimates[k]);
    if ((means[k] - theta_bar).norm() <= radius) ++inside;
  }
  report.estimator_mean = est.mean;
  report.estimator_se = est.stderr_of_mean();
  report.reference = gamma * scores[a_star];
  report.reference_se = ref.stderr_of_mean();
  report.bias = report.reference - report.estimator_mean;
  report.bias_se = diff.stderr_of_mean();
  report.band_low = 0.0;
  report.band_high = radius * gamma * max_norm;
  report.membership_freq = static_cast<double>(inside) / static_cast<double>(runs);
  return report;
}

std::string bias_csv_header() { return "method,N,rho,n,bias,se,band_hi,membership_freq"; }

std::string bias_csv_row(std::string_view method, std::size_t copies, double rho, std::uint64_t snapshot,
                         const BiasReport& r) {
  return std::string(method) + ',' + std::to_string(copies) + ',' + format_double(rho) + ',' +
         std::to_string(snapshot) + ',' + format_double(r.bias) + ',' + format_double(r.bias_se) + ',' +
         format_double(r.band_high) + ',' + format_double(r.membership_freq);
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> unique_optimal_policy(const Vector& q_star, std::size_t num_actions, double gap_tol) {
  const std::size_t S = static_cast<std::size_t>(q_star.size()) / num_actions;
  std::vector<std::size_t> pi(S);
  for (std::size_t s = 0; s < S; ++s) {
    const double* row = q_star.data() + s * num_actions;
    const std::size_t best = argmax_lowest(row, num_actions);
    double runner_up = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < num_actions; ++a)
      if (a != best) runner_up = std::max(runner_up, row[a]);
    if (num_actions > 1 && !(row[best] - runner_up > gap_tol))
      throw Error(Errc::NonUniqueOptimalPolicy, "state " + std::to_string(s) + " has action gap " +
                                                    format_double(row[best] - runner_up));
    pi[s] = best;
  }
  return pi;
}

Vector projected_fixed_point(const TabularMDP& mdp, const FeatureMap& features, const Vector& mu,
                             const std::vector<std::size_t>& pi_star) {
  const Matrix phi = features.dense();
  const Matrix phi_d = phi * mu.asDiagonal();
  const Matrix a1 = phi_d * phi.transpose();
  const Matrix a2 = mdp.discount() * phi_d * Matrix(mdp.kernel()) *
                    greedy_columns(phi, mdp.num_actions(), pi_star).transpose();
  const Matrix lhs = a1 - a2;
  Eigen::FullPivLU<Matrix> lu(lhs);
  if (!lu.isInvertible()) throw Error(Errc::SingularSystem, "A1 - A2 is singular");
  return lu.solve(phi_d * mdp.reward());
}

NoiseStatistics noise_statistics(const TabularMDP& mdp, const Policy& behavior, const FeatureMap& features,
                                 const Vector& mu, const std::vector<std::size_t>& pi_star,
                                 const Vector& theta_star, double tol) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  const std::size_t X = mdp.num_pairs();
  const Index d = idx(features.dim());
  const double gamma = mdp.discount();
  const Matrix phi = features.dense();
  const RowMatrix& P = mdp.kernel();

  // delta(x, s') and h(x) = E[b | x].
  const Vector q_theta = phi.transpose() * theta_star;
  Vector next_value(idx(S));
  for (std::size_t s = 0; s < S; ++s) next_value[idx(s)] = q_theta[idx(s * A + pi_star[s])];
  RowMatrix delta(idx(X), idx(S));
  for (std::size_t x = 0; x < X; ++x)
    for (std::size_t s = 0; s < S; ++s)
      delta(idx(x), idx(s)) = mdp.reward()[idx(x)] + gamma * next_value[idx(s)] - q_theta[idx(x)];
  const Vector mean_delta = (P.array() * delta.array()).rowwise().sum();
  Matrix H(idx(X), d);  // row x is h(x)^T
  for (std::size_t x = 0; x < X; ++x) H.row(idx(x)) = mean_delta[idx(x)] * phi.col(idx(x)).transpose();

  NoiseStatistics out;
  out.mean = H.transpose() * mu;
  const double scale = std::max(1.0, (H.cwiseAbs().transpose() * mu).maxCoeff());
  if (!(out.mean.cwiseAbs().maxCoeff() <= tol * scale))
    throw Error(Errc::SeriesDiverged, "stationary TD noise has mean of size " +
                                          format_double(out.mean.cwiseAbs().maxCoeff()));

  out.B1 = Matrix::Zero(d, d);
  const Vector mean_sq = (P.array() * delta.array().square()).rowwise().sum();
  for (std::size_t x = 0; x < X; ++x)
    out.B1.noalias() += mu[idx(x)] * mean_sq[idx(x)] * phi.col(idx(x)) * phi.col(idx(x)).transpose();

  // sum_{k>=0} P^k H = Z H with Z = (I - P + 1 mu^T)^{-1}, valid because mu^T H = 0.
  const Matrix chain = pair_chain(mdp, behavior);
  Matrix fundamental = Matrix::Identity(idx(X), idx(X)) - chain;
  fundamental.rowwise() += mu.transpose();
  const Matrix ZH = fundamental.partialPivLu().solve(H);
  // m(s1) = sum_a1 pi(a1 | s1) (Z H)[(s1, a1)]
  Matrix m(idx(S), d);
  for (std::size_t s = 0; s < S; ++s) {
    m.row(idx(s)).setZero();
    for (std::size_t a = 0; a < A; ++a) m.row(idx(s)) += behavior.prob(s, a) * ZH.row(idx(s * A + a));
  }
  // S_sum = sum_{x0, s1} mu(x0) P(s1 | x0) m(s1) b(x0, s1)^T
  Matrix cross = Matrix::Zero(d, d);
  for (std::size_t x = 0; x < X; ++x) {
    Vector weighted = Vector::Zero(d);
    for (std::size_t s = 0; s < S; ++s)
      weighted += (P(idx(x), idx(s)) * delta(idx(x), idx(s))) * m.row(idx(s)).transpose();
    cross.noalias() += mu[idx(x)] * weighted * phi.col(idx(x)).transpose();
  }
  out.B2 = 0.5 * (cross + cross.transpose());
  return out;
}

Matrix block_matrix(const Matrix& diag, const Matrix& off, std::size_t copies) {
  const Index d = diag.rows();
  const Index n = idx(copies);
  Matrix out(n * d, n * d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out.block(i * d, j * d, d, d) = i == j ? diag : off;
  return out;
}

namespace {

Vector ergodic_distribution(const TabularMDP& mdp, const Policy& behavior) {
  Vector mu;
  try {
    mu = stationary_distribution(mdp, behavior);
  } catch (const Error& e) {
    if (e.code() == Errc::NotConverged) throw Error(Errc::NotErgodic, e.what());
    throw;
  }
  if (!(mu.minCoeff() > 1e-12))
    throw Error(Errc::NotErgodic, "behavioral pair chain leaves some state-action pair unvisited");
  return mu;
}

}  // namespace

SigmaBSeries sigma_b_series(const TabularMDP& mdp, const Policy& behavior, const FeatureMap& features,
                            std::size_t copies, double tol) {
  const Vector mu = ergodic_distribution(mdp, behavior);
  const auto pi_star = unique_optimal_policy(solve_optimal_q(mdp), mdp.num_actions());
  const Vector theta_star = projected_fixed_point(mdp, features, mu, pi_star);
  NoiseStatistics noise = noise_statistics(mdp, behavior, features, mu, pi_star, theta_star, tol);
  const double n = static_cast<double>(copies);
  Matrix sigma = block_matrix(n * noise.B1 + 2.0 * noise.B2, 2.0 * noise.B2, copies);
  return {std::move(noise.B1), std::move(noise.B2), std::move(sigma)};
}

AsymptoticModel build_asymptotic_model(const TabularMDP& mdp, const Policy& behavior, const FeatureMap& features,
                                       double gain, std::size_t copies, double gap_tol) {
  if (copies < 1) throw Error(Errc::ValidationError, "copies must be >= 1");
  if (features.num_pairs() != mdp.num_pairs())
    throw Error(Errc::DimensionMismatch, "feature map does not match the MDP's pair count");

  AsymptoticModel model;
  model.copies = copies;
  model.gain = gain;
  model.discount = mdp.discount();
  model.mu = ergodic_distribution(mdp, behavior);
  model.pi_star = unique_optimal_policy(solve_optimal_q(mdp), mdp.num_actions(), gap_tol);
  model.theta_star = projected_fixed_point(mdp, features, model.mu, model.pi_star);

  const Matrix phi = features.dense();
  const Matrix phi_d = phi * model.mu.asDiagonal();
  model.A1_bar = phi_d * phi.transpose();
  model.A2_bar = mdp.discount() * phi_d * Matrix(mdp.kernel()) *
                 greedy_columns(phi, mdp.num_actions(), model.pi_star).transpose();
  model.noise = noise_statistics(mdp, behavior, features, model.mu, model.pi_star, model.theta_star);

  const double n = static_cast<double>(copies);
  model.stacked_A = block_matrix(model.A2_bar / n - model.A1_bar, model.A2_bar / n, copies);
  model.Sigma_b = block_matrix(n * model.noise.B1 + 2.0 * model.noise.B2, 2.0 * model.noise.B2, copies);

  const double lead = std::max(max_real_eigenvalue(model.A_bar()), max_real_eigenvalue(model.stacked_A));
  model.g0_spectral = lead < 0.0 ? -1.0 / lead : std::numeric_limits<double>::infinity();
  if (features.is_canonical()) {
    // Smallest stationary weight over state-action pairs.
    model.g0 = 1.0 / (model.mu.minCoeff() * (1.0 - mdp.discount()));
  } else {
    model.g0 = model.g0_spectral;
  }
  return model;
}

LyapunovAmse lyapunov_amse(const AsymptoticModel& model) {
  if (!(model.gain > model.g0))
    throw Error(Errc::GainBelowThreshold,
                "gain " + format_double(model.gain) + " does not exceed g0 = " + format_double(model.g0));
  const Index d = model.A1_bar.rows();
  const Index nd = model.stacked_A.rows();
  const double g = model.gain;
  const std::size_t N = model.copies;

  const Matrix m = 0.5 * Matrix::Identity(nd, nd) + g * model.stacked_A;
  if (!is_hurwitz(m))
    throw Error(Errc::GainBelowThreshold, "I/2 + g A is not Hurwitz at gain " + format_double(g));
  const Matrix q = g * g * model.Sigma_b;

  LyapunovAmse out;
  out.Sigma_inf = solve_lyapunov(m, q);
  out.Sigma_inf = 0.5 * (out.Sigma_inf + out.Sigma_inf.transpose());
  out.residual = lyapunov_residual(m, q, out.Sigma_inf);

  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) total += out.Sigma_inf.block(idx(i) * d, idx(j) * d, d, d).trace();
  out.predicted_trace = total / static_cast<double>(N * N);

  const Matrix m1 = 0.5 * Matrix::Identity(d, d) + g * model.A_bar();
  const Matrix q1 = g * g * (model.noise.B1 + 2.0 * model.noise.B2);
  out.watkins_trace = solve_lyapunov(m1, q1).trace();
  return out;
}

std::string amse_csv_header() { return "method,N,g,n,predicted_trace,empirical_trace"; }

std::string amse_csv_row(std::string_view method, std::size_t copies, double gain, std::uint64_t n,
                         double predicted_trace, double empirical_trace) {
  return std::string(method) + ',' + std::to_string(copies) + ',' + format_double(gain) + ',' + std::to_string(n) +
         ',' + format_double(predicted_trace) + ',' + format_double(empirical_trace);
}

}  // namespace robustq
