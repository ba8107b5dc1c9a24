#include "robustq/analysis.hpp"
#include "robustq/environments.hpp"
#include "robustq/error.hpp"
#include "robustq/lyapunov.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace robustq;

namespace {

Matrix random_stable(Eigen::Index n, RngStream& rng) {
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);
  // shift left past the spectral abscissa
  return m - (max_real_eigenvalue(m) + 0.5) * Matrix::Identity(n, n);
}

Matrix random_psd(Eigen::Index n, RngStream& rng) {
  Matrix b(n, n);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform(-1, 1);
  return b * b.transpose();
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no robustq::Error thrown";
  return Errc::IoError;
}

}  // namespace

TEST(Lyapunov, KroneckerAndSchurAgree) {
  RngStream rng(1, "lyap");
  for (Eigen::Index n : {1, 2, 5, 12, 24}) {
    const Matrix m = random_stable(n, rng);
    const Matrix q = random_psd(n, rng);
    const Matrix xk = solve_lyapunov_kronecker(m, q);
    const Matrix xs = solve_lyapunov_schur(m, q);
    const double scale = xk.cwiseAbs().maxCoeff();
    EXPECT_LT((xk - xs).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, scale)) << "n " << n;
    EXPECT_LT(lyapunov_residual(m, q, xs), 1e-10 * std::max(1.0, scale));
  }
}

TEST(Lyapunov, LargeSystemResidualAndSymmetry) {
  RngStream rng(2, "lyap");
  const Matrix m = random_stable(60, rng);
  const Matrix q = random_psd(60, rng);
  const Matrix x = solve_lyapunov(m, q);
  EXPECT_LT(lyapunov_residual(m, q, x), 1e-9 * x.cwiseAbs().maxCoeff());
  EXPECT_LT((x - x.transpose()).cwiseAbs().maxCoeff(), 1e-9 * x.cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (x + x.transpose()));
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-9 * x.cwiseAbs().maxCoeff());
}

TEST(Lyapunov, ScalarClosedForm) {
  Matrix m(1, 1), q(1, 1);
  m << -0.75;
  q << 3.0;
  EXPECT_NEAR(solve_lyapunov(m, q)(0, 0), 2.0, 1e-14);
}

TEST(Noise, FundamentalMatrixMatchesTruncatedSeries) {
  // Random 4-state chain with non-canonical features.
  const TabularMDP mdp = build_random_env({4, 2, 0.8, 0.05, 0.01, 0.85, 12});
  const Policy beh = Policy::uniform(4, 2);
  RngStream rng(4, "phi");
  Matrix phi(3, 8);
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi.data()[i] = rng.uniform(-1, 1);
  const FeatureMap f = FeatureMap::from_dense(phi, 2);
  const Vector mu = stationary_distribution(mdp, beh, 1e-14);
  const auto pi = unique_optimal_policy(solve_optimal_q(mdp), 2);
  const Vector theta = projected_fixed_point(mdp, f, mu, pi);

  // theta* solves E[phi(x) (phi(x) - gamma phi(s', pi*))^T] theta = E[phi r].
  Matrix lhs = Matrix::Zero(3, 3);
  Vector rhs = Vector::Zero(3);
  for (Eigen::Index x = 0; x < 8; ++x)
    for (Eigen::Index s = 0; s < 4; ++s) {
      const double w = mu[x] * mdp.kernel()(x, s);
      const Vector next = phi.col(s * 2 + static_cast<Eigen::Index>(pi[static_cast<std::size_t>(s)]));
      lhs += w * phi.col(x) * (phi.col(x) - mdp.discount() * next).transpose();
      rhs += w * phi.col(x) * mdp.reward()[x];
    }
  EXPECT_LT((lhs.fullPivLu().solve(rhs) - theta).cwiseAbs().maxCoeff(), 1e-10);

  const NoiseStatistics got = noise_statistics(mdp, beh, f, mu, pi, theta);
  const oracle::NoiseOracle want = oracle::truncated_noise(mdp, beh, phi, pi, theta, 10000);
  const double scale = std::max(1.0, want.B2.cwiseAbs().maxCoeff());
  EXPECT_LT(want.mean.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((got.B1 - want.B1).cwiseAbs().maxCoeff(), 1e-8 * scale);
  EXPECT_LT((got.B2 - want.B2).cwiseAbs().maxCoeff(), 1e-8 * scale);
}

TEST(Noise, WrongFixedPointDiverges) {
  const TabularMDP mdp = build_random_env({4, 2, 1.0, 0.05, 0.01, 0.8, 3});
  const Policy beh = Policy::uniform(4, 2);
  const FeatureMap f = canonical_features(4, 2);
  const Vector mu = stationary_distribution(mdp, beh);
  const auto pi = unique_optimal_policy(solve_optimal_q(mdp), 2);
  Vector theta = projected_fixed_point(mdp, f, mu, pi);
  theta[1] += 0.1;
  EXPECT_EQ(code_of([&] { noise_statistics(mdp, beh, f, mu, pi, theta); }), Errc::SeriesDiverged);
}

TEST(Asymptotic, CanonicalFixedPointIsQStar) {
  const TabularMDP mdp = build_random_env({4, 2, 1.0, 0.05, 0.01, 0.8, 3});
  const AsymptoticModel m = build_asymptotic_model(mdp, Policy::uniform(4, 2), canonical_features(4, 2), 1.0, 3);
  EXPECT_LT((m.theta_star - oracle::optimal_q_by_enumeration(mdp)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(m.g0, 1.0 / (m.mu.minCoeff() * 0.2), 1e-9 * m.g0);
  EXPECT_EQ(m.stacked_A.rows(), 24);
  // block layout
  const Matrix diag = m.A2_bar / 3.0 - m.A1_bar, off = m.A2_bar / 3.0;
  EXPECT_EQ(m.stacked_A.block(0, 0, 8, 8), diag);
  EXPECT_EQ(m.stacked_A.block(8, 16, 8, 8), off);
  EXPECT_EQ(m.Sigma_b.block(8, 8, 8, 8), 3.0 * m.noise.B1 + 2.0 * m.noise.B2);
  EXPECT_EQ(m.Sigma_b.block(16, 0, 8, 8), 2.0 * m.noise.B2);
}

TEST(Asymptotic, AveragedTraceEqualsSingleCopyTrace) {
  for (std::uint64_t seed : {3u, 5u, 7u}) {
    const TabularMDP mdp = build_random_env({4, 2, 1.0, 0.05, 0.01, 0.8, seed});
    const Policy beh = Policy::uniform(4, 2);
    const FeatureMap f = canonical_features(4, 2);
    const double g0 = build_asymptotic_model(mdp, beh, f, 1.0, 1).g0;
    const LyapunovAmse one = lyapunov_amse(build_asymptotic_model(mdp, beh, f, 2 * g0, 1));
    EXPECT_NEAR(one.predicted_trace, one.watkins_trace, 1e-10 * one.watkins_trace);
    for (std::size_t N : {2u, 5u}) {
      const LyapunovAmse l = lyapunov_amse(build_asymptotic_model(mdp, beh, f, 2 * g0, N));
      EXPECT_NEAR(l.predicted_trace, one.predicted_trace, 1e-9 * one.predicted_trace) << seed << " N " << N;
      EXPECT_LT(l.residual, 1e-9 * l.Sigma_inf.cwiseAbs().maxCoeff());
    }
  }
}

TEST(Asymptotic, Errors) {
  const TabularMDP mdp = build_random_env({4, 2, 1.0, 0.05, 0.01, 0.8, 3});
  const Policy beh = Policy::uniform(4, 2);
  const FeatureMap f = canonical_features(4, 2);
  const AsymptoticModel low = build_asymptotic_model(mdp, beh, f, 1.0, 2);
  EXPECT_EQ(code_of([&] { lyapunov_amse(low); }), Errc::GainBelowThreshold);

  Vector q(4);
  q << 1.0, 1.0, 0.0, 2.0;
  EXPECT_EQ(code_of([&] { unique_optimal_policy(q, 2); }), Errc::NonUniqueOptimalPolicy);
  q[1] = 0.5;
  EXPECT_EQ(unique_optimal_policy(q, 2), (std::vector<std::size_t>{0, 1}));

  // every transition falls into state 0: pairs of state 1 are never visited
  RowMatrix k(4, 2);
  k << 1, 0, 1, 0, 1, 0, 1, 0;
  Vector r(4);
  r << 0.0, 1.0, 0.3, 0.2;
  const TabularMDP absorbing = build_tabular_mdp(k, r, 0.9, (Vector(2) << 0.5, 0.5).finished());
  EXPECT_EQ(code_of([&] { build_asymptotic_model(absorbing, Policy::uniform(2, 2), canonical_features(2, 2), 10.0, 1); }),
            Errc::NotErgodic);
  EXPECT_EQ(code_of([&] { build_asymptotic_model(mdp, beh, canonical_features(3, 2), 10.0, 1); }),
            Errc::DimensionMismatch);
}

TEST(Amse, EmpiricalCurve) {
  const std::vector<std::uint64_t> steps{10, 20};
  const std::vector<std::vector<double>> mse{{1.0, 2.0}, {3.0, 4.0}};
  const AmseCurve c = empirical_amse(steps, mse);
  EXPECT_DOUBLE_EQ(c.value[0], 20.0);
  EXPECT_DOUBLE_EQ(c.value[1], 60.0);
  EXPECT_DOUBLE_EQ(c.std_error[0], 10.0 * std::sqrt(2.0) / std::sqrt(2.0));
  EXPECT_EQ(code_of([&] { empirical_amse(steps, {}); }), Errc::EmptySeries);
  EXPECT_EQ(code_of([&] { empirical_amse({}, {{}}); }), Errc::EmptySeries);
  EXPECT_EQ(code_of([&] { empirical_amse(steps, {{1.0}}); }), Errc::DimensionMismatch);
  EXPECT_DOUBLE_EQ(mse_to_optimal((Vector(2) << 1, 2).finished(), (Vector(2) << 0, 0).finished()), 5.0);
  EXPECT_EQ(code_of([&] { mse_to_optimal(Vector::Zero(2), Vector::Zero(3)); }), Errc::DimensionMismatch);
}

TEST(Bias, WorkerInvariantAndConsistent) {
  const TabularMDP mdp = build_random_env({5, 2, 1.0, 0.02, 0.01, 0.8, 6});
  const FeatureMap f = canonical_features(5, 2);
  AgentConfig c;
  c.variant = Variant::TwoRA;
  c.copies = 3;
  c.lr = {0.5, 1e5, 1, DecayIndex::PerStep};
  c.rho = {0.25, 1.0, RhoMode::Constant};
  const AgentFactory fac = [&](RngStream& r) { return make_agent(c, 10, 0.8, {}, r); };
  BiasQuery q;
  q.pair = 0;
  q.next_state = 1;
  q.snapshot = 2000;
  q.rho = 0.25;
  q.num_runs = 120;
  const BiasReport a = measure_bias(fac, mdp, Policy::uniform(5, 2), f, q, RngStream(1, "b"));
  q.workers = 3;
  const BiasReport b = measure_bias(fac, mdp, Policy::uniform(5, 2), f, q, RngStream(1, "b"));
  EXPECT_EQ(a.bias, b.bias);
  EXPECT_EQ(a.bias_se, b.bias_se);
  EXPECT_EQ(a.runs, 120u);
  EXPECT_NEAR(a.bias, a.reference - a.estimator_mean, 1e-12);
  EXPECT_DOUBLE_EQ(a.band_high, 0.5 * 0.8);
  EXPECT_GE(a.membership_freq, 0.0);
  EXPECT_LE(a.membership_freq, 1.0);
  q.num_runs = kMinBiasRuns - 1;
  EXPECT_EQ(code_of([&] { measure_bias(fac, mdp, Policy::uniform(5, 2), f, q, RngStream(1, "b")); }),
            Errc::InsufficientRuns);
  EXPECT_EQ(bias_csv_header(), "method,N,rho,n,bias,se,band_hi,membership_freq");
  const std::string row = bias_csv_row("twora", 3, 0.25, 2000, a);
  EXPECT_EQ(row.rfind("twora,3,0.25,2000,", 0), 0u);
}
