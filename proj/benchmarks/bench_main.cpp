#include "robustq/agents.hpp"
#include "robustq/analysis.hpp"
#include "robustq/cartpole.hpp"
#include "robustq/environments.hpp"
#include "robustq/lyapunov.hpp"
#include "robustq/simulate.hpp"

#include <benchmark/benchmark.h>

using namespace robustq;

namespace {

// One agent update per iteration on the Baird MDP (trajectory sampling included).
void BM_AgentStep(benchmark::State& state, Variant variant, std::size_t copies) {
  const Environment env = build_baird({});
  const Policy beh = Policy::uniform(6, 2);
  AgentConfig c;
  c.variant = variant;
  c.copies = copies;
  c.lr = {0.01, 1e5, variant == Variant::Watkins || variant == Variant::Double ? 1 : copies, DecayIndex::PerStep};
  if (variant == Variant::TwoRA) c.rho = {0.5, 1e3, RhoMode::Quadratic};
  RunStreams st = run_streams(RngStream(1, "bench"), 0);
  InitSpec init;
  init.mode = InitMode::Uniform;
  AgentState agent = make_agent(c, 12, env.mdp.discount(), init, st.init);
  Trajectory traj(env.mdp, beh, st.env);
  for (auto _ : state) {
    update(agent, traj.next(), env.features, st.agent);
    benchmark::DoNotOptimize(agent.thetas[0].data());
  }
  state.SetItemsProcessed(state.iterations());
}

BENCHMARK_CAPTURE(BM_AgentStep, watkins, Variant::Watkins, 1);
BENCHMARK_CAPTURE(BM_AgentStep, double, Variant::Double, 2);
BENCHMARK_CAPTURE(BM_AgentStep, maxmin_10, Variant::Maxmin, 10);
BENCHMARK_CAPTURE(BM_AgentStep, averaged_10, Variant::Averaged, 10);
BENCHMARK_CAPTURE(BM_AgentStep, twora_10, Variant::TwoRA, 10);
BENCHMARK_CAPTURE(BM_AgentStep, twora_100, Variant::TwoRA, 100);

void BM_RobustTargetDense(benchmark::State& state) {
  const auto d = state.range(0);
  const FeatureMap f = FeatureMap::from_dense(Matrix::Random(d, 4), 4);
  const Vector th = Vector::Random(d);
  for (auto _ : state) benchmark::DoNotOptimize(robust_target(f, 0, th, 0.3, 0.9));
}
BENCHMARK(BM_RobustTargetDense)->Arg(4)->Arg(20)->Arg(100);

void BM_CartPoleStep(benchmark::State& state) {
  CartPoleState s{0.01, -0.02, 0.03, 0.01};
  std::size_t a = 0;
  for (auto _ : state) {
    const CartPoleStep out = cartpole_step(s, a);
    benchmark::DoNotOptimize(out.state.theta);
    a ^= 1u;
  }
}
BENCHMARK(BM_CartPoleStep);

void BM_Lyapunov(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix m = Matrix::Random(n, n) - static_cast<double>(n) * Matrix::Identity(n, n);
  const Matrix b = Matrix::Random(n, n);
  const Matrix q = b * b.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(solve_lyapunov_schur(m, q).data());
}
BENCHMARK(BM_Lyapunov)->Arg(8)->Arg(32)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_AsymptoticModel(benchmark::State& state) {
  const TabularMDP mdp = build_random_env({4, 2, 1.0, 0.01, 0.001, 0.8, 3});
  const Policy beh = Policy::uniform(4, 2);
  const FeatureMap f = canonical_features(4, 2);
  for (auto _ : state) {
    const AsymptoticModel m = build_asymptotic_model(mdp, beh, f, 120.0, 10);
    benchmark::DoNotOptimize(lyapunov_amse(m).predicted_trace);
  }
}
BENCHMARK(BM_AsymptoticModel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
