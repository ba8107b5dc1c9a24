// robustq: run experiments, solve MDPs, and check bias / AMSE predictions.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include "robustq/analysis.hpp"
#include "robustq/config.hpp"
#include "robustq/error.hpp"
#include "robustq/harness.hpp"
#include "robustq/lyapunov.hpp"
#include "robustq/mdp_io.hpp"
#include "robustq/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <thread>

namespace {

using namespace robustq;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int exit_code(const Error& e) {
  switch (e.code()) {
    case Errc::ParseError:
    case Errc::ValidationError:
    case Errc::UnknownKey: return kExitConfig;
    default: return kExitRuntime;
  }
}

std::size_t default_parallelism() { return std::max(1u, std::thread::hardware_concurrency()); }

void print_manifest(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << f.string() << '\n';
}

int cmd_run(const std::string& path, std::optional<std::size_t> seeds, std::size_t parallel,
            const std::string& out) {
  ExperimentConfig config = load_config(path);
  if (seeds) {
    if (*seeds < 1) throw Error(Errc::ValidationError, "--seeds must be >= 1");
    config.num_seeds = *seeds;
  }
  if (!out.empty()) config.output_dir = out;
  rehash(config);

  const auto start = std::chrono::steady_clock::now();
  const auto records = run_experiment(config, parallel);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  print_manifest(emit_results(records, config.output_dir, {config.svg, config.log_y}));

  for (const auto& h : summarize_hits(records))
    std::fprintf(stderr, "%-12s hit time %.2f +- %.2f over %zu solved, %zu not solved\n", h.agent.c_str(), h.mean,
                 h.stddev, h.runs - h.not_solved, h.not_solved);
  std::fprintf(stderr, "config %s: %zu runs in %.1f s\n", hash_hex(config.hash).c_str(), records.size(), wall);
  return 0;
}

int cmd_solve_q(const std::string& path, double tol) {
  const TabularMDP mdp = mdp_from_json(read_text_file(path));
  const Vector q = solve_optimal_q(mdp, tol);
  std::cout << "state,action,q\n";
  for (std::size_t s = 0; s < mdp.num_states(); ++s)
    for (std::size_t a = 0; a < mdp.num_actions(); ++a)
      std::cout << s << ',' << a << ',' << format_double(q[static_cast<Eigen::Index>(mdp.pair(s, a))]) << '\n';
  return 0;
}

int cmd_bias(const std::string& path, std::size_t parallel) {
  const ExperimentConfig config = load_config(path);
  if (!config.bias) throw Error(Errc::ValidationError, "bias: config has no \"bias\" section");
  std::string csv = bias_csv_header() + '\n';
  for (const AgentSpec& agent : config.agents) {
    const BiasReport r = run_bias(config, agent, parallel);
    csv += bias_csv_row(agent.id, agent.config.copies, config.bias->rho, config.bias->snapshot, r) + '\n';
    std::fprintf(stderr, "%-12s bias %+.6f (se %.6f) band [0, %.6f] membership %.3f\n", agent.id.c_str(), r.bias,
                 r.bias_se, r.band_high, r.membership_freq);
  }
  const auto file = std::filesystem::path(config.output_dir) / "bias.csv";
  write_text_file(file, csv);
  std::cout << csv;
  return 0;
}

int cmd_amse(const std::string& path, std::size_t parallel) {
  const ExperimentConfig config = load_config(path);
  if (!config.amse) throw Error(Errc::ValidationError, "amse: config has no \"amse\" section");
  const AmseSection& a = *config.amse;
  const MdpSetup setup = build_mdp_setup(config.environment);

  // g0 first, then the model at the requested gain.
  const double g0 = build_asymptotic_model(setup.mdp, setup.behavior, setup.features, 1.0, a.copies).g0;
  const AsymptoticModel model =
      build_asymptotic_model(setup.mdp, setup.behavior, setup.features, a.gain_factor * g0, a.copies);
  const LyapunovAmse predicted = lyapunov_amse(model);
  std::fprintf(stderr, "g0 %.6g, g %.6g, predicted %.10g, watkins %.10g, residual %.3g\n", model.g0, model.gain,
               predicted.predicted_trace, predicted.watkins_trace, predicted.residual);

  LinearizedRun run;
  run.seeds = a.seeds;
  run.steps = a.steps;
  run.offset = a.offset;
  run.cadence = std::max<std::uint64_t>(1, a.steps / 100);
  run.workers = parallel;
  const AmseCurve curve = linearized_amse_curve(setup, model, run, RngStream(config.master_seed, "amse"));

  std::string csv = amse_csv_header() + '\n';
  csv += amse_csv_row("watkins", 1, model.gain, a.steps, predicted.watkins_trace, std::nan("")) + '\n';
  csv += amse_csv_row("twora_linearized", a.copies, model.gain, curve.steps.back(), predicted.predicted_trace,
                      curve.value.back()) + '\n';
  std::string curve_csv = "n,n_mse,stderr\n";
  for (std::size_t j = 0; j < curve.steps.size(); ++j)
    curve_csv += std::to_string(curve.steps[j]) + ',' + format_double(curve.value[j]) + ',' +
                 format_double(curve.std_error[j]) + '\n';
  const std::filesystem::path dir(config.output_dir);
  write_text_file(dir / "amse.csv", csv);
  write_text_file(dir / "amse_curve.csv", curve_csv);
  std::cout << csv;
  return 0;
}

int cmd_plot(const std::string& path, const std::string& out, bool linear) {
  const auto records = read_runs_csv(path);
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(path).parent_path() : std::filesystem::path(out);
  print_manifest(emit_plots(summarize(records), dir, !linear));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust averaging Q-learning experiments"};
  app.require_subcommand(1);

  std::string config_path, mdp_path, runs_path, out_dir;
  std::optional<std::size_t> seeds;
  std::size_t parallel = default_parallelism();
  double tol = 1e-10;
  bool linear = false;

  auto* run = app.add_subcommand("run", "Train every configured agent on every seed and write CSV/SVG results");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seeds", seeds, "Override num_seeds");
  run->add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Override output_dir");

  auto* solve = app.add_subcommand("solve-q", "Print Q* of an MDP document");
  solve->add_option("mdp", mdp_path, "MDP file (JSON)")->required();
  solve->add_option("--tol", tol, "Value-iteration tolerance");

  auto* bias = app.add_subcommand("bias", "Measure estimation bias per configured agent");
  bias->add_option("config", config_path, "Experiment config with a bias section")->required();
  bias->add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);

  auto* amse = app.add_subcommand("amse", "Compare the Lyapunov AMSE prediction with the linearized recursion");
  amse->add_option("config", config_path, "Experiment config with an amse section")->required();
  amse->add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "Render SVG plots from runs.csv");
  plot->add_option("runs", runs_path, "runs.csv")->required();
  plot->add_option("--out", out_dir, "Output directory (default: next to runs.csv)");
  plot->add_flag("--linear-y", linear, "Linear y axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, seeds, parallel, out_dir);
    if (*solve) return cmd_solve_q(mdp_path, tol);
    if (*bias) return cmd_bias(config_path, parallel);
    if (*amse) return cmd_amse(config_path, parallel);
    if (*plot) return cmd_plot(runs_path, out_dir, linear);
  } catch (const Error& e) {
    std::fprintf(stderr, "robustq: %s\n", e.what());
    return exit_code(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "robustq: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
