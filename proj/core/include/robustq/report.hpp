#pragma once

#include "robustq/format.hpp"
#include "robustq/harness.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace robustq {

struct SummaryRow {
  std::string agent;
  std::string metric;
  std::uint64_t step = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_mean = 0.0;
};

/// Mean, sample standard deviation and standard error per (agent, metric,
/// step), agents in order of first appearance.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

struct HitSummary {
  std::string agent;
  std::size_t runs = 0;
  std::size_t not_solved = 0;
  /// Over solved runs only.
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_mean = 0.0;
};

std::vector<HitSummary> summarize_hits(const std::vector<RunRecord>& records);

std::string runs_csv(const std::vector<RunRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string hit_times_csv(const std::vector<RunRecord>& records);
std::string hit_summary_csv(const std::vector<HitSummary>& rows);
std::string digests_csv(const std::vector<RunRecord>& records);

/// Inverse of runs_csv (digests and hit times are not recovered).
/// Throws Error{ParseError, IoError}.
std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path);

struct PlotOptions {
  bool log_y = true;
  /// Plot step * mean instead of the mean.
  bool scale_by_step = false;
  std::string title;
  std::string y_label;
};

/// Static SVG of mean curves (one per agent) for `metric`.
std::string render_svg(const std::vector<SummaryRow>& rows, const std::string& metric, const PlotOptions& options);

struct EmitOptions {
  bool svg = true;
  bool log_y = true;
};

/// Writes runs.csv, summary.csv, digests.csv, hit_times.csv and
/// hit_summary.csv for episodic runs, and SVG plots. Returns the written
/// paths. Throws Error{IoError, ValidationError}.
std::vector<std::filesystem::path> emit_results(const std::vector<RunRecord>& records,
                                                const std::filesystem::path& out_dir,
                                                const EmitOptions& options = {});

/// SVG plots only, from already-aggregated rows.
std::vector<std::filesystem::path> emit_plots(const std::vector<SummaryRow>& rows, const std::filesystem::path& out_dir,
                                              bool log_y);

}  // namespace robustq
