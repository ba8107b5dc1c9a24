#include "robustq/error.hpp"
#include "robustq/mdp_io.hpp"
#include "robustq/report.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace robustq;

namespace {

RunRecord record(std::uint64_t seed, const std::string& agent, std::vector<double> values,
                 std::optional<std::uint64_t> hit = std::nullopt, bool episodic = false) {
  RunRecord r;
  r.config_hash = 0xabcdef0123456789ULL;
  r.seed = seed;
  r.agent = agent;
  MetricSeries m{"mse", {}, std::move(values)};
  for (std::size_t i = 0; i < m.values.size(); ++i) m.steps.push_back(100 * (i + 1));
  r.metrics.push_back(m);
  r.episodic = episodic;
  r.hit_episode = hit;
  r.digest = seed * 31 + agent.size();
  r.wall_seconds = 0.123 * static_cast<double>(seed);
  return r;
}

std::filesystem::path tmp(const std::string& name) {
  const auto p = std::filesystem::path(ROBUSTQ_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Report, SummaryStatistics) {
  const std::vector<RunRecord> recs{record(0, "a", {1.0, 0.1}), record(1, "a", {3.0, 0.3}),
                                    record(2, "a", {8.0, 0.2}), record(0, "b", {5.0, 1.0 / 3.0})};
  const auto rows = summarize(recs);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].agent, "a");
  EXPECT_EQ(rows[0].step, 100u);
  EXPECT_EQ(rows[0].count, 3u);
  EXPECT_DOUBLE_EQ(rows[0].mean, 4.0);
  // sample variance of {1, 3, 8} is 13
  EXPECT_NEAR(rows[0].stddev, std::sqrt(13.0), 1e-12);
  EXPECT_NEAR(rows[0].stderr_mean, std::sqrt(13.0 / 3.0), 1e-12);
  EXPECT_EQ(rows[3].agent, "b");
  EXPECT_EQ(rows[3].count, 1u);
  EXPECT_EQ(rows[3].stddev, 0.0);
}

TEST(Report, RunsCsvRoundTrip) {
  const std::vector<RunRecord> recs{record(0, "a", {1.0, 0.1}), record(0, "b", {1.0 / 3.0, 1e-300}),
                                    record(1, "a", {3.0, -2.5})};
  const std::string csv = runs_csv(recs);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "config_hash,seed,agent,step,metric_name,value");
  EXPECT_NE(csv.find("abcdef0123456789,0,a,100,mse,1\n"), std::string::npos);
  const auto path = tmp("roundtrip") / "runs.csv";
  write_text_file(path, csv);
  const auto back = read_runs_csv(path);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].agent, recs[i].agent);
    EXPECT_EQ(back[i].seed, recs[i].seed);
    EXPECT_EQ(back[i].config_hash, recs[i].config_hash);
    EXPECT_EQ(back[i].metrics[0].steps, recs[i].metrics[0].steps);
    EXPECT_EQ(back[i].metrics[0].values, recs[i].metrics[0].values);  // %.17g is exact
  }
  EXPECT_EQ(runs_csv(back), csv);
}

TEST(Report, ReadRejectsMalformed) {
  const auto dir = tmp("malformed");
  write_text_file(dir / "a.csv", "seed,agent\n");
  write_text_file(dir / "b.csv", "config_hash,seed,agent,step,metric_name,value\n00,0,a,1,mse\n");
  write_text_file(dir / "c.csv", "config_hash,seed,agent,step,metric_name,value\n00,0,a,1,mse,abc\n");
  for (const char* f : {"a.csv", "b.csv", "c.csv"}) {
    try {
      read_runs_csv(dir / f);
      ADD_FAILURE() << f;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::ParseError) << f;
    }
  }
  EXPECT_THROW(read_runs_csv(dir / "missing.csv"), Error);
}

TEST(Report, HitSummaryExcludesNotSolved) {
  const std::vector<RunRecord> recs{record(0, "a", {1}, 100, true), record(1, "a", {1}, std::nullopt, true),
                                    record(2, "a", {1}, 300, true)};
  const auto hs = summarize_hits(recs);
  ASSERT_EQ(hs.size(), 1u);
  EXPECT_EQ(hs[0].runs, 3u);
  EXPECT_EQ(hs[0].not_solved, 1u);
  EXPECT_DOUBLE_EQ(hs[0].mean, 200.0);
  EXPECT_NEAR(hs[0].stddev, std::sqrt(20000.0), 1e-9);
  const std::string csv = hit_times_csv(recs);
  EXPECT_NE(csv.find(",1,a,NotSolved\n"), std::string::npos);
  EXPECT_NE(hit_summary_csv(hs).find("a,3,2,1,200,"), std::string::npos);
}

TEST(Report, EmitIsByteStable) {
  const std::vector<RunRecord> recs{record(0, "a", {1.0, 0.5}), record(0, "b<x>", {2.0, 0.25}),
                                    record(1, "a", {3.0, 0.4}), record(1, "b<x>", {2.5, 0.2})};
  const auto d1 = tmp("emit1"), d2 = tmp("emit2");
  const auto p1 = emit_results(recs, d1);
  auto later = recs;
  for (auto& r : later) r.wall_seconds *= 7;  // timing never reaches the files
  const auto p2 = emit_results(later, d2);
  ASSERT_EQ(p1.size(), p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    EXPECT_EQ(p1[i].filename(), p2[i].filename());
    EXPECT_EQ(read_text_file(p1[i]), read_text_file(p2[i])) << p1[i];
  }
  EXPECT_TRUE(std::filesystem::exists(d1 / "runs.csv"));
  EXPECT_TRUE(std::filesystem::exists(d1 / "summary.csv"));
  EXPECT_TRUE(std::filesystem::exists(d1 / "digests.csv"));
  EXPECT_TRUE(std::filesystem::exists(d1 / "mse.svg"));
  EXPECT_FALSE(std::filesystem::exists(d1 / "hit_times.csv"));
}

TEST(Report, SvgEscapesAndDrawsEveryAgent) {
  const std::vector<RunRecord> recs{record(0, "a&b", {1.0, 0.5, 0.1}), record(0, "c", {2.0, 1.0, 0.3})};
  const std::string svg = render_svg(summarize(recs), "mse", {true, true, "n * mse", "n mse"});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("a&amp;b"), std::string::npos);
  std::size_t lines = 0;
  for (std::size_t at = svg.find("<polyline"); at != std::string::npos; at = svg.find("<polyline", at + 1)) ++lines;
  EXPECT_EQ(lines, 2u);
}
