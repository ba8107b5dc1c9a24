#include "robustq/report.hpp"

#include "robustq/error.hpp"
#include "robustq/mdp_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace robustq {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_mean = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    m.stderr_mean = m.stddev / std::sqrt(static_cast<double>(v.size()));
  }
  return m;
}

std::vector<std::string> agent_order(const std::vector<RunRecord>& records) {
  std::vector<std::string> order;
  for (const auto& r : records)
    if (std::find(order.begin(), order.end(), r.agent) == order.end()) order.push_back(r.agent);
  return order;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fixed(double v, int digits = 2) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  // (agent rank, metric rank, step) -> values
  std::vector<std::string> agents = agent_order(records);
  std::vector<std::string> metrics;
  std::map<std::tuple<std::size_t, std::size_t, std::uint64_t>, std::vector<double>> groups;
  for (const auto& r : records) {
    const std::size_t ai = static_cast<std::size_t>(std::find(agents.begin(), agents.end(), r.agent) - agents.begin());
    for (const auto& m : r.metrics) {
      auto it = std::find(metrics.begin(), metrics.end(), m.name);
      if (it == metrics.end()) it = metrics.insert(metrics.end(), m.name);
      const std::size_t mi = static_cast<std::size_t>(it - metrics.begin());
      for (std::size_t k = 0; k < m.steps.size(); ++k) groups[{ai, mi, m.steps[k]}].push_back(m.values[k]);
    }
  }
  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, values] : groups) {
    const Moments mo = moments(values);
    rows.push_back({agents[std::get<0>(key)], metrics[std::get<1>(key)], std::get<2>(key), values.size(), mo.mean,
                    mo.stddev, mo.stderr_mean});
  }
  return rows;
}

std::vector<HitSummary> summarize_hits(const std::vector<RunRecord>& records) {
  std::vector<HitSummary> out;
  for (const std::string& agent : agent_order(records)) {
    HitSummary h;
    h.agent = agent;
    std::vector<double> hits;
    for (const auto& r : records) {
      if (r.agent != agent || !r.episodic) continue;
      ++h.runs;
      if (r.hit_episode)
        hits.push_back(static_cast<double>(*r.hit_episode));
      else
        ++h.not_solved;
    }
    if (h.runs == 0) continue;
    const Moments mo = moments(hits);
    h.mean = hits.empty() ? std::nan("") : mo.mean;
    h.stddev = mo.stddev;
    h.stderr_mean = mo.stderr_mean;
    out.push_back(h);
  }
  return out;
}

std::string runs_csv(const std::vector<RunRecord>& records) {
  std::string out = "config_hash,seed,agent,step,metric_name,value\n";
  for (const auto& r : records) {
    const std::string prefix = hash_hex(r.config_hash) + ',' + std::to_string(r.seed) + ',' + r.agent + ',';
    for (const auto& m : r.metrics)
      for (std::size_t k = 0; k < m.steps.size(); ++k)
        out += prefix + std::to_string(m.steps[k]) + ',' + m.name + ',' + format_double(m.values[k]) + '\n';
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "agent,metric_name,step,count,mean,std,stderr\n";
  for (const auto& r : rows)
    out += r.agent + ',' + r.metric + ',' + std::to_string(r.step) + ',' + std::to_string(r.count) + ',' +
           format_double(r.mean) + ',' + format_double(r.stddev) + ',' + format_double(r.stderr_mean) + '\n';
  return out;
}

std::string hit_times_csv(const std::vector<RunRecord>& records) {
  std::string out = "config_hash,seed,agent,hit_episode\n";
  for (const auto& r : records) {
    if (!r.episodic) continue;
    out += hash_hex(r.config_hash) + ',' + std::to_string(r.seed) + ',' + r.agent + ',' +
           (r.hit_episode ? std::to_string(*r.hit_episode) : std::string("NotSolved")) + '\n';
  }
  return out;
}

std::string hit_summary_csv(const std::vector<HitSummary>& rows) {
  std::string out = "agent,runs,solved,not_solved,mean,std,stderr\n";
  for (const auto& h : rows)
    out += h.agent + ',' + std::to_string(h.runs) + ',' + std::to_string(h.runs - h.not_solved) + ',' +
           std::to_string(h.not_solved) + ',' + format_double(h.mean) + ',' + format_double(h.stddev) + ',' +
           format_double(h.stderr_mean) + '\n';
  return out;
}

std::string digests_csv(const std::vector<RunRecord>& records) {
  std::string out = "config_hash,seed,agent,digest\n";
  for (const auto& r : records)
    out += hash_hex(r.config_hash) + ',' + std::to_string(r.seed) + ',' + r.agent + ',' + hash_hex(r.digest) + '\n';
  return out;
}

std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "config_hash,seed,agent,step,metric_name,value")
    throw Error(Errc::ParseError, path.string() + ": missing runs.csv header");
  std::vector<RunRecord> records;
  std::map<std::tuple<std::string, std::uint64_t, std::string>, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw Error(Errc::ParseError, path.string() + ":" + std::to_string(line_no) + ": expected 6 fields");
    try {
      const std::uint64_t hash = std::stoull(f[0], nullptr, 16);
      const std::uint64_t seed = std::stoull(f[1]);
      const auto key = std::make_tuple(f[0], seed, f[2]);
      auto it = index.find(key);
      if (it == index.end()) {
        RunRecord r;
        r.config_hash = hash;
        r.seed = seed;
        r.agent = f[2];
        records.push_back(std::move(r));
        it = index.emplace(key, records.size() - 1).first;
      }
      RunRecord& r = records[it->second];
      auto m = std::find_if(r.metrics.begin(), r.metrics.end(), [&](const MetricSeries& s) { return s.name == f[4]; });
      if (m == r.metrics.end()) m = r.metrics.insert(r.metrics.end(), MetricSeries{f[4], {}, {}});
      m->steps.push_back(std::stoull(f[3]));
      m->values.push_back(std::stod(f[5]));
    } catch (const std::logic_error&) {
      throw Error(Errc::ParseError, path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return records;
}

std::string render_svg(const std::vector<SummaryRow>& rows, const std::string& metric, const PlotOptions& opt) {
  constexpr double W = 720, H = 440, L = 80, R = 160, T = 40, B = 56;
  std::vector<std::string> agents;
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  for (const auto& r : rows) {
    if (r.metric != metric) continue;
    double y = opt.scale_by_step ? r.mean * static_cast<double>(r.step) : r.mean;
    if (opt.log_y && !(y > 0.0)) continue;
    if (!curves.count(r.agent)) agents.push_back(r.agent);
    curves[r.agent].emplace_back(static_cast<double>(r.step), y);
  }
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& [a, pts] : curves)
    for (const auto& [x, y] : pts) {
      const double yy = opt.log_y ? std::log10(y) : y;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, yy);
      y1 = std::max(y1, yy);
    }
  if (curves.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return T + (1.0 - ((opt.log_y ? std::log10(y) : y) - y0) / (y1 - y0)) * (H - T - B); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(W, 0) + "\" height=\"" + fixed(H, 0) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fixed(W / 2, 0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape_xml(opt.title) +
       "</text>\n";
  s += "<rect x=\"" + fixed(L) + "\" y=\"" + fixed(T) + "\" width=\"" + fixed(W - L - R) + "\" height=\"" +
       fixed(H - T - B) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0;
    const double fy = y0 + (y1 - y0) * k / 4.0;
    const double yv = opt.log_y ? std::pow(10.0, fy) : fy;
    s += "<text x=\"" + fixed(px(fx)) + "\" y=\"" + fixed(H - B + 18) + "\" text-anchor=\"middle\">" + tick_label(fx) +
         "</text>\n";
    s += "<text x=\"" + fixed(L - 6) + "\" y=\"" + fixed(py(yv) + 4) + "\" text-anchor=\"end\">" + tick_label(yv) +
         "</text>\n";
  }
  s += "<text x=\"" + fixed((W - R + L) / 2) + "\" y=\"" + fixed(H - 12) + "\" text-anchor=\"middle\">step</text>\n";
  s += "<text x=\"16\" y=\"" + fixed((H - B + T) / 2) + "\" transform=\"rotate(-90 16 " + fixed((H - B + T) / 2) +
       ")\" text-anchor=\"middle\">" + escape_xml(opt.y_label) + (opt.log_y ? " (log)" : "") + "</text>\n";
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (const auto& [x, y] : curves[agents[i]]) pts += fixed(px(x)) + ',' + fixed(py(y)) + ' ';
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const double ly = T + 16.0 * static_cast<double>(i) + 8;
    s += "<line x1=\"" + fixed(W - R + 12) + "\" y1=\"" + fixed(ly) + "\" x2=\"" + fixed(W - R + 32) + "\" y2=\"" +
         fixed(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fixed(W - R + 38) + "\" y=\"" + fixed(ly + 4) + "\">" + escape_xml(agents[i]) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::vector<std::filesystem::path> emit_plots(const std::vector<SummaryRow>& rows, const std::filesystem::path& out_dir,
                                              bool log_y) {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> metrics;
  for (const auto& r : rows)
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) metrics.push_back(r.metric);
  for (const auto& m : metrics) {
    const auto path = out_dir / (m + ".svg");
    write_text_file(path, render_svg(rows, m, {log_y, false, m, "mean " + m}));
    written.push_back(path);
    if (m == "mse") {
      const auto amse = out_dir / "amse.svg";
      write_text_file(amse, render_svg(rows, m, {log_y, true, "n * MSE", "n * mean mse"}));
      written.push_back(amse);
    }
  }
  return written;
}

std::vector<std::filesystem::path> emit_results(const std::vector<RunRecord>& records,
                                                const std::filesystem::path& out_dir, const EmitOptions& options) {
  if (records.empty()) throw Error(Errc::ValidationError, "emit_results needs at least one record");
  std::vector<std::filesystem::path> written;
  const auto put = [&](const char* name, const std::string& text) {
    const auto path = out_dir / name;
    write_text_file(path, text);
    written.push_back(path);
  };
  const auto rows = summarize(records);
  put("runs.csv", runs_csv(records));
  put("summary.csv", summary_csv(rows));
  put("digests.csv", digests_csv(records));
  if (std::any_of(records.begin(), records.end(), [](const RunRecord& r) { return r.episodic; })) {
    put("hit_times.csv", hit_times_csv(records));
    put("hit_summary.csv", hit_summary_csv(summarize_hits(records)));
  }
  if (options.svg) {
    auto plots = emit_plots(rows, out_dir, options.log_y);
    written.insert(written.end(), plots.begin(), plots.end());
  }
  return written;
}

}  // namespace robustq
