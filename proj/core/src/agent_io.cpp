#include "robustq/agent_io.hpp"

#include "robustq/error.hpp"

#include <json.hpp>

namespace robustq {

using nlohmann::json;

namespace {

std::string_view decay_name(DecayIndex d) { return d == DecayIndex::PerStep ? "step" : "episode"; }

}  // namespace

std::string agent_to_json(const AgentState& s) {
  json doc;
  doc["variant"] = variant_name(s.variant);
  doc["discount"] = s.discount;
  json thetas = json::array();
  for (const Vector& th : s.thetas) thetas.push_back(std::vector<double>(th.data(), th.data() + th.size()));
  doc["thetas"] = std::move(thetas);
  doc["step"] = s.step;
  doc["episode"] = s.episode;
  doc["lr"] = {{"alpha0", s.lr.alpha0},
               {"w_alpha", s.lr.w_alpha},
               {"copies", s.lr.copies},
               {"decay", decay_name(s.lr.decay)}};
  doc["rho"] = {{"rho0", s.rho.rho0}, {"w_rho", s.rho.w_rho}, {"mode", rho_mode_name(s.rho.mode)}};
  doc["snapshots"] = s.snapshots;
  json hist = json::array();
  for (const Increment& inc : s.history) hist.push_back({inc.pair, inc.coef});
  doc["history"] = std::move(hist);
  doc["history_head"] = s.history_head;
  doc["history_size"] = s.history_size;
  doc["pi_star"] = s.pi_star;
  return doc.dump() + "\n";
}

AgentState agent_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    AgentState s;
    s.variant = parse_variant(doc.at("variant").get<std::string>());
    s.discount = doc.at("discount").get<double>();
    for (const auto& th : doc.at("thetas")) {
      const auto v = th.get<std::vector<double>>();
      s.thetas.emplace_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    if (s.thetas.empty()) throw Error(Errc::ParseError, "agent snapshot has no parameters");
    for (const Vector& th : s.thetas)
      if (th.size() != s.thetas.front().size())
        throw Error(Errc::DimensionMismatch, "agent snapshot copies differ in dimension");
    s.step = doc.at("step").get<std::uint64_t>();
    s.episode = doc.at("episode").get<std::uint64_t>();
    const json& lr = doc.at("lr");
    s.lr.alpha0 = lr.at("alpha0").get<double>();
    s.lr.w_alpha = lr.at("w_alpha").get<double>();
    s.lr.copies = lr.at("copies").get<std::size_t>();
    s.lr.decay = lr.at("decay").get<std::string>() == "step" ? DecayIndex::PerStep : DecayIndex::PerEpisode;
    const json& rho = doc.at("rho");
    s.rho.rho0 = rho.at("rho0").get<double>();
    s.rho.w_rho = rho.at("w_rho").get<double>();
    s.rho.mode = parse_rho_mode(rho.at("mode").get<std::string>());
    s.snapshots = doc.at("snapshots").get<std::size_t>();
    for (const auto& h : doc.at("history"))
      s.history.push_back(Increment{h.at(0).get<std::size_t>(), h.at(1).get<double>()});
    s.history_head = doc.at("history_head").get<std::size_t>();
    s.history_size = doc.at("history_size").get<std::size_t>();
    s.pi_star = doc.at("pi_star").get<std::vector<std::size_t>>();
    refresh_average(s);
    return s;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
}

}  // namespace robustq
