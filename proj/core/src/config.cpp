#include "robustq/config.hpp"

#include "robustq/error.hpp"
#include "robustq/mdp_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <set>

namespace robustq {

using nlohmann::json;

namespace {

struct Diagnostics {
  std::vector<std::string> unknown;
  std::vector<std::string> invalid;

  void bad(const std::string& path, const std::string& what) { invalid.push_back(path + ": " + what); }
};

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
  return out;
}

// Typed, key-tracking view of one JSON object.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path, Diagnostics& diag) : obj_(obj), path_(std::move(path)), diag_(diag) {}
  ObjectReader(const ObjectReader&) = delete;

  ~ObjectReader() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) diag_.unknown.push_back(where(key));
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.is_object() && obj_.contains(key);
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* raw(const std::string& key) { return has(key) ? &obj_.at(key) : nullptr; }

  void require(const std::string& key) {
    if (!has(key)) diag_.bad(where(key), "required field is missing");
  }

  void number(const std::string& key, double& out) {
    if (const json* v = raw(key)) {
      if (v->is_number() && std::isfinite(v->get<double>()))
        out = v->get<double>();
      else
        diag_.bad(where(key), "expected a finite number");
    }
  }

  template <class Int>
  void count(const std::string& key, Int& out) {
    if (const json* v = raw(key)) {
      if (v->is_number_unsigned()) {
        out = static_cast<Int>(v->get<std::uint64_t>());
      } else if (v->is_number_float() && v->get<double>() >= 0.0 && v->get<double>() < 1.8e19 &&
                 std::floor(v->get<double>()) == v->get<double>()) {
        out = static_cast<Int>(v->get<double>());
      } else {
        diag_.bad(where(key), "expected a non-negative integer");
      }
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = raw(key)) {
      if (v->is_boolean())
        out = v->get<bool>();
      else
        diag_.bad(where(key), "expected true or false");
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = raw(key)) {
      if (v->is_string())
        out = v->get<std::string>();
      else
        diag_.bad(where(key), "expected a string");
    }
  }

  template <std::size_t K, class T>
  void array(const std::string& key, std::array<T, K>& out) {
    if (const json* v = raw(key)) {
      if (!v->is_array() || v->size() != K) {
        diag_.bad(where(key), "expected an array of " + std::to_string(K) + " numbers");
        return;
      }
      for (std::size_t i = 0; i < K; ++i) {
        const json& e = (*v)[i];
        if (!e.is_number() || (std::is_integral_v<T> && !e.is_number_unsigned())) {
          diag_.bad(where(key), "element " + std::to_string(i) + " has the wrong type");
          return;
        }
        out[i] = e.get<T>();
      }
    }
  }

  /// Marks every key as read; used once the object is already rejected.
  void skip_rest() {
    for (const auto& [key, value] : obj_.items()) seen_.insert(key);
  }

  Diagnostics& diag() { return diag_; }

 private:
  const json& obj_;
  std::string path_;
  Diagnostics& diag_;
  std::set<std::string> seen_;
};

bool expect_object(const json& v, const std::string& path, Diagnostics& diag) {
  if (v.is_object()) return true;
  diag.bad(path, "expected an object");
  return false;
}

// ---------------------------------------------------------------------------

void read_environment(const json& v, EnvironmentConfig& env, Diagnostics& diag) {
  if (!expect_object(v, "environment", diag)) return;
  ObjectReader r(v, "environment", diag);
  std::string type;
  r.require("type");
  r.string("type", type);
  double discount = std::nan("");
  r.require("discount");
  r.number("discount", discount);
  if (r.has("discount") && !(discount > 0.0 && discount < 1.0)) diag.bad("environment.discount", "must lie in (0, 1)");

  if (type == "baird") {
    env.kind = EnvironmentKind::Baird;
    BairdSpec& b = env.baird;
    b.discount = discount;
    r.number("reward_low", b.reward_low);
    r.number("reward_high", b.reward_high);
    r.count("seed", b.seed);
    if (!(b.reward_low <= b.reward_high)) diag.bad("environment.reward_low", "must not exceed reward_high");
    if (const json* f = r.raw("features")) {
      if (f->is_string() && f->get<std::string>() == "canonical") {
        b.feature_mode = BairdFeatureMode::Canonical;
      } else if (f->is_array() && !f->empty() && (*f)[0].is_array()) {
        const std::size_t rows = f->size();
        const std::size_t cols = (*f)[0].size();
        Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        bool ok = cols == kBairdStates * kBairdActions;
        for (std::size_t i = 0; ok && i < rows; ++i) {
          ok = (*f)[i].is_array() && (*f)[i].size() == cols;
          for (std::size_t j = 0; ok && j < cols; ++j) {
            ok = (*f)[i][j].is_number();
            if (ok) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*f)[i][j].get<double>();
          }
        }
        if (ok) {
          b.feature_mode = BairdFeatureMode::Custom;
          b.custom_features = m;
        } else {
          diag.bad("environment.features", "expected a d x 12 numeric matrix");
        }
      } else {
        diag.bad("environment.features", "expected \"canonical\" or a d x 12 matrix");
      }
    }
  } else if (type == "random-env") {
    env.kind = EnvironmentKind::RandomEnv;
    RandomEnvSpec& e = env.random_env;
    e.discount = discount;
    r.count("num_states", e.num_states);
    r.count("num_actions", e.num_actions);
    r.number("dirichlet_alpha", e.dirichlet_alpha);
    r.number("q", e.q);
    r.number("p", e.p);
    r.count("seed", e.seed);
    if (e.num_states < 1) diag.bad("environment.num_states", "must be >= 1");
    if (e.num_actions < 1) diag.bad("environment.num_actions", "must be >= 1");
    if (!(e.dirichlet_alpha > 0.0)) diag.bad("environment.dirichlet_alpha", "must be positive");
    if (!(e.p >= 0.0 && e.p < e.q)) diag.bad("environment.p", "requires 0 <= p < q");
  } else if (type == "cartpole") {
    env.kind = EnvironmentKind::CartPole;
    CartPoleSpec& c = env.cartpole;
    c.discount = discount;
    r.number("epsilon", c.epsilon);
    r.count("train_step_cap", c.train_step_cap);
    r.array("bins", c.discretizer.bins);
    r.array("low", c.discretizer.low);
    r.array("high", c.discretizer.high);
    if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) diag.bad("environment.epsilon", "must lie in [0, 1]");
    if (c.train_step_cap < 1) diag.bad("environment.train_step_cap", "must be >= 1");
    for (std::size_t i = 0; i < 4; ++i) {
      if (c.discretizer.bins[i] < 1) diag.bad("environment.bins", "every dimension needs >= 1 bin");
      if (!(c.discretizer.low[i] < c.discretizer.high[i])) diag.bad("environment.low", "low must be below high");
    }
  } else if (r.has("type")) {
    diag.bad("environment.type", "expected \"baird\", \"random-env\" or \"cartpole\", got \"" + type + "\"");
    r.skip_rest();
  }
}

bool scaled_by_copies(Variant v) {
  return v == Variant::Maxmin || v == Variant::Averaged || v == Variant::TwoRA || v == Variant::TwoRALinearized;
}

void read_init(const json& v, const std::string& path, InitSpec& init, Diagnostics& diag) {
  if (!expect_object(v, path, diag)) return;
  ObjectReader r(v, path, diag);
  std::string mode = "zero";
  r.string("mode", mode);
  r.number("low", init.low);
  r.number("high", init.high);
  r.boolean("identical", init.identical);
  if (mode == "zero") {
    init.mode = InitMode::Zero;
  } else if (mode == "uniform") {
    init.mode = InitMode::Uniform;
    if (!(init.low <= init.high)) diag.bad(path + ".low", "must not exceed high");
  } else if (mode == "values") {
    init.mode = InitMode::Values;
  } else {
    diag.bad(path + ".mode", "expected \"zero\", \"uniform\" or \"values\"");
  }
  if (const json* vals = r.raw("values")) {
    if (!vals->is_array()) {
      diag.bad(path + ".values", "expected an array of numbers");
    } else {
      init.values.resize(static_cast<Eigen::Index>(vals->size()));
      for (std::size_t i = 0; i < vals->size(); ++i) {
        if (!(*vals)[i].is_number()) {
          diag.bad(path + ".values", "expected an array of numbers");
          break;
        }
        init.values[static_cast<Eigen::Index>(i)] = (*vals)[i].get<double>();
      }
    }
  }
  if (init.mode == InitMode::Values && init.values.size() == 0)
    diag.bad(path + ".values", "required when mode is \"values\"");
}

AgentSpec read_agent(const json& v, const std::string& path, bool episodic, Diagnostics& diag) {
  AgentSpec spec;
  if (!expect_object(v, path, diag)) return spec;
  ObjectReader r(v, path, diag);
  std::string variant;
  r.require("variant");
  r.string("variant", variant);
  if (r.has("variant")) {
    try {
      spec.config.variant = parse_variant(variant);
    } catch (const Error&) {
      diag.bad(path + ".variant", "unknown variant \"" + variant + "\"");
    }
  }
  AgentConfig& c = spec.config;
  spec.id = std::string(variant_name(c.variant));
  r.string("id", spec.id);
  r.count("copies", c.copies);
  if (c.variant == Variant::Double) c.copies = 2;
  if (c.variant == Variant::Watkins) c.copies = 1;
  if (c.copies < 1) diag.bad(path + ".copies", "must be >= 1");

  r.number("alpha0", c.lr.alpha0);
  r.number("w_alpha", c.lr.w_alpha);
  c.lr.copies = scaled_by_copies(c.variant) ? c.copies : 1;
  r.count("lr_copies", c.lr.copies);
  c.lr.decay = episodic ? DecayIndex::PerEpisode : DecayIndex::PerStep;
  std::string decay;
  r.string("decay", decay);
  if (decay == "step") c.lr.decay = DecayIndex::PerStep;
  else if (decay == "episode") c.lr.decay = DecayIndex::PerEpisode;
  else if (!decay.empty()) diag.bad(path + ".decay", "expected \"step\" or \"episode\"");
  if (!(c.lr.alpha0 > 0.0)) diag.bad(path + ".alpha0", "must be positive");
  if (!(c.lr.w_alpha > 0.0)) diag.bad(path + ".w_alpha", "must be positive");
  if (c.lr.copies < 1) diag.bad(path + ".lr_copies", "must be >= 1");

  r.number("rho0", c.rho.rho0);
  r.number("w_rho", c.rho.w_rho);
  std::string mode;
  r.string("rho_mode", mode);
  if (!mode.empty()) {
    try {
      c.rho.mode = parse_rho_mode(mode);
    } catch (const Error&) {
      diag.bad(path + ".rho_mode", "expected \"linear\", \"quadratic\" or \"constant\"");
    }
  }
  if (!(c.rho.rho0 >= 0.0)) diag.bad(path + ".rho0", "must be non-negative");
  if (!(c.rho.w_rho > 0.0)) diag.bad(path + ".w_rho", "must be positive");
  if (c.variant != Variant::TwoRA && c.rho.rho0 != 0.0)
    diag.bad(path + ".rho0", "only the twora variant uses a rho schedule");
  if (c.variant == Variant::TwoRALinearized)
    diag.bad(path + ".variant", "the linearized recursion is driven by the amse section, not the agent list");

  if (const json* init = r.raw("init")) read_init(*init, path + ".init", spec.init, diag);
  return spec;
}

void read_protocol(const json& v, EvalProtocol& p, Diagnostics& diag) {
  if (!expect_object(v, "protocol", diag)) return;
  ObjectReader r(v, "protocol", diag);
  r.count("eval_every", p.eval_every);
  r.count("eval_episodes", p.eval_episodes);
  r.count("eval_step_cap", p.eval_step_cap);
  r.number("solve_threshold", p.solve_threshold);
  r.count("max_episodes", p.max_episodes);
  if (p.eval_every < 1) diag.bad("protocol.eval_every", "must be >= 1");
  if (p.eval_episodes < 1) diag.bad("protocol.eval_episodes", "must be >= 1");
  if (p.eval_step_cap < 1) diag.bad("protocol.eval_step_cap", "must be >= 1");
  if (!(p.solve_threshold > 0.0)) diag.bad("protocol.solve_threshold", "must be positive");
  if (p.max_episodes < 1) diag.bad("protocol.max_episodes", "must be >= 1");
}

void read_bias(const json& v, BiasSection& b, Diagnostics& diag) {
  if (!expect_object(v, "bias", diag)) return;
  ObjectReader r(v, "bias", diag);
  r.count("pair", b.pair);
  r.count("next_state", b.next_state);
  r.count("snapshot", b.snapshot);
  r.number("rho", b.rho);
  r.count("runs", b.runs);
  if (!(b.rho >= 0.0)) diag.bad("bias.rho", "must be non-negative");
  if (b.snapshot < 1) diag.bad("bias.snapshot", "must be >= 1");
}

void read_amse(const json& v, AmseSection& a, Diagnostics& diag) {
  if (!expect_object(v, "amse", diag)) return;
  ObjectReader r(v, "amse", diag);
  r.count("copies", a.copies);
  r.number("gain_factor", a.gain_factor);
  r.number("offset", a.offset);
  r.count("seeds", a.seeds);
  r.count("steps", a.steps);
  if (a.copies < 1) diag.bad("amse.copies", "must be >= 1");
  if (!(a.gain_factor > 1.0)) diag.bad("amse.gain_factor", "must exceed 1 so that g > g0");
  if (!(a.offset >= 0.0)) diag.bad("amse.offset", "must be non-negative");
  if (a.seeds < 1) diag.bad("amse.seeds", "must be >= 1");
  if (a.steps < 1) diag.bad("amse.steps", "must be >= 1");
}

// ---------------------------------------------------------------------------

json init_to_json(const InitSpec& init) {
  const char* mode = init.mode == InitMode::Zero ? "zero" : init.mode == InitMode::Uniform ? "uniform" : "values";
  json j = {{"mode", mode}, {"low", init.low}, {"high", init.high}, {"identical", init.identical}};
  if (init.mode == InitMode::Values) j["values"] = std::vector<double>(init.values.begin(), init.values.end());
  return j;
}

json to_json(const ExperimentConfig& c) {
  json env;
  const EnvironmentConfig& e = c.environment;
  env["type"] = environment_kind_name(e.kind);
  env["discount"] = e.discount();
  switch (e.kind) {
    case EnvironmentKind::Baird:
      env["reward_low"] = e.baird.reward_low;
      env["reward_high"] = e.baird.reward_high;
      env["seed"] = e.baird.seed;
      if (e.baird.feature_mode == BairdFeatureMode::Canonical) {
        env["features"] = "canonical";
      } else {
        json rows = json::array();
        for (Eigen::Index i = 0; i < e.baird.custom_features.rows(); ++i) {
          json row = json::array();
          for (Eigen::Index j = 0; j < e.baird.custom_features.cols(); ++j) row.push_back(e.baird.custom_features(i, j));
          rows.push_back(row);
        }
        env["features"] = rows;
      }
      break;
    case EnvironmentKind::RandomEnv:
      env["num_states"] = e.random_env.num_states;
      env["num_actions"] = e.random_env.num_actions;
      env["dirichlet_alpha"] = e.random_env.dirichlet_alpha;
      env["q"] = e.random_env.q;
      env["p"] = e.random_env.p;
      env["seed"] = e.random_env.seed;
      break;
    case EnvironmentKind::CartPole:
      env["epsilon"] = e.cartpole.epsilon;
      env["train_step_cap"] = e.cartpole.train_step_cap;
      env["bins"] = e.cartpole.discretizer.bins;
      env["low"] = e.cartpole.discretizer.low;
      env["high"] = e.cartpole.discretizer.high;
      break;
  }

  json agents = json::array();
  for (const AgentSpec& a : c.agents) {
    agents.push_back({{"id", a.id},
                      {"variant", variant_name(a.config.variant)},
                      {"copies", a.config.copies},
                      {"alpha0", a.config.lr.alpha0},
                      {"w_alpha", a.config.lr.w_alpha},
                      {"lr_copies", a.config.lr.copies},
                      {"decay", a.config.lr.decay == DecayIndex::PerStep ? "step" : "episode"},
                      {"rho0", a.config.rho.rho0},
                      {"w_rho", a.config.rho.w_rho},
                      {"rho_mode", rho_mode_name(a.config.rho.mode)},
                      {"init", init_to_json(a.init)}});
  }

  json doc = {{"schema_version", c.schema_version},
              {"environment", env},
              {"agents", agents},
              {"num_seeds", c.num_seeds},
              {"master_seed", c.master_seed},
              {"metric_cadence", c.metric_cadence},
              {"output_dir", c.output_dir},
              {"plot", {{"svg", c.svg}, {"log_y", c.log_y}}}};
  if (e.kind == EnvironmentKind::CartPole) {
    doc["protocol"] = {{"eval_every", c.protocol.eval_every},
                       {"eval_episodes", c.protocol.eval_episodes},
                       {"eval_step_cap", c.protocol.eval_step_cap},
                       {"solve_threshold", c.protocol.solve_threshold},
                       {"max_episodes", c.protocol.max_episodes}};
  } else {
    doc["max_steps"] = c.max_steps;
  }
  if (c.bias)
    doc["bias"] = {{"pair", c.bias->pair},
                   {"next_state", c.bias->next_state},
                   {"snapshot", c.bias->snapshot},
                   {"rho", c.bias->rho},
                   {"runs", c.bias->runs}};
  if (c.amse)
    doc["amse"] = {{"copies", c.amse->copies},
                   {"gain_factor", c.amse->gain_factor},
                   {"offset", c.amse->offset},
                   {"seeds", c.amse->seeds},
                   {"steps", c.amse->steps}};
  return doc;
}

}  // namespace

std::string_view environment_kind_name(EnvironmentKind kind) noexcept {
  switch (kind) {
    case EnvironmentKind::Baird: return "baird";
    case EnvironmentKind::RandomEnv: return "random-env";
    case EnvironmentKind::CartPole: return "cartpole";
  }
  return "baird";
}

double EnvironmentConfig::discount() const {
  switch (kind) {
    case EnvironmentKind::Baird: return baird.discount;
    case EnvironmentKind::RandomEnv: return random_env.discount;
    case EnvironmentKind::CartPole: return cartpole.discount;
  }
  return 0.0;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void rehash(ExperimentConfig& config) {
  config.canonical_json = to_json(config).dump();
  config.hash = fnv1a64(config.canonical_json);
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  if (!doc.is_object()) throw Error(Errc::ParseError, "config root must be an object");

  Diagnostics diag;
  ExperimentConfig c;
  bool episodic = false;
  {
    ObjectReader r(doc, "", diag);
    r.count("schema_version", c.schema_version);
    if (c.schema_version != kSchemaVersion)
      diag.bad("schema_version", "unsupported version " + std::to_string(c.schema_version));

    r.require("environment");
    if (const json* env = r.raw("environment")) read_environment(*env, c.environment, diag);
    episodic = c.environment.kind == EnvironmentKind::CartPole;

    r.require("agents");
    if (const json* agents = r.raw("agents")) {
      if (!agents->is_array() || agents->empty()) {
        diag.bad("agents", "expected a non-empty array");
      } else {
        std::set<std::string> ids;
        for (std::size_t i = 0; i < agents->size(); ++i) {
          const std::string path = "agents[" + std::to_string(i) + "]";
          c.agents.push_back(read_agent((*agents)[i], path, episodic, diag));
          if (!ids.insert(c.agents.back().id).second)
            diag.bad(path + ".id", "duplicate agent id \"" + c.agents.back().id + "\"");
          else if (c.agents.back().id.find_first_of(",\"\n") != std::string::npos)
            diag.bad(path + ".id", "must not contain commas, quotes or newlines");
        }
      }
    }

    r.count("num_seeds", c.num_seeds);
    if (c.num_seeds < 1) diag.bad("num_seeds", "must be >= 1");
    r.count("master_seed", c.master_seed);
    c.metric_cadence = episodic ? 1 : 1000;
    r.count("metric_cadence", c.metric_cadence);
    if (c.metric_cadence < 1) diag.bad("metric_cadence", "must be >= 1");
    if (!episodic) {
      r.count("max_steps", c.max_steps);
      if (c.max_steps < 1) diag.bad("max_steps", "must be >= 1");
      if (r.has("protocol")) diag.bad("protocol", "only used by the cartpole environment");
    } else {
      if (r.has("max_steps")) diag.bad("max_steps", "cartpole runs are bounded by protocol.max_episodes");
      if (const json* p = r.raw("protocol")) read_protocol(*p, c.protocol, diag);
    }
    r.string("output_dir", c.output_dir);
    if (const json* plot = r.raw("plot")) {
      if (expect_object(*plot, "plot", diag)) {
        ObjectReader pr(*plot, "plot", diag);
        pr.boolean("svg", c.svg);
        pr.boolean("log_y", c.log_y);
      }
    }
    if (const json* b = r.raw("bias")) {
      c.bias.emplace();
      read_bias(*b, *c.bias, diag);
    }
    if (const json* a = r.raw("amse")) {
      c.amse.emplace();
      read_amse(*a, *c.amse, diag);
    }
  }

  if (!diag.unknown.empty()) throw Error(Errc::UnknownKey, "unknown keys: " + join(diag.unknown));
  if (!diag.invalid.empty()) throw Error(Errc::ValidationError, join(diag.invalid));
  rehash(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

}  // namespace robustq
