#include "revrl/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "revrl/io.hpp"

namespace revrl {

using nlohmann::json;

namespace {

template <typename T>
json nullable(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

std::optional<double> as_optional_number(const json& v, const std::string& key) {
  if (v.is_null()) return std::nullopt;
  return as_number(v, key);
}

std::int64_t as_integer(const json& v, const std::string& key) {
  const double d = as_number(v, key);
  if (d != std::floor(d) || std::abs(d) > 9.0e15) throw ConfigError(key, "expected an integer");
  return static_cast<std::int64_t>(d);
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

int as_int(const json& v, const std::string& key) {
  const auto i = as_integer(v, key);
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) {
    throw ConfigError(key, "value out of range");
  }
  return static_cast<int>(i);
}

}  // namespace

json agent_to_json(const AgentConfig& cfg) {
  json j = json::object();
  j["algorithm"] = std::string(to_string(cfg.algorithm));
  j["use_precedence"] = cfg.use_precedence;
  j["use_threshold_penalty"] = cfg.use_threshold_penalty;
  j["use_rollback"] = cfg.use_rollback;
  j["alpha"] = cfg.alpha;
  j["gamma"] = cfg.gamma;
  j["epsilon"] = cfg.epsilon;
  j["q_init"] = cfg.q_init;
  j["horizon_K"] = nullable(cfg.horizon_K);
  j["ema_rate"] = nullable(cfg.ema_rate);
  j["penalty_weight"] = nullable(cfg.penalty_weight);
  j["phi_init"] = nullable(cfg.phi_init);
  j["threshold"] = nullable(cfg.threshold);
  j["penalty_factor"] = nullable(cfg.penalty_factor);
  j["threshold_on_penalized_target"] = cfg.threshold_on_penalized_target;
  j["tie_break"] = std::string(to_string(cfg.tie_break));
  j["rollback_scope"] = std::string(to_string(cfg.rollback_scope));
  return j;
}

json experiment_to_json(const ExperimentConfig& cfg) {
  json j = agent_to_json(cfg.agent);
  j["env"] = std::string(to_string(cfg.env));
  j["episodes"] = cfg.episodes;
  j["step_limit"] = nullable(cfg.step_limit);
  j["base_seed"] = cfg.base_seed;
  j["continual"] = cfg.continual;
  return j;
}

ExperimentConfig config_from_json(const json& doc, ExperimentConfig base) {
  if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
  ExperimentConfig cfg = std::move(base);
  AgentConfig& a = cfg.agent;

  for (const auto& [key, v] : doc.items()) {
    if (v.is_object() || v.is_array()) throw ConfigError(key, "nested values are not allowed");

    if (key == "algorithm") a.algorithm = parse_algorithm(as_string(v, key));
    else if (key == "use_precedence") a.use_precedence = as_bool(v, key);
    else if (key == "use_threshold_penalty") a.use_threshold_penalty = as_bool(v, key);
    else if (key == "use_rollback") a.use_rollback = as_bool(v, key);
    else if (key == "alpha") a.alpha = as_number(v, key);
    else if (key == "gamma") a.gamma = as_number(v, key);
    else if (key == "epsilon") a.epsilon = as_number(v, key);
    else if (key == "q_init") a.q_init = as_number(v, key);
    else if (key == "horizon_K") a.horizon_K = v.is_null() ? std::nullopt : std::optional(as_integer(v, key));
    else if (key == "ema_rate") a.ema_rate = as_optional_number(v, key);
    else if (key == "penalty_weight") a.penalty_weight = as_optional_number(v, key);
    else if (key == "phi_init") a.phi_init = as_optional_number(v, key);
    else if (key == "threshold") a.threshold = as_optional_number(v, key);
    else if (key == "penalty_factor") a.penalty_factor = as_optional_number(v, key);
    else if (key == "threshold_on_penalized_target") a.threshold_on_penalized_target = as_bool(v, key);
    else if (key == "tie_break") a.tie_break = parse_tie_break(as_string(v, key));
    else if (key == "rollback_scope") a.rollback_scope = parse_rollback_scope(as_string(v, key));
    else if (key == "env") {
      try {
        cfg.env = parse_env_kind(as_string(v, key));
      } catch (const std::invalid_argument& e) {
        if (dynamic_cast<const ConfigError*>(&e)) throw;
        throw ConfigError(key, e.what());
      }
    } else if (key == "episodes") cfg.episodes = as_int(v, key);
    else if (key == "step_limit") cfg.step_limit = v.is_null() ? std::nullopt : std::optional(as_int(v, key));
    else if (key == "base_seed") {
      const auto s = as_integer(v, key);
      if (s < 0) throw ConfigError(key, "must be >= 0");
      cfg.base_seed = static_cast<std::uint64_t>(s);
    } else if (key == "continual") cfg.continual = as_bool(v, key);
    else if (key == "output_path") cfg.output_path = as_string(v, key);
    else throw ConfigError(key, "unknown key");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", path.string() + ": " + e.what());
  }
  return config_from_json(doc, std::move(base));
}

ExperimentConfig preset_config(std::string_view name, EnvKind default_env) {
  EnvKind env = default_env;
  std::string_view preset = name;
  if (const auto dash = name.rfind('-'); dash != std::string_view::npos) {
    try {
      env = parse_env_kind(name.substr(dash + 1));
      preset = name.substr(0, dash);
    } catch (const std::invalid_argument&) {
      // Not an environment suffix; treat the whole string as the preset.
    }
  }
  ExperimentConfig cfg;
  cfg.env = env;
  cfg.agent = make_preset(parse_preset(preset), env);
  return cfg;
}

std::string dump_preset(std::string_view name, EnvKind default_env) {
  return experiment_to_json(preset_config(name, default_env)).dump(2) + "\n";
}

json parse_overrides(const std::vector<std::string>& assignments) {
  json out = json::object();
  for (const auto& item : assignments) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("set", "expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    if (out.contains(key) && out[key] != value) {
      throw ConfigError(key, "conflicting overrides (" + out[key].dump() + " vs " + value.dump() + ")");
    }
    out[key] = value;
  }
  return out;
}

}  // namespace revrl
