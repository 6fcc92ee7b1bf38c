// Flat JSON configuration documents. Every key is an AgentConfig or
// ExperimentConfig field name; anything else is rejected.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "revrl/agent.hpp"
#include "revrl/experiment.hpp"

namespace revrl {

/// All agent fields, unset optionals as null.
nlohmann::json agent_to_json(const AgentConfig& cfg);
/// Agent fields plus env, episodes, step_limit, base_seed and continual.
nlohmann::json experiment_to_json(const ExperimentConfig& cfg);

/// Applies the keys present in `doc` on top of `base` and validates the
/// result. Throws ConfigError naming the key on unknown keys, wrong types or
/// out-of-range values.
ExperimentConfig config_from_json(const nlohmann::json& doc, ExperimentConfig base = {});

/// Reads a config file. Throws IoError if it cannot be read, ConfigError on
/// parse or validation failures.
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Resolves "fullmodel-cliff", "Roll_Threshold-taxi", ... into a preset
/// experiment document. A bare preset name uses `default_env`.
ExperimentConfig preset_config(std::string_view name, EnvKind default_env);
std::string dump_preset(std::string_view name, EnvKind default_env = EnvKind::kCliffWalking);

/// Turns repeated "key=value" strings into a JSON object. Values are parsed
/// as JSON where possible, otherwise taken as strings. The same key given
/// twice with different values is a ConfigError.
nlohmann::json parse_overrides(const std::vector<std::string>& assignments);

}  // namespace revrl
