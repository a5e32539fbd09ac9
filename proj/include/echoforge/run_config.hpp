#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "echoforge/echo.hpp"
#include "echoforge/nn/train.hpp"

namespace echoforge {

/// Everything needed to re-run one CLI invocation. `options` holds the
/// resolved subcommand flags (split, participant, epochs, ...).
struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::uint64_t seed = 42;
  SensingConfig sensing;
  nn::ModelSpec model = nn::ModelSpec::desk_scale();
  nn::TrainConfig train;
  nlohmann::json options = nlohmann::json::object();
};

nlohmann::json to_json(const SensingConfig& s);
SensingConfig sensing_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunConfig& rc);
/// Missing keys keep their defaults, so partial override files are accepted.
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const std::filesystem::path& path, const RunConfig& rc);

}  // namespace echoforge
