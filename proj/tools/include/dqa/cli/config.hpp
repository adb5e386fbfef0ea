#pragma once

// Flat `key = value` experiment configuration for the dqa tool.
//
//   # comment
//   n_nodes = 20
//   bit_depths = 1, 2, 3
//
// Unknown or repeated keys are errors. A run manifest (JSON) is also
// accepted wherever a config path is expected.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dqa/simkit.hpp"

namespace dqa::cli {

inline constexpr int kDefaultCovarianceSamples = 100'000;

struct CliConfig {
  simkit::ScenarioConfig scenario;
  int covariance_samples = kDefaultCovarianceSamples;  // R_kQ sample size for `analyze`
  int complexity_n_k = 0;                              // 0: largest neighborhood in the topology
};

CliConfig parse_config(std::istream& is);
CliConfig parse_config_text(std::string_view text);
CliConfig load_config(const std::filesystem::path& path);

std::vector<std::string> preset_names();
CliConfig preset(std::string_view name);

std::string to_config_text(const CliConfig& config);
nlohmann::ordered_json to_json(const CliConfig& config);
CliConfig config_from_json(const nlohmann::json& j);

}  // namespace dqa::cli
