#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "neuroperf/stepper.hpp"

namespace neuroperf {

struct OutputOptions {
  std::filesystem::path dir = "out";
  bool vtk = true;
  bool point_data = false;  // per-vertex values on a duplicated-vertex grid

  friend bool operator==(const OutputOptions&, const OutputOptions&) = default;
};

struct RunConfig {
  SimulationConfig sim;
  OutputOptions output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Flat `section.key = value [unit]` text. '#' starts a comment. Units are optional, but a
// unit that is given must match the key's fixed unit. Unknown, duplicate or missing required
// keys throw ConfigError naming the key; lexical problems throw ParseError. `time.dt` and
// `time.t_final` are required. The result is validated (SimulationConfig::validate).
// Relative mesh paths resolve against `base_dir`.
RunConfig parse_config_string(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig parse_config(const std::filesystem::path& path);

// Emits every key with %.17g values, so parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& config);

// Key, unit and one-line description for every accepted scalar key; indexed keys appear
// with the placeholder `N`.
struct ConfigKeyDoc {
  std::string_view key;
  std::string_view unit;
  std::string_view description;
};
std::span<const ConfigKeyDoc> config_key_docs();

}  // namespace neuroperf
