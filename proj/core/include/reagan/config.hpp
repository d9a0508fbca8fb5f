#pragma once

#include <string>

#include "reagan/experiment.hpp"

namespace reagan {

// Loads a TOML-style config file (sections, key = value, # comments,
// strings, ints, floats, bools, flat arrays) into an ExperimentSpec.
// Unknown keys, type mismatches, and invalid enum values raise ConfigError;
// split ratios are validated here.
ExperimentSpec load_config_file(const std::string& path);
ExperimentSpec parse_config_text(const std::string& text, const std::string& origin = "<config>");

} // namespace reagan
