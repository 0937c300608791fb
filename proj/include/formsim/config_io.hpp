#pragma once

#include <string>

#include "formsim/engine.hpp"

namespace formsim {

// Parses a scenario document (JSON) from memory. Omitted optional blocks keep
// the ScenarioConfig defaults; unknown keys are rejected; agent numbers in the
// document (leaders) are 1-based. The returned config has passed validate().
// `origin` labels diagnostics, typically the file path.
ScenarioConfig parse_config(const std::string& text, const std::string& origin);

// parse_config over the contents of a file. Throws IoError when the file
// cannot be read.
ScenarioConfig load_config(const std::string& path);

// Serializes a config as a canonical document: every field written
// explicitly in a fixed order, so emit -> load -> emit reproduces the
// document byte for byte.
std::string emit_config(const ScenarioConfig& config);

// emit_config into a file, writing a temporary sibling first and renaming it
// into place so readers never observe a partial document.
void write_config(const ScenarioConfig& config, const std::string& path);

}  // namespace formsim
