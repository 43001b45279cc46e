#pragma once

#include <filesystem>
#include <string>

#include "mctl/harness.hpp"

namespace mctl {

/// Applies the keys of a flat YAML mapping (`key: value`) onto `config`.
/// Unknown keys raise ConfigError.
void apply_config_text(const std::string& text, ExperimentConfig& config);
void apply_config_file(const std::filesystem::path& path, ExperimentConfig& config);

/// Emits every configurable key with its current value.
std::string dump_config(const ExperimentConfig& config);

}  // namespace mctl
