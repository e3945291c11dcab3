#pragma once

#include "supraflow/harness.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace supraflow {

/// Parses a YAML scenario document and validates it.
/// Throws InvalidModel on malformed input or violated invariants.
Scenario parse_scenario(std::string_view text);

/// Throws IoError when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

/// Deterministic YAML rendering; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

void save_scenario(const Scenario& s, const std::filesystem::path& path);

/// Writes vi_a.scenario, vi_b.scenario and dispatch.scenario into dir.
std::vector<std::filesystem::path> emit_builtin_scenarios(const std::filesystem::path& dir);

/// Writes text to path, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace supraflow
