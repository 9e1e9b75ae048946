#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "geofc/simulator.hpp"

namespace geofc {

inline constexpr int kSchemaVersion = 1;

/// Optional sweep section of a scenario file.
struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
};

struct ScenarioFile {
  Scenario scenario;
  std::optional<SweepSpec> sweep;
};

/// Parses scenario text. Throws ValidationError with "line L, column C" for
/// syntax errors, the offending field path for schema errors, and the full
/// diagnostic list for cross-reference failures.
ScenarioFile parse_scenario(const std::string& text);
ScenarioFile load_scenario(const std::filesystem::path& path);

/// Canonical, fully resolved form (every default written out).
std::string scenario_to_text(const Scenario& scenario, const std::optional<SweepSpec>& sweep = std::nullopt);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path,
                   const std::optional<SweepSpec>& sweep = std::nullopt);

/// FNV-1a over the canonical text, as 16 hex digits.
std::string scenario_digest(const Scenario& scenario);
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace geofc
