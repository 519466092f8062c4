#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wow/sim/scenario.hpp"

namespace wow::sim {

/// The fixed scenarios whose event logs are shipped as golden files for
/// independent reducer implementations.
std::vector<Scenario> golden_scenarios();

/// Runs `scenario` in-process and packages the outcome as a golden document:
/// {"format", "name", "seed", "genesis", "events", "final", "finalCanonical"}.
Result<nlohmann::json> make_golden(const Scenario& scenario);

/// Replays a golden document with the reducer. Empty when the replay lands
/// on exactly the recorded final state.
std::optional<std::string> check_golden(const nlohmann::json& golden);

inline constexpr const char* kGoldenFormat = "wow-golden/1";

}  // namespace wow::sim
