#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wow/session/command.hpp"

namespace wow::sim {

/// Problems introduced by one accepted command: the full session audit, plus
/// content conservation for geometry edits (they may move contents between
/// the visible views and the hidden stack but never create or lose one;
/// InsertView may add the single content it names).
std::vector<std::string> audit_transition(const Session& before, const Command& command,
                                          const Session& after);

/// JSON pointer of the first place two documents differ, or nullopt.
std::optional<std::string> first_difference(const nlohmann::json& a, const nlohmann::json& b);

/// One JSON line per event, in seq order.
std::string event_log_text(const std::vector<Event>& events);

}  // namespace wow::sim
