#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wow/session/session.hpp"

namespace wow {

// Commands that target a wall accept an empty `wall`, meaning the active wall.

struct ApplyPreset {
  std::optional<WallId> wall;
  int view_count = 1;
  int variant = 0;
};

struct ApplyCustomLayout {
  std::optional<WallId> wall;
  std::vector<GridRect> rects;
};

struct InsertView {
  std::optional<WallId> wall;
  InsertCandidate candidate;
  std::optional<ContentId> content;
};

struct SwapViews {
  std::optional<WallId> wall;
  Slot a;
  Slot b;
};

struct MaximizeView {
  std::optional<WallId> wall;
  ViewportId viewport;
};

struct RestoreView {
  std::optional<WallId> wall;
};

struct HideView {
  std::optional<WallId> wall;
  ViewportId viewport;
};

struct DeleteView {
  std::optional<WallId> wall;
  ViewportId viewport;
};

struct CreateWall {
  std::string name;
  int grid_cols = kDefaultGridCols;
  int grid_rows = kDefaultGridRows;
};

struct RenameWall {
  WallId wall;
  std::string name;
};

struct DeleteWall {
  WallId wall;
};

struct SwitchActiveWall {
  WallId wall;
};

/// Registers a content and puts it on top of the target wall's hidden stack.
struct RegisterContent {
  ContentDescriptor descriptor;
  std::optional<WallId> wall;
};

struct SetViewportContent {
  std::optional<WallId> wall;
  ViewportId viewport;
  std::optional<ContentId> content;
};

struct UpdateContentState {
  ContentId content;
  std::optional<int> page;
  std::optional<double> scroll_x;
  std::optional<double> scroll_y;
  std::optional<double> zoom;
  std::optional<double> playhead;
};

struct AddNote {
  ContentId content;
  std::string text;
};

struct DeleteNote {
  NoteId note;
};

struct JoinParticipant {
  ParticipantId participant;
  std::string display_name;
  ParticipantRole role = ParticipantRole::kPersonalDevice;
};

struct LeaveParticipant {
  ParticipantId participant;
};

using Command =
    std::variant<ApplyPreset, ApplyCustomLayout, InsertView, SwapViews, MaximizeView, RestoreView,
                 HideView, DeleteView, CreateWall, RenameWall, DeleteWall, SwitchActiveWall,
                 RegisterContent, SetViewportContent, UpdateContentState, AddNote, DeleteNote,
                 JoinParticipant, LeaveParticipant>;

std::string_view command_name(const Command& command);

/// True for the geometry edits that must never change which contents a wall holds.
bool is_layout_command(const Command& command);

nlohmann::json command_to_json(const Command& command);
Result<Command> command_from_json(const nlohmann::json& j);

/// Who issued a command and when the server accepted it.
struct CommandMeta {
  ParticipantId actor;
  std::int64_t server_time = 0;
  std::string request_id;
};

/// A sequenced, accepted command. Re-applying `command` with the recorded
/// meta to the session at version seq-1 reproduces the session at seq.
struct Event {
  std::uint64_t seq = 0;
  std::string request_id;
  ParticipantId actor;
  std::int64_t server_time = 0;
  Command command;
};

nlohmann::json event_to_json(const Event& event);
Result<Event> event_from_json(const nlohmann::json& j);

}  // namespace wow
