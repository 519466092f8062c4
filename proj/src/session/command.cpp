#include "wow/session/command.hpp"

#include <array>

namespace wow {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, std::variant_size_v<Command>> kCommandNames{
    "ApplyPreset",  "ApplyCustomLayout", "InsertView",       "SwapViews",
    "MaximizeView", "RestoreView",       "HideView",         "DeleteView",
    "CreateWall",   "RenameWall",        "DeleteWall",       "SwitchActiveWall",
    "RegisterContent", "SetViewportContent", "UpdateContentState", "AddNote",
    "DeleteNote",   "JoinParticipant",   "LeaveParticipant"};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json optional_id(const auto& id) { return id ? json(*id) : json(nullptr); }

template <class T>
std::optional<T> read_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

template <std::size_t I = 0>
Result<Command> default_command(std::string_view name) {
  if constexpr (I == std::variant_size_v<Command>) {
    return make_error(Errc::kMalformed, "unknown command type '" + std::string(name) + "'");
  } else {
    if (kCommandNames[I] == name) return Command(std::in_place_index<I>);
    return default_command<I + 1>(name);
  }
}

}  // namespace

std::string_view command_name(const Command& command) { return kCommandNames[command.index()]; }

bool is_layout_command(const Command& command) {
  return std::holds_alternative<ApplyPreset>(command) ||
         std::holds_alternative<ApplyCustomLayout>(command) ||
         std::holds_alternative<InsertView>(command) ||
         std::holds_alternative<SwapViews>(command) ||
         std::holds_alternative<MaximizeView>(command) ||
         std::holds_alternative<RestoreView>(command) ||
         std::holds_alternative<HideView>(command) || std::holds_alternative<DeleteView>(command);
}

json command_to_json(const Command& command) {
  json j = std::visit(
      Overloaded{
          [](const ApplyPreset& c) {
            return json{{"wallId", optional_id(c.wall)},
                        {"viewCount", c.view_count},
                        {"variant", c.variant}};
          },
          [](const ApplyCustomLayout& c) {
            return json{{"wallId", optional_id(c.wall)}, {"rects", c.rects}};
          },
          [](const InsertView& c) {
            return json{{"wallId", optional_id(c.wall)},
                        {"candidate", c.candidate},
                        {"contentId", optional_id(c.content)}};
          },
          [](const SwapViews& c) {
            return json{{"wallId", optional_id(c.wall)}, {"a", c.a}, {"b", c.b}};
          },
          [](const MaximizeView& c) {
            return json{{"wallId", optional_id(c.wall)}, {"viewportId", c.viewport}};
          },
          [](const RestoreView& c) { return json{{"wallId", optional_id(c.wall)}}; },
          [](const HideView& c) {
            return json{{"wallId", optional_id(c.wall)}, {"viewportId", c.viewport}};
          },
          [](const DeleteView& c) {
            return json{{"wallId", optional_id(c.wall)}, {"viewportId", c.viewport}};
          },
          [](const CreateWall& c) {
            return json{{"name", c.name}, {"gridCols", c.grid_cols}, {"gridRows", c.grid_rows}};
          },
          [](const RenameWall& c) { return json{{"wallId", c.wall}, {"name", c.name}}; },
          [](const DeleteWall& c) { return json{{"wallId", c.wall}}; },
          [](const SwitchActiveWall& c) { return json{{"wallId", c.wall}}; },
          [](const RegisterContent& c) {
            return json{{"descriptor", c.descriptor}, {"wallId", optional_id(c.wall)}};
          },
          [](const SetViewportContent& c) {
            return json{{"wallId", optional_id(c.wall)},
                        {"viewportId", c.viewport},
                        {"contentId", optional_id(c.content)}};
          },
          [](const UpdateContentState& c) {
            json out{{"contentId", c.content}};
            if (c.page) out["page"] = *c.page;
            if (c.scroll_x) out["scrollX"] = *c.scroll_x;
            if (c.scroll_y) out["scrollY"] = *c.scroll_y;
            if (c.zoom) out["zoom"] = *c.zoom;
            if (c.playhead) out["playhead"] = *c.playhead;
            return out;
          },
          [](const AddNote& c) { return json{{"contentId", c.content}, {"text", c.text}}; },
          [](const DeleteNote& c) { return json{{"noteId", c.note}}; },
          [](const JoinParticipant& c) {
            return json{{"participantId", c.participant},
                        {"displayName", c.display_name},
                        {"role", role_name(c.role)}};
          },
          [](const LeaveParticipant& c) { return json{{"participantId", c.participant}}; },
      },
      command);
  j["type"] = command_name(command);
  return j;
}

Result<Command> command_from_json(const json& j) {
  try {
    if (!j.is_object()) return make_error(Errc::kMalformed, "command must be an object");
    auto made = default_command(j.at("type").get<std::string>());
    if (!made) return made;
    Command command = std::move(made).value();
    std::visit(
        Overloaded{
            [&](ApplyPreset& c) {
              c.wall = read_optional<WallId>(j, "wallId");
              c.view_count = j.at("viewCount").get<int>();
              c.variant = j.value("variant", 0);
            },
            [&](ApplyCustomLayout& c) {
              c.wall = read_optional<WallId>(j, "wallId");
              c.rects = j.at("rects").get<std::vector<GridRect>>();
            },
            [&](InsertView& c) {
              c.wall = read_optional<WallId>(j, "wallId");
              c.candidate = j.at("candidate").get<InsertCandidate>();
              c.content = read_optional<ContentId>(j, "contentId");
            },
            [&](SwapViews& c) {
              c.wall = read_optional<WallId>(j, "wallId");
              c.a = j.at("a").get<Slot>();
              c.b = j.at("b").get<Slot>();
            },
            [&](MaximizeView& c) {
              c.wall = read_optional<WallId>(j, "wallId");
              c.viewport = j.at("viewportId").get<ViewportId>();
            },
            [&](RestoreView& c) { c.wall = read_optional<WallId>(j, "wallId"); },
            [&](HideView& c) {
              c.wall = read_optional<WallId>(j, "wallId");
              c.viewport = j.at("viewportId").get<ViewportId>();
            },
            [&](DeleteView& c) {
              c.wall = read_optional<WallId>(j, "wallId");
              c.viewport = j.at("viewportId").get<ViewportId>();
            },
            [&](CreateWall& c) {
              c.name = j.at("name").get<std::string>();
              c.grid_cols = j.value("gridCols", kDefaultGridCols);
              c.grid_rows = j.value("gridRows", kDefaultGridRows);
            },
            [&](RenameWall& c) {
              c.wall = j.at("wallId").get<WallId>();
              c.name = j.at("name").get<std::string>();
            },
            [&](DeleteWall& c) { c.wall = j.at("wallId").get<WallId>(); },
            [&](SwitchActiveWall& c) { c.wall = j.at("wallId").get<WallId>(); },
            [&](RegisterContent& c) {
              c.descriptor = j.at("descriptor").get<ContentDescriptor>();
              c.wall = read_optional<WallId>(j, "wallId");
            },
            [&](SetViewportContent& c) {
              c.wall = read_optional<WallId>(j, "wallId");
              c.viewport = j.at("viewportId").get<ViewportId>();
              c.content = read_optional<ContentId>(j, "contentId");
            },
            [&](UpdateContentState& c) {
              c.content = j.at("contentId").get<ContentId>();
              c.page = read_optional<int>(j, "page");
              c.scroll_x = read_optional<double>(j, "scrollX");
              c.scroll_y = read_optional<double>(j, "scrollY");
              c.zoom = read_optional<double>(j, "zoom");
              c.playhead = read_optional<double>(j, "playhead");
            },
            [&](AddNote& c) {
              c.content = j.at("contentId").get<ContentId>();
              c.text = j.at("text").get<std::string>();
            },
            [&](DeleteNote& c) { c.note = j.at("noteId").get<NoteId>(); },
            [&](JoinParticipant& c) {
              c.participant = j.at("participantId").get<ParticipantId>();
              c.display_name = j.at("displayName").get<std::string>();
              auto role = role_from_name(j.value("role", std::string{"PersonalDevice"}));
              if (!role) throw json::other_error::create(501, "unknown role", &j);
              c.role = *role;
            },
            [&](LeaveParticipant& c) {
              c.participant = j.at("participantId").get<ParticipantId>();
            },
        },
        command);
    return command;
  } catch (const json::exception& e) {
    return make_error(Errc::kMalformed, e.what());
  }
}

json event_to_json(const Event& event) {
  return json{{"seq", event.seq},
              {"requestId", event.request_id},
              {"actorId", event.actor},
              {"serverTime", event.server_time},
              {"command", command_to_json(event.command)}};
}

Result<Event> event_from_json(const json& j) {
  try {
    Event event;
    event.seq = j.at("seq").get<std::uint64_t>();
    event.request_id = j.at("requestId").get<std::string>();
    event.actor = j.at("actorId").get<ParticipantId>();
    event.server_time = j.at("serverTime").get<std::int64_t>();
    auto command = command_from_json(j.at("command"));
    if (!command) return command.error();
    event.command = std::move(command).value();
    return event;
  } catch (const json::exception& e) {
    return make_error(Errc::kMalformed, e.what());
  }
}

}  // namespace wow
