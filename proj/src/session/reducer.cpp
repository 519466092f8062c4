#include "wow/session/reducer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "wow/layout/layout_engine.hpp"

namespace wow {
namespace {

bool blank(const std::string& text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char ch) { return std::isspace(ch) != 0; });
}

/// Applies one command to a private copy of the session. Any error leaves
/// the caller's session untouched because the copy is simply discarded.
class Reducer {
 public:
  Reducer(Session& next, const CommandMeta& meta) : s_(next), meta_(meta) {}

  Status operator()(const ApplyPreset& c) {
    auto wall = wall_for(c.wall);
    if (!wall) return wall.error();
    auto catalog = layout::preset_catalog(c.view_count, (*wall)->grid_cols, (*wall)->grid_rows);
    if (!catalog) return catalog.error();
    if (c.variant < 0 || c.variant >= static_cast<int>(catalog->size())) {
      return make_error(Errc::kUnsupportedPresetCount,
                        "variant " + std::to_string(c.variant) + " of " +
                            std::to_string(c.view_count) + "-view presets");
    }
    return replace(**wall, layout::apply_layout(**wall, (*catalog)[c.variant].rects, minter()));
  }

  Status operator()(const ApplyCustomLayout& c) {
    auto wall = wall_for(c.wall);
    if (!wall) return wall.error();
    return replace(**wall, layout::apply_layout(**wall, c.rects, minter()));
  }

  Status operator()(const InsertView& c) {
    auto wall = wall_for(c.wall);
    if (!wall) return wall.error();
    if (c.content && !s_.contents.contains(*c.content)) return no_such(c.content->str());
    ViewportId id(mint("v"));
    return replace(**wall, layout::apply_insert(**wall, c.candidate, c.content, id));
  }

  Status operator()(const SwapViews& c) {
    auto wall = wall_for(c.wall);
    if (!wall) return wall.error();
    return replace(**wall, layout::swap_views(**wall, c.a, c.b));
  }

  Status operator()(const MaximizeView& c) {
    auto wall = wall_for(c.wall);
    if (!wall) return wall.error();
    return replace(**wall, layout::maximize_view(**wall, c.viewport));
  }

  Status operator()(const RestoreView& c) {
    auto wall = wall_for(c.wall);
    if (!wall) return wall.error();
    return replace(**wall, layout::restore_view(**wall));
  }

  Status operator()(const HideView& c) {
    auto wall = wall_for(c.wall);
    if (!wall) return wall.error();
    return replace(**wall, layout::hide_view(**wall, c.viewport));
  }

  Status operator()(const DeleteView& c) {
    auto wall = wall_for(c.wall);
    if (!wall) return wall.error();
    return replace(**wall, layout::delete_view(**wall, c.viewport));
  }

  Status operator()(const CreateWall& c) {
    if (blank(c.name)) return make_error(Errc::kInvalidName, "wall name is empty");
    if (c.grid_cols < 1 || c.grid_rows < 1) return make_error(Errc::kInvalidGrid);
    VirtualWall wall;
    wall.id = WallId(mint("w"));
    wall.name = c.name;
    wall.grid_cols = c.grid_cols;
    wall.grid_rows = c.grid_rows;
    s_.walls.push_back(std::move(wall));
    return ok_status();
  }

  Status operator()(const RenameWall& c) {
    VirtualWall* wall = s_.find_wall(c.wall);
    if (wall == nullptr) return no_such(c.wall.str());
    if (blank(c.name)) return make_error(Errc::kInvalidName, "wall name is empty");
    wall->name = c.name;
    return ok_status();
  }

  Status operator()(const DeleteWall& c) {
    if (s_.find_wall(c.wall) == nullptr) return no_such(c.wall.str());
    if (s_.walls.size() == 1) return make_error(Errc::kLastWall, "a session keeps one wall");
    std::erase_if(s_.walls, [&](const VirtualWall& w) { return w.id == c.wall; });
    if (s_.active_wall == c.wall) s_.active_wall = s_.walls.front().id;
    return ok_status();
  }

  Status operator()(const SwitchActiveWall& c) {
    if (s_.find_wall(c.wall) == nullptr) return no_such(c.wall.str());
    s_.active_wall = c.wall;
    return ok_status();
  }

  Status operator()(const RegisterContent& c) {
    if (auto st = validate_descriptor(c.descriptor); !st) return st;
    if (const auto* screen = std::get_if<ScreenSource>(&c.descriptor.source)) {
      if (!s_.participants.contains(screen->owner)) return no_such(screen->owner.str());
    }
    auto wall = wall_for(c.wall);
    if (!wall) return wall.error();
    Content content;
    content.id = ContentId(mint("c"));
    content.kind = c.descriptor.kind;
    content.source = c.descriptor.source;
    content.title = c.descriptor.title;
    content.uploader = meta_.actor;
    const ContentId id = content.id;
    s_.contents.emplace(id, std::move(content));
    created_content_ = id;
    return replace(**wall, layout::push_hidden(**wall, id));
  }

  Status operator()(const SetViewportContent& c) {
    auto wall = wall_for(c.wall);
    if (!wall) return wall.error();
    if (c.content && !s_.contents.contains(*c.content)) return no_such(c.content->str());
    return replace(**wall, layout::assign_content(**wall, c.viewport, c.content));
  }

  Status operator()(const UpdateContentState& c) {
    auto it = s_.contents.find(c.content);
    if (it == s_.contents.end()) return no_such(c.content.str());
    Content& content = it->second;
    ContentViewState state = content.view_state;
    if (c.page) {
      if (*c.page < 1) return bad_state("page must be >= 1");
      if (content.kind != ContentKind::kPdf && *c.page != 1) {
        return bad_state("only PDF content has pages");
      }
      state.page = *c.page;
    }
    for (auto [value, target, name] :
         {std::tuple{c.scroll_x, &state.scroll_x, "scrollX"},
          std::tuple{c.scroll_y, &state.scroll_y, "scrollY"}}) {
      if (!value) continue;
      if (!std::isfinite(*value) || *value < 0.0 || *value > 1.0) {
        return bad_state(std::string(name) + " must be within [0,1]");
      }
      *target = *value;
    }
    if (c.zoom) {
      if (!std::isfinite(*c.zoom) || *c.zoom <= 0.0) return bad_state("zoom must be positive");
      state.zoom = *c.zoom;
    }
    if (c.playhead) {
      if (!std::isfinite(*c.playhead) || *c.playhead < 0.0) {
        return bad_state("playhead must be >= 0");
      }
      if (content.kind != ContentKind::kVideo && *c.playhead != 0.0) {
        return bad_state("only video content has a playhead");
      }
      state.playhead = *c.playhead;
    }
    content.view_state = state;
    return ok_status();
  }

  Status operator()(const AddNote& c) {
    if (!s_.contents.contains(c.content)) return no_such(c.content.str());
    if (!s_.participants.contains(meta_.actor)) return no_such(meta_.actor.str());
    if (blank(c.text)) return make_error(Errc::kEmptyNote);
    Note note;
    note.id = NoteId(mint("n"));
    note.author = meta_.actor;
    note.content = c.content;
    note.text = c.text;
    note.created_at = meta_.server_time;
    s_.notes.push_back(std::move(note));
    return ok_status();
  }

  Status operator()(const DeleteNote& c) {
    auto removed = std::erase_if(s_.notes, [&](const Note& n) { return n.id == c.note; });
    if (removed == 0) return no_such(c.note.str());
    return ok_status();
  }

  Status operator()(const JoinParticipant& c) {
    if (c.participant.empty()) return make_error(Errc::kInvalidName, "participant id is empty");
    if (blank(c.display_name)) return make_error(Errc::kInvalidName, "display name is empty");
    Participant& p = s_.participants[c.participant];
    p.id = c.participant;
    p.display_name = c.display_name;
    p.role = c.role;
    p.connected = true;
    return ok_status();
  }

  Status operator()(const LeaveParticipant& c) {
    auto it = s_.participants.find(c.participant);
    if (it == s_.participants.end()) return no_such(c.participant.str());
    it->second.connected = false;
    for (auto& [id, content] : s_.contents) {
      const auto* screen = std::get_if<ScreenSource>(&content.source);
      if (content.kind == ContentKind::kScreenShare && screen != nullptr &&
          screen->owner == c.participant) {
        content.ended = true;
      }
    }
    return ok_status();
  }

  std::optional<ContentId> created_content() const { return created_content_; }

 private:
  Result<VirtualWall*> wall_for(const std::optional<WallId>& id) {
    const WallId& target = id ? *id : s_.active_wall;
    VirtualWall* wall = s_.find_wall(target);
    if (wall == nullptr) return make_error(Errc::kNoSuchEntity, "wall " + target.str());
    return wall;
  }

  static Status replace(VirtualWall& slot, Result<VirtualWall> edited) {
    if (!edited) return edited.error();
    slot = std::move(edited).value();
    return ok_status();
  }

  std::string mint(std::string_view prefix) {
    return std::string(prefix) + std::to_string(s_.next_id++);
  }

  layout::ViewportIdMinter minter() {
    return [this] { return ViewportId(mint("v")); };
  }

  static Error no_such(const std::string& what) { return make_error(Errc::kNoSuchEntity, what); }
  static Error bad_state(const std::string& what) {
    return make_error(Errc::kInvalidViewState, what);
  }

  Session& s_;
  const CommandMeta& meta_;
  std::optional<ContentId> created_content_;
};

}  // namespace

Result<Session> new_session(const SessionId& id, const std::string& name, int grid_cols,
                            int grid_rows) {
  if (blank(name)) return make_error(Errc::kInvalidName, "session name is empty");
  if (grid_cols < 1 || grid_rows < 1) {
    return make_error(Errc::kInvalidGrid,
                      std::to_string(grid_cols) + "x" + std::to_string(grid_rows));
  }
  Session s;
  s.id = id;
  s.name = name;
  VirtualWall wall;
  wall.id = WallId("w" + std::to_string(s.next_id++));
  wall.name = "Wall 1";
  wall.grid_cols = grid_cols;
  wall.grid_rows = grid_rows;
  s.active_wall = wall.id;
  s.walls.push_back(std::move(wall));
  return s;
}

Result<Applied> apply_command(const Session& session, const Command& command,
                              const CommandMeta& meta) {
  Session next = session;
  Reducer reducer(next, meta);
  if (auto st = std::visit(reducer, command); !st) return st.error();
  next.version = session.version + 1;
  Event event;
  event.seq = next.version;
  event.request_id = meta.request_id;
  event.actor = meta.actor;
  event.server_time = meta.server_time;
  event.command = command;
  return Applied{std::move(next), std::move(event)};
}

Result<Session> apply_event(const Session& session, const Event& event) {
  if (event.seq != session.version + 1) {
    return make_error(Errc::kJournalGap, "event " + std::to_string(event.seq) +
                                             " does not follow version " +
                                             std::to_string(session.version));
  }
  auto applied = apply_command(session, event.command,
                               CommandMeta{event.actor, event.server_time, event.request_id});
  if (!applied) return applied.error();
  return std::move(applied->session);
}

Result<std::pair<Session, ContentId>> register_content(const Session& session,
                                                       const ContentDescriptor& descriptor,
                                                       const CommandMeta& meta) {
  // The reducer mints the id from the session counter, so it is known up front.
  const ContentId id("c" + std::to_string(session.next_id));
  auto applied = apply_command(session, RegisterContent{descriptor, std::nullopt}, meta);
  if (!applied) return applied.error();
  return std::pair{std::move(applied->session), id};
}

Result<std::pair<Session, Note>> add_note(const Session& session, const ContentId& content,
                                          const std::string& text, const CommandMeta& meta) {
  auto applied = apply_command(session, AddNote{content, text}, meta);
  if (!applied) return applied.error();
  Note note = applied->session.notes.back();
  return std::pair{std::move(applied->session), std::move(note)};
}

std::vector<Note> notes_for_content(const Session& session, const ContentId& content) {
  std::vector<Note> out;
  std::copy_if(session.notes.begin(), session.notes.end(), std::back_inserter(out),
               [&](const Note& n) { return n.content == content; });
  return out;
}

std::vector<Note> notes_by_author(const Session& session, const ParticipantId& author) {
  std::vector<Note> out;
  std::copy_if(session.notes.begin(), session.notes.end(), std::back_inserter(out),
               [&](const Note& n) { return n.author == author; });
  return out;
}

std::vector<std::string> audit_session(const Session& s) {
  std::vector<std::string> issues;
  if (s.walls.empty()) issues.push_back("session has no wall");
  if (s.find_wall(s.active_wall) == nullptr) {
    issues.push_back("active wall " + s.active_wall.str() + " does not exist");
  }
  std::set<WallId> wall_ids;
  for (const auto& wall : s.walls) {
    if (!wall_ids.insert(wall.id).second) issues.push_back("duplicate wall " + wall.id.str());
    for (auto& issue : layout::audit_wall(wall)) {
      issues.push_back(wall.id.str() + ": " + issue);
    }
    auto check_ref = [&](const ContentId& c) {
      if (!s.contents.contains(c)) {
        issues.push_back(wall.id.str() + " references unknown content " + c.str());
      }
    };
    for (const auto& v : wall.viewports) {
      if (v.content) check_ref(*v.content);
    }
    for (const auto& c : wall.hidden_stack) check_ref(c);
  }
  for (const auto& [id, content] : s.contents) {
    if (id != content.id) issues.push_back("content key mismatch for " + id.str());
    if (!validate_descriptor({content.kind, content.source, content.title})) {
      issues.push_back("content " + id.str() + " has inconsistent source");
    }
    const auto& v = content.view_state;
    if (v.page < 1 || v.zoom <= 0.0 || v.scroll_x < 0.0 || v.scroll_x > 1.0 || v.scroll_y < 0.0 ||
        v.scroll_y > 1.0 || v.playhead < 0.0) {
      issues.push_back("content " + id.str() + " has out-of-range view state");
    }
  }
  for (const auto& note : s.notes) {
    if (!s.contents.contains(note.content)) {
      issues.push_back("note " + note.id.str() + " references unknown content");
    }
    if (blank(note.text)) issues.push_back("note " + note.id.str() + " is empty");
  }
  for (const auto& [id, p] : s.participants) {
    if (id != p.id) issues.push_back("participant key mismatch for " + id.str());
    if (blank(p.display_name)) issues.push_back("participant " + id.str() + " has no name");
  }
  return issues;
}

}  // namespace wow
