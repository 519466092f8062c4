#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wow/common/ids.hpp"
#include "wow/common/result.hpp"
#include "wow/layout/types.hpp"

namespace wow {

enum class ContentKind { kPdf, kImage, kVideo, kWebLink, kScreenShare };

/// Uploaded blob, addressed by the SHA-256 of its bytes.
struct FileSource {
  std::string blob;
  friend bool operator==(const FileSource&, const FileSource&) = default;
};

struct LinkSource {
  std::string url;
  friend bool operator==(const LinkSource&, const LinkSource&) = default;
};

struct ScreenSource {
  ParticipantId owner;
  std::string stream_label;
  friend bool operator==(const ScreenSource&, const ScreenSource&) = default;
};

using ContentSource = std::variant<FileSource, LinkSource, ScreenSource>;

struct ContentViewState {
  int page = 1;
  double scroll_x = 0.0;
  double scroll_y = 0.0;
  double zoom = 1.0;
  double playhead = 0.0;

  friend bool operator==(const ContentViewState&, const ContentViewState&) = default;
};

struct ContentDescriptor {
  ContentKind kind = ContentKind::kPdf;
  ContentSource source;
  std::string title;

  friend bool operator==(const ContentDescriptor&, const ContentDescriptor&) = default;
};

struct Content {
  ContentId id;
  ContentKind kind = ContentKind::kPdf;
  ContentSource source;
  std::string title;
  ParticipantId uploader;
  ContentViewState view_state;
  /// Screen shares end when their owner leaves; the entry itself stays.
  bool ended = false;

  friend bool operator==(const Content&, const Content&) = default;
};

struct Note {
  NoteId id;
  ParticipantId author;
  ContentId content;
  std::string text;
  std::int64_t created_at = 0;  // server ms since epoch

  friend bool operator==(const Note&, const Note&) = default;
};

enum class ParticipantRole { kWallDisplay, kTabletop, kPersonalDevice };

struct Participant {
  ParticipantId id;
  std::string display_name;
  ParticipantRole role = ParticipantRole::kPersonalDevice;
  bool connected = false;

  friend bool operator==(const Participant&, const Participant&) = default;
};

/// The replicated aggregate. `version` is the seq of the last applied event.
struct Session {
  SessionId id;
  std::string name;
  std::vector<VirtualWall> walls;
  WallId active_wall;
  std::map<ContentId, Content> contents;
  std::vector<Note> notes;
  std::map<ParticipantId, Participant> participants;
  std::uint64_t version = 0;
  /// Counter behind every id the reducer mints (w*, v*, c*, n*).
  std::uint64_t next_id = 1;

  const VirtualWall* find_wall(const WallId& id) const;
  VirtualWall* find_wall(const WallId& id);
  const VirtualWall& active() const;

  friend bool operator==(const Session&, const Session&) = default;
};

std::string_view content_kind_name(ContentKind kind);
std::optional<ContentKind> content_kind_from_name(std::string_view name);
std::string_view role_name(ParticipantRole role);
std::optional<ParticipantRole> role_from_name(std::string_view name);

/// Checks that the source variant matches the kind.
Status validate_descriptor(const ContentDescriptor& descriptor);

void to_json(nlohmann::json& j, const ContentSource& s);
void from_json(const nlohmann::json& j, ContentSource& s);
void to_json(nlohmann::json& j, const ContentViewState& v);
void from_json(const nlohmann::json& j, ContentViewState& v);
void to_json(nlohmann::json& j, const ContentDescriptor& d);
void from_json(const nlohmann::json& j, ContentDescriptor& d);
void to_json(nlohmann::json& j, const Content& c);
void from_json(const nlohmann::json& j, Content& c);
void to_json(nlohmann::json& j, const Note& n);
void from_json(const nlohmann::json& j, Note& n);
void to_json(nlohmann::json& j, const Participant& p);
void from_json(const nlohmann::json& j, Participant& p);
void to_json(nlohmann::json& j, const Session& s);
void from_json(const nlohmann::json& j, Session& s);

/// The one canonical text form of a session: compact JSON with sorted keys.
std::string canonical(const Session& session);
Result<Session> session_from_canonical(std::string_view text);

}  // namespace wow
