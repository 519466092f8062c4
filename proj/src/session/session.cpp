#include "wow/session/session.hpp"

#include <algorithm>
#include <stdexcept>

namespace wow {

using nlohmann::json;

const VirtualWall* Session::find_wall(const WallId& id) const {
  auto it = std::find_if(walls.begin(), walls.end(), [&](const VirtualWall& w) { return w.id == id; });
  return it == walls.end() ? nullptr : &*it;
}

VirtualWall* Session::find_wall(const WallId& id) {
  auto it = std::find_if(walls.begin(), walls.end(), [&](const VirtualWall& w) { return w.id == id; });
  return it == walls.end() ? nullptr : &*it;
}

const VirtualWall& Session::active() const {
  const VirtualWall* w = find_wall(active_wall);
  if (w == nullptr) throw std::logic_error("session has no active wall " + active_wall.str());
  return *w;
}

std::string_view content_kind_name(ContentKind kind) {
  switch (kind) {
    case ContentKind::kPdf:
      return "Pdf";
    case ContentKind::kImage:
      return "Image";
    case ContentKind::kVideo:
      return "Video";
    case ContentKind::kWebLink:
      return "WebLink";
    case ContentKind::kScreenShare:
      return "ScreenShare";
  }
  return "Pdf";
}

std::optional<ContentKind> content_kind_from_name(std::string_view name) {
  for (auto k : {ContentKind::kPdf, ContentKind::kImage, ContentKind::kVideo, ContentKind::kWebLink,
                 ContentKind::kScreenShare}) {
    if (content_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view role_name(ParticipantRole role) {
  switch (role) {
    case ParticipantRole::kWallDisplay:
      return "WallDisplay";
    case ParticipantRole::kTabletop:
      return "Tabletop";
    case ParticipantRole::kPersonalDevice:
      return "PersonalDevice";
  }
  return "PersonalDevice";
}

std::optional<ParticipantRole> role_from_name(std::string_view name) {
  for (auto r : {ParticipantRole::kWallDisplay, ParticipantRole::kTabletop,
                 ParticipantRole::kPersonalDevice}) {
    if (role_name(r) == name) return r;
  }
  return std::nullopt;
}

Status validate_descriptor(const ContentDescriptor& d) {
  switch (d.kind) {
    case ContentKind::kPdf:
    case ContentKind::kImage:
    case ContentKind::kVideo: {
      const auto* f = std::get_if<FileSource>(&d.source);
      if (f == nullptr || f->blob.empty()) {
        return make_error(Errc::kInvalidContent, "static content needs a file reference");
      }
      break;
    }
    case ContentKind::kWebLink: {
      const auto* l = std::get_if<LinkSource>(&d.source);
      if (l == nullptr || l->url.empty()) {
        return make_error(Errc::kInvalidContent, "web link needs a URL");
      }
      break;
    }
    case ContentKind::kScreenShare: {
      const auto* s = std::get_if<ScreenSource>(&d.source);
      if (s == nullptr || s->owner.empty()) {
        return make_error(Errc::kInvalidContent, "screen share needs an owner");
      }
      break;
    }
  }
  return ok_status();
}

void to_json(json& j, const ContentSource& s) {
  if (const auto* f = std::get_if<FileSource>(&s)) {
    j = json{{"file", f->blob}};
  } else if (const auto* l = std::get_if<LinkSource>(&s)) {
    j = json{{"url", l->url}};
  } else {
    const auto& sc = std::get<ScreenSource>(s);
    j = json{{"owner", sc.owner}, {"streamLabel", sc.stream_label}};
  }
}

void from_json(const json& j, ContentSource& s) {
  if (j.contains("file")) {
    s = FileSource{j.at("file").get<std::string>()};
  } else if (j.contains("url")) {
    s = LinkSource{j.at("url").get<std::string>()};
  } else if (j.contains("owner")) {
    s = ScreenSource{j.at("owner").get<ParticipantId>(), j.value("streamLabel", std::string{})};
  } else {
    throw json::other_error::create(501, "source needs 'file', 'url' or 'owner'", &j);
  }
}

void to_json(json& j, const ContentViewState& v) {
  j = json{{"page", v.page},
           {"scrollX", v.scroll_x},
           {"scrollY", v.scroll_y},
           {"zoom", v.zoom},
           {"playhead", v.playhead}};
}

void from_json(const json& j, ContentViewState& v) {
  v.page = j.at("page").get<int>();
  v.scroll_x = j.at("scrollX").get<double>();
  v.scroll_y = j.at("scrollY").get<double>();
  v.zoom = j.at("zoom").get<double>();
  v.playhead = j.at("playhead").get<double>();
}

namespace {

ContentKind parse_kind(const json& j) {
  auto kind = content_kind_from_name(j.get<std::string>());
  if (!kind) throw json::other_error::create(501, "unknown content kind", &j);
  return *kind;
}

}  // namespace

void to_json(json& j, const ContentDescriptor& d) {
  j = json{{"kind", content_kind_name(d.kind)}, {"source", d.source}, {"title", d.title}};
}

void from_json(const json& j, ContentDescriptor& d) {
  d.kind = parse_kind(j.at("kind"));
  d.source = j.at("source").get<ContentSource>();
  d.title = j.value("title", std::string{});
}

void to_json(json& j, const Content& c) {
  j = json{{"id", c.id},
           {"kind", content_kind_name(c.kind)},
           {"source", c.source},
           {"title", c.title},
           {"uploaderId", c.uploader},
           {"viewState", c.view_state},
           {"ended", c.ended}};
}

void from_json(const json& j, Content& c) {
  c.id = j.at("id").get<ContentId>();
  c.kind = parse_kind(j.at("kind"));
  c.source = j.at("source").get<ContentSource>();
  c.title = j.at("title").get<std::string>();
  c.uploader = j.at("uploaderId").get<ParticipantId>();
  c.view_state = j.at("viewState").get<ContentViewState>();
  c.ended = j.at("ended").get<bool>();
}

void to_json(json& j, const Note& n) {
  j = json{{"id", n.id},
           {"authorId", n.author},
           {"contentId", n.content},
           {"text", n.text},
           {"createdAt", n.created_at}};
}

void from_json(const json& j, Note& n) {
  n.id = j.at("id").get<NoteId>();
  n.author = j.at("authorId").get<ParticipantId>();
  n.content = j.at("contentId").get<ContentId>();
  n.text = j.at("text").get<std::string>();
  n.created_at = j.at("createdAt").get<std::int64_t>();
}

void to_json(json& j, const Participant& p) {
  j = json{{"id", p.id},
           {"displayName", p.display_name},
           {"role", role_name(p.role)},
           {"connected", p.connected}};
}

void from_json(const json& j, Participant& p) {
  p.id = j.at("id").get<ParticipantId>();
  p.display_name = j.at("displayName").get<std::string>();
  auto role = role_from_name(j.at("role").get<std::string>());
  if (!role) throw json::other_error::create(501, "unknown role", &j);
  p.role = *role;
  p.connected = j.at("connected").get<bool>();
}

void to_json(json& j, const Session& s) {
  json contents = json::object();
  for (const auto& [id, c] : s.contents) contents[id.str()] = c;
  json participants = json::object();
  for (const auto& [id, p] : s.participants) participants[id.str()] = p;
  j = json{{"id", s.id},
           {"name", s.name},
           {"walls", s.walls},
           {"activeWallId", s.active_wall},
           {"contents", std::move(contents)},
           {"notes", s.notes},
           {"participants", std::move(participants)},
           {"version", s.version},
           {"nextId", s.next_id}};
}

void from_json(const json& j, Session& s) {
  s.id = j.at("id").get<SessionId>();
  s.name = j.at("name").get<std::string>();
  s.walls = j.at("walls").get<std::vector<VirtualWall>>();
  s.active_wall = j.at("activeWallId").get<WallId>();
  s.contents.clear();
  for (const auto& [key, value] : j.at("contents").items()) {
    s.contents.emplace(ContentId(key), value.get<Content>());
  }
  s.notes = j.at("notes").get<std::vector<Note>>();
  s.participants.clear();
  for (const auto& [key, value] : j.at("participants").items()) {
    s.participants.emplace(ParticipantId(key), value.get<Participant>());
  }
  s.version = j.at("version").get<std::uint64_t>();
  s.next_id = j.at("nextId").get<std::uint64_t>();
}

std::string canonical(const Session& session) { return json(session).dump(); }

Result<Session> session_from_canonical(std::string_view text) {
  try {
    return json::parse(text).get<Session>();
  } catch (const json::exception& e) {
    return make_error(Errc::kCorrupt, e.what());
  }
}

}  // namespace wow
