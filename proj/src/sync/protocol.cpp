#include "wow/sync/protocol.hpp"

#include <array>

namespace wow::sync {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 10> kTypeNames{
    "Hello", "Welcome", "Snapshot", "Command", "Event", "Reject", "Cursor", "Presence", "Ping", "Pong"};

constexpr std::array<std::string_view, 4> kActionNames{"Move", "Down", "Up", "Click"};

}  // namespace

std::string_view message_type_name(MessageType type) {
  return kTypeNames[static_cast<std::size_t>(type)];
}

std::optional<MessageType> message_type_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == name) return static_cast<MessageType>(i);
  }
  return std::nullopt;
}

std::string_view cursor_action_name(CursorAction action) {
  return kActionNames[static_cast<std::size_t>(action)];
}

std::optional<CursorAction> cursor_action_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == name) return static_cast<CursorAction>(i);
  }
  return std::nullopt;
}

std::string encode(const Envelope& e) {
  json j{{"type", message_type_name(e.type)},
         {"sessionId", e.session},
         {"senderId", e.sender},
         {"payload", e.payload}};
  if (e.request_id) j["requestId"] = *e.request_id;
  if (e.seq) j["seq"] = *e.seq;
  return j.dump();
}

Result<Envelope> decode(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (!j.is_object()) return make_error(Errc::kMalformed, "envelope is not a JSON object");
  try {
    Envelope e;
    auto type = message_type_from_name(j.at("type").get<std::string>());
    if (!type) return make_error(Errc::kMalformed, "unknown envelope type");
    e.type = *type;
    e.session = j.at("sessionId").get<SessionId>();
    e.sender = j.value("senderId", std::string{});
    if (auto it = j.find("requestId"); it != j.end() && !it->is_null()) {
      e.request_id = it->get<std::string>();
    }
    if (auto it = j.find("seq"); it != j.end() && !it->is_null()) e.seq = it->get<std::uint64_t>();
    e.payload = j.value("payload", json::object());
    if (!e.payload.is_object()) return make_error(Errc::kMalformed, "payload must be an object");
    return e;
  } catch (const json::exception& ex) {
    return make_error(Errc::kMalformed, ex.what());
  }
}

void to_json(json& j, const CursorState& c) {
  j = json{{"ownerId", c.owner},   {"label", c.label}, {"x", c.x},
           {"y", c.y},             {"action", cursor_action_name(c.action)},
           {"wallId", c.wall}};
}

void from_json(const json& j, CursorState& c) {
  c.owner = ParticipantId(j.value("ownerId", std::string{}));
  c.label = j.value("label", std::string{});
  c.x = j.at("x").get<double>();
  c.y = j.at("y").get<double>();
  auto action = cursor_action_from_name(j.value("action", std::string{"Move"}));
  if (!action) throw json::other_error::create(501, "unknown cursor action", &j);
  c.action = *action;
  c.wall = WallId(j.value("wallId", std::string{}));
}

json hello_to_json(const HelloPayload& h) {
  json j{{"protoVersion", h.proto_version}, {"role", role_name(h.role)}};
  if (h.token) j["token"] = *h.token;
  if (h.last_acked_seq) j["lastAckedSeq"] = *h.last_acked_seq;
  return j;
}

Result<HelloPayload> hello_from_json(const json& j) {
  try {
    HelloPayload h;
    h.proto_version = j.at("protoVersion").get<int>();
    if (auto it = j.find("token"); it != j.end() && !it->is_null()) h.token = it->get<std::string>();
    auto role = role_from_name(j.value("role", std::string{"PersonalDevice"}));
    if (!role) return make_error(Errc::kMalformed, "unknown role");
    h.role = *role;
    if (auto it = j.find("lastAckedSeq"); it != j.end() && !it->is_null()) {
      h.last_acked_seq = it->get<std::uint64_t>();
    }
    return h;
  } catch (const json::exception& ex) {
    return make_error(Errc::kMalformed, ex.what());
  }
}

Envelope make_hello(const SessionId& session, const HelloPayload& hello) {
  return Envelope{MessageType::kHello, session, "", std::nullopt, std::nullopt, hello_to_json(hello)};
}

Envelope make_command(const SessionId& session, const ParticipantId& sender,
                      const std::string& request_id, const Command& command) {
  return Envelope{MessageType::kCommand, session, sender.str(), request_id, std::nullopt,
                  command_to_json(command)};
}

Envelope make_event(const SessionId& session, const Event& event) {
  return Envelope{MessageType::kEvent,
                  session,
                  event.actor.str(),
                  event.request_id,
                  event.seq,
                  json{{"serverTime", event.server_time}, {"command", command_to_json(event.command)}}};
}

Result<Event> event_from_envelope(const Envelope& e) {
  if (e.type != MessageType::kEvent || !e.seq || !e.request_id) {
    return make_error(Errc::kMalformed, "not an event envelope");
  }
  Event event;
  event.seq = *e.seq;
  event.request_id = *e.request_id;
  event.actor = ParticipantId(e.sender);
  try {
    event.server_time = e.payload.at("serverTime").get<std::int64_t>();
    auto command = command_from_json(e.payload.at("command"));
    if (!command) return command.error();
    event.command = std::move(command).value();
  } catch (const json::exception& ex) {
    return make_error(Errc::kMalformed, ex.what());
  }
  return event;
}

Envelope make_reject(const SessionId& session, const std::optional<std::string>& request_id,
                     const Error& error) {
  return Envelope{MessageType::kReject, session, std::string(kServerSender), request_id,
                  std::nullopt, json{{"code", errc_name(error.code)}, {"detail", error.detail}}};
}

Envelope make_snapshot(const Session& session) {
  return Envelope{MessageType::kSnapshot, session.id, std::string(kServerSender), std::nullopt,
                  std::nullopt, json{{"version", session.version}, {"session", session}}};
}

Envelope make_cursor(const SessionId& session, const CursorState& cursor) {
  return Envelope{MessageType::kCursor, session, cursor.owner.str(), std::nullopt, std::nullopt,
                  json(cursor)};
}

}  // namespace wow::sync
