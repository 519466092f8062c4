#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wow/session/command.hpp"

namespace wow::sync {

inline constexpr int kProtoVersion = 1;
/// senderId of envelopes the server originates itself.
inline constexpr std::string_view kServerSender = "server";

enum class MessageType { kHello, kWelcome, kSnapshot, kCommand, kEvent, kReject, kCursor, kPresence, kPing, kPong };

std::string_view message_type_name(MessageType type);
std::optional<MessageType> message_type_from_name(std::string_view name);

/// One wire message. Serialized as a JSON object with the fields type,
/// sessionId, senderId, requestId, seq and payload; requestId and seq are
/// only present where the type carries them.
struct Envelope {
  MessageType type = MessageType::kPing;
  SessionId session;
  std::string sender;
  std::optional<std::string> request_id;
  std::optional<std::uint64_t> seq;
  nlohmann::json payload = nlohmann::json::object();
};

std::string encode(const Envelope& envelope);
/// Malformed on any schema violation.
Result<Envelope> decode(std::string_view text);

enum class CursorAction { kMove, kDown, kUp, kClick };

std::string_view cursor_action_name(CursorAction action);
std::optional<CursorAction> cursor_action_from_name(std::string_view name);

struct CursorState {
  ParticipantId owner;
  std::string label;
  double x = 0.0;
  double y = 0.0;
  CursorAction action = CursorAction::kMove;
  WallId wall;

  friend bool operator==(const CursorState&, const CursorState&) = default;
};

void to_json(nlohmann::json& j, const CursorState& c);
void from_json(const nlohmann::json& j, CursorState& c);

struct HelloPayload {
  int proto_version = kProtoVersion;
  /// Omitted when the transport already authenticated the connection.
  std::optional<std::string> token;
  ParticipantRole role = ParticipantRole::kPersonalDevice;
  /// Present on reconnect: the last event seq the client applied.
  std::optional<std::uint64_t> last_acked_seq;
};

nlohmann::json hello_to_json(const HelloPayload& hello);
Result<HelloPayload> hello_from_json(const nlohmann::json& j);

// Envelope builders shared by server and client.
Envelope make_hello(const SessionId& session, const HelloPayload& hello);
Envelope make_command(const SessionId& session, const ParticipantId& sender,
                      const std::string& request_id, const Command& command);
Envelope make_event(const SessionId& session, const Event& event);
Result<Event> event_from_envelope(const Envelope& envelope);
Envelope make_reject(const SessionId& session, const std::optional<std::string>& request_id,
                     const Error& error);
Envelope make_snapshot(const Session& session);
Envelope make_cursor(const SessionId& session, const CursorState& cursor);

}  // namespace wow::sync
