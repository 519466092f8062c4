#include "wow/sync/sync_client.hpp"

#include "wow/session/reducer.hpp"

namespace wow::sync {

using nlohmann::json;

SyncClient::SyncClient(SessionId session, HelloPayload hello)
    : session_(std::move(session)), hello_(std::move(hello)) {}

Envelope SyncClient::hello() const {
  HelloPayload h = hello_;
  if (replica_) h.last_acked_seq = replica_->version;
  return make_hello(session_, h);
}

Envelope SyncClient::command(const Command& command, const std::string& request_id) {
  pending_.insert(request_id);
  return make_command(session_, participant_.value_or(ParticipantId{}), request_id, command);
}

Envelope SyncClient::cursor(double x, double y, CursorAction action) const {
  CursorState c;
  c.x = x;
  c.y = y;
  c.action = action;
  if (replica_) c.wall = replica_->active_wall;
  return Envelope{MessageType::kCursor, session_, participant_ ? participant_->str() : "",
                  std::nullopt, std::nullopt, json(c)};
}

void SyncClient::disconnected() {
  welcomed_ = false;
  needs_resync_ = false;
}

Result<std::vector<Envelope>> SyncClient::handle(std::string_view text) {
  auto env = decode(text);
  if (!env) return env.error();
  std::vector<Envelope> replies;
  switch (env->type) {
    case MessageType::kWelcome:
      welcomed_ = true;
      participant_ = ParticipantId(env->payload.value("participantId", std::string{}));
      heartbeat_ms_ = env->payload.value("heartbeatMs", std::int64_t{0});
      break;
    case MessageType::kSnapshot: {
      try {
        replica_ = env->payload.at("session").get<Session>();
      } catch (const json::exception& e) {
        return make_error(Errc::kMalformed, e.what());
      }
      needs_resync_ = false;
      break;
    }
    case MessageType::kEvent: {
      auto event = event_from_envelope(*env);
      if (!event) return event.error();
      if (event->actor == participant_) {
        pending_.erase(event->request_id);
        outcomes_[event->request_id] = Outcome{true, event->seq, {}, {}};
      }
      if (!replica_) {
        needs_resync_ = true;
        break;
      }
      if (event->seq <= replica_->version) {
        ++duplicate_events_;
        break;
      }
      if (event->seq != replica_->version + 1) {
        needs_resync_ = true;
        break;
      }
      auto next = apply_event(*replica_, *event);
      if (!next) {
        needs_resync_ = true;
        return make_error(Errc::kInternalGeometryError,
                          "replica rejected seq " + std::to_string(event->seq) + ": " +
                              next.error().to_string());
      }
      replica_ = std::move(next).value();
      applied_.push_back(event->seq);
      break;
    }
    case MessageType::kReject: {
      const std::string code = env->payload.value("code", std::string{});
      const std::string detail = env->payload.value("detail", std::string{});
      if (env->request_id) {
        pending_.erase(*env->request_id);
        outcomes_[*env->request_id] = Outcome{false, 0, code, detail};
      } else if (code == "AuthFailed" || code == "NoSuchSession" || code == "UnsupportedProtocol") {
        fatal_ = code + ": " + detail;
      }
      break;
    }
    case MessageType::kCursor: {
      try {
        CursorState c = env->payload.get<CursorState>();
        cursors_[c.owner] = c;
        ++cursor_counts_[c.owner];
      } catch (const json::exception& e) {
        return make_error(Errc::kMalformed, e.what());
      }
      break;
    }
    case MessageType::kPresence:
      presence_ = env->payload;
      break;
    case MessageType::kPing:
      replies.push_back(Envelope{MessageType::kPong, session_,
                                 participant_ ? participant_->str() : "", std::nullopt,
                                 std::nullopt, env->payload});
      break;
    case MessageType::kPong:
      break;
    default:
      return make_error(Errc::kMalformed, "server sent " +
                                              std::string(message_type_name(env->type)));
  }
  return replies;
}

}  // namespace wow::sync
