#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wow/sync/protocol.hpp"

namespace wow::sync {

/// What became of a command this client sent.
struct Outcome {
  bool accepted = false;
  std::uint64_t seq = 0;       // when accepted
  std::string reject_code;     // when rejected
  std::string reject_detail;
};

/// Client half of the protocol: keeps a replica by applying the server's
/// snapshot and event stream with the shared reducer. Transport-agnostic;
/// feed it inbound frames and send what it returns.
class SyncClient {
 public:
  SyncClient(SessionId session, HelloPayload hello);

  /// Hello for the first connection or a reconnect (carries lastAckedSeq
  /// once a replica exists).
  Envelope hello() const;
  Envelope command(const Command& command, const std::string& request_id);
  Envelope cursor(double x, double y, CursorAction action) const;

  /// Processes one inbound frame and returns any replies (Pong).
  Result<std::vector<Envelope>> handle(std::string_view text);

  /// Forget the connection, keep the replica for resync.
  void disconnected();

  const SessionId& session_id() const { return session_; }
  const std::optional<Session>& replica() const { return replica_; }
  std::uint64_t last_acked_seq() const { return replica_ ? replica_->version : 0; }
  bool welcomed() const { return welcomed_; }
  /// Set when the event stream had a gap or failed to apply; reconnect to resync.
  bool needs_resync() const { return needs_resync_; }
  /// Set by AuthFailed, NoSuchSession or UnsupportedProtocol.
  std::optional<std::string> fatal() const { return fatal_; }
  const std::optional<ParticipantId>& participant() const { return participant_; }
  std::int64_t heartbeat_ms() const { return heartbeat_ms_; }

  const std::set<std::string>& pending() const { return pending_; }
  const std::map<std::string, Outcome>& outcomes() const { return outcomes_; }
  /// Seqs in the order they were applied to the replica.
  const std::vector<std::uint64_t>& applied_seqs() const { return applied_; }
  /// Latest cursor per owner and the number of cursor frames seen per owner.
  const std::map<ParticipantId, CursorState>& cursors() const { return cursors_; }
  const std::map<ParticipantId, int>& cursor_counts() const { return cursor_counts_; }
  const nlohmann::json& presence() const { return presence_; }
  std::uint64_t duplicate_events() const { return duplicate_events_; }

 private:
  SessionId session_;
  HelloPayload hello_;
  std::optional<Session> replica_;
  std::optional<ParticipantId> participant_;
  bool welcomed_ = false;
  bool needs_resync_ = false;
  std::optional<std::string> fatal_;
  std::int64_t heartbeat_ms_ = 0;
  std::set<std::string> pending_;
  std::map<std::string, Outcome> outcomes_;
  std::vector<std::uint64_t> applied_;
  std::map<ParticipantId, CursorState> cursors_;
  std::map<ParticipantId, int> cursor_counts_;
  nlohmann::json presence_ = nlohmann::json::object();
  std::uint64_t duplicate_events_ = 0;
};

}  // namespace wow::sync
