#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "wow/common/clock.hpp"
#include "wow/persistence/storage.hpp"
#include "wow/session/command.hpp"

namespace wow::persistence {

inline constexpr int kFormatVersion = 1;

struct PersistenceConfig {
  std::uint64_t snapshot_every_events = 500;
  std::int64_t snapshot_every_us = 60'000'000;
  /// Drop journal records already covered by the older of the two kept snapshots.
  bool compact_journal = true;
};

struct SnapshotRecord {
  std::uint64_t version = 0;
  std::int64_t captured_at = 0;  // ms
  Session session;
};

struct RestoreReport {
  /// Version of the snapshot restore started from; empty when replayed from genesis.
  std::optional<std::uint64_t> snapshot_version;
  /// Snapshots skipped because their checksum or content was bad.
  int rejected_snapshots = 0;
  std::uint64_t replayed_events = 0;
  /// Journal lines dropped from the tail because they failed validation.
  std::uint64_t truncated_records = 0;
};

struct Restored {
  Session session;
  RestoreReport report;
};

/// Journal-plus-snapshot durability for sessions. Each session has one
/// writer at a time; distinct sessions may be used from different threads.
class SessionStore {
 public:
  SessionStore(std::shared_ptr<Storage> storage, const Clock& clock, PersistenceConfig config = {});

  /// Records a fresh session (version 0): journal header plus a first snapshot.
  Status create(const Session& genesis);
  bool exists(const SessionId& id) const;
  std::vector<SessionId> list_sessions() const;

  /// Durably appends one event. JournalGap unless event.seq is last seq + 1.
  Status append(const SessionId& id, const Event& event);

  Result<SnapshotRecord> write_snapshot(const Session& session);
  /// True once the cadence (event count or elapsed time) calls for a snapshot.
  bool snapshot_due(const Session& session) const;

  Result<Restored> restore(const SessionId& id);

  /// Journal records with seq > `after`. JournalGap when some of them are
  /// no longer retained.
  Result<std::vector<Event>> events_after(const SessionId& id, std::uint64_t after) const;

  const PersistenceConfig& config() const { return config_; }

 private:
  struct Tail {
    std::mutex mu;
    bool loaded = false;
    std::uint64_t base = 0;
    std::uint64_t last_seq = 0;
    std::uint64_t last_snapshot_version = 0;
    std::int64_t last_snapshot_at = 0;
  };

  std::shared_ptr<Tail> tail_for(const SessionId& id) const;
  Status load_tail(const SessionId& id, Tail& tail) const;
  Status compact(const SessionId& id, Tail& tail);

  std::shared_ptr<Storage> storage_;
  const Clock& clock_;
  PersistenceConfig config_;
  mutable std::mutex mu_;
  mutable std::map<SessionId, std::shared_ptr<Tail>> tails_;
};

/// Session ids double as storage path segments.
bool is_valid_session_id(std::string_view id);

std::string journal_key(const SessionId& id);
std::string snapshot_key(const SessionId& id, std::uint64_t version);

/// Snapshot file text: canonical document line plus a "sha256:" checksum line.
std::string encode_snapshot(const SnapshotRecord& record);
/// Corrupt on checksum or parse failure.
Result<SnapshotRecord> decode_snapshot(std::string_view text);

/// One journal line (without the newline) and its inverse.
std::string encode_journal_record(const Event& event);
Result<Event> decode_journal_record(std::string_view line);

}  // namespace wow::persistence
