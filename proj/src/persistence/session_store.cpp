#include "wow/persistence/session_store.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "wow/persistence/sha256.hpp"
#include "wow/session/reducer.hpp"

namespace wow::persistence {

using nlohmann::json;

namespace {

constexpr std::string_view kChecksumPrefix = "sha256:";

std::string session_prefix(const SessionId& id) { return "sessions/" + id.str() + "/"; }

std::string snapshot_prefix(const SessionId& id) { return session_prefix(id) + "snapshots/"; }

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    if (nl == std::string_view::npos) {
      lines.push_back(text);  // unterminated tail, treated as a record
      break;
    }
    lines.push_back(text.substr(0, nl));
    text.remove_prefix(nl + 1);
  }
  return lines;
}

struct JournalHeader {
  SessionId session;
  std::uint64_t base = 0;
  std::optional<Session> genesis;
};

std::string encode_header(const JournalHeader& h) {
  json j{{"formatVersion", kFormatVersion}, {"sessionId", h.session}, {"baseSeq", h.base}};
  j["genesis"] = h.genesis ? json(*h.genesis) : json(nullptr);
  return j.dump();
}

Result<JournalHeader> decode_header(std::string_view line) {
  const json j = json::parse(line, nullptr, false);
  if (!j.is_object()) return make_error(Errc::kCorrupt, "journal header is not JSON");
  try {
    if (j.at("formatVersion").get<int>() != kFormatVersion) {
      return make_error(Errc::kCorrupt, "unsupported journal format");
    }
    JournalHeader h;
    h.session = j.at("sessionId").get<SessionId>();
    h.base = j.at("baseSeq").get<std::uint64_t>();
    if (auto it = j.find("genesis"); it != j.end() && !it->is_null()) {
      h.genesis = it->get<Session>();
    }
    return h;
  } catch (const json::exception& e) {
    return make_error(Errc::kCorrupt, e.what());
  }
}

/// The usable prefix of a journal file.
struct JournalScan {
  JournalHeader header;
  std::vector<Event> records;
  std::uint64_t dropped_lines = 0;
};

Result<JournalScan> scan_journal(std::string_view text) {
  auto lines = split_lines(text);
  if (lines.empty()) return make_error(Errc::kCorrupt, "journal has no header");
  auto header = decode_header(lines.front());
  if (!header) return header.error();
  JournalScan scan;
  scan.header = std::move(header).value();
  std::uint64_t expected = scan.header.base + 1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto event = decode_journal_record(lines[i]);
    if (!event || event->seq != expected) {
      scan.dropped_lines = lines.size() - i;
      break;
    }
    scan.records.push_back(std::move(event).value());
    ++expected;
  }
  return scan;
}

std::string render_journal(const JournalHeader& header, const std::vector<Event>& records) {
  std::string out = encode_header(header);
  out.push_back('\n');
  for (const auto& e : records) {
    out += encode_journal_record(e);
    out.push_back('\n');
  }
  return out;
}

std::optional<std::uint64_t> snapshot_version_of(std::string_view key) {
  const auto slash = key.rfind('/');
  auto name = key.substr(slash + 1);
  if (!name.ends_with(".snap")) return std::nullopt;
  name.remove_suffix(5);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), v);
  if (ec != std::errc() || ptr != name.data() + name.size()) return std::nullopt;
  return v;
}

}  // namespace

bool is_valid_session_id(std::string_view id) {
  return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_';
         });
}

std::string journal_key(const SessionId& id) { return session_prefix(id) + "journal.log"; }

std::string snapshot_key(const SessionId& id, std::uint64_t version) {
  char name[32];
  std::snprintf(name, sizeof name, "%020llu.snap", static_cast<unsigned long long>(version));
  return snapshot_prefix(id) + name;
}

std::string encode_snapshot(const SnapshotRecord& record) {
  const json doc{{"formatVersion", kFormatVersion},
                 {"version", record.version},
                 {"capturedAt", record.captured_at},
                 {"session", record.session}};
  std::string body = doc.dump();
  std::string out = body;
  out.push_back('\n');
  out += kChecksumPrefix;
  out += sha256_hex(body);
  out.push_back('\n');
  return out;
}

Result<SnapshotRecord> decode_snapshot(std::string_view text) {
  auto lines = split_lines(text);
  if (lines.size() != 2 || !lines[1].starts_with(kChecksumPrefix)) {
    return make_error(Errc::kCorrupt, "snapshot layout");
  }
  if (sha256_hex(lines[0]) != lines[1].substr(kChecksumPrefix.size())) {
    return make_error(Errc::kCorrupt, "snapshot checksum mismatch");
  }
  const json doc = json::parse(lines[0], nullptr, false);
  if (!doc.is_object()) return make_error(Errc::kCorrupt, "snapshot is not JSON");
  try {
    if (doc.at("formatVersion").get<int>() != kFormatVersion) {
      return make_error(Errc::kCorrupt, "unsupported snapshot format");
    }
    SnapshotRecord record;
    record.version = doc.at("version").get<std::uint64_t>();
    record.captured_at = doc.at("capturedAt").get<std::int64_t>();
    record.session = doc.at("session").get<Session>();
    if (record.session.version != record.version) {
      return make_error(Errc::kCorrupt, "snapshot version disagrees with its session");
    }
    return record;
  } catch (const json::exception& e) {
    return make_error(Errc::kCorrupt, e.what());
  }
}

std::string encode_journal_record(const Event& event) {
  json j = event_to_json(event);
  const std::string sum = sha256_hex(j.dump());
  j["sum"] = sum;
  return j.dump();
}

Result<Event> decode_journal_record(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (!j.is_object() || !j.contains("sum") || !j["sum"].is_string()) {
    return make_error(Errc::kCorrupt, "journal record is not JSON");
  }
  const std::string sum = j["sum"].get<std::string>();
  j.erase("sum");
  if (sha256_hex(j.dump()) != sum) return make_error(Errc::kCorrupt, "journal record checksum");
  auto event = event_from_json(j);
  if (!event) return make_error(Errc::kCorrupt, event.error().detail);
  return event;
}

SessionStore::SessionStore(std::shared_ptr<Storage> storage, const Clock& clock,
                           PersistenceConfig config)
    : storage_(std::move(storage)), clock_(clock), config_(config) {}

std::shared_ptr<SessionStore::Tail> SessionStore::tail_for(const SessionId& id) const {
  std::lock_guard lock(mu_);
  auto& slot = tails_[id];
  if (!slot) slot = std::make_shared<Tail>();
  return slot;
}

bool SessionStore::exists(const SessionId& id) const {
  return is_valid_session_id(id.str()) &&
         (storage_->exists(journal_key(id)) || !storage_->list(snapshot_prefix(id)).empty());
}

std::vector<SessionId> SessionStore::list_sessions() const {
  std::vector<SessionId> ids;
  for (const auto& key : storage_->list("sessions/")) {
    const auto rest = std::string_view(key).substr(9);
    const auto slash = rest.find('/');
    if (slash == std::string_view::npos) continue;
    SessionId id{std::string(rest.substr(0, slash))};
    if (ids.empty() || ids.back() != id) ids.push_back(std::move(id));
  }
  return ids;
}

Status SessionStore::create(const Session& genesis) {
  if (!is_valid_session_id(genesis.id.str())) {
    return make_error(Errc::kInvalidName, "session id '" + genesis.id.str() + "'");
  }
  if (genesis.version != 0) return make_error(Errc::kJournalGap, "genesis must be version 0");
  if (exists(genesis.id)) return make_error(Errc::kInvalidName, "session exists");
  auto tail = tail_for(genesis.id);
  {
    std::lock_guard lock(tail->mu);
    JournalHeader header{genesis.id, 0, genesis};
    if (auto st = storage_->write_atomic(journal_key(genesis.id), render_journal(header, {})); !st) {
      return st;
    }
    tail->loaded = true;
    tail->base = 0;
    tail->last_seq = 0;
  }
  auto snap = write_snapshot(genesis);
  if (!snap) return snap.error();
  return ok_status();
}

Status SessionStore::load_tail(const SessionId& id, Tail& tail) const {
  if (tail.loaded) return ok_status();
  auto text = storage_->read(journal_key(id));
  if (!text) return make_error(Errc::kNoSuchSession, id.str());
  auto scan = scan_journal(*text);
  if (!scan) return scan.error();
  tail.base = scan->header.base;
  tail.last_seq = scan->header.base + scan->records.size();
  tail.last_snapshot_version = 0;
  tail.last_snapshot_at = clock_.now_us();
  for (const auto& key : storage_->list(snapshot_prefix(id))) {
    if (auto v = snapshot_version_of(key)) {
      tail.last_snapshot_version = std::max(tail.last_snapshot_version, *v);
    }
  }
  tail.loaded = true;
  return ok_status();
}

Status SessionStore::append(const SessionId& id, const Event& event) {
  auto tail = tail_for(id);
  std::lock_guard lock(tail->mu);
  if (auto st = load_tail(id, *tail); !st) return st;
  if (event.seq != tail->last_seq + 1) {
    return make_error(Errc::kJournalGap, "append seq " + std::to_string(event.seq) +
                                             " after " + std::to_string(tail->last_seq));
  }
  std::string line = encode_journal_record(event);
  line.push_back('\n');
  if (auto st = storage_->append(journal_key(id), line); !st) return st;
  tail->last_seq = event.seq;
  return ok_status();
}

bool SessionStore::snapshot_due(const Session& session) const {
  auto tail = tail_for(session.id);
  std::lock_guard lock(tail->mu);
  if (!tail->loaded || session.version <= tail->last_snapshot_version) return false;
  return session.version - tail->last_snapshot_version >= config_.snapshot_every_events ||
         clock_.now_us() - tail->last_snapshot_at >= config_.snapshot_every_us;
}

Result<SnapshotRecord> SessionStore::write_snapshot(const Session& session) {
  auto tail = tail_for(session.id);
  std::lock_guard lock(tail->mu);
  if (auto st = load_tail(session.id, *tail); !st) return st.error();
  SnapshotRecord record{session.version, clock_.now_ms(), session};
  if (auto st = storage_->write_atomic(snapshot_key(session.id, session.version),
                                       encode_snapshot(record));
      !st) {
    return st.error();
  }
  tail->last_snapshot_version = session.version;
  tail->last_snapshot_at = clock_.now_us();
  if (auto st = compact(session.id, *tail); !st) return st.error();
  return record;
}

Status SessionStore::compact(const SessionId& id, Tail& tail) {
  std::vector<std::pair<std::uint64_t, std::string>> snaps;
  for (const auto& key : storage_->list(snapshot_prefix(id))) {
    if (auto v = snapshot_version_of(key)) snaps.emplace_back(*v, key);
  }
  std::sort(snaps.begin(), snaps.end(), std::greater<>());
  for (std::size_t i = 2; i < snaps.size(); ++i) {
    if (auto st = storage_->remove(snaps[i].second); !st) return st;
  }
  if (!config_.compact_journal || snaps.size() < 2) return ok_status();
  const std::uint64_t new_base = snaps[1].first;
  if (new_base <= tail.base) return ok_status();
  auto text = storage_->read(journal_key(id));
  if (!text) return text.error();
  auto scan = scan_journal(*text);
  if (!scan) return scan.error();
  std::vector<Event> kept;
  for (auto& e : scan->records) {
    if (e.seq > new_base) kept.push_back(std::move(e));
  }
  JournalHeader header{id, new_base, std::nullopt};
  if (auto st = storage_->write_atomic(journal_key(id), render_journal(header, kept)); !st) {
    return st;
  }
  tail.base = new_base;
  return ok_status();
}

Result<Restored> SessionStore::restore(const SessionId& id) {
  if (!is_valid_session_id(id.str()) || !exists(id)) {
    return make_error(Errc::kNoSuchSession, id.str());
  }
  auto tail = tail_for(id);
  std::lock_guard lock(tail->mu);
  RestoreReport report;

  std::optional<JournalScan> journal;
  if (auto text = storage_->read(journal_key(id))) {
    if (auto scan = scan_journal(*text)) {
      journal = std::move(scan).value();
      if (journal->dropped_lines > 0) {
        report.truncated_records = journal->dropped_lines;
        if (auto st = storage_->write_atomic(journal_key(id),
                                             render_journal(journal->header, journal->records));
            !st) {
          return st.error();
        }
      }
    }
  }
  const std::uint64_t base = journal ? journal->header.base : 0;
  const std::uint64_t journal_last = journal ? base + journal->records.size() : 0;

  std::vector<std::pair<std::uint64_t, std::string>> snaps;
  for (const auto& key : storage_->list(snapshot_prefix(id))) {
    if (auto v = snapshot_version_of(key)) snaps.emplace_back(*v, key);
  }
  std::sort(snaps.begin(), snaps.end(), std::greater<>());

  std::optional<Session> start;
  for (const auto& [version, key] : snaps) {
    auto text = storage_->read(key);
    auto record = text ? decode_snapshot(*text) : Result<SnapshotRecord>(text.error());
    // A snapshot is only usable if the journal continues right after it.
    const bool connects = !journal || version >= base;
    if (!record || record->session.id != id || !connects) {
      ++report.rejected_snapshots;
      continue;
    }
    start = std::move(record->session);
    report.snapshot_version = version;
    break;
  }
  if (!start) {
    if (journal && journal->header.base == 0 && journal->header.genesis) {
      start = journal->header.genesis;
    } else {
      return make_error(Errc::kRestoreFailed, "no valid snapshot and genesis journal not retained");
    }
  }

  Session session = std::move(*start);
  if (journal) {
    for (const auto& event : journal->records) {
      if (event.seq <= session.version) continue;
      auto next = apply_event(session, event);
      if (!next) {
        return make_error(Errc::kRestoreFailed,
                          "replay of seq " + std::to_string(event.seq) + ": " +
                              next.error().to_string());
      }
      session = std::move(next).value();
      ++report.replayed_events;
    }
  }

  // A snapshot newer than the journal tail restarts the journal at that snapshot.
  if (!journal || journal_last < session.version) {
    JournalHeader header{id, session.version, std::nullopt};
    if (auto st = storage_->write_atomic(journal_key(id), render_journal(header, {})); !st) {
      return st.error();
    }
    tail->base = session.version;
  } else {
    tail->base = base;
  }
  tail->last_seq = session.version;
  tail->last_snapshot_version = report.snapshot_version.value_or(0);
  tail->last_snapshot_at = clock_.now_us();
  tail->loaded = true;
  return Restored{std::move(session), report};
}

Result<std::vector<Event>> SessionStore::events_after(const SessionId& id,
                                                      std::uint64_t after) const {
  if (!is_valid_session_id(id.str())) return make_error(Errc::kNoSuchSession, id.str());
  auto text = storage_->read(journal_key(id));
  if (!text) return make_error(Errc::kNoSuchSession, id.str());
  auto scan = scan_journal(*text);
  if (!scan) return scan.error();
  const std::uint64_t last = scan->header.base + scan->records.size();
  if (after < scan->header.base || after > last) {
    return make_error(Errc::kJournalGap, "journal holds " + std::to_string(scan->header.base + 1) +
                                             ".." + std::to_string(last));
  }
  std::vector<Event> out(scan->records.begin() + static_cast<std::ptrdiff_t>(after - scan->header.base),
                         scan->records.end());
  return out;
}

}  // namespace wow::persistence
