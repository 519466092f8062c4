#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "wow/layout/layout_engine.hpp"
#include "wow/persistence/blob_store.hpp"
#include "wow/persistence/session_store.hpp"
#include "wow/persistence/sha256.hpp"
#include "wow/session/reducer.hpp"

namespace wow::persistence {
namespace {

/// Drives a live session through a stream of mostly valid commands and
/// journals every accepted event.
class Recorder {
 public:
  Recorder(SessionStore& store, ManualClock& clock, SessionId id, std::uint64_t seed = 1)
      : store_(store), clock_(clock), rng_(seed) {
    live = *new_session(std::move(id), "Recorded");
    EXPECT_TRUE(store_.create(live).ok());
    step(JoinParticipant{ParticipantId("p1"), "P1", ParticipantRole::kWallDisplay});
  }

  bool step(const Command& c) {
    clock_.advance_ms(10);
    auto applied = apply_command(live, c, CommandMeta{ParticipantId("p1"), clock_.now_ms(),
                                                      "r" + std::to_string(++requests_)});
    if (!applied) return false;
    if (!store_.append(live.id, applied->event)) return false;
    live = std::move(applied->session);
    if (store_.snapshot_due(live)) {
      EXPECT_TRUE(store_.write_snapshot(live).ok());
    }
    return true;
  }

  /// Applies random commands until the session reaches `version`.
  void run_until(std::uint64_t version) {
    while (live.version < version) step(random_command());
  }

  Session live;

 private:
  Command random_command() {
    const VirtualWall& w = live.active();
    auto viewport = [&]() -> ViewportId {
      if (w.viewports.empty()) return ViewportId("none");
      return w.viewports[rng_() % w.viewports.size()].id;
    };
    switch (rng_() % 7) {
      case 0:
        return RegisterContent{{ContentKind::kImage, FileSource{std::string(64, 'b')}, "img"},
                               std::nullopt};
      case 1:
        return ApplyPreset{std::nullopt, 1 + static_cast<int>(rng_() % 9), 0};
      case 2: {
        auto cands = layout::enumerate_insert_candidates(w);
        if (!cands) return RestoreView{std::nullopt};
        return InsertView{std::nullopt, cands->front(), std::nullopt};
      }
      case 3:
        return SwapViews{std::nullopt, viewport(), viewport()};
      case 4:
        if (w.hidden_stack.empty()) return HideView{std::nullopt, viewport()};
        return SetViewportContent{std::nullopt, viewport(), w.hidden_stack.front()};
      case 5:
        return DeleteView{std::nullopt, viewport()};
      default:
        if (live.contents.empty()) return CreateWall{"extra", 12, 12};
        return AddNote{live.contents.begin()->first, "note " + std::to_string(rng_() % 100)};
    }
  }

  SessionStore& store_;
  ManualClock& clock_;
  std::mt19937_64 rng_;
  int requests_ = 0;
};

class StoreTest : public ::testing::Test {
 protected:
  std::shared_ptr<MemoryStorage> storage = std::make_shared<MemoryStorage>();
  ManualClock clock;
  SessionStore store{storage, clock};
  SessionId sid{"s1"};

  Event join_event(std::uint64_t seq) {
    Event e;
    e.seq = seq;
    e.request_id = "r" + std::to_string(seq);
    e.actor = ParticipantId("p");
    e.server_time = 5;
    e.command = JoinParticipant{ParticipantId("p"), "P", ParticipantRole::kTabletop};
    return e;
  }

  void flip_byte(const std::string& key, std::size_t from_end) {
    std::string text = *storage->read(key);
    text[text.size() - from_end] ^= 0x01;
    storage->poke(key, text);
  }
};

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(StoreTest, AppendEnforcesSequence) {
  ASSERT_TRUE(store.create(*new_session(sid, "S")).ok());
  EXPECT_TRUE(store.append(sid, join_event(1)).ok());
  auto gap = store.append(sid, join_event(3));
  ASSERT_FALSE(gap.ok());
  EXPECT_EQ(gap.error().code, Errc::kJournalGap);
  EXPECT_EQ(store.append(sid, join_event(1)).error().code, Errc::kJournalGap);
  EXPECT_TRUE(store.append(sid, join_event(2)).ok());
}

TEST_F(StoreTest, CreateRejectsBadOrDuplicateIds) {
  EXPECT_EQ(store.create(*new_session(SessionId("../x"), "S")).error().code, Errc::kInvalidName);
  ASSERT_TRUE(store.create(*new_session(sid, "S")).ok());
  EXPECT_EQ(store.create(*new_session(sid, "S")).error().code, Errc::kInvalidName);
  EXPECT_EQ(store.list_sessions(), (std::vector<SessionId>{sid}));
}

TEST_F(StoreTest, StorageFailureSurfacesAsUnavailable) {
  auto faulty = std::make_shared<FaultyStorage>(storage);
  SessionStore s(faulty, clock);
  ASSERT_TRUE(s.create(*new_session(sid, "S")).ok());
  faulty->set_failing(true);
  EXPECT_EQ(s.append(sid, join_event(1)).error().code, Errc::kStorageUnavailable);
  faulty->set_failing(false);
  EXPECT_TRUE(s.append(sid, join_event(1)).ok());
  auto restored = s.restore(sid);
  EXPECT_EQ(restored->session.version, 1u);
}

TEST_F(StoreTest, EmptySessionSnapshotRoundTrips) {
  const Session genesis = *new_session(sid, "S");
  ASSERT_TRUE(store.create(genesis).ok());
  auto text = storage->read(snapshot_key(sid, 0));
  ASSERT_TRUE(text.ok());
  auto record = decode_snapshot(*text);
  ASSERT_TRUE(record.ok());
  EXPECT_EQ(record->version, 0u);
  EXPECT_EQ(canonical(record->session), canonical(genesis));
  auto restored = store.restore(sid);
  ASSERT_TRUE(restored.ok());
  EXPECT_EQ(restored->report.snapshot_version, 0u);
  EXPECT_EQ(canonical(restored->session), canonical(genesis));
}

TEST_F(StoreTest, UnknownSessionCannotBeRestored) {
  EXPECT_EQ(store.restore(SessionId("nope")).error().code, Errc::kNoSuchSession);
  EXPECT_EQ(store.restore(SessionId("../etc")).error().code, Errc::kNoSuchSession);
}

TEST_F(StoreTest, RestoreMatchesLiveStateAtEveryPrefix) {
  Recorder rec(store, clock, sid, 17);
  for (int i = 0; i < 60; ++i) {
    rec.run_until(rec.live.version + 1);
    SessionStore fresh(storage, clock);
    auto restored = fresh.restore(sid);
    ASSERT_TRUE(restored.ok()) << restored.error().to_string();
    ASSERT_EQ(canonical(restored->session), canonical(rec.live)) << "prefix " << rec.live.version;
  }
}

TEST_F(StoreTest, CorruptTailIsTruncatedAndReported) {
  Recorder rec(store, clock, sid);
  rec.run_until(136);
  const Session at_136 = rec.live;
  rec.run_until(137);
  ASSERT_EQ(rec.live.version, 137u);
  flip_byte(journal_key(sid), 20);

  SessionStore fresh(storage, clock);
  auto restored = fresh.restore(sid);
  ASSERT_TRUE(restored.ok());
  EXPECT_EQ(restored->session.version, 136u);
  EXPECT_EQ(restored->report.truncated_records, 1u);
  EXPECT_EQ(canonical(restored->session), canonical(at_136));
  // The journal accepts seq 137 again after truncation.
  Event again = join_event(137);
  EXPECT_TRUE(fresh.append(sid, again).ok());
}

TEST_F(StoreTest, UnterminatedTailLineIsDropped) {
  Recorder rec(store, clock, sid);
  rec.run_until(5);
  ASSERT_TRUE(storage->append(journal_key(sid), R"({"seq":6,"requestId")").ok());
  auto restored = SessionStore(storage, clock).restore(sid);
  EXPECT_EQ(restored->session.version, 5u);
  EXPECT_EQ(restored->report.truncated_records, 1u);
}

TEST_F(StoreTest, SnapshotCadenceBoundsReplay) {
  Recorder rec(store, clock, sid, 3);
  rec.run_until(1234);
  auto restored = SessionStore(storage, clock).restore(sid);
  ASSERT_TRUE(restored.ok());
  EXPECT_LT(restored->report.replayed_events, 500u);
  EXPECT_EQ(canonical(restored->session), canonical(rec.live));
  EXPECT_EQ(storage->list("sessions/s1/snapshots/").size(), 2u);
}

TEST_F(StoreTest, TimeCadenceTriggersSnapshot) {
  Recorder rec(store, clock, sid);
  rec.run_until(3);
  EXPECT_FALSE(store.snapshot_due(rec.live));
  clock.advance_ms(60'000);
  EXPECT_TRUE(store.snapshot_due(rec.live));
  ASSERT_TRUE(store.write_snapshot(rec.live).ok());
  EXPECT_FALSE(store.snapshot_due(rec.live));
}

TEST_F(StoreTest, BadSnapshotFallsBackToPrevious) {
  Recorder rec(store, clock, sid, 5);
  rec.run_until(1100);  // snapshots at 500 and 1000 remain
  flip_byte(snapshot_key(sid, 1000), 70);
  auto restored = SessionStore(storage, clock).restore(sid);
  ASSERT_TRUE(restored.ok());
  EXPECT_EQ(restored->report.rejected_snapshots, 1);
  EXPECT_EQ(restored->report.snapshot_version, 500u);
  EXPECT_EQ(canonical(restored->session), canonical(rec.live));
}

TEST_F(StoreTest, ReplaysFromGenesisWhenSnapshotsAreBad) {
  Recorder rec(store, clock, sid);
  rec.run_until(40);
  flip_byte(snapshot_key(sid, 0), 30);
  auto restored = SessionStore(storage, clock).restore(sid);
  ASSERT_TRUE(restored.ok());
  EXPECT_FALSE(restored->report.snapshot_version.has_value());
  EXPECT_EQ(restored->report.replayed_events, 40u);
  EXPECT_EQ(canonical(restored->session), canonical(rec.live));
}

TEST_F(StoreTest, FailsWhenNothingUsableRemains) {
  Recorder rec(store, clock, sid, 9);
  rec.run_until(1100);  // journal compacted past genesis
  flip_byte(snapshot_key(sid, 1000), 70);
  flip_byte(snapshot_key(sid, 500), 70);
  auto restored = SessionStore(storage, clock).restore(sid);
  ASSERT_FALSE(restored.ok());
  EXPECT_EQ(restored.error().code, Errc::kRestoreFailed);
}

TEST_F(StoreTest, SnapshotPlusReplayEqualsGenesisReplay) {
  SessionStore keep_all(storage, clock, PersistenceConfig{50, 60'000'000, false});
  Recorder rec(keep_all, clock, sid, 21);
  rec.run_until(180);
  auto from_snapshot = SessionStore(storage, clock).restore(sid);
  ASSERT_TRUE(from_snapshot.ok());
  EXPECT_EQ(from_snapshot->report.snapshot_version, 150u);
  for (const auto& key : storage->list("sessions/s1/snapshots/")) ASSERT_TRUE(storage->remove(key));
  auto from_genesis = SessionStore(storage, clock).restore(sid);
  ASSERT_TRUE(from_genesis.ok());
  EXPECT_EQ(from_genesis->report.replayed_events, 180u);
  EXPECT_EQ(canonical(from_genesis->session), canonical(from_snapshot->session));
}

TEST_F(StoreTest, BacklogAndGaps) {
  Recorder rec(store, clock, sid);
  rec.run_until(44);
  auto backlog = store.events_after(sid, 40);
  ASSERT_TRUE(backlog.ok());
  ASSERT_EQ(backlog->size(), 4u);
  EXPECT_EQ(backlog->front().seq, 41u);
  EXPECT_TRUE(store.events_after(sid, 44)->empty());
  EXPECT_EQ(store.events_after(sid, 45).error().code, Errc::kJournalGap);
  EXPECT_EQ(store.events_after(SessionId("zz"), 0).error().code, Errc::kNoSuchSession);
}

TEST_F(StoreTest, CompactedJournalReportsGap) {
  SessionStore small(storage, clock, PersistenceConfig{10, 60'000'000, true});
  Recorder rec(small, clock, sid);
  rec.run_until(25);  // snapshots 10 and 20 kept; journal starts after 10
  EXPECT_EQ(small.events_after(sid, 5).error().code, Errc::kJournalGap);
  EXPECT_EQ(small.events_after(sid, 12)->size(), rec.live.version - 12);
}

TEST(JournalRecord, RoundTripsAndDetectsTampering) {
  Event e;
  e.seq = 7;
  e.request_id = "abc";
  e.actor = ParticipantId("p");
  e.server_time = 99;
  e.command = SwapViews{std::nullopt, ViewportId("v1"), HiddenSlot{2}};
  const std::string line = encode_journal_record(e);
  auto back = decode_journal_record(line);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(encode_journal_record(*back), line);
  std::string tampered = line;
  tampered[tampered.find("abc")] = 'x';
  EXPECT_EQ(decode_journal_record(tampered).error().code, Errc::kCorrupt);
}

TEST(FileStorageTest, PersistsAcrossInstances) {
  const auto root = std::filesystem::temp_directory_path() / ("wow-fs-" + std::to_string(::getpid()));
  std::filesystem::remove_all(root);
  {
    FileStorage fs(root);
    ASSERT_TRUE(fs.append("sessions/a/journal.log", "one\n").ok());
    ASSERT_TRUE(fs.append("sessions/a/journal.log", "two\n").ok());
    ASSERT_TRUE(fs.write_atomic("sessions/a/snapshots/1.snap", "x").ok());
    EXPECT_FALSE(fs.append("../escape", "x").ok());
  }
  FileStorage again(root);
  EXPECT_EQ(*again.read("sessions/a/journal.log"), "one\ntwo\n");
  EXPECT_EQ(again.list("sessions/a/"),
            (std::vector<std::string>{"sessions/a/journal.log", "sessions/a/snapshots/1.snap"}));
  EXPECT_EQ(again.read("missing").error().code, Errc::kNoSuchEntity);
  ASSERT_TRUE(again.remove("sessions/a/snapshots/1.snap").ok());
  EXPECT_FALSE(again.exists("sessions/a/snapshots/1.snap"));
  std::filesystem::remove_all(root);
}

TEST(FileStorageTest, CrashReplayOnDisk) {
  const auto root = std::filesystem::temp_directory_path() / ("wow-crash-" + std::to_string(::getpid()));
  std::filesystem::remove_all(root);
  ManualClock clock;
  Session live;
  {
    auto fs = std::make_shared<FileStorage>(root);
    SessionStore store(fs, clock);
    Recorder rec(store, clock, SessionId("disk"), 4);
    rec.run_until(137);
    live = rec.live;
  }
  SessionStore reopened(std::make_shared<FileStorage>(root), clock);
  auto restored = reopened.restore(SessionId("disk"));
  ASSERT_TRUE(restored.ok());
  EXPECT_EQ(canonical(restored->session), canonical(live));
  std::filesystem::remove_all(root);
}

TEST(BlobStoreTest, ContentAddressedAndDeduplicated) {
  auto storage = std::make_shared<MemoryStorage>();
  BlobStore blobs(storage);
  std::string bytes("%PDF-1.4\n\0binary", 16);
  auto first = blobs.put(bytes, "application/pdf");
  auto second = blobs.put(bytes, "application/pdf");
  ASSERT_TRUE(first.ok());
  EXPECT_EQ(first->hash, sha256_hex(bytes));
  EXPECT_EQ(first->hash, second->hash);
  EXPECT_EQ(storage->list("blobs/").size(), 2u);  // data plus metadata
  auto got = blobs.get(first->hash);
  ASSERT_TRUE(got.ok());
  EXPECT_EQ(got->bytes, bytes);
  EXPECT_EQ(got->info.media_type, "application/pdf");
  EXPECT_EQ(blobs.get(std::string(64, '0')).error().code, Errc::kNoSuchEntity);
  EXPECT_EQ(blobs.get("../../etc/passwd").error().code, Errc::kNoSuchEntity);
}

}  // namespace
}  // namespace wow::persistence
