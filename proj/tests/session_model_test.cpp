#include <gtest/gtest.h>

#include <random>

#include "wow/layout/layout_engine.hpp"
#include "wow/session/reducer.hpp"

namespace wow {
namespace {

CommandMeta meta(const std::string& actor = "alice", std::int64_t t = 1000) {
  return CommandMeta{ParticipantId(actor), t, "r-" + std::to_string(t)};
}

class SessionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    session = *new_session(SessionId("s1"), "Design review");
    run(JoinParticipant{ParticipantId("alice"), "Alice", ParticipantRole::kPersonalDevice});
  }

  Session& run(const Command& c, const CommandMeta& m = meta()) {
    auto applied = apply_command(session, c, m);
    EXPECT_TRUE(applied.ok()) << (applied ? "" : applied.error().to_string());
    if (applied) session = std::move(applied->session);
    return session;
  }

  Errc reject(const Command& c, const CommandMeta& m = meta()) {
    auto applied = apply_command(session, c, m);
    EXPECT_FALSE(applied.ok());
    return applied ? Errc::kInternalGeometryError : applied.error().code;
  }

  ContentId upload(const std::string& title, ContentKind kind = ContentKind::kPdf) {
    ContentDescriptor d{kind, FileSource{std::string(64, 'a')}, title};
    if (kind == ContentKind::kWebLink) d.source = LinkSource{"https://example.org"};
    auto [next, id] = *register_content(session, d, meta());
    session = std::move(next);
    return id;
  }

  Session session;
};

TEST_F(SessionTest, NewSessionHasOneEmptyWall) {
  auto fresh = *new_session(SessionId("s9"), "Fresh");
  ASSERT_EQ(fresh.walls.size(), 1u);
  EXPECT_EQ(fresh.walls[0].name, "Wall 1");
  EXPECT_EQ(fresh.active_wall, fresh.walls[0].id);
  EXPECT_TRUE(fresh.walls[0].viewports.empty());
  EXPECT_EQ(fresh.version, 0u);
  EXPECT_EQ(new_session(SessionId("x"), "  ").error().code, Errc::kInvalidName);
  EXPECT_EQ(new_session(SessionId("x"), "ok", 0, 12).error().code, Errc::kInvalidGrid);
}

TEST_F(SessionTest, RegisteredContentLandsOnHiddenStack) {
  const auto id = upload("Slides");
  EXPECT_EQ(session.contents.at(id).uploader, ParticipantId("alice"));
  EXPECT_EQ(session.active().hidden_stack.front(), id);
  EXPECT_TRUE(audit_session(session).empty());
}

TEST_F(SessionTest, DescriptorMustMatchKind) {
  ContentDescriptor link{ContentKind::kWebLink, FileSource{"abc"}, "bad"};
  EXPECT_EQ(reject(RegisterContent{link, std::nullopt}), Errc::kInvalidContent);
  ContentDescriptor screen{ContentKind::kScreenShare, ScreenSource{ParticipantId("ghost"), "s"},
                           "share"};
  EXPECT_EQ(reject(RegisterContent{screen, std::nullopt}), Errc::kNoSuchEntity);
}

TEST_F(SessionTest, PresetKeepsContents) {
  const auto a = upload("A");
  const auto b = upload("B");
  run(ApplyPreset{std::nullopt, 2, 0});
  run(SetViewportContent{std::nullopt, session.active().viewports[0].id, a});
  run(SetViewportContent{std::nullopt, session.active().viewports[1].id, b});
  EXPECT_TRUE(session.active().hidden_stack.empty());
  run(ApplyPreset{std::nullopt, 1, 0});
  EXPECT_EQ(session.active().viewports.size(), 1u);
  EXPECT_EQ(session.active().viewports[0].content, a);
  EXPECT_EQ(session.active().hidden_stack, (std::vector<ContentId>{b}));
  EXPECT_EQ(reject(ApplyPreset{std::nullopt, 1, 99}), Errc::kUnsupportedPresetCount);
  EXPECT_EQ(reject(ApplyPreset{std::nullopt, 12, 0}), Errc::kUnsupportedPresetCount);
}

TEST_F(SessionTest, VersionAdvancesOnlyOnSuccess) {
  const auto before = session.version;
  reject(RestoreView{std::nullopt});
  EXPECT_EQ(session.version, before);
  run(CreateWall{"Second", 12, 12});
  EXPECT_EQ(session.version, before + 1);
}

TEST_F(SessionTest, WallsCanBeCreatedRenamedSwitchedDeleted) {
  run(CreateWall{"Second", 8, 4});
  const WallId second = session.walls.back().id;
  EXPECT_NE(session.active_wall, second);
  run(SwitchActiveWall{second});
  EXPECT_EQ(session.active().grid_cols, 8);
  run(RenameWall{second, "Renamed"});
  EXPECT_EQ(session.find_wall(second)->name, "Renamed");
  EXPECT_EQ(reject(RenameWall{second, ""}), Errc::kInvalidName);
  run(DeleteWall{second});
  EXPECT_EQ(session.active_wall, session.walls.front().id);
  EXPECT_EQ(reject(DeleteWall{session.walls.front().id}), Errc::kLastWall);
  EXPECT_EQ(reject(SwitchActiveWall{second}), Errc::kNoSuchEntity);
  EXPECT_EQ(reject(CreateWall{"Bad", 0, 3}), Errc::kInvalidGrid);
}

TEST_F(SessionTest, SwitchingToActiveWallStillVersions) {
  const auto v = session.version;
  run(SwitchActiveWall{session.active_wall});
  EXPECT_EQ(session.version, v + 1);
}

TEST_F(SessionTest, ViewStateRangesAreChecked) {
  const auto pdf = upload("Doc");
  run(UpdateContentState{pdf, 3, 0.5, 0.25, 2.0, std::nullopt});
  EXPECT_EQ(session.contents.at(pdf).view_state.page, 3);
  EXPECT_EQ(reject(UpdateContentState{pdf, 0, {}, {}, {}, {}}), Errc::kInvalidViewState);
  EXPECT_EQ(reject(UpdateContentState{pdf, {}, 1.5, {}, {}, {}}), Errc::kInvalidViewState);
  EXPECT_EQ(reject(UpdateContentState{pdf, {}, {}, {}, 0.0, {}}), Errc::kInvalidViewState);
  EXPECT_EQ(reject(UpdateContentState{pdf, {}, {}, {}, {}, 4.0}), Errc::kInvalidViewState);
  const auto video = upload("Clip", ContentKind::kVideo);
  run(UpdateContentState{video, {}, {}, {}, {}, 12.5});
  EXPECT_DOUBLE_EQ(session.contents.at(video).view_state.playhead, 12.5);
  EXPECT_EQ(reject(UpdateContentState{video, 2, {}, {}, {}, {}}), Errc::kInvalidViewState);
  EXPECT_EQ(reject(UpdateContentState{ContentId("c404"), 1, {}, {}, {}, {}}), Errc::kNoSuchEntity);
}

TEST_F(SessionTest, NotesAreAttributedAndQueryable) {
  const auto doc = upload("Doc");
  run(JoinParticipant{ParticipantId("bob"), "Bob", ParticipantRole::kTabletop});
  auto [s1, n1] = *add_note(session, doc, "check figure 2", meta("alice", 5));
  session = s1;
  auto [s2, n2] = *add_note(session, doc, "agreed", meta("bob", 6));
  session = s2;
  EXPECT_EQ(n1.author, ParticipantId("alice"));
  EXPECT_EQ(n2.created_at, 6);
  EXPECT_EQ(notes_for_content(session, doc).size(), 2u);
  EXPECT_EQ(notes_by_author(session, ParticipantId("bob")), (std::vector<Note>{n2}));
  EXPECT_EQ(reject(AddNote{doc, "   "}), Errc::kEmptyNote);
  EXPECT_EQ(reject(AddNote{doc, "hi"}, meta("stranger")), Errc::kNoSuchEntity);
  run(DeleteNote{n1.id});
  EXPECT_EQ(reject(DeleteNote{n1.id}), Errc::kNoSuchEntity);
}

TEST_F(SessionTest, LeavingEndsOwnedScreenShares) {
  run(JoinParticipant{ParticipantId("bob"), "Bob", ParticipantRole::kPersonalDevice});
  ContentDescriptor share{ContentKind::kScreenShare, ScreenSource{ParticipantId("bob"), "laptop"},
                          "Bob's screen"};
  run(RegisterContent{share, std::nullopt});
  const ContentId id = session.active().hidden_stack.front();
  run(LeaveParticipant{ParticipantId("bob")});
  EXPECT_TRUE(session.contents.at(id).ended);
  EXPECT_FALSE(session.participants.at(ParticipantId("bob")).connected);
  run(JoinParticipant{ParticipantId("bob"), "Bob", ParticipantRole::kPersonalDevice});
  EXPECT_TRUE(session.participants.at(ParticipantId("bob")).connected);
}

TEST_F(SessionTest, InsertWithUnknownContentIsRejected) {
  auto cands = layout::enumerate_insert_candidates(session.active());
  EXPECT_EQ(reject(InsertView{std::nullopt, cands->front(), ContentId("c999")}),
            Errc::kNoSuchEntity);
  EXPECT_EQ(reject(InsertView{WallId("w404"), cands->front(), std::nullopt}),
            Errc::kNoSuchEntity);
}

TEST_F(SessionTest, EventsReplayToSameState) {
  Session genesis = *new_session(SessionId("s1"), "Design review");
  std::vector<Event> log;
  Session live = genesis;
  auto step = [&](const Command& c, const CommandMeta& m) {
    auto applied = apply_command(live, c, m);
    ASSERT_TRUE(applied.ok());
    live = applied->session;
    log.push_back(applied->event);
  };
  step(JoinParticipant{ParticipantId("alice"), "Alice", ParticipantRole::kPersonalDevice},
       meta("alice", 1));
  step(RegisterContent{{ContentKind::kImage, FileSource{"ff"}, "Photo"}, std::nullopt},
       meta("alice", 2));
  step(ApplyPreset{std::nullopt, 3, 1}, meta("alice", 3));
  step(SwapViews{std::nullopt, HiddenSlot{0}, live.active().viewports[1].id}, meta("alice", 4));
  step(AddNote{ContentId("c2"), "nice"}, meta("alice", 5));

  Session replayed = genesis;
  for (const auto& e : log) {
    auto wire = event_from_json(nlohmann::json::parse(event_to_json(e).dump()));
    ASSERT_TRUE(wire.ok());
    replayed = *apply_event(replayed, *wire);
  }
  EXPECT_EQ(canonical(replayed), canonical(live));
  EXPECT_EQ(apply_event(genesis, log[1]).error().code, Errc::kJournalGap);
}

TEST_F(SessionTest, CanonicalFormRoundTrips) {
  upload("A");
  run(ApplyPreset{std::nullopt, 4, 0});
  const std::string text = canonical(session);
  auto back = session_from_canonical(text);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, session);
  EXPECT_EQ(canonical(*back), text);
  EXPECT_EQ(session_from_canonical("{not json").error().code, Errc::kCorrupt);
}

TEST(CommandJson, RejectsMalformed) {
  EXPECT_EQ(command_from_json(nlohmann::json::parse(R"({"type":"Teleport"})")).error().code,
            Errc::kMalformed);
  EXPECT_EQ(command_from_json(nlohmann::json::parse(R"({"type":"SwapViews","a":{"viewport":"v1"}})"))
                .error()
                .code,
            Errc::kMalformed);
  EXPECT_EQ(command_from_json(nlohmann::json::array()).error().code, Errc::kMalformed);
  auto ok = command_from_json(nlohmann::json::parse(R"({"type":"ApplyPreset","viewCount":4})"));
  ASSERT_TRUE(ok.ok());
  EXPECT_EQ(std::get<ApplyPreset>(*ok).view_count, 4);
}

// Random command streams: every accepted command keeps the session valid, and
// layout commands never change which contents a wall holds.
TEST(SessionProperties, RandomCommandsPreserveInvariants) {
  std::mt19937_64 rng(2024);
  Session s = *new_session(SessionId("p"), "prop");
  s = apply_command(s, JoinParticipant{ParticipantId("u"), "U", ParticipantRole::kTabletop},
                    meta("u"))
          ->session;
  auto pick_viewport = [&](const VirtualWall& w) -> ViewportId {
    if (w.viewports.empty()) return ViewportId("none");
    return w.viewports[rng() % w.viewports.size()].id;
  };
  auto multiset = [](const VirtualWall& w) {
    std::multiset<ContentId> out(w.hidden_stack.begin(), w.hidden_stack.end());
    for (const auto& v : w.viewports) {
      if (v.content) out.insert(*v.content);
    }
    return out;
  };
  int accepted = 0;
  for (int i = 0; i < 3000; ++i) {
    const VirtualWall& w = s.active();
    Command c;
    switch (rng() % 9) {
      case 0:
        c = RegisterContent{{ContentKind::kPdf, FileSource{"00"}, "doc"}, std::nullopt};
        break;
      case 1:
        c = ApplyPreset{std::nullopt, 1 + static_cast<int>(rng() % 9), static_cast<int>(rng() % 3)};
        break;
      case 2: {
        auto cands = layout::enumerate_insert_candidates(w);
        if (!cands) continue;
        c = InsertView{std::nullopt, (*cands)[rng() % cands->size()], std::nullopt};
        break;
      }
      case 3: {
        Slot b = pick_viewport(w);
        if (!w.hidden_stack.empty() && rng() % 2) b = HiddenSlot{rng() % w.hidden_stack.size()};
        c = SwapViews{std::nullopt, pick_viewport(w), b};
        break;
      }
      case 4:
        c = rng() % 2 ? Command(MaximizeView{std::nullopt, pick_viewport(w)})
                      : Command(RestoreView{std::nullopt});
        break;
      case 5:
        c = HideView{std::nullopt, pick_viewport(w)};
        break;
      case 6:
        c = DeleteView{std::nullopt, pick_viewport(w)};
        break;
      case 7: {
        if (w.hidden_stack.empty()) continue;
        c = SetViewportContent{std::nullopt, pick_viewport(w), w.hidden_stack.front()};
        break;
      }
      default:
        c = rng() % 2 ? Command(CreateWall{"extra", 12, 12})
                      : Command(SwitchActiveWall{s.walls[rng() % s.walls.size()].id});
        break;
    }
    const auto before = multiset(s.active());
    auto applied = apply_command(s, c, meta("u", i));
    if (!applied) continue;
    ++accepted;
    if (is_layout_command(c) && !std::holds_alternative<InsertView>(c)) {
      ASSERT_EQ(multiset(applied->session.active()), before) << command_name(c);
    }
    s = std::move(applied->session);
    ASSERT_TRUE(audit_session(s).empty()) << command_name(c);
  }
  EXPECT_GT(accepted, 1000);
}

}  // namespace
}  // namespace wow
