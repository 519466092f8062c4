#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "support/layout_oracle.hpp"
#include "wow/layout/layout_engine.hpp"

namespace wow {
namespace {

using layout::apply_insert;
using layout::delete_view;
using layout::enumerate_insert_candidates;
using layout::hide_view;
using layout::maximal_empty_rectangles;
using layout::maximize_view;
using layout::restore_view;
using layout::swap_views;

VirtualWall wall_with(std::vector<GridRect> rects, int cols = 12, int rows = 12) {
  VirtualWall w;
  w.id = WallId("w1");
  w.name = "Wall 1";
  w.grid_cols = cols;
  w.grid_rows = rows;
  int i = 1;
  for (const auto& r : rects) {
    w.viewports.push_back(
        Viewport{ViewportId("v" + std::to_string(i)), r, ContentId("c" + std::to_string(i))});
    ++i;
  }
  return w;
}

std::vector<GridRect> sorted(std::vector<GridRect> rects) {
  std::sort(rects.begin(), rects.end(), row_major_less);
  return rects;
}

std::map<std::string, int> content_multiset(const VirtualWall& w) {
  std::map<std::string, int> out;
  for (const auto& v : w.viewports) {
    if (v.content) ++out[v.content->str()];
  }
  for (const auto& c : w.hidden_stack) ++out[c.str()];
  return out;
}

TEST(Presets, SingleViewFillsWall) {
  auto catalog = layout::preset_catalog(1);
  ASSERT_TRUE(catalog.ok());
  ASSERT_FALSE(catalog->empty());
  EXPECT_EQ(catalog->front().rects, (std::vector<GridRect>{{0, 0, 12, 12}}));
}

TEST(Presets, FourViewsIncludeQuartering) {
  auto catalog = layout::preset_catalog(4);
  ASSERT_TRUE(catalog.ok());
  const std::vector<GridRect> quarters{{0, 0, 6, 6}, {6, 0, 6, 6}, {0, 6, 6, 6}, {6, 6, 6, 6}};
  EXPECT_EQ(catalog->front().rects, quarters);
}

TEST(Presets, NineViewsIncludeThreeByThree) {
  auto catalog = layout::preset_catalog(9);
  ASSERT_TRUE(catalog.ok());
  std::vector<GridRect> ninths;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) ninths.push_back(GridRect{c * 4, r * 4, 4, 4});
  }
  const bool found = std::any_of(catalog->begin(), catalog->end(), [&](const PresetLayout& p) {
    return sorted(p.rects) == sorted(ninths);
  });
  EXPECT_TRUE(found);
}

TEST(Presets, EveryPresetTilesTheGridExactly) {
  for (auto [cols, rows] : {std::pair{12, 12}, std::pair{12, 2}, std::pair{7, 5}}) {
    for (int n = 1; n <= 9; ++n) {
      auto catalog = layout::preset_catalog(n, cols, rows);
      if (!catalog) {
        EXPECT_EQ(catalog.error().code, Errc::kUnsupportedPresetCount);
        continue;
      }
      for (const auto& p : *catalog) {
        EXPECT_EQ(static_cast<int>(p.rects.size()), n);
        EXPECT_TRUE(layout::validate_layout(cols, rows, p.rects).ok());
        int area = 0;
        for (const auto& r : p.rects) area += r.area();
        EXPECT_EQ(area, cols * rows) << n << " views, variant " << p.variant_index;
      }
    }
  }
}

TEST(Presets, CatalogIsDeterministic) {
  for (int n = 1; n <= 9; ++n) {
    auto a = layout::preset_catalog(n);
    auto b = layout::preset_catalog(n);
    ASSERT_EQ(a->size(), b->size());
    for (std::size_t i = 0; i < a->size(); ++i) {
      EXPECT_EQ((*a)[i].rects, (*b)[i].rects);
      EXPECT_EQ((*a)[i].variant_index, static_cast<int>(i));
    }
  }
}

TEST(Presets, OutOfRangeCountIsRejected) {
  EXPECT_EQ(layout::preset_catalog(0).error().code, Errc::kUnsupportedPresetCount);
  EXPECT_EQ(layout::preset_catalog(10).error().code, Errc::kUnsupportedPresetCount);
}

TEST(ValidateLayout, ReportsViolations) {
  const std::vector<GridRect> full{{0, 0, 12, 12}};
  EXPECT_TRUE(layout::validate_layout(12, 12, full).ok());

  const std::vector<GridRect> overlapping{{0, 0, 8, 12}, {6, 0, 6, 12}};
  auto v = layout::validate_layout(12, 12, overlapping);
  ASSERT_EQ(v.violations.size(), 1u);
  EXPECT_EQ(v.violations[0], (Violation{Violation::Kind::kOverlap, 0, 1}));

  const std::vector<GridRect> wide{{0, 0, 13, 1}};
  v = layout::validate_layout(12, 12, wide);
  ASSERT_EQ(v.violations.size(), 1u);
  EXPECT_EQ(v.violations[0].kind, Violation::Kind::kOutOfBounds);
  EXPECT_EQ(v.violations[0].first, 0u);
}

TEST(ValidateLayout, ListsEveryViolation) {
  const std::vector<GridRect> rects{{0, 0, 6, 6}, {3, 3, 6, 6}, {5, 5, 2, 2}, {10, 10, 5, 1}};
  auto v = layout::validate_layout(12, 12, rects);
  EXPECT_EQ(v.describe(), "OutOfBounds(3), Overlap(0,1), Overlap(0,2), Overlap(1,2)");
}

TEST(CustomLayout, BuildsStepByStep) {
  auto first = layout::build_custom_step({}, GridRect{0, 0, 6, 12}, 12, 12);
  ASSERT_TRUE(first.ok());
  EXPECT_EQ(*first, (std::vector<GridRect>{{0, 0, 6, 12}}));
  auto second = layout::build_custom_step(*first, GridRect{6, 0, 6, 12}, 12, 12);
  ASSERT_TRUE(second.ok());
  EXPECT_EQ(second->size(), 2u);
  auto clash = layout::build_custom_step(*first, GridRect{5, 0, 7, 12}, 12, 12);
  ASSERT_FALSE(clash.ok());
  EXPECT_EQ(clash.error().code, Errc::kRejectedRect);
  EXPECT_NE(clash.error().detail.find("Overlap"), std::string::npos);
}

TEST(MaximalEmpty, Examples) {
  EXPECT_EQ(maximal_empty_rectangles(wall_with({})), (std::vector<GridRect>{{0, 0, 12, 12}}));
  EXPECT_EQ(maximal_empty_rectangles(wall_with({{0, 0, 6, 12}})),
            (std::vector<GridRect>{{6, 0, 6, 12}}));
  // Two diagonal quarters leave exactly the other two quarters.
  EXPECT_EQ(maximal_empty_rectangles(wall_with({{0, 0, 6, 6}, {6, 6, 6, 6}})),
            (std::vector<GridRect>{{6, 0, 6, 6}, {0, 6, 6, 6}}));
  EXPECT_TRUE(maximal_empty_rectangles(wall_with({{0, 0, 12, 12}})).empty());
}

TEST(MaximalEmpty, MatchesExhaustiveScan) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const int cols = 2 + static_cast<int>(rng() % 7);
    const int rows = 2 + static_cast<int>(rng() % 7);
    auto wall = testing::random_wall(rng, cols, rows, 6);
    EXPECT_EQ(sorted(maximal_empty_rectangles(wall)), sorted(testing::oracle_maximal_empty(wall)));
  }
}

TEST(InsertCandidates, SingleFullViewportOffersBothHalves) {
  auto wall = wall_with({{0, 0, 12, 12}});
  auto cands = enumerate_insert_candidates(wall);
  ASSERT_TRUE(cands.ok());
  ASSERT_EQ(cands->size(), 2u);
  for (const auto& c : *cands) EXPECT_EQ(c.kind, CandidateKind::kHalve);
  EXPECT_EQ((*cands)[0].new_rect, (GridRect{6, 0, 6, 12}));
  EXPECT_EQ((*cands)[0].resized, (std::vector<ResizedViewport>{{ViewportId("v1"), {0, 0, 6, 12}}}));
  EXPECT_EQ((*cands)[1].new_rect, (GridRect{0, 6, 12, 6}));
  EXPECT_EQ((*cands)[1].resized, (std::vector<ResizedViewport>{{ViewportId("v1"), {0, 0, 12, 6}}}));
}

TEST(InsertCandidates, EmptyHalfRanksFirst) {
  auto cands = enumerate_insert_candidates(wall_with({{0, 0, 6, 12}}));
  ASSERT_TRUE(cands.ok());
  EXPECT_EQ(cands->front().kind, CandidateKind::kEmptySpace);
  EXPECT_EQ(cands->front().new_rect, (GridRect{6, 0, 6, 12}));
  EXPECT_TRUE(cands->front().resized.empty());
}

TEST(InsertCandidates, SaturatedGridHasNoPlacement) {
  std::vector<GridRect> cells;
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 12; ++c) cells.push_back(GridRect{c, r, 1, 1});
  }
  auto cands = enumerate_insert_candidates(wall_with(cells));
  ASSERT_FALSE(cands.ok());
  EXPECT_EQ(cands.error().code, Errc::kNoPlacementAvailable);
}

TEST(InsertCandidates, OddSpanSplitsCeilFloor) {
  auto cands = enumerate_insert_candidates(wall_with({{0, 0, 5, 3}}, 5, 3));
  ASSERT_TRUE(cands.ok());
  std::vector<std::pair<GridRect, GridRect>> halves;
  for (const auto& c : *cands) {
    if (c.kind == CandidateKind::kHalve) halves.emplace_back(c.resized[0].rect, c.new_rect);
  }
  ASSERT_EQ(halves.size(), 2u);
  EXPECT_EQ(halves[0], (std::pair{GridRect{0, 0, 3, 3}, GridRect{3, 0, 2, 3}}));
  EXPECT_EQ(halves[1], (std::pair{GridRect{0, 0, 5, 2}, GridRect{0, 2, 5, 1}}));
}

TEST(InsertCandidates, ShrinkBetweenOpensTwoCellGap) {
  auto wall = wall_with({{0, 0, 6, 12}, {6, 0, 6, 12}});
  auto cands = enumerate_insert_candidates(wall);
  ASSERT_TRUE(cands.ok());
  auto it = std::find_if(cands->begin(), cands->end(), [](const InsertCandidate& c) {
    return c.kind == CandidateKind::kShrinkBetween;
  });
  ASSERT_NE(it, cands->end());
  EXPECT_EQ(it->new_rect, (GridRect{5, 0, 2, 12}));
  EXPECT_EQ(it->resized, (std::vector<ResizedViewport>{{ViewportId("v1"), {0, 0, 5, 12}},
                                                      {ViewportId("v2"), {7, 0, 5, 12}}}));
  // Misaligned neighbours cannot donate.
  auto skew = enumerate_insert_candidates(wall_with({{0, 0, 6, 6}, {6, 1, 6, 6}}));
  for (const auto& c : *skew) EXPECT_NE(c.kind, CandidateKind::kShrinkBetween);
}

TEST(InsertCandidates, OrderedByKindAreaThenPosition) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    auto wall = testing::random_wall(rng, 8, 6, 5);
    auto cands = enumerate_insert_candidates(wall);
    if (!cands) continue;
    for (std::size_t k = 1; k < cands->size(); ++k) {
      const auto& a = (*cands)[k - 1];
      const auto& b = (*cands)[k];
      const int pa = 2 - static_cast<int>(a.kind);
      const int pb = 2 - static_cast<int>(b.kind);
      ASSERT_GE(pa, pb);
      if (pa != pb) continue;
      ASSERT_GE(a.new_rect.area(), b.new_rect.area());
      if (a.new_rect.area() != b.new_rect.area()) continue;
      ASSERT_LE(std::pair(a.new_rect.row, a.new_rect.col), std::pair(b.new_rect.row, b.new_rect.col));
    }
  }
}

TEST(InsertCandidates, MatchesBruteForceOracle) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 400; ++i) {
    const int cols = 2 + static_cast<int>(rng() % 6);
    const int rows = 2 + static_cast<int>(rng() % 6);
    auto wall = testing::random_wall(rng, cols, rows, 5);
    auto expected = testing::oracle_insert_candidates(wall);
    auto cands = enumerate_insert_candidates(wall);
    std::set<testing::CandidateKey> got;
    if (cands) {
      for (const auto& c : *cands) got.insert(testing::key_of(c));
    } else {
      EXPECT_EQ(cands.error().code, Errc::kNoPlacementAvailable);
    }
    EXPECT_EQ(got, expected) << "wall " << nlohmann::json(wall).dump();
  }
}

TEST(InsertCandidates, MaximizedWallIsRejected) {
  auto wall = maximize_view(wall_with({{0, 0, 6, 12}}), ViewportId("v1"));
  EXPECT_EQ(enumerate_insert_candidates(*wall).error().code, Errc::kWallMaximized);
}

TEST(ApplyInsert, HalveSplitsTheView) {
  auto wall = wall_with({{0, 0, 12, 12}});
  auto cands = enumerate_insert_candidates(wall);
  auto next = apply_insert(wall, cands->front(), ContentId("c9"), ViewportId("v9"));
  ASSERT_TRUE(next.ok());
  ASSERT_EQ(next->viewports.size(), 2u);
  EXPECT_EQ(next->viewports[0].rect, (GridRect{0, 0, 6, 12}));
  EXPECT_EQ(next->viewports[1].rect, (GridRect{6, 0, 6, 12}));
  EXPECT_EQ(next->viewports[1].content, ContentId("c9"));
  EXPECT_TRUE(layout::audit_wall(*next).empty());
}

TEST(ApplyInsert, EmptySpaceLeavesNeighbourUntouched) {
  auto wall = wall_with({{0, 0, 6, 12}});
  auto cands = enumerate_insert_candidates(wall);
  auto next = apply_insert(wall, cands->front(), std::nullopt, ViewportId("v2"));
  ASSERT_TRUE(next.ok());
  EXPECT_EQ(next->viewports[0], wall.viewports[0]);
  EXPECT_EQ(next->viewports[1].rect, (GridRect{6, 0, 6, 12}));
  EXPECT_FALSE(next->viewports[1].content.has_value());
}

TEST(ApplyInsert, HiddenContentMovesIntoNewView) {
  auto wall = wall_with({{0, 0, 6, 12}});
  wall.hidden_stack = {ContentId("c7")};
  auto cands = enumerate_insert_candidates(wall);
  auto next = apply_insert(wall, cands->front(), ContentId("c7"), ViewportId("v2"));
  ASSERT_TRUE(next.ok());
  EXPECT_TRUE(next->hidden_stack.empty());
  EXPECT_EQ(content_multiset(*next), content_multiset(wall));
}

TEST(ApplyInsert, StaleCandidateAfterGeometryChange) {
  auto wall = wall_with({{0, 0, 6, 12}, {6, 0, 6, 12}});
  auto cands = enumerate_insert_candidates(wall);
  auto changed = delete_view(wall, ViewportId("v2"));
  auto next = apply_insert(*changed, cands->front(), std::nullopt, ViewportId("v3"));
  ASSERT_FALSE(next.ok());
  EXPECT_EQ(next.error().code, Errc::kStaleCandidate);
}

TEST(ApplyInsert, ContentSwapDoesNotStaleCandidates) {
  auto wall = wall_with({{0, 0, 6, 12}, {6, 0, 6, 12}});
  auto cands = enumerate_insert_candidates(wall);
  auto swapped = swap_views(wall, ViewportId("v1"), ViewportId("v2"));
  EXPECT_TRUE(apply_insert(*swapped, cands->front(), std::nullopt, ViewportId("v3")).ok());
}

TEST(ApplyInsert, ForgedCandidateIsRejected) {
  auto wall = wall_with({{0, 0, 12, 12}});
  auto cands = enumerate_insert_candidates(wall);
  InsertCandidate forged = cands->front();
  forged.resized[0].rect = GridRect{0, 0, 2, 12};
  auto next = apply_insert(wall, forged, std::nullopt, ViewportId("v2"));
  ASSERT_FALSE(next.ok());
  EXPECT_EQ(next.error().code, Errc::kStaleCandidate);
}

TEST(Swap, IdentityInvolutionAndStackExchange) {
  auto wall = wall_with({{0, 0, 6, 12}, {6, 0, 6, 12}});
  EXPECT_EQ(*swap_views(wall, ViewportId("v1"), ViewportId("v1")), wall);
  auto once = swap_views(wall, ViewportId("v1"), ViewportId("v2"));
  EXPECT_EQ(once->viewports[0].content, ContentId("c2"));
  EXPECT_EQ(*swap_views(*once, ViewportId("v1"), ViewportId("v2")), wall);

  wall.hidden_stack = {ContentId("c9")};
  auto with_stack = swap_views(wall, ViewportId("v1"), HiddenSlot{0});
  EXPECT_EQ(with_stack->viewports[0].content, ContentId("c9"));
  EXPECT_EQ(with_stack->hidden_stack, (std::vector<ContentId>{ContentId("c1")}));
  for (std::size_t i = 0; i < wall.viewports.size(); ++i) {
    EXPECT_EQ(with_stack->viewports[i].rect, wall.viewports[i].rect);
    EXPECT_EQ(with_stack->viewports[i].id, wall.viewports[i].id);
  }
}

TEST(Swap, EmptyViewportTakesHiddenContent) {
  auto wall = wall_with({{0, 0, 6, 12}});
  wall.viewports[0].content.reset();
  wall.hidden_stack = {ContentId("c5"), ContentId("c6")};
  auto next = swap_views(wall, HiddenSlot{1}, ViewportId("v1"));
  EXPECT_EQ(next->viewports[0].content, ContentId("c6"));
  EXPECT_EQ(next->hidden_stack, (std::vector<ContentId>{ContentId("c5")}));
}

TEST(Swap, UnknownSlot) {
  auto wall = wall_with({{0, 0, 6, 12}});
  EXPECT_EQ(swap_views(wall, ViewportId("v1"), ViewportId("nope")).error().code,
            Errc::kNoSuchSlot);
  EXPECT_EQ(swap_views(wall, ViewportId("v1"), HiddenSlot{0}).error().code, Errc::kNoSuchSlot);
}

TEST(Maximize, RoundTripIsExact) {
  auto wall = wall_with({{0, 0, 6, 12}, {6, 0, 6, 12}});
  auto max = maximize_view(wall, ViewportId("v1"));
  ASSERT_TRUE(max.ok());
  EXPECT_EQ(max->maximized, ViewportId("v1"));
  EXPECT_EQ(max->viewports, wall.viewports);
  EXPECT_EQ(*restore_view(*max), wall);
  EXPECT_EQ(maximize_view(*max, ViewportId("v2")).error().code, Errc::kAlreadyMaximized);
  EXPECT_EQ(restore_view(wall).error().code, Errc::kNotMaximized);
  EXPECT_EQ(maximize_view(wall, ViewportId("vX")).error().code, Errc::kNoSuchSlot);
}

TEST(Hide, PushesContentOnStackTop) {
  auto wall = wall_with({{0, 0, 6, 12}});
  wall.hidden_stack = {ContentId("c8")};
  auto hidden = hide_view(wall, ViewportId("v1"));
  ASSERT_TRUE(hidden.ok());
  EXPECT_FALSE(hidden->viewports[0].content.has_value());
  EXPECT_EQ(hidden->hidden_stack.front(), ContentId("c1"));
  EXPECT_EQ(*swap_views(*hidden, ViewportId("v1"), HiddenSlot{0}), wall);
  EXPECT_EQ(hide_view(*hidden, ViewportId("v1")).error().code, Errc::kNothingToHide);
  EXPECT_EQ(hide_view(wall, ViewportId("v7")).error().code, Errc::kNoSuchSlot);
}

TEST(Delete, KeepsContentAndFreesSpace) {
  auto only = wall_with({{0, 0, 12, 12}});
  auto gone = delete_view(only, ViewportId("v1"));
  ASSERT_TRUE(gone.ok());
  EXPECT_TRUE(gone->viewports.empty());
  EXPECT_EQ(gone->hidden_stack, (std::vector<ContentId>{ContentId("c1")}));

  auto empty_view = wall_with({{0, 0, 6, 12}, {6, 0, 6, 12}});
  empty_view.viewports[1].content.reset();
  auto after = delete_view(empty_view, ViewportId("v2"));
  EXPECT_TRUE(after->hidden_stack.empty());

  auto cands = enumerate_insert_candidates(*after);
  const bool covers = std::any_of(cands->begin(), cands->end(), [](const InsertCandidate& c) {
    return c.kind == CandidateKind::kEmptySpace && c.new_rect.contains(GridRect{6, 0, 6, 12});
  });
  EXPECT_TRUE(covers);
  EXPECT_EQ(delete_view(only, ViewportId("zz")).error().code, Errc::kNoSuchSlot);
}

TEST(Delete, ClearsMaximizeOfDeletedView) {
  auto wall = *maximize_view(wall_with({{0, 0, 6, 12}, {6, 0, 6, 12}}), ViewportId("v2"));
  auto after = delete_view(wall, ViewportId("v2"));
  EXPECT_FALSE(after->maximized.has_value());
  EXPECT_TRUE(layout::audit_wall(*after).empty());
}

TEST(ApplyLayout, ConservesContent) {
  auto wall = wall_with({{0, 0, 4, 12}, {4, 0, 4, 12}, {8, 0, 4, 12}});
  int minted = 0;
  auto mint = [&] { return ViewportId("n" + std::to_string(++minted)); };
  const std::vector<GridRect> two{{0, 0, 6, 12}, {6, 0, 6, 12}};
  auto fewer = layout::apply_layout(wall, two, mint);
  ASSERT_TRUE(fewer.ok());
  EXPECT_EQ(content_multiset(*fewer), content_multiset(wall));
  EXPECT_EQ(fewer->hidden_stack, (std::vector<ContentId>{ContentId("c3")}));

  auto presets = layout::preset_catalog(4);
  auto more = layout::apply_layout(wall, presets->front().rects, mint);
  ASSERT_TRUE(more.ok());
  EXPECT_EQ(more->viewports.size(), 4u);
  EXPECT_EQ(more->viewports[3].id, ViewportId("n1"));
  EXPECT_EQ(content_multiset(*more), content_multiset(wall));
}

TEST(Purity, SameInputSameOutput) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto wall = testing::random_wall(rng, 12, 12, 8);
    auto a = enumerate_insert_candidates(wall);
    auto b = enumerate_insert_candidates(wall);
    ASSERT_EQ(a.ok(), b.ok());
    if (a) {
      EXPECT_EQ(*a, *b);
    }
    EXPECT_EQ(layout::geometry_hash(wall), layout::geometry_hash(wall));
  }
}

TEST(Serialization, WallRoundTrips) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    auto wall = testing::random_wall(rng, 12, 12, 8);
    if (!wall.viewports.empty() && rng() % 2) wall.maximized = wall.viewports.front().id;
    const nlohmann::json j = wall;
    EXPECT_EQ(j.get<VirtualWall>(), wall);
    EXPECT_EQ(nlohmann::json(j.get<VirtualWall>()).dump(), j.dump());
  }
}

}  // namespace
}  // namespace wow
