#include "wow/sim/generator.hpp"

#include <array>

#include "wow/layout/layout_engine.hpp"
#include "wow/persistence/sha256.hpp"

namespace wow::sim {

using nlohmann::json;

namespace {

// Roughly one command in twenty names something that does not exist.
constexpr double kBogusReference = 0.05;

/// Random non-overlapping rects built with the custom-layout wizard rules.
std::vector<GridRect> random_custom_layout(Rng& rng, int cols, int rows) {
  std::vector<GridRect> rects;
  const int target = rng.between(1, 6);
  for (int attempt = 0; attempt < 40 && static_cast<int>(rects.size()) < target; ++attempt) {
    GridRect r;
    r.col = rng.between(0, cols - 1);
    r.row = rng.between(0, rows - 1);
    r.col_span = rng.between(1, cols - r.col);
    r.row_span = rng.between(1, rows - r.row);
    auto grown = layout::build_custom_step(rects, r, cols, rows);
    if (grown) rects = std::move(grown).value();
  }
  return rects;
}

}  // namespace

ContentDescriptor synthetic_descriptor(Rng& rng, std::uint64_t n, const ParticipantId& owner) {
  ContentDescriptor d;
  const std::string tag = std::to_string(n);
  switch (rng.below(5)) {
    case 0:
      d.kind = ContentKind::kPdf;
      d.source = FileSource{persistence::sha256_hex("pdf-" + tag)};
      d.title = "Report " + tag + ".pdf";
      break;
    case 1:
      d.kind = ContentKind::kImage;
      d.source = FileSource{persistence::sha256_hex("img-" + tag)};
      d.title = "Sketch " + tag;
      break;
    case 2:
      d.kind = ContentKind::kVideo;
      d.source = FileSource{persistence::sha256_hex("vid-" + tag)};
      d.title = "Clip " + tag;
      break;
    case 3:
      d.kind = ContentKind::kWebLink;
      d.source = LinkSource{"https://example.org/page/" + tag};
      d.title = "Page " + tag;
      break;
    default:
      d.kind = ContentKind::kScreenShare;
      d.source = ScreenSource{owner, "screen " + tag};
      d.title = "Screen of " + owner.str();
      break;
  }
  return d;
}

CommandGenerator::CommandGenerator(std::uint64_t seed, GeneratorWeights weights)
    : rng_(seed), weights_(weights) {}

Step CommandGenerator::next(const Session& view, const ParticipantId& actor) {
  const std::array<int, 5> w = {weights_.layout, weights_.content, weights_.notes, weights_.walls,
                                weights_.churn};
  int total = 0;
  for (int x : w) total += x;
  int roll = static_cast<int>(rng_.below(static_cast<std::uint64_t>(total)));
  std::size_t family = 0;
  while (roll >= w[family]) roll -= w[family++];
  switch (family) {
    case 0:
      return layout_command(view);
    case 1:
      return content_command(view, actor);
    case 2:
      return note_command(view, actor);
    case 3:
      return wall_command(view);
    default:
      return Churn{};
  }
}

ViewportId CommandGenerator::pick_viewport(const VirtualWall& wall) {
  if (wall.viewports.empty() || rng_.chance(kBogusReference)) return ViewportId("v-missing");
  return rng_.pick(wall.viewports).id;
}

std::optional<ContentId> CommandGenerator::pick_content(const Session& view) {
  if (view.contents.empty()) return std::nullopt;
  if (rng_.chance(kBogusReference)) return ContentId("c-missing");
  auto it = view.contents.begin();
  std::advance(it, static_cast<long>(rng_.below(view.contents.size())));
  return it->first;
}

Command CommandGenerator::layout_command(const Session& view) {
  const VirtualWall& wall = view.active();
  switch (rng_.below(10)) {
    case 0:
      return ApplyPreset{std::nullopt, rng_.between(1, 9), rng_.between(0, 2)};
    case 1:
      return ApplyCustomLayout{std::nullopt, random_custom_layout(rng_, wall.grid_cols, wall.grid_rows)};
    case 2:
    case 3: {
      auto candidates = layout::enumerate_insert_candidates(wall);
      if (!candidates) return RestoreView{std::nullopt};
      std::optional<ContentId> content;
      if (!wall.hidden_stack.empty() && rng_.chance(0.6)) content = rng_.pick(wall.hidden_stack);
      // Prefer the top-ranked candidate, as a user mostly would.
      const auto& pick = rng_.chance(0.5) ? candidates->front() : rng_.pick(*candidates);
      return InsertView{std::nullopt, pick, content};
    }
    case 4:
    case 5: {
      Slot b = pick_viewport(wall);
      if (!wall.hidden_stack.empty() && rng_.chance(0.3)) {
        b = HiddenSlot{static_cast<std::size_t>(rng_.below(wall.hidden_stack.size()))};
      }
      return SwapViews{std::nullopt, pick_viewport(wall), b};
    }
    case 6:
      if (wall.maximized && rng_.chance(0.7)) return RestoreView{std::nullopt};
      return MaximizeView{std::nullopt, pick_viewport(wall)};
    case 7:
      return RestoreView{std::nullopt};
    case 8:
      return HideView{std::nullopt, pick_viewport(wall)};
    default:
      return DeleteView{std::nullopt, pick_viewport(wall)};
  }
}

Command CommandGenerator::content_command(const Session& view, const ParticipantId& actor) {
  const VirtualWall& wall = view.active();
  const auto roll = rng_.below(10);
  if (roll < 4 || view.contents.empty()) {
    return RegisterContent{synthetic_descriptor(rng_, ++counter_, actor), std::nullopt};
  }
  if (roll < 7) {
    std::optional<ContentId> content;
    if (!wall.hidden_stack.empty() && rng_.chance(0.8)) {
      content = rng_.pick(wall.hidden_stack);
    } else if (rng_.chance(0.5)) {
      content = pick_content(view);
    }
    return SetViewportContent{std::nullopt, pick_viewport(wall), content};
  }
  UpdateContentState u;
  u.content = *pick_content(view);
  switch (rng_.below(4)) {
    case 0:
      u.page = rng_.between(1, 40);
      break;
    case 1:
      u.scroll_y = rng_.unit();
      break;
    case 2:
      u.zoom = 0.5 + rng_.unit() * 3.0;
      break;
    default:
      u.playhead = rng_.unit() * 600.0;
      break;
  }
  return u;
}

Command CommandGenerator::note_command(const Session& view, const ParticipantId& actor) {
  if (!view.notes.empty() && rng_.chance(0.25)) {
    return DeleteNote{rng_.pick(view.notes).id};
  }
  auto content = pick_content(view);
  if (!content) return RegisterContent{synthetic_descriptor(rng_, ++counter_, actor), std::nullopt};
  return AddNote{*content, "note " + std::to_string(++counter_) + " by " + actor.str()};
}

Command CommandGenerator::wall_command(const Session& view) {
  const WallId some_wall = rng_.chance(kBogusReference) ? WallId("w-missing") : rng_.pick(view.walls).id;
  switch (rng_.below(6)) {
    case 0:
      if (view.walls.size() < 6) {
        return CreateWall{"Wall " + std::to_string(++counter_), view.active().grid_cols,
                          view.active().grid_rows};
      }
      return DeleteWall{some_wall};
    case 1:
      return RenameWall{some_wall, "Renamed " + std::to_string(++counter_)};
    case 2:
      return DeleteWall{some_wall};
    default:
      return SwitchActiveWall{some_wall};
  }
}

std::string step_name(const Step& step) {
  if (const auto* c = std::get_if<Command>(&step)) return std::string(command_name(*c));
  return "Churn";
}

json step_to_json(const Step& step) {
  if (const auto* c = std::get_if<Command>(&step)) return command_to_json(*c);
  return json{{"type", "Churn"}};
}

}  // namespace wow::sim
