#include "wow/layout/types.hpp"

#include <algorithm>
#include <tuple>

namespace wow {

using nlohmann::json;

bool row_major_less(const GridRect& a, const GridRect& b) {
  return std::tie(a.row, a.col, a.row_span, a.col_span) <
         std::tie(b.row, b.col, b.row_span, b.col_span);
}

const Viewport* VirtualWall::find(const ViewportId& id) const {
  auto it = std::find_if(viewports.begin(), viewports.end(),
                         [&](const Viewport& v) { return v.id == id; });
  return it == viewports.end() ? nullptr : &*it;
}

Viewport* VirtualWall::find(const ViewportId& id) {
  auto it = std::find_if(viewports.begin(), viewports.end(),
                         [&](const Viewport& v) { return v.id == id; });
  return it == viewports.end() ? nullptr : &*it;
}

bool VirtualWall::holds(const ContentId& content) const {
  if (std::find(hidden_stack.begin(), hidden_stack.end(), content) != hidden_stack.end()) {
    return true;
  }
  return std::any_of(viewports.begin(), viewports.end(),
                     [&](const Viewport& v) { return v.content == content; });
}

std::string Violation::describe() const {
  if (kind == Kind::kOutOfBounds) return "OutOfBounds(" + std::to_string(first) + ")";
  return "Overlap(" + std::to_string(first) + "," + std::to_string(second) + ")";
}

std::string ValidationResult::describe() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += ", ";
    out += v.describe();
  }
  return out;
}

std::string_view candidate_kind_name(CandidateKind kind) {
  switch (kind) {
    case CandidateKind::kEmptySpace:
      return "EmptySpace";
    case CandidateKind::kHalve:
      return "Halve";
    case CandidateKind::kShrinkBetween:
      return "ShrinkBetween";
  }
  return "EmptySpace";
}

std::optional<CandidateKind> candidate_kind_from_name(std::string_view name) {
  if (name == "EmptySpace") return CandidateKind::kEmptySpace;
  if (name == "Halve") return CandidateKind::kHalve;
  if (name == "ShrinkBetween") return CandidateKind::kShrinkBetween;
  return std::nullopt;
}

void to_json(json& j, const GridRect& r) {
  j = json{{"col", r.col}, {"row", r.row}, {"colSpan", r.col_span}, {"rowSpan", r.row_span}};
}

void from_json(const json& j, GridRect& r) {
  r.col = j.at("col").get<int>();
  r.row = j.at("row").get<int>();
  r.col_span = j.at("colSpan").get<int>();
  r.row_span = j.at("rowSpan").get<int>();
}

void to_json(json& j, const Viewport& v) {
  j = json{{"id", v.id}, {"rect", v.rect}, {"contentId", nullptr}};
  if (v.content) j["contentId"] = *v.content;
}

void from_json(const json& j, Viewport& v) {
  v.id = j.at("id").get<ViewportId>();
  v.rect = j.at("rect").get<GridRect>();
  v.content.reset();
  if (auto it = j.find("contentId"); it != j.end() && !it->is_null()) {
    v.content = it->get<ContentId>();
  }
}

void to_json(json& j, const VirtualWall& w) {
  j = json{{"id", w.id},
           {"name", w.name},
           {"gridCols", w.grid_cols},
           {"gridRows", w.grid_rows},
           {"viewports", w.viewports},
           {"hiddenStack", w.hidden_stack},
           {"maximizedViewportId", nullptr}};
  if (w.maximized) j["maximizedViewportId"] = *w.maximized;
}

void from_json(const json& j, VirtualWall& w) {
  w.id = j.at("id").get<WallId>();
  w.name = j.at("name").get<std::string>();
  w.grid_cols = j.at("gridCols").get<int>();
  w.grid_rows = j.at("gridRows").get<int>();
  w.viewports = j.at("viewports").get<std::vector<Viewport>>();
  w.hidden_stack = j.at("hiddenStack").get<std::vector<ContentId>>();
  w.maximized.reset();
  if (auto it = j.find("maximizedViewportId"); it != j.end() && !it->is_null()) {
    w.maximized = it->get<ViewportId>();
  }
}

void to_json(json& j, const InsertCandidate& c) {
  json resized = json::array();
  for (const auto& r : c.resized) resized.push_back(json{{"viewportId", r.id}, {"rect", r.rect}});
  j = json{{"kind", candidate_kind_name(c.kind)},
           {"newRect", c.new_rect},
           {"resized", std::move(resized)},
           {"score", c.score},
           {"geometryHash", c.geometry_hash}};
}

void from_json(const json& j, InsertCandidate& c) {
  auto kind = candidate_kind_from_name(j.at("kind").get<std::string>());
  if (!kind) throw json::other_error::create(501, "unknown candidate kind", &j);
  c.kind = *kind;
  c.new_rect = j.at("newRect").get<GridRect>();
  c.resized.clear();
  for (const auto& r : j.at("resized")) {
    c.resized.push_back(ResizedViewport{r.at("viewportId").get<ViewportId>(),
                                        r.at("rect").get<GridRect>()});
  }
  c.score = j.value("score", std::int64_t{0});
  c.geometry_hash = j.at("geometryHash").get<std::string>();
}

void to_json(json& j, const Slot& s) {
  if (const auto* v = std::get_if<ViewportId>(&s)) {
    j = json{{"viewport", *v}};
  } else {
    j = json{{"hidden", std::get<HiddenSlot>(s).index}};
  }
}

void from_json(const json& j, Slot& s) {
  if (j.contains("viewport")) {
    s = j.at("viewport").get<ViewportId>();
  } else if (j.contains("hidden")) {
    s = HiddenSlot{j.at("hidden").get<std::size_t>()};
  } else {
    throw json::other_error::create(501, "slot needs 'viewport' or 'hidden'", &j);
  }
}

}  // namespace wow
