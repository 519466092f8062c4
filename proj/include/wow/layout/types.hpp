#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wow/common/ids.hpp"

namespace wow {

inline constexpr int kDefaultGridCols = 12;
inline constexpr int kDefaultGridRows = 12;

/// Integer rectangle on a wall's logical cell grid. Spans are in cells.
struct GridRect {
  int col = 0;
  int row = 0;
  int col_span = 1;
  int row_span = 1;

  int right() const { return col + col_span; }  // exclusive
  int bottom() const { return row + row_span; }  // exclusive
  int area() const { return col_span * row_span; }

  bool well_formed() const { return col >= 0 && row >= 0 && col_span >= 1 && row_span >= 1; }
  bool fits(int grid_cols, int grid_rows) const {
    return well_formed() && right() <= grid_cols && bottom() <= grid_rows;
  }
  bool intersects(const GridRect& o) const {
    return col < o.right() && o.col < right() && row < o.bottom() && o.row < bottom();
  }
  bool contains(const GridRect& o) const {
    return o.col >= col && o.row >= row && o.right() <= right() && o.bottom() <= bottom();
  }

  friend bool operator==(const GridRect&, const GridRect&) = default;
};

/// Row-major order: top edge, then left edge, then height, then width.
bool row_major_less(const GridRect& a, const GridRect& b);

struct Viewport {
  ViewportId id;
  GridRect rect;
  std::optional<ContentId> content;

  friend bool operator==(const Viewport&, const Viewport&) = default;
};

struct VirtualWall {
  WallId id;
  std::string name;
  int grid_cols = kDefaultGridCols;
  int grid_rows = kDefaultGridRows;
  std::vector<Viewport> viewports;
  /// Index 0 is the top of the stack (most recently hidden).
  std::vector<ContentId> hidden_stack;
  std::optional<ViewportId> maximized;

  const Viewport* find(const ViewportId& id) const;
  Viewport* find(const ViewportId& id);
  bool holds(const ContentId& content) const;

  friend bool operator==(const VirtualWall&, const VirtualWall&) = default;
};

enum class CandidateKind { kEmptySpace, kHalve, kShrinkBetween };

struct ResizedViewport {
  ViewportId id;
  GridRect rect;

  friend bool operator==(const ResizedViewport&, const ResizedViewport&) = default;
};

struct InsertCandidate {
  CandidateKind kind = CandidateKind::kEmptySpace;
  GridRect new_rect;
  std::vector<ResizedViewport> resized;
  /// Higher ranks first: kind priority, then area of the new view.
  std::int64_t score = 0;
  /// geometry_hash() of the wall the candidate was computed from.
  std::string geometry_hash;

  friend bool operator==(const InsertCandidate&, const InsertCandidate&) = default;
};

struct PresetLayout {
  int view_count = 0;
  int variant_index = 0;
  std::vector<GridRect> rects;
};

struct HiddenSlot {
  std::size_t index = 0;
  friend bool operator==(const HiddenSlot&, const HiddenSlot&) = default;
};

/// A swap target: a visible viewport or a position in the hidden stack.
using Slot = std::variant<ViewportId, HiddenSlot>;

struct Violation {
  enum class Kind { kOutOfBounds, kOverlap };
  Kind kind;
  std::size_t first = 0;
  std::size_t second = 0;  // only meaningful for kOverlap

  std::string describe() const;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string describe() const;
};

std::string_view candidate_kind_name(CandidateKind kind);
std::optional<CandidateKind> candidate_kind_from_name(std::string_view name);

void to_json(nlohmann::json& j, const GridRect& r);
void from_json(const nlohmann::json& j, GridRect& r);
void to_json(nlohmann::json& j, const Viewport& v);
void from_json(const nlohmann::json& j, Viewport& v);
void to_json(nlohmann::json& j, const VirtualWall& w);
void from_json(const nlohmann::json& j, VirtualWall& w);
void to_json(nlohmann::json& j, const InsertCandidate& c);
void from_json(const nlohmann::json& j, InsertCandidate& c);
void to_json(nlohmann::json& j, const Slot& s);
void from_json(const nlohmann::json& j, Slot& s);

}  // namespace wow
