#include "wow/layout/layout_engine.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <set>
#include <tuple>
#include <unordered_set>

namespace wow::layout {
namespace {

/// Cell occupancy with a 2D prefix sum so emptiness of any rect is O(1).
class Occupancy {
 public:
  Occupancy(int cols, int rows) : cols_(cols), rows_(rows), sum_((cols + 1) * (rows + 1), 0) {}

  explicit Occupancy(const VirtualWall& wall) : Occupancy(wall.grid_cols, wall.grid_rows) {
    std::vector<int> cells(cols_ * rows_, 0);
    for (const auto& v : wall.viewports) {
      for (int r = v.rect.row; r < v.rect.bottom(); ++r) {
        for (int c = v.rect.col; c < v.rect.right(); ++c) cells[r * cols_ + c] = 1;
      }
    }
    for (int r = 0; r < rows_; ++r) {
      for (int c = 0; c < cols_; ++c) {
        at(r + 1, c + 1) = cells[r * cols_ + c] + at(r, c + 1) + at(r + 1, c) - at(r, c);
      }
    }
  }

  bool empty(int col, int row, int col_span, int row_span) const {
    const int r1 = row + row_span;
    const int c1 = col + col_span;
    return at(r1, c1) - at(row, c1) - at(r1, col) + at(row, col) == 0;
  }

 private:
  int& at(int r, int c) { return sum_[r * (cols_ + 1) + c]; }
  int at(int r, int c) const { return sum_[r * (cols_ + 1) + c]; }

  int cols_;
  int rows_;
  std::vector<int> sum_;
};

int kind_priority(CandidateKind kind) {
  switch (kind) {
    case CandidateKind::kEmptySpace:
      return 2;
    case CandidateKind::kHalve:
      return 1;
    case CandidateKind::kShrinkBetween:
      return 0;
  }
  return 0;
}

std::int64_t score_for(const VirtualWall& wall, CandidateKind kind, const GridRect& rect) {
  const std::int64_t cells = std::int64_t{wall.grid_cols} * wall.grid_rows;
  return kind_priority(kind) * (cells + 1) + rect.area();
}

bool resized_less(const ResizedViewport& a, const ResizedViewport& b) {
  if (a.id != b.id) return a.id < b.id;
  return row_major_less(a.rect, b.rect);
}

bool candidate_before(const InsertCandidate& a, const InsertCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.new_rect != b.new_rect) {
    if (a.new_rect.row != b.new_rect.row) return a.new_rect.row < b.new_rect.row;
    if (a.new_rect.col != b.new_rect.col) return a.new_rect.col < b.new_rect.col;
    return row_major_less(a.new_rect, b.new_rect);
  }
  return std::lexicographical_compare(a.resized.begin(), a.resized.end(), b.resized.begin(),
                                      b.resized.end(), resized_less);
}

/// Geometry after applying a candidate, used to drop duplicates.
using GeometryKey = std::vector<std::tuple<std::string, int, int, int, int>>;

GeometryKey resulting_geometry(const VirtualWall& wall, const InsertCandidate& c) {
  GeometryKey key;
  for (const auto& v : wall.viewports) {
    GridRect r = v.rect;
    for (const auto& rv : c.resized) {
      if (rv.id == v.id) r = rv.rect;
    }
    key.emplace_back(v.id.str(), r.col, r.row, r.col_span, r.row_span);
  }
  key.emplace_back("", c.new_rect.col, c.new_rect.row, c.new_rect.col_span,
                   c.new_rect.row_span);
  std::sort(key.begin(), key.end());
  return key;
}

void push_top(std::vector<ContentId>& stack, const ContentId& content) {
  stack.insert(stack.begin(), content);
}

struct ResolvedSlot {
  bool visible = true;
  std::size_t index = 0;  // into viewports or hidden_stack
};

std::optional<ResolvedSlot> resolve(const VirtualWall& wall, const Slot& slot) {
  if (const auto* vid = std::get_if<ViewportId>(&slot)) {
    for (std::size_t i = 0; i < wall.viewports.size(); ++i) {
      if (wall.viewports[i].id == *vid) return ResolvedSlot{true, i};
    }
    return std::nullopt;
  }
  const auto idx = std::get<HiddenSlot>(slot).index;
  if (idx >= wall.hidden_stack.size()) return std::nullopt;
  return ResolvedSlot{false, idx};
}

std::string slot_name(const Slot& slot) {
  if (const auto* vid = std::get_if<ViewportId>(&slot)) return vid->str();
  return "stack#" + std::to_string(std::get<HiddenSlot>(slot).index);
}

}  // namespace

ValidationResult validate_layout(int grid_cols, int grid_rows, std::span<const GridRect> rects) {
  ValidationResult result;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    if (!rects[i].fits(grid_cols, grid_rows)) {
      result.violations.push_back({Violation::Kind::kOutOfBounds, i, i});
    }
  }
  for (std::size_t i = 0; i < rects.size(); ++i) {
    for (std::size_t j = i + 1; j < rects.size(); ++j) {
      if (rects[i].well_formed() && rects[j].well_formed() && rects[i].intersects(rects[j])) {
        result.violations.push_back({Violation::Kind::kOverlap, i, j});
      }
    }
  }
  return result;
}

Result<std::vector<GridRect>> build_custom_step(std::span<const GridRect> partial,
                                                const GridRect& next, int grid_cols,
                                                int grid_rows) {
  if (grid_cols < 1 || grid_rows < 1) return make_error(Errc::kInvalidGrid);
  std::vector<GridRect> out(partial.begin(), partial.end());
  out.push_back(next);
  auto check = validate_layout(grid_cols, grid_rows, out);
  if (!check.ok()) return make_error(Errc::kRejectedRect, check.describe());
  return out;
}

std::vector<GridRect> maximal_empty_rectangles(const VirtualWall& wall) {
  const int cols = wall.grid_cols;
  const int rows = wall.grid_rows;
  Occupancy occ(wall);
  std::vector<GridRect> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!occ.empty(c, r, 1, 1)) continue;
      for (int h = 1; r + h <= rows; ++h) {
        if (!occ.empty(c, r, 1, h)) break;
        for (int w = 1; c + w <= cols; ++w) {
          if (!occ.empty(c, r, w, h)) break;
          // Maximal iff no one-cell-line extension on any side is also empty.
          if (c > 0 && occ.empty(c - 1, r, 1, h)) continue;
          if (c + w < cols && occ.empty(c + w, r, 1, h)) continue;
          if (r > 0 && occ.empty(c, r - 1, w, 1)) continue;
          if (r + h < rows && occ.empty(c, r + h, w, 1)) continue;
          out.push_back(GridRect{c, r, w, h});
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), row_major_less);
  return out;
}

std::string geometry_hash(const VirtualWall& wall) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix_byte = [&](unsigned char b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  auto mix_int = [&](int v) {
    auto u = static_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) mix_byte(static_cast<unsigned char>(u >> (8 * i)));
  };
  mix_int(wall.grid_cols);
  mix_int(wall.grid_rows);
  for (const auto& v : wall.viewports) {
    for (char ch : v.id.str()) mix_byte(static_cast<unsigned char>(ch));
    mix_byte(0);
    mix_int(v.rect.col);
    mix_int(v.rect.row);
    mix_int(v.rect.col_span);
    mix_int(v.rect.row_span);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Result<std::vector<InsertCandidate>> enumerate_insert_candidates(const VirtualWall& wall) {
  if (wall.maximized) return make_error(Errc::kWallMaximized, "restore the wall before inserting");
  const std::string hash = geometry_hash(wall);
  std::vector<InsertCandidate> all;

  auto add = [&](CandidateKind kind, GridRect rect, std::vector<ResizedViewport> resized) {
    InsertCandidate c;
    c.kind = kind;
    c.new_rect = rect;
    c.resized = std::move(resized);
    c.score = score_for(wall, kind, rect);
    c.geometry_hash = hash;
    all.push_back(std::move(c));
  };

  for (const auto& rect : maximal_empty_rectangles(wall)) {
    add(CandidateKind::kEmptySpace, rect, {});
  }

  // Halve: the existing view keeps the leading ceil half, the new view takes
  // the trailing floor half.
  for (const auto& v : wall.viewports) {
    const GridRect& r = v.rect;
    if (r.col_span >= 2) {
      const int keep = (r.col_span + 1) / 2;
      add(CandidateKind::kHalve, GridRect{r.col + keep, r.row, r.col_span - keep, r.row_span},
          {{v.id, GridRect{r.col, r.row, keep, r.row_span}}});
    }
    if (r.row_span >= 2) {
      const int keep = (r.row_span + 1) / 2;
      add(CandidateKind::kHalve, GridRect{r.col, r.row + keep, r.col_span, r.row_span - keep},
          {{v.id, GridRect{r.col, r.row, r.col_span, keep}}});
    }
  }

  // ShrinkBetween: two neighbours sharing a full edge each give up the cell
  // line next to that edge; the new view fills the 2-cell gap.
  const auto& vps = wall.viewports;
  for (std::size_t i = 0; i < vps.size(); ++i) {
    for (std::size_t j = 0; j < vps.size(); ++j) {
      if (i == j) continue;
      const GridRect& a = vps[i].rect;  // leading neighbour
      const GridRect& b = vps[j].rect;  // trailing neighbour
      if (a.right() == b.col && a.row == b.row && a.row_span == b.row_span &&
          a.col_span >= 2 && b.col_span >= 2) {
        add(CandidateKind::kShrinkBetween, GridRect{a.right() - 1, a.row, 2, a.row_span},
            {{vps[i].id, GridRect{a.col, a.row, a.col_span - 1, a.row_span}},
             {vps[j].id, GridRect{b.col + 1, b.row, b.col_span - 1, b.row_span}}});
      }
      if (a.bottom() == b.row && a.col == b.col && a.col_span == b.col_span &&
          a.row_span >= 2 && b.row_span >= 2) {
        add(CandidateKind::kShrinkBetween, GridRect{a.col, a.bottom() - 1, a.col_span, 2},
            {{vps[i].id, GridRect{a.col, a.row, a.col_span, a.row_span - 1}},
             {vps[j].id, GridRect{b.col, b.row + 1, b.col_span, b.row_span - 1}}});
      }
    }
  }

  for (auto& c : all) std::sort(c.resized.begin(), c.resized.end(), resized_less);
  std::stable_sort(all.begin(), all.end(), candidate_before);

  std::set<GeometryKey> seen;
  std::vector<InsertCandidate> out;
  out.reserve(all.size());
  for (auto& c : all) {
    if (seen.insert(resulting_geometry(wall, c)).second) out.push_back(std::move(c));
  }
  if (out.empty()) return make_error(Errc::kNoPlacementAvailable, "grid is saturated");
  return out;
}

Result<VirtualWall> apply_insert(const VirtualWall& wall, const InsertCandidate& candidate,
                                 const std::optional<ContentId>& content,
                                 const ViewportId& new_viewport) {
  if (candidate.geometry_hash != geometry_hash(wall)) {
    return make_error(Errc::kStaleCandidate, "wall geometry changed since enumeration");
  }
  auto offered = enumerate_insert_candidates(wall);
  if (!offered) return offered.error();
  const bool known = std::any_of(offered->begin(), offered->end(), [&](const InsertCandidate& c) {
    if (c.kind != candidate.kind || c.new_rect != candidate.new_rect) return false;
    auto resized = candidate.resized;
    std::sort(resized.begin(), resized.end(), resized_less);
    return resized == c.resized;
  });
  if (!known) return make_error(Errc::kStaleCandidate, "candidate was not offered for this wall");
  if (new_viewport.empty() || wall.find(new_viewport) != nullptr) {
    return make_error(Errc::kInternalGeometryError, "viewport id collision");
  }

  VirtualWall out = wall;
  for (const auto& rv : candidate.resized) {
    Viewport* vp = out.find(rv.id);
    if (vp == nullptr) return make_error(Errc::kInternalGeometryError, "resized viewport missing");
    vp->rect = rv.rect;
  }
  if (content) {
    for (const auto& v : out.viewports) {
      if (v.content == content) {
        return make_error(Errc::kContentAlreadyVisible, content->str() + " is already shown");
      }
    }
    std::erase(out.hidden_stack, *content);
  }
  out.viewports.push_back(Viewport{new_viewport, candidate.new_rect, content});

  if (auto issues = audit_wall(out); !issues.empty()) {
    return make_error(Errc::kInternalGeometryError, issues.front());
  }
  return out;
}

Result<VirtualWall> swap_views(const VirtualWall& wall, const Slot& a, const Slot& b) {
  auto ra = resolve(wall, a);
  if (!ra) return make_error(Errc::kNoSuchSlot, slot_name(a));
  auto rb = resolve(wall, b);
  if (!rb) return make_error(Errc::kNoSuchSlot, slot_name(b));
  if (ra->visible == rb->visible && ra->index == rb->index) return wall;

  VirtualWall out = wall;
  if (ra->visible && rb->visible) {
    std::swap(out.viewports[ra->index].content, out.viewports[rb->index].content);
  } else if (!ra->visible && !rb->visible) {
    std::swap(out.hidden_stack[ra->index], out.hidden_stack[rb->index]);
  } else {
    const ResolvedSlot& vis = ra->visible ? *ra : *rb;
    const ResolvedSlot& hid = ra->visible ? *rb : *ra;
    auto& shown = out.viewports[vis.index].content;
    const ContentId incoming = out.hidden_stack[hid.index];
    if (shown) {
      out.hidden_stack[hid.index] = *shown;
    } else {
      // An empty viewport has nothing to give back; the entry leaves the stack.
      out.hidden_stack.erase(out.hidden_stack.begin() +
                             static_cast<std::ptrdiff_t>(hid.index));
    }
    shown = incoming;
  }
  return out;
}

Result<VirtualWall> maximize_view(const VirtualWall& wall, const ViewportId& viewport) {
  if (wall.find(viewport) == nullptr) return make_error(Errc::kNoSuchSlot, viewport.str());
  if (wall.maximized) return make_error(Errc::kAlreadyMaximized, wall.maximized->str());
  VirtualWall out = wall;
  out.maximized = viewport;
  return out;
}

Result<VirtualWall> restore_view(const VirtualWall& wall) {
  if (!wall.maximized) return make_error(Errc::kNotMaximized);
  VirtualWall out = wall;
  out.maximized.reset();
  return out;
}

Result<VirtualWall> hide_view(const VirtualWall& wall, const ViewportId& viewport) {
  const Viewport* vp = wall.find(viewport);
  if (vp == nullptr) return make_error(Errc::kNoSuchSlot, viewport.str());
  if (!vp->content) return make_error(Errc::kNothingToHide, viewport.str());
  VirtualWall out = wall;
  Viewport* target = out.find(viewport);
  push_top(out.hidden_stack, *target->content);
  target->content.reset();
  return out;
}

Result<VirtualWall> delete_view(const VirtualWall& wall, const ViewportId& viewport) {
  const Viewport* vp = wall.find(viewport);
  if (vp == nullptr) return make_error(Errc::kNoSuchSlot, viewport.str());
  VirtualWall out = wall;
  if (vp->content) push_top(out.hidden_stack, *vp->content);
  std::erase_if(out.viewports, [&](const Viewport& v) { return v.id == viewport; });
  if (out.maximized == viewport) out.maximized.reset();
  return out;
}

Result<VirtualWall> apply_layout(const VirtualWall& wall, std::span<const GridRect> rects,
                                 const ViewportIdMinter& mint) {
  auto check = validate_layout(wall.grid_cols, wall.grid_rows, rects);
  if (!check.ok()) return make_error(Errc::kRejectedRect, check.describe());

  VirtualWall out = wall;
  out.maximized.reset();
  out.viewports.clear();
  for (std::size_t i = 0; i < rects.size(); ++i) {
    if (i < wall.viewports.size()) {
      out.viewports.push_back(Viewport{wall.viewports[i].id, rects[i], wall.viewports[i].content});
    } else {
      ViewportId id = mint();
      if (id.empty() || wall.find(id) != nullptr) {
        return make_error(Errc::kInternalGeometryError, "viewport id collision");
      }
      out.viewports.push_back(Viewport{std::move(id), rects[i], std::nullopt});
    }
  }
  for (std::size_t i = rects.size(); i < wall.viewports.size(); ++i) {
    if (wall.viewports[i].content) push_top(out.hidden_stack, *wall.viewports[i].content);
  }
  if (auto issues = audit_wall(out); !issues.empty()) {
    return make_error(Errc::kInternalGeometryError, issues.front());
  }
  return out;
}

Result<VirtualWall> assign_content(const VirtualWall& wall, const ViewportId& viewport,
                                   const std::optional<ContentId>& content) {
  const Viewport* vp = wall.find(viewport);
  if (vp == nullptr) return make_error(Errc::kNoSuchSlot, viewport.str());
  if (vp->content == content) return wall;
  if (content) {
    for (const auto& v : wall.viewports) {
      if (v.content == content) {
        return make_error(Errc::kContentAlreadyVisible, content->str() + " is shown in " +
                                                            v.id.str());
      }
    }
  }
  VirtualWall out = wall;
  if (content) std::erase(out.hidden_stack, *content);
  Viewport* target = out.find(viewport);
  if (target->content) push_top(out.hidden_stack, *target->content);
  target->content = content;
  return out;
}

Result<VirtualWall> push_hidden(const VirtualWall& wall, const ContentId& content) {
  if (wall.holds(content)) {
    return make_error(Errc::kContentAlreadyVisible, content.str() + " is already on the wall");
  }
  VirtualWall out = wall;
  push_top(out.hidden_stack, content);
  return out;
}

std::vector<std::string> audit_wall(const VirtualWall& wall) {
  std::vector<std::string> issues;
  if (wall.grid_cols < 1 || wall.grid_rows < 1) {
    issues.push_back("invalid grid " + std::to_string(wall.grid_cols) + "x" +
                     std::to_string(wall.grid_rows));
    return issues;
  }
  std::unordered_set<ViewportId> ids;
  for (const auto& v : wall.viewports) {
    if (v.id.empty()) issues.push_back("viewport with empty id");
    if (!ids.insert(v.id).second) issues.push_back("duplicate viewport id " + v.id.str());
    if (!v.rect.fits(wall.grid_cols, wall.grid_rows)) {
      issues.push_back("viewport " + v.id.str() + " out of bounds");
    }
  }
  for (std::size_t i = 0; i < wall.viewports.size(); ++i) {
    for (std::size_t j = i + 1; j < wall.viewports.size(); ++j) {
      if (wall.viewports[i].rect.intersects(wall.viewports[j].rect)) {
        issues.push_back("viewports " + wall.viewports[i].id.str() + " and " +
                         wall.viewports[j].id.str() + " overlap");
      }
    }
  }
  if (wall.maximized && wall.find(*wall.maximized) == nullptr) {
    issues.push_back("maximized viewport " + wall.maximized->str() + " does not exist");
  }
  std::unordered_set<ContentId> contents;
  for (const auto& v : wall.viewports) {
    if (v.content && !contents.insert(*v.content).second) {
      issues.push_back("content " + v.content->str() + " appears twice");
    }
  }
  for (const auto& c : wall.hidden_stack) {
    if (!contents.insert(c).second) issues.push_back("content " + c.str() + " appears twice");
  }
  return issues;
}

}  // namespace wow::layout
