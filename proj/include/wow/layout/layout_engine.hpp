#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wow/common/result.hpp"
#include "wow/layout/types.hpp"

// Layout algebra for a single virtual wall. Every function is pure: walls are
// taken by const reference and a new wall value is returned.
namespace wow::layout {

using ViewportIdMinter = std::function<ViewportId()>;

/// Full-coverage tilings for `view_count` views (1..9). Variant 0 is the most
/// square arrangement (2x2 for four, 3x3 for nine).
Result<std::vector<PresetLayout>> preset_catalog(int view_count,
                                                 int grid_cols = kDefaultGridCols,
                                                 int grid_rows = kDefaultGridRows);

/// Reports every out-of-bounds rect and every overlapping pair.
ValidationResult validate_layout(int grid_cols, int grid_rows, std::span<const GridRect> rects);

/// One step of the custom layout wizard: the preview grows by `next` only if
/// the result is still a valid layout.
Result<std::vector<GridRect>> build_custom_step(std::span<const GridRect> partial,
                                                const GridRect& next, int grid_cols,
                                                int grid_rows);

/// Empty rectangles not contained in a larger empty rectangle, row-major.
std::vector<GridRect> maximal_empty_rectangles(const VirtualWall& wall);

/// Stable digest of grid size, viewport ids and rects. Content placement is
/// deliberately excluded.
std::string geometry_hash(const VirtualWall& wall);

Result<std::vector<InsertCandidate>> enumerate_insert_candidates(const VirtualWall& wall);

Result<VirtualWall> apply_insert(const VirtualWall& wall, const InsertCandidate& candidate,
                                 const std::optional<ContentId>& content,
                                 const ViewportId& new_viewport);

Result<VirtualWall> swap_views(const VirtualWall& wall, const Slot& a, const Slot& b);
Result<VirtualWall> maximize_view(const VirtualWall& wall, const ViewportId& viewport);
Result<VirtualWall> restore_view(const VirtualWall& wall);
Result<VirtualWall> hide_view(const VirtualWall& wall, const ViewportId& viewport);
Result<VirtualWall> delete_view(const VirtualWall& wall, const ViewportId& viewport);

/// Replaces the wall's geometry with `rects` (a preset or a finished custom
/// layout). Existing viewports keep their id and content in order; contents
/// of surplus viewports go to the hidden stack; missing ids come from `mint`.
Result<VirtualWall> apply_layout(const VirtualWall& wall, std::span<const GridRect> rects,
                                 const ViewportIdMinter& mint);

/// Shows `content` in `viewport` (or clears it when empty). Whatever the
/// viewport held before goes on top of the hidden stack.
Result<VirtualWall> assign_content(const VirtualWall& wall, const ViewportId& viewport,
                                   const std::optional<ContentId>& content);

/// Pushes a content that is not yet on the wall onto the hidden stack.
Result<VirtualWall> push_hidden(const VirtualWall& wall, const ContentId& content);

/// Full invariant audit. Empty result means the wall is valid.
std::vector<std::string> audit_wall(const VirtualWall& wall);

}  // namespace wow::layout
