#include <algorithm>
#include <cmath>
#include <set>

#include "wow/layout/layout_engine.hpp"

namespace wow::layout {
namespace {

constexpr int kMaxPresetViews = 9;
constexpr int kMaxBands = 4;

/// Splits `length` cells into `parts` segments, larger segments first.
std::vector<int> split_evenly(int length, int parts) {
  std::vector<int> sizes(parts, length / parts);
  for (int i = 0; i < length % parts; ++i) ++sizes[i];
  return sizes;
}

/// Distinct orderings of `bands` counts summing to `n`, each floor or ceil of n/bands.
std::vector<std::vector<int>> balanced_band_counts(int n, int bands) {
  std::vector<int> counts(bands, n / bands);
  for (int i = 0; i < n % bands; ++i) ++counts[i];
  std::sort(counts.begin(), counts.end());
  std::vector<std::vector<int>> out;
  do {
    out.push_back(counts);
  } while (std::next_permutation(counts.begin(), counts.end()));
  return out;
}

/// Tiles `region` with horizontal bands (rows_first) or vertical bands, each
/// band holding counts[i] equal views. Returns empty when a segment would be
/// thinner than one cell.
std::vector<GridRect> tile_bands(const GridRect& region, const std::vector<int>& counts,
                                 bool rows_first) {
  const int bands = static_cast<int>(counts.size());
  const int band_axis = rows_first ? region.row_span : region.col_span;
  const int item_axis = rows_first ? region.col_span : region.row_span;
  if (bands > band_axis) return {};
  std::vector<GridRect> out;
  const auto band_sizes = split_evenly(band_axis, bands);
  int band_offset = 0;
  for (int b = 0; b < bands; ++b) {
    if (counts[b] > item_axis) return {};
    const auto item_sizes = split_evenly(item_axis, counts[b]);
    int item_offset = 0;
    for (int i = 0; i < counts[b]; ++i) {
      if (rows_first) {
        out.push_back(GridRect{region.col + item_offset, region.row + band_offset, item_sizes[i],
                               band_sizes[b]});
      } else {
        out.push_back(GridRect{region.col + band_offset, region.row + item_offset, band_sizes[b],
                               item_sizes[i]});
      }
      item_offset += item_sizes[i];
    }
    band_offset += band_sizes[b];
  }
  return out;
}

/// Band counts to try, most square first.
std::vector<int> band_order(int n) {
  std::vector<int> bands;
  for (int b = 1; b <= std::min(n, kMaxBands); ++b) bands.push_back(b);
  const double ideal = std::ceil(std::sqrt(static_cast<double>(n)));
  std::stable_sort(bands.begin(), bands.end(), [&](int a, int b) {
    return std::abs(a - ideal) < std::abs(b - ideal);
  });
  return bands;
}

}  // namespace

Result<std::vector<PresetLayout>> preset_catalog(int view_count, int grid_cols, int grid_rows) {
  if (view_count < 1 || view_count > kMaxPresetViews) {
    return make_error(Errc::kUnsupportedPresetCount,
                      "presets exist for 1.." + std::to_string(kMaxPresetViews) + " views");
  }
  if (grid_cols < 1 || grid_rows < 1) return make_error(Errc::kInvalidGrid);

  const GridRect whole{0, 0, grid_cols, grid_rows};
  std::vector<std::vector<GridRect>> variants;
  auto offer = [&](std::vector<GridRect> rects) {
    if (static_cast<int>(rects.size()) == view_count) variants.push_back(std::move(rects));
  };

  for (bool rows_first : {true, false}) {
    for (int bands : band_order(view_count)) {
      for (const auto& counts : balanced_band_counts(view_count, bands)) {
        offer(tile_bands(whole, counts, rows_first));
      }
    }
  }

  // One focus view on the leading half, the rest tiled beside it.
  if (view_count >= 3) {
    const int rest = view_count - 1;
    const int rest_bands = band_order(rest).front();
    const auto rest_counts = balanced_band_counts(rest, rest_bands).front();
    for (bool vertical_split : {true, false}) {
      const auto halves = split_evenly(vertical_split ? grid_cols : grid_rows, 2);
      if (halves[1] < 1) continue;
      GridRect focus = vertical_split ? GridRect{0, 0, halves[0], grid_rows}
                                      : GridRect{0, 0, grid_cols, halves[0]};
      GridRect remainder = vertical_split ? GridRect{halves[0], 0, halves[1], grid_rows}
                                          : GridRect{0, halves[0], grid_cols, halves[1]};
      auto tiled = tile_bands(remainder, rest_counts, vertical_split);
      if (tiled.empty()) continue;
      std::vector<GridRect> rects{focus};
      rects.insert(rects.end(), tiled.begin(), tiled.end());
      offer(std::move(rects));
    }
  }

  std::vector<PresetLayout> catalog;
  std::set<std::vector<std::tuple<int, int, int, int>>> seen;
  for (auto& rects : variants) {
    std::vector<std::tuple<int, int, int, int>> key;
    for (const auto& r : rects) key.emplace_back(r.row, r.col, r.row_span, r.col_span);
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) continue;
    catalog.push_back(PresetLayout{view_count, static_cast<int>(catalog.size()), std::move(rects)});
  }
  if (catalog.empty()) {
    return make_error(Errc::kUnsupportedPresetCount,
                      std::to_string(view_count) + " views do not fit a " +
                          std::to_string(grid_cols) + "x" + std::to_string(grid_rows) + " grid");
  }
  return catalog;
}

}  // namespace wow::layout
