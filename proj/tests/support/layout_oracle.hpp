#pragma once

// Brute-force reference implementations used only by tests. They enumerate
// every rectangle of the grid cell by cell and share no code with the layout
// engine beyond the value types.

#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "wow/layout/types.hpp"

namespace wow::testing {

/// Every rectangle that fits the grid.
std::vector<GridRect> all_rects(int cols, int rows);

/// True when no viewport covers any cell of `r` (checked cell by cell).
bool cells_empty(const VirtualWall& wall, const GridRect& r);

/// All empty rectangles, filtered to those not inside another empty rectangle.
std::vector<GridRect> oracle_maximal_empty(const VirtualWall& wall);

/// Normalised candidate: kind, new rect, resized viewports sorted by id.
using CandidateKey =
    std::tuple<int, std::tuple<int, int, int, int>,
               std::vector<std::tuple<std::string, int, int, int, int>>>;

CandidateKey key_of(const InsertCandidate& c);

/// Exhaustive legal-placement enumeration for the three insert heuristics.
std::set<CandidateKey> oracle_insert_candidates(const VirtualWall& wall);

/// Random valid wall: up to `max_views` disjoint viewports, some holding
/// contents c<k>, plus a few hidden contents.
VirtualWall random_wall(std::mt19937_64& rng, int cols, int rows, int max_views,
                        bool with_contents = true);

}  // namespace wow::testing
