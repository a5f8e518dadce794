#pragma once

#include "asc/similarity.hpp"

#include <string>
#include <vector>

namespace asc {

// Grey level for a similarity value: round-half-up of (v + 1) / 2 * 255. Throws
// ValidationError outside [-1, 1].
int heatmap_level(double value);

std::vector<int> heatmap_levels(const SimilarityMatrix& sim);

// ASCII "P2" greymap, one pixel per cell, row 0 at the top.
std::string render_pgm(const SimilarityMatrix& sim);

// Same grey levels as comma-separated rows.
std::string render_levels_csv(const SimilarityMatrix& sim);

} // namespace asc
