#pragma once

#include <string>
#include <vector>

#include "gsn/analysis.hpp"
#include "gsn/grid.hpp"

namespace gsn {

// Deterministic SVG emitters: identical inputs produce byte-identical text.

// Side-by-side per-entity heatmaps of a stack, one colored cell per grid
// cell, each panel scaled to its own maximum.
std::string render_maps_svg(const AttentionStack& stack, const std::vector<int>& entities,
                            const std::string& title);

// Correlation-matrix heatmap with numeric cell labels, blue-white-red over
// [-1, 1].
std::string render_corr_svg(const CorrMatrix& m);

}  // namespace gsn
