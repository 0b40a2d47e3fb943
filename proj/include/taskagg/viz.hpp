#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "taskagg/core.hpp"
#include "taskagg/stats.hpp"
#include "taskagg/weighting.hpp"

namespace taskagg {

/// Sixteen colours distinguishable under the common colour-vision deficiencies.
const std::vector<std::string>& default_palette();

struct RenderSpec {
    int width = 640;
    int height = 600;
    std::vector<std::string> palette = default_palette();
    /// Colours are assigned by position in this list (leaderboard order).
    /// Empty means the model order of the input.
    std::vector<std::string> model_order;
    std::string indeterminate_color = "#BBBBBB";
    bool legend = true;
    /// Vertex labels in (nat, sp, str) order.
    std::array<std::string, 3> axis_labels{"Natural", "Specialized", "Structured"};
    std::string title;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Barycentric (nat, sp, str) weights.
using Barycentric = std::array<double, 3>;

/// Hexagonal neighbourhood of a lattice weighting, clipped to the simplex.
std::vector<Barycentric> ternary_cell_polygon(const SimplexCell& cell, double grid_step);

/// Str at bottom-left, Nat at bottom-right, Sp at the top.
Point2 ternary_to_xy(const Barycentric& b, const RenderSpec& spec);

/// Throws a usage error when a winner has no palette entry.
std::string render_ternary(const SimplexField& field, const RenderSpec& spec);

struct ForestRow {
    std::string label;
    IntervalEstimate interval;
};

/// Horizontal interval bars with point markers. Rows are sorted by point,
/// descending, unless `keep_order`.
std::string render_forest(std::vector<ForestRow> rows, const RenderSpec& spec, bool keep_order = false);

/// One panel per model showing P(rank = r) for r = 1..|models|.
std::string render_rank_bars(const Matrix& probabilities, const std::vector<std::string>& models,
                             const RenderSpec& spec);

}  // namespace taskagg
