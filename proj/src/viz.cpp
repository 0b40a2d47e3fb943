#include "taskagg/viz.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "taskagg/error.hpp"

namespace taskagg {
namespace {

constexpr double kSqrt3Half = 0.86602540378443864676;
constexpr int kMargin = 40;
constexpr int kLegendWidth = 200;
constexpr int kCaptionHeight = 56;

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string header(int width, int height) {
    return fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"#FFFFFF\"/>\n",
        width, height);
}

// Colour of each model index, following spec.model_order when given.
std::vector<std::string> model_colors(const std::vector<std::string>& models, const RenderSpec& spec,
                                      const std::vector<bool>& needed) {
    std::vector<std::string> colors(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        std::size_t pos = i;
        if (!spec.model_order.empty()) {
            const auto it = std::find(spec.model_order.begin(), spec.model_order.end(), models[i]);
            pos = it == spec.model_order.end() ? spec.model_order.size() + i
                                               : static_cast<std::size_t>(it - spec.model_order.begin());
        }
        if (pos < spec.palette.size()) {
            colors[i] = spec.palette[pos];
        } else if (needed[i]) {
            throw usage_error(fmt::format("palette of {} colours has no entry for model '{}'", spec.palette.size(),
                                          models[i]));
        }
    }
    return colors;
}

std::string fmt_num(double v) { return fmt::format("{:g}", v); }

void check_spec(const RenderSpec& spec) {
    if (spec.width < 200 || spec.height < 200) throw usage_error("render size must be at least 200x200");
}

}  // namespace

const std::vector<std::string>& default_palette() {
    static const std::vector<std::string> palette{
        "#0072B2", "#E69F00", "#009E73", "#CC79A7", "#56B4E9", "#D55E00", "#F0E442", "#332288",
        "#88CCEE", "#44AA99", "#117733", "#999933", "#DDCC77", "#CC6677", "#882255", "#000000",
    };
    return palette;
}

std::vector<Barycentric> ternary_cell_polygon(const SimplexCell& cell, double grid_step) {
    static constexpr std::array<std::array<double, 3>, 6> kOffsets{{
        {2, -1, -1}, {1, 1, -2}, {-1, 2, -1}, {-2, 1, 1}, {-1, -1, 2}, {1, -2, 1},
    }};
    const Barycentric centre{cell.w_nat, cell.w_sp, cell.w_str};
    std::vector<Barycentric> poly;
    for (const auto& o : kOffsets) {
        Barycentric v;
        for (int k = 0; k < 3; ++k) v[k] = centre[k] + grid_step / 3.0 * o[k];
        poly.push_back(v);
    }
    // Sutherland-Hodgman against each half-plane b_k >= 0.
    for (int k = 0; k < 3; ++k) {
        std::vector<Barycentric> next;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const auto& a = poly[i];
            const auto& b = poly[(i + 1) % poly.size()];
            const bool a_in = a[k] >= 0.0;
            const bool b_in = b[k] >= 0.0;
            if (a_in) next.push_back(a);
            if (a_in != b_in) {
                const double t = a[k] / (a[k] - b[k]);
                Barycentric x;
                for (int m = 0; m < 3; ++m) x[m] = a[m] + t * (b[m] - a[m]);
                x[k] = 0.0;
                next.push_back(x);
            }
        }
        poly = std::move(next);
        if (poly.empty()) break;
    }
    return poly;
}

Point2 ternary_to_xy(const Barycentric& b, const RenderSpec& spec) {
    const double avail_w = spec.width - 2.0 * kMargin - (spec.legend ? kLegendWidth : 0);
    const double avail_h = (spec.height - 2.0 * kMargin - kCaptionHeight) / kSqrt3Half;
    const double side = std::max(10.0, std::min(avail_w, avail_h));
    const double left = kMargin;
    const double base = kMargin + 20.0 + side * kSqrt3Half;
    const Point2 str{left, base};
    const Point2 nat{left + side, base};
    const Point2 sp{left + side / 2.0, base - side * kSqrt3Half};
    return {b[0] * nat.x + b[1] * sp.x + b[2] * str.x, b[0] * nat.y + b[1] * sp.y + b[2] * str.y};
}

std::string render_ternary(const SimplexField& field, const RenderSpec& spec) {
    check_spec(spec);
    std::vector<bool> winners(field.models.size(), false);
    bool any_indeterminate = false;
    for (const auto& c : field.cells) {
        if (c.winner) {
            winners.at(*c.winner) = true;
        } else {
            any_indeterminate = true;
        }
    }
    const auto colors = model_colors(field.models, spec, winners);

    std::string svg = header(spec.width, spec.height);
    if (!spec.title.empty()) {
        svg += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"15\">{}</text>\n", kMargin, xml_escape(spec.title));
    }
    svg += "<g stroke-width=\"0.6\" stroke-linejoin=\"round\">\n";
    for (const auto& c : field.cells) {
        const auto poly = ternary_cell_polygon(c, field.grid_step);
        if (poly.size() < 3) continue;
        const std::string& color = c.winner ? colors[*c.winner] : spec.indeterminate_color;
        std::string pts;
        for (const auto& v : poly) {
            const auto p = ternary_to_xy(v, spec);
            if (!pts.empty()) pts += ' ';
            pts += fmt::format("{:.2f},{:.2f}", p.x, p.y);
        }
        svg += fmt::format("<polygon points=\"{}\" fill=\"{}\" stroke=\"{}\"/>\n", pts, color, color);
    }
    svg += "</g>\n";

    const auto v_nat = ternary_to_xy({1, 0, 0}, spec);
    const auto v_sp = ternary_to_xy({0, 1, 0}, spec);
    const auto v_str = ternary_to_xy({0, 0, 1}, spec);
    svg += fmt::format(
        "<polygon points=\"{:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f}\" fill=\"none\" stroke=\"#333333\" "
        "stroke-width=\"1.2\"/>\n",
        v_str.x, v_str.y, v_nat.x, v_nat.y, v_sp.x, v_sp.y);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", v_sp.x, v_sp.y - 8,
                       xml_escape(spec.axis_labels[1]));
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"start\">{}</text>\n", v_str.x, v_str.y + 18,
                       xml_escape(spec.axis_labels[2]));
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", v_nat.x, v_nat.y + 18,
                       xml_escape(spec.axis_labels[0]));
    svg += fmt::format("<text x=\"{}\" y=\"{}\">z = {}, rho = {}{}, grid step {}</text>\n", kMargin,
                       spec.height - 16, fmt_num(field.z), fmt_num(field.rho),
                       field.normalized ? ", normalized accuracies" : "", fmt_num(field.grid_step));

    if (spec.legend) {
        const int x = spec.width - kLegendWidth + 10;
        int y = kMargin + 20;
        // Legend entries follow colour order.
        std::vector<std::pair<std::string, std::size_t>> entries;
        for (std::size_t i = 0; i < field.models.size(); ++i) {
            if (winners[i]) entries.emplace_back(colors[i], i);
        }
        std::map<std::string, std::size_t> rank;
        for (std::size_t k = 0; k < spec.palette.size(); ++k) rank.emplace(spec.palette[k], k);
        std::stable_sort(entries.begin(), entries.end(),
                         [&](const auto& a, const auto& b) { return rank[a.first] < rank[b.first]; });
        for (const auto& [color, i] : entries) {
            svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", x, y - 10, color);
            svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", x + 18, y, xml_escape(field.models[i]));
            y += 18;
        }
        if (any_indeterminate) {
            svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", x, y - 10,
                               spec.indeterminate_color);
            svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", x + 18, y, "Indeterminate");
        }
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_forest(std::vector<ForestRow> rows, const RenderSpec& spec, bool keep_order) {
    check_spec(spec);
    if (rows.empty()) throw usage_error("forest plot needs at least one row");
    for (const auto& r : rows) {
        const auto& iv = r.interval;
        if (!std::isfinite(iv.point) || !std::isfinite(iv.lower) || !std::isfinite(iv.upper)) {
            throw usage_error(fmt::format("non-finite interval for '{}'", r.label));
        }
    }
    if (!keep_order) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const ForestRow& a, const ForestRow& b) { return a.interval.point > b.interval.point; });
    }
    double lo = rows.front().interval.lower;
    double hi = rows.front().interval.upper;
    for (const auto& r : rows) {
        lo = std::min({lo, r.interval.lower, r.interval.point});
        hi = std::max({hi, r.interval.upper, r.interval.point});
    }
    if (hi - lo <= 0.0) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const int label_w = 200;
    const int row_h = 22;
    const int top = spec.title.empty() ? kMargin : kMargin + 20;
    const int height = std::max(spec.height, top + static_cast<int>(rows.size()) * row_h + 60);
    const double x0 = label_w;
    const double x1 = spec.width - kMargin;
    auto sx = [&](double v) { return x0 + (v - lo) / (hi - lo) * (x1 - x0); };

    std::string svg = header(spec.width, height);
    if (!spec.title.empty()) {
        svg += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"15\">{}</text>\n", kMargin, xml_escape(spec.title));
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& iv = rows[k].interval;
        const double y = top + (static_cast<double>(k) + 0.5) * row_h;
        svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", label_w - 10, y + 4,
                           xml_escape(rows[k].label));
        svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#0072B2\" "
                           "stroke-width=\"3\"/>\n",
                           sx(iv.lower), y, sx(iv.upper), y);
        svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"#000000\"/>\n", sx(iv.point), y);
    }
    const double axis_y = top + static_cast<double>(rows.size()) * row_h + 8;
    svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#333333\"/>\n", x0,
                       axis_y, x1, axis_y);
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.2f}</text>\n", sx(v),
                           axis_y + 16, v);
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_rank_bars(const Matrix& p, const std::vector<std::string>& models, const RenderSpec& spec) {
    check_spec(spec);
    const std::size_t M = p.rows();
    if (M == 0 || p.cols() != M || models.size() != M) throw usage_error("rank probability matrix must be square");
    for (std::size_t i = 0; i < M; ++i) {
        double s = 0.0;
        for (double v : p.row(i)) {
            if (!(v >= 0.0 && v <= 1.0)) throw usage_error(fmt::format("invalid probability in row '{}'", models[i]));
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-9) {
            throw usage_error(fmt::format("rank probabilities of '{}' sum to {}", models[i], s));
        }
    }
    const auto colors = model_colors(models, spec, std::vector<bool>(M, true));
    const std::size_t cols = std::min<std::size_t>(4, M);
    const std::size_t nrows = (M + cols - 1) / cols;
    const double panel_w = (spec.width - 2.0 * kMargin) / static_cast<double>(cols);
    const double panel_h = 140.0;
    const int top = spec.title.empty() ? kMargin : kMargin + 20;
    const int height = std::max(spec.height, top + static_cast<int>(nrows * panel_h) + kMargin);

    std::string svg = header(spec.width, height);
    if (!spec.title.empty()) {
        svg += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"15\">{}</text>\n", kMargin, xml_escape(spec.title));
    }
    for (std::size_t i = 0; i < M; ++i) {
        const double px = kMargin + static_cast<double>(i % cols) * panel_w;
        const double py = top + static_cast<double>(i / cols) * panel_h;
        const double plot_h = panel_h - 50.0;
        const double base = py + 20.0 + plot_h;
        const double bar_w = (panel_w - 20.0) / static_cast<double>(M);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\">{}</text>\n", px, py + 12,
                           xml_escape(models[i]));
        svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#333333\"/>\n", px,
                           base, px + panel_w - 20.0, base);
        for (std::size_t r = 0; r < M; ++r) {
            const double h = p(i, r) * plot_h;
            svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                               px + static_cast<double>(r) * bar_w, base - h, std::max(0.0, bar_w - 1.0), h, colors[i]);
        }
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"9\">1</text>\n", px, base + 12);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"9\" text-anchor=\"end\">{}</text>\n",
                           px + panel_w - 20.0, base + 12, M);
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\">bar height: probability of each rank (1 = best)</text>\n", kMargin,
                       height - 12);
    svg += "</svg>\n";
    return svg;
}

}  // namespace taskagg
