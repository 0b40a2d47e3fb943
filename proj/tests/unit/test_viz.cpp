#include <gtest/gtest.h>

#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "taskagg/error.hpp"
#include "taskagg/viz.hpp"
#include "test_util.hpp"

using namespace taskagg;

namespace {

bool valid_xml(const std::string& s) {
    std::istringstream in(s);
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::read_xml(in, pt);
    } catch (const std::exception&) {
        return false;
    }
    return pt.count("svg") == 1;
}

std::size_t count(const std::string& s, const std::string& what) {
    std::size_t n = 0;
    for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
    return n;
}

SimplexField constant_field(std::optional<std::size_t> winner, double h = 0.1) {
    SimplexField f;
    f.grid_step = h;
    f.models = {"A", "B"};
    f.categories = {"natural", "specialized", "structured"};
    const int n = static_cast<int>(std::lround(1 / h));
    for (int a = 0; a <= n; ++a) {
        for (int b = 0; a + b <= n; ++b) {
            SimplexCell c;
            c.w_nat = a * h;
            c.w_sp = b * h;
            c.w_str = 1.0 - c.w_nat - c.w_sp;
            c.winner = winner;
            f.cells.push_back(c);
        }
    }
    return f;
}

EvalTable vtab() {
    const auto dir = testutil::data_dir();
    return load_eval_table(dir / "vtab_accuracies.csv", dir / "vtab_tasks.csv", InputFormat::accuracies);
}

}  // namespace

TEST(Ternary, SingleWinnerEverywhere) {
    const auto svg = render_ternary(constant_field(1), RenderSpec{});
    EXPECT_TRUE(valid_xml(svg));
    const auto color_b = default_palette()[1];
    EXPECT_EQ(count(svg, "fill=\"" + color_b + "\""), 66U + 1U);  // cells + legend swatch
    EXPECT_EQ(count(svg, ">B</text>"), 1U);
    EXPECT_EQ(count(svg, ">A</text>"), 0U);
    EXPECT_EQ(count(svg, "Indeterminate"), 0U);
}

TEST(Ternary, AllIndeterminateIsGray) {
    RenderSpec spec;
    const auto svg = render_ternary(constant_field(std::nullopt), spec);
    EXPECT_TRUE(valid_xml(svg));
    EXPECT_EQ(count(svg, "fill=\"" + spec.indeterminate_color + "\""), 66U + 1U);
    for (const auto& c : default_palette()) EXPECT_EQ(count(svg, "fill=\"" + c + "\""), 0U) << c;
}

TEST(Ternary, CaptionRecordsZAndRho) {
    auto f = constant_field(0);
    f.z = 1.4142;
    f.rho = 0.5;
    EXPECT_NE(render_ternary(f, RenderSpec{}).find("z = 1.4142, rho = 0.5"), std::string::npos);
}

TEST(Ternary, CellPolygonsStayInsideSimplex) {
    const auto f = constant_field(0, 0.05);
    for (const auto& c : f.cells) {
        const auto poly = ternary_cell_polygon(c, f.grid_step);
        ASSERT_GE(poly.size(), 3U);
        for (const auto& v : poly) {
            EXPECT_NEAR(v[0] + v[1] + v[2], 1.0, 1e-12);
            for (double b : v) EXPECT_GE(b, -1e-15);
        }
    }
    // Vertices of the triangle under the documented orientation.
    RenderSpec spec;
    const auto str = ternary_to_xy({0, 0, 1}, spec);
    const auto nat = ternary_to_xy({1, 0, 0}, spec);
    const auto sp = ternary_to_xy({0, 1, 0}, spec);
    EXPECT_LT(str.x, nat.x);
    EXPECT_EQ(str.y, nat.y);
    EXPECT_LT(sp.y, str.y);
}

TEST(Ternary, PaletteExhaustion) {
    RenderSpec spec;
    spec.palette = {"#000000"};
    EXPECT_THROW(render_ternary(constant_field(1), spec), Error);
    EXPECT_NO_THROW(render_ternary(constant_field(0), spec));
}

TEST(Ternary, FixtureStructuredVertexUsesRotationColour) {
    const auto t = vtab();
    const auto field = simplex_scan(t, SimplexOptions{});
    RenderSpec spec;
    spec.model_order = t.models();
    const auto svg = render_ternary(field, spec);
    EXPECT_TRUE(valid_xml(svg));
    const auto rot = default_palette()[t.model_index("Rotation")];
    for (const auto& c : field.cells) {
        if (c.w_str == 1.0) {
            ASSERT_TRUE(c.winner.has_value());
            EXPECT_EQ(field.models[*c.winner], "Rotation");
        }
    }
    EXPECT_NE(svg.find("fill=\"" + rot + "\""), std::string::npos);
    EXPECT_EQ(svg, render_ternary(field, spec));
}

TEST(Forest, SingleRowAndDegenerate) {
    const auto svg = render_forest({{"a", {0.5, 0.4, 0.6, 0.9, IntervalMethod::bootstrap_percentile}}}, RenderSpec{});
    EXPECT_TRUE(valid_xml(svg));
    EXPECT_EQ(count(svg, "<circle"), 1U);
    EXPECT_EQ(count(svg, "stroke-width=\"3\""), 1U);
    const auto deg = render_forest({{"a", {0.5, 0.5, 0.5, 0.9, IntervalMethod::bootstrap_percentile}}}, RenderSpec{});
    EXPECT_TRUE(valid_xml(deg));
    EXPECT_EQ(count(deg, "<circle"), 1U);
}

TEST(Forest, SortsByPointAndRejectsNonFinite) {
    std::vector<ForestRow> rows{{"low", {60.0, 59.6, 60.6, 0.834, {}}}, {"high", {68.0, 67.8, 68.1, 0.834, {}}}};
    const auto svg = render_forest(rows, RenderSpec{});
    EXPECT_LT(svg.find(">high<"), svg.find(">low<"));
    const auto kept = render_forest(rows, RenderSpec{}, true);
    EXPECT_GT(kept.find(">high<"), kept.find(">low<"));
    rows[0].interval.upper = std::nan("");
    EXPECT_THROW(render_forest(rows, RenderSpec{}), Error);
    EXPECT_THROW(render_forest({}, RenderSpec{}), Error);
}

TEST(RankBars, PointMassUniformAndValidation) {
    Matrix id(3, 3);
    for (int i = 0; i < 3; ++i) id(i, i) = 1.0;
    const std::vector<std::string> models{"a", "b", "c"};
    const auto svg = render_rank_bars(id, models, RenderSpec{});
    EXPECT_TRUE(valid_xml(svg));
    EXPECT_EQ(count(svg, "height=\"0.00\""), 6U);

    Matrix uni(3, 3, 1.0 / 3.0);
    const auto flat = render_rank_bars(uni, models, RenderSpec{});
    EXPECT_TRUE(valid_xml(flat));
    EXPECT_EQ(count(flat, "height=\"0.00\""), 0U);

    Matrix bad(3, 3, 0.5);
    EXPECT_THROW(render_rank_bars(bad, models, RenderSpec{}), Error);
}

TEST(Svg, EscapesLabels) {
    const auto svg = render_forest({{"a<b & \"c\"", {1, 0, 2, 0.9, {}}}}, RenderSpec{});
    EXPECT_TRUE(valid_xml(svg));
    EXPECT_NE(svg.find("a&lt;b &amp; &quot;c&quot;"), std::string::npos);
}
