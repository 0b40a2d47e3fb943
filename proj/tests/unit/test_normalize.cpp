#include <gtest/gtest.h>

#include <sstream>

#include "taskagg/bootstrap.hpp"
#include "taskagg/error.hpp"
#include "taskagg/normalize.hpp"
#include "test_util.hpp"

using namespace taskagg;

namespace {

EvalTable vtab() {
    const auto dir = testutil::data_dir();
    return load_eval_table(dir / "vtab_accuracies.csv", dir / "vtab_tasks.csv", InputFormat::accuracies);
}

}  // namespace

TEST(EstimateBounds, MaxAndMinOverModelsAndSamples) {
    SampleCube c(2, 2, 1);
    c.at(0, 0, 0) = 0.40;
    c.at(0, 1, 0) = 0.74;
    c.at(1, 0, 0) = 0.31;
    c.at(1, 1, 0) = 0.55;
    const auto b = estimate_bounds(c, {"t"});
    EXPECT_EQ(b.high[0], 0.74);
    EXPECT_EQ(b.low[0], 0.31);
}

TEST(EstimateBounds, SingleReplicateSingleModelIsDegenerate) {
    const EvalTable t({"A"}, {{"task7", "c", 100}}, {50});
    const auto store = run_bootstrap(t, 1, 1);
    try {
        estimate_bounds(store);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::computation);
        EXPECT_NE(std::string(e.what()).find("task7"), std::string::npos);
    }
}

TEST(EstimateBounds, MoreReplicatesNeverShrinkTheRange) {
    const auto t = vtab();
    const auto small = run_bootstrap(t, 100, 9);
    const auto large = run_bootstrap(t, 1000, 9);
    const auto a = estimate_bounds(small);
    const auto b = estimate_bounds(large);
    for (std::size_t j = 0; j < a.size(); ++j) {
        EXPECT_LE(b.low[j], a.low[j]);
        EXPECT_GE(b.high[j], a.high[j]);
    }
}

TEST(NormalizeScores, BoundaryIdentitiesAndClamping) {
    NormalizationBounds b{{"t1", "t2"}, {0.2, 0.5}, {0.6, 0.9}};
    Matrix acc(2, 2);
    acc(0, 0) = 0.2;
    acc(0, 1) = 0.9;
    acc(1, 0) = 0.7;
    acc(1, 1) = 0.1;
    const auto n = normalize_scores(acc, b);
    EXPECT_EQ(n.values(0, 0), 0.0);
    EXPECT_EQ(n.values(0, 1), 1.0);
    EXPECT_EQ(n.values(1, 0), 1.0);
    EXPECT_EQ(n.values(1, 1), 0.0);
    EXPECT_EQ(n.clamped, 2U);
    EXPECT_THROW(normalize_scores(Matrix(1, 3), b), Error);
}

TEST(NormalizeScores, UnitBoundsAreIdentity) {
    NormalizationBounds b{{"t1", "t2"}, {0.0, 0.0}, {1.0, 1.0}};
    Matrix acc(1, 2);
    acc(0, 0) = 0.123;
    acc(0, 1) = 0.987;
    EXPECT_EQ(normalize_scores(acc, b).values, acc);
}

TEST(NormalizeSamples, InStoreValuesInUnitIntervalAndOrderPreserved) {
    const auto t = vtab();
    const auto store = run_bootstrap(t, 500, 4);
    const auto bounds = estimate_bounds(store);
    std::size_t clamped = 99;
    const auto n = normalize_samples(store.replicates(), bounds, &clamped);
    EXPECT_EQ(clamped, 0U);
    const auto& raw = store.replicates();
    for (std::size_t s = 0; s < raw.samples(); ++s) {
        for (std::size_t j = 0; j < raw.tasks(); ++j) {
            for (std::size_t i = 0; i < raw.models(); ++i) {
                ASSERT_GE(n.at(s, i, j), 0.0);
                ASSERT_LE(n.at(s, i, j), 1.0);
                for (std::size_t k = 0; k < raw.models(); ++k) {
                    if (raw.at(s, i, j) < raw.at(s, k, j)) ASSERT_LT(n.at(s, i, j), n.at(s, k, j));
                }
            }
        }
    }
}

TEST(NormalizeSamples, PerReplicateExtremesMapToZeroAndOne) {
    const auto t = vtab();
    const auto store = run_bootstrap(t, 20, 4);
    std::vector<std::string> ids;
    for (const auto& task : t.tasks()) ids.push_back(task.task_id);
    const auto n = normalize_samples_per_replicate(store.replicates(), ids);
    for (std::size_t s = 0; s < n.samples(); ++s) {
        for (std::size_t j = 0; j < n.tasks(); ++j) {
            double lo = 1.0, hi = 0.0;
            for (std::size_t i = 0; i < n.models(); ++i) {
                lo = std::min(lo, n.at(s, i, j));
                hi = std::max(hi, n.at(s, i, j));
            }
            EXPECT_EQ(lo, 0.0);
            EXPECT_EQ(hi, 1.0);
        }
    }
}

TEST(BoundsCsv, RoundTrip) {
    testutil::TempDir dir;
    NormalizationBounds b{{"a", "b"}, {0.125, 0.3}, {0.75, 0.9}};
    std::ostringstream os;
    write_bounds_csv(b, os);
    EXPECT_EQ(os.str().substr(0, 15), "task,low,high\na");
    const auto p = dir.write("b.csv", os.str());
    const auto back = load_bounds_csv(p, {"a", "b"});
    EXPECT_EQ(back.low, b.low);
    EXPECT_EQ(back.high, b.high);
    EXPECT_THROW(load_bounds_csv(p, {"a", "b", "c"}), ParseError);
}

TEST(NormalizedAggregate, TopTwoSwapUnderNormalization) {
    const auto t = vtab();
    const auto store = run_bootstrap(t, 2000, 1);
    const auto bounds = estimate_bounds(store);
    const auto sr_raw = aggregate_interval(store, "Sup-Rotation-100%", std::nullopt, std::nullopt, kDisplayLevel);
    const auto se_raw = aggregate_interval(store, "Sup-Exemplar-100%", std::nullopt, std::nullopt, kDisplayLevel);
    const auto sr = aggregate_interval(store, "Sup-Rotation-100%", std::nullopt, bounds, kDisplayLevel);
    const auto se = aggregate_interval(store, "Sup-Exemplar-100%", std::nullopt, bounds, kDisplayLevel);
    EXPECT_GT(sr_raw.point, se_raw.point);
    EXPECT_GT(se.point, sr.point);
}
