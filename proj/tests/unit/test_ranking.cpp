#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "taskagg/bootstrap.hpp"
#include "taskagg/error.hpp"
#include "taskagg/ranking.hpp"
#include "test_util.hpp"

using namespace taskagg;

namespace {

Matrix matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
    Matrix m(rows, cols);
    m.data() = std::move(v);
    return m;
}

EvalTable vtab() {
    const auto dir = testutil::data_dir();
    return load_eval_table(dir / "vtab_accuracies.csv", dir / "vtab_tasks.csv", InputFormat::accuracies);
}

}  // namespace

TEST(RankDescending, FractionalAndMaxTies) {
    const std::vector<double> v{0.5, 0.9, 0.5, 0.1};
    EXPECT_EQ(rank_descending(v), (std::vector<double>{2.5, 1, 2.5, 4}));
    EXPECT_EQ(rank_descending(v, TiePolicy::max), (std::vector<double>{3, 1, 3, 4}));
}

TEST(ByAverage, OrderAndTies) {
    EXPECT_EQ(ranks_by_average(matrix(3, 1, {0.664, 0.68, 0.676})), (std::vector<double>{3, 1, 2}));
    EXPECT_EQ(ranks_by_average(matrix(4, 2, {0.3, 0.4, 0.3, 0.4, 0.3, 0.4, 0.3, 0.4})),
              (std::vector<double>(4, 2.5)));
    EXPECT_EQ(ranks_by_average(matrix(1, 2, {0.1, 0.2})), (std::vector<double>{1}));
}

TEST(GeometricMean, RanksAndZeroFlag) {
    const auto g = ranks_by_geometric_mean(matrix(2, 2, {0.9, 0.1, 0.5, 0.5}));
    EXPECT_EQ(g.ranks, (std::vector<double>{2, 1}));
    const auto tie = ranks_by_geometric_mean(matrix(2, 2, {0.4, 0.6, 0.4, 0.6}));
    EXPECT_EQ(tie.ranks, (std::vector<double>{1.5, 1.5}));
    const auto z = ranks_by_geometric_mean(matrix(2, 2, {0.99, 0.0, 0.01, 0.01}));
    EXPECT_EQ(z.ranks, (std::vector<double>{2, 1}));
    EXPECT_TRUE(z.zero[0]);
    EXPECT_FALSE(z.zero[1]);
}

TEST(AverageRank, PlainEnumeration) {
    // A better on 3 of 4 tasks.
    const auto acc = matrix(2, 4, {0.9, 0.8, 0.7, 0.1, 0.5, 0.5, 0.5, 0.5});
    EXPECT_EQ(average_rank(acc, AverageRankVariant::plain, {}, nullptr), (std::vector<double>{1.25, 1.75}));
}

TEST(AverageRank, BinnedSharesBucket) {
    const auto acc = matrix(2, 1, {0.672, 0.679});
    EXPECT_EQ(average_rank(acc, AverageRankVariant::binned, {}, nullptr), (std::vector<double>{1.5, 1.5}));
    // Exact integer percentages fall in their own bucket despite 0.68 * 100 < 68.
    const auto edge = matrix(2, 1, {0.68, 0.679});
    EXPECT_EQ(average_rank(edge, AverageRankVariant::binned, {}, nullptr), (std::vector<double>{1, 2}));
}

TEST(AverageRank, ParameterErrors) {
    const auto acc = matrix(2, 1, {0.6, 0.5});
    RankParams bad;
    bad.bin_width = 0.0;
    EXPECT_THROW(average_rank(acc, AverageRankVariant::binned, bad, nullptr), Error);
    bad = RankParams{};
    bad.noise_sd = -1.0;
    EXPECT_THROW(average_rank(acc, AverageRankVariant::noise, bad, nullptr), Error);
}

TEST(AverageRank, ZeroNoiseEqualsPlain) {
    const auto t = vtab();
    const auto store = run_bootstrap(t, 20, 2);
    RankParams p;
    p.noise_sd = 0.0;
    for (std::size_t s = 0; s < store.size(); ++s) {
        Matrix acc(t.num_models(), t.num_tasks());
        const auto src = store.replicates().sample(s);
        std::copy(src.begin(), src.end(), acc.data().begin());
        auto rng = make_stream(1, StreamDomain::rank_noise, s);
        EXPECT_EQ(average_rank(acc, AverageRankVariant::noise, p, &rng),
                  average_rank(acc, AverageRankVariant::plain, p, nullptr));
    }
}

TEST(AverageRank, NarrowBinsConvergeToPlain) {
    const auto t = vtab();
    const auto store = run_bootstrap(t, 20, 2);
    RankParams p;
    p.bin_width = 1e-6;
    for (std::size_t s = 0; s < store.size(); ++s) {
        Matrix acc(t.num_models(), t.num_tasks());
        const auto src = store.replicates().sample(s);
        std::copy(src.begin(), src.end(), acc.data().begin());
        const auto plain = average_rank(acc, AverageRankVariant::plain, p, nullptr);
        const auto binned = average_rank(acc, AverageRankVariant::binned, p, nullptr);
        for (std::size_t i = 0; i < plain.size(); ++i) EXPECT_NEAR(binned[i], plain[i], 1e-12);
    }
}

TEST(AverageRank, RankSumsPreserved) {
    const auto t = vtab();
    const auto store = run_bootstrap(t, 10, 2);
    const double M = static_cast<double>(t.num_models());
    for (auto scheme : kAllRankSchemes) {
        for (std::size_t s = 0; s < store.size(); ++s) {
            Matrix acc(t.num_models(), t.num_tasks());
            const auto src = store.replicates().sample(s);
            std::copy(src.begin(), src.end(), acc.data().begin());
            auto rng = make_stream(3, StreamDomain::rank_noise, s);
            const auto r = scheme_ranks(acc, scheme, {}, &rng);
            double sum = 0.0;
            for (double v : r) sum += v;
            EXPECT_NEAR(sum, M * (M + 1) / 2, 1e-9) << to_string(scheme);
        }
    }
}

TEST(ByAverage, OrderingMatchesMeans) {
    const auto t = vtab();
    const auto store = run_bootstrap(t, 10, 6);
    for (std::size_t s = 0; s < store.size(); ++s) {
        Matrix acc(t.num_models(), t.num_tasks());
        const auto src = store.replicates().sample(s);
        std::copy(src.begin(), src.end(), acc.data().begin());
        const auto r = ranks_by_average(acc);
        for (std::size_t a = 0; a < acc.rows(); ++a) {
            for (std::size_t b = 0; b < acc.rows(); ++b) {
                double ma = 0, mb = 0;
                for (std::size_t j = 0; j < acc.cols(); ++j) {
                    ma += acc(a, j);
                    mb += acc(b, j);
                }
                if (ma > mb) EXPECT_LT(r[a], r[b]);
            }
        }
    }
}

TEST(RankIntervals, ZeroVarianceStore) {
    const EvalTable t({"A", "B"}, {{"t1", "c", 100}, {"t2", "c", 100}}, {100, 0, 0, 100});
    const auto store = run_bootstrap(t, 50, 1);
    for (auto scheme : {RankScheme::by_average, RankScheme::average_rank, RankScheme::average_rank_binned}) {
        for (const auto& r : rank_intervals(store.replicates(), t.models(), scheme, 0.95, {}, 1,
                                            IntervalMethod::bootstrap_percentile)) {
            EXPECT_EQ(r.interval.lower, r.point);
            EXPECT_EQ(r.interval.upper, r.point);
        }
    }
}

TEST(RankIntervals, FixtureByAverage) {
    const auto t = vtab();
    const auto store = run_bootstrap(t, 2000, 1);
    const auto r = rank_intervals(store.replicates(), t.models(), RankScheme::by_average, 0.95, {}, 1,
                                  IntervalMethod::bootstrap_percentile);
    const auto& rot = r[t.model_index("Rotation")];
    EXPECT_EQ(rot.point, 6.0);
    EXPECT_EQ(rot.interval.lower, 6.0);
    EXPECT_EQ(rot.interval.upper, 6.0);
    for (const auto& s : r) {
        EXPECT_GE(s.interval.lower, 1.0);
        EXPECT_LE(s.interval.upper, 16.0);
    }
}

TEST(RankIntervals, NoiseSchemeIsDeterministicAcrossWorkers) {
    const auto t = vtab();
    const auto store = run_bootstrap(t, 200, 1);
    const auto a = rank_intervals(store.replicates(), t.models(), RankScheme::average_rank_noise, 0.834, {}, 4,
                                  IntervalMethod::bootstrap_percentile, 1);
    const auto b = rank_intervals(store.replicates(), t.models(), RankScheme::average_rank_noise, 0.834, {}, 4,
                                  IntervalMethod::bootstrap_percentile, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].point, b[i].point);
        EXPECT_EQ(a[i].interval.lower, b[i].interval.lower);
    }
}

TEST(RankScheme, NamesRoundTrip) {
    for (auto s : kAllRankSchemes) EXPECT_EQ(parse_rank_scheme(to_string(s)), s);
    EXPECT_THROW(parse_rank_scheme("kemeny"), Error);
}
