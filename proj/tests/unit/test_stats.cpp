#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

#include "taskagg/error.hpp"
#include "taskagg/stats.hpp"

using namespace taskagg;
using boost::multiprecision::cpp_rational;

namespace {

// Type-7 quantile in exact rational arithmetic through the alternative
// form j = floor(n p + m), g = n p + m - j with m = 1 - p (1-based order
// statistics), so the check does not share algebra with the library.
cpp_rational oracle_quantile(std::vector<cpp_rational> x, const cpp_rational& p) {
    std::sort(x.begin(), x.end());
    const cpp_rational n = static_cast<long>(x.size());
    const cpp_rational h = n * p + (1 - p);
    const auto j = static_cast<long>(boost::multiprecision::numerator(h) / boost::multiprecision::denominator(h));
    const cpp_rational g = h - j;
    if (j >= static_cast<long>(x.size())) return x.back();
    if (j < 1) return x.front();
    return (1 - g) * x[j - 1] + g * x[j];
}

}  // namespace

TEST(Quantile, OneToHundredAtDisplayLevel) {
    std::vector<double> s(100);
    std::iota(s.begin(), s.end(), 1.0);
    std::vector<cpp_rational> r(s.begin(), s.end());
    const auto [lo, hi] = percentile_interval(s, 0.834);
    const cpp_rational tail = cpp_rational(166, 2000);
    EXPECT_NEAR(lo, static_cast<double>(oracle_quantile(r, tail)), 1e-12);
    EXPECT_NEAR(hi, static_cast<double>(oracle_quantile(r, 1 - tail)), 1e-12);
    EXPECT_NEAR(lo, 9.217, 1e-9);
    EXPECT_NEAR(hi, 91.783, 1e-9);
}

TEST(Quantile, MatchesRationalOracleOnRandomInputs) {
    std::uint64_t state = 12345;
    auto next = [&] {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 40) / 1024.0;
    };
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial * 7 % 300);
        std::vector<double> s(n);
        for (auto& v : s) v = next();
        std::vector<cpp_rational> r(s.begin(), s.end());
        for (int q = 1; q < 20; ++q) {
            std::vector<double> sorted = s;
            std::sort(sorted.begin(), sorted.end());
            const double p = q / 20.0;
            EXPECT_NEAR(quantile_sorted(sorted, p), static_cast<double>(oracle_quantile(r, cpp_rational(q, 20))),
                        1e-9 * (1 + std::abs(sorted.back())));
        }
    }
}

TEST(PercentileInterval, ConstantSamples) {
    std::vector<double> s(10, 3.25);
    const auto [lo, hi] = percentile_interval(s, 0.95);
    EXPECT_EQ(lo, 3.25);
    EXPECT_EQ(hi, 3.25);
}

TEST(PercentileInterval, SymmetricSamplesGiveSymmetricInterval) {
    std::vector<double> s;
    for (int k = -500; k <= 500; ++k) s.push_back(k * 0.01);
    const auto [lo, hi] = percentile_interval(s, 0.95);
    EXPECT_NEAR(lo, -hi, 1e-12);
}

TEST(PercentileInterval, RejectsBadInput) {
    std::vector<double> one{1.0};
    std::vector<double> two{1.0, 2.0};
    EXPECT_THROW(percentile_interval(one, 0.9), Error);
    EXPECT_THROW(percentile_interval({}, 0.9), Error);
    EXPECT_THROW(percentile_interval(two, 1.0), Error);
    EXPECT_THROW(percentile_interval(two, 0.0), Error);
}

TEST(PercentileInterval, DisplayLevelNestedInPairwiseLevel) {
    std::vector<double> s;
    std::uint64_t state = 99;
    for (int k = 0; k < 1000; ++k) {
        state = state * 6364136223846793005ULL + 1;
        s.push_back(static_cast<double>(state >> 11) * 0x1.0p-53);
    }
    const auto narrow = percentile_interval(s, kDisplayLevel);
    const auto wide = percentile_interval(s, kPairwiseLevel);
    EXPECT_LE(wide.first, narrow.first);
    EXPECT_GE(wide.second, narrow.second);
}

TEST(Summarize, PointIsMean) {
    const auto e = summarize({1.0, 2.0, 3.0, 10.0}, 0.5, IntervalMethod::bhm_credible);
    EXPECT_DOUBLE_EQ(e.point, 4.0);
    EXPECT_EQ(e.method, IntervalMethod::bhm_credible);
    EXPECT_EQ(e.level, 0.5);
    EXPECT_LE(e.lower, e.upper);
}

TEST(Bonferroni, AdjustsLevel) {
    EXPECT_NEAR(bonferroni_level(0.95, 3), 1 - 0.05 / 3, 1e-15);
    EXPECT_EQ(bonferroni_level(0.95, 1), 0.95);
    EXPECT_THROW(bonferroni_level(0.95, 0), Error);
}

TEST(IntervalMethod, Names) {
    EXPECT_EQ(to_string(IntervalMethod::bootstrap_percentile), "bootstrap-percentile");
    EXPECT_EQ(to_string(IntervalMethod::bhm_credible), "bhm-credible");
    EXPECT_EQ(to_string(IntervalMethod::bhm_posterior_predictive), "bhm-posterior-predictive");
}
