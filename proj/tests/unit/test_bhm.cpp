#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "taskagg/bhm.hpp"
#include "taskagg/error.hpp"
#include "taskagg/slice.hpp"
#include "test_util.hpp"

using namespace taskagg;
using boost::multiprecision::cpp_bin_float_50;

namespace {

EvalTable simstudy_table() {
    return EvalTable({"A", "B"}, {{"t1", "c", 200}, {"t2", "c", 10000}, {"t3", "c", 20000}},
                     {100, 5000, 10000, 115, 5000, 10000});
}

std::vector<ModelPriors> simstudy_priors() {
    return {{PriorSpec::truncated_normal(2000, 10), PriorSpec::truncated_normal(2000, 10)},
            {PriorSpec::truncated_normal(2100, 10), PriorSpec::truncated_normal(1900, 10)}};
}

McmcConfig small_config(std::uint64_t seed = 1) {
    McmcConfig c;
    c.total_iterations = 3000;
    c.burn_in = 500;
    c.thinning = 5;
    c.chains = 2;
    c.seed = seed;
    return c;
}

}  // namespace

TEST(GibbsTheta, FlatPriorWithoutData) {
    auto rng = make_stream(1, StreamDomain::simulation, 0);
    double s = 0.0;
    for (int k = 0; k < 100000; ++k) s += gibbs_theta_update(0, 0, 1.0, 1.0, rng);
    EXPECT_NEAR(s / 100000, 0.5, 0.01);
}

TEST(GibbsTheta, ConjugateMean) {
    auto rng = make_stream(2, StreamDomain::simulation, 0);
    double s = 0.0;
    for (int k = 0; k < 100000; ++k) s += gibbs_theta_update(115, 200, 2000, 2000, rng);
    EXPECT_NEAR(s / 100000, 2115.0 / 4200.0, 0.002);
}

TEST(GibbsTheta, AllCorrectConcentratesAtPosteriorMean) {
    auto rng = make_stream(3, StreamDomain::simulation, 0);
    const double a = 5000, b = 20, n = 3000;
    const double mean = (a + n) / (a + b + n);
    const double sd = std::sqrt(mean * (1 - mean) / (a + b + n + 1));
    double s = 0.0;
    for (int k = 0; k < 20000; ++k) {
        const double t = gibbs_theta_update(3000, 3000, a, b, rng);
        ASSERT_LT(t, 1.0);
        EXPECT_LT(std::abs(t - mean), 8 * sd);
        s += t;
    }
    EXPECT_NEAR(s / 20000, mean, 4 * sd / std::sqrt(20000.0));
}

TEST(GibbsTheta, StaysInsideOpenInterval) {
    auto rng = make_stream(4, StreamDomain::simulation, 0);
    for (int k = 0; k < 20000; ++k) {
        const double t = gibbs_theta_update(0, 1, 0.01, 0.01, rng);
        ASSERT_GT(t, 0.0);
        ASSERT_LT(t, 1.0);
    }
}

TEST(LogConditional, EmptyProductIsPrior) {
    const auto p = PriorSpec::exponential(1e-4);
    EXPECT_DOUBLE_EQ(log_conditional_alpha(7.0, 3.0, {}, p), std::log(1e-4) - 7e-4);
    const auto tn = PriorSpec::truncated_normal(2000, 10);
    EXPECT_DOUBLE_EQ(log_conditional_beta(2.0, 1995.0, {}, tn), tn.log_density(1995.0));
}

TEST(LogConditional, NonpositiveIsMinusInfinity) {
    const std::vector<double> th{0.5, 0.4};
    const auto p = PriorSpec::exponential(1e-4);
    EXPECT_EQ(log_conditional_alpha(0.0, 1.0, th, p), -std::numeric_limits<double>::infinity());
    EXPECT_EQ(log_conditional_alpha(-3.0, 1.0, th, p), -std::numeric_limits<double>::infinity());
    EXPECT_EQ(log_conditional_beta(1.0, -1.0, th, p), -std::numeric_limits<double>::infinity());
}

TEST(LogConditional, MatchesHighPrecisionEvaluation) {
    const std::vector<double> th{0.5, 0.5, 0.5};
    const auto prior = PriorSpec::exponential(1e-4);
    const double beta = 3.7;
    for (double alpha : {1.0, 10.0, 100.0}) {
        const cpp_bin_float_50 a = alpha, b = beta, lam = cpp_bin_float_50(1) / 10000;
        using boost::math::lgamma;
        const cpp_bin_float_50 log_b = lgamma(a) + lgamma(b) - lgamma(a + b);
        const cpp_bin_float_50 expected = log(lam) - lam * a + 3 * (a - 1) * log(cpp_bin_float_50(0.5)) - 3 * log_b;
        const double got = log_conditional_alpha(alpha, beta, th, prior);
        EXPECT_NEAR(got, static_cast<double>(expected), 1e-10 * std::abs(static_cast<double>(expected))) << alpha;
        // β counterpart with the roles swapped is the same number here.
        EXPECT_NEAR(log_conditional_beta(beta, alpha, th, prior), got, 1e-12 * std::abs(got));
    }
}

TEST(LogConditional, LogScaleSamplerMatchesDirectSamplerAndQuadrature) {
    const std::vector<double> th{0.62, 0.71, 0.55, 0.68, 0.6};
    const auto prior = PriorSpec::exponential(1e-4);
    const double beta = 6.0;
    auto logf = [&](double a) { return log_conditional_alpha(a, beta, th, prior); };

    // Quadrature mean of the conditional.
    double z = 0.0, m = 0.0;
    const double peak = logf(10.0);
    for (double a = 0.0005; a < 200.0; a += 0.001) {
        const double d = std::exp(logf(a) - peak);
        z += d;
        m += a * d;
    }
    const double exact = m / z;

    auto rng1 = make_stream(10, StreamDomain::simulation, 0);
    auto rng2 = make_stream(11, StreamDomain::simulation, 0);
    double x = 5.0, u = std::log(5.0), s_direct = 0.0, s_log = 0.0;
    const int n = 60000;
    auto logu = [&](double v) { return logf(std::exp(v)) + v; };
    for (int k = 0; k < n; ++k) {
        x = slice_sample_step(logf, x, 5.0, 50, rng1);
        u = slice_sample_step(logu, u, 1.0, 50, rng2);
        s_direct += x;
        s_log += std::exp(u);
    }
    EXPECT_NEAR(s_direct / n, exact, 0.03 * exact);
    EXPECT_NEAR(s_log / n, exact, 0.03 * exact);
}

TEST(PriorSpec, Validation) {
    EXPECT_THROW(PriorSpec::exponential(0.0), Error);
    EXPECT_THROW(PriorSpec::truncated_normal(5, 0), Error);
    EXPECT_THROW(PriorSpec::fixed(-1), Error);
    EXPECT_EQ(PriorSpec::fixed(3).log_density(3), 0.0);
}

TEST(McmcConfigTest, Validation) {
    McmcConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.retained_per_chain(), 2000);
    c.burn_in = c.total_iterations;
    EXPECT_THROW(c.validate(), Error);
    c = McmcConfig{};
    c.thinning = 0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(FitBhm, ShapeSupportAndDeterminism) {
    const auto t = simstudy_table();
    auto cfg = small_config();
    const auto d1 = fit_bhm(t, simstudy_priors(), cfg);
    cfg.parallelism = 4;
    const auto d2 = fit_bhm(t, simstudy_priors(), cfg);
    EXPECT_EQ(d1.num_draws(), 2U * (3000 - 500) / 5);
    ASSERT_EQ(d1.theta.data().size(), d2.theta.data().size());
    EXPECT_EQ(std::memcmp(d1.theta.data().data(), d2.theta.data().data(), d1.theta.data().size() * sizeof(double)), 0);
    EXPECT_EQ(d1.alpha, d2.alpha);
    EXPECT_EQ(d1.beta, d2.beta);
    for (double v : d1.theta.data()) {
        ASSERT_GT(v, 0.0);
        ASSERT_LT(v, 1.0);
    }
    for (double v : d1.alpha.data()) ASSERT_GT(v, 0.0);
    for (double v : d1.beta.data()) ASSERT_GT(v, 0.0);
}

TEST(FitBhm, PinnedHyperparametersReproduceConjugatePosterior) {
    const auto t = simstudy_table();
    const double a = 30.0, b = 20.0;
    std::vector<ModelPriors> pr(2, ModelPriors{PriorSpec::fixed(a), PriorSpec::fixed(b)});
    const auto d = fit_bhm(t, pr, small_config(3));
    const double S = static_cast<double>(d.num_draws());
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            const double y = static_cast<double>(t.correct(i, j));
            const double n = static_cast<double>(t.size(j));
            const double pa = a + y, pb = b + n - y;
            const double mean = pa / (pa + pb);
            const double var = pa * pb / ((pa + pb) * (pa + pb) * (pa + pb + 1));
            double s = 0.0, s2 = 0.0;
            for (std::size_t k = 0; k < d.num_draws(); ++k) {
                const double v = d.theta.at(k, i, j);
                s += v;
                s2 += v * v;
            }
            const double m = s / S;
            const double v = s2 / S - m * m;
            EXPECT_NEAR(m, mean, 3 * std::sqrt(var / S));
            EXPECT_NEAR(v, var, 3 * var * std::sqrt(2.0 / (S - 1)));
        }
    }
}

TEST(FitBhm, SimulationStudyIntervalIsNegative) {
    McmcConfig cfg;
    cfg.seed = 7;
    const auto d = fit_bhm(simstudy_table(), simstudy_priors(), cfg);
    const auto ci = credible_interval(d, {0, 1, std::nullopt}, 0.95);
    EXPECT_LT(ci.upper, 0.0);
    EXPECT_NEAR(ci.lower, -0.021, 0.005);
    EXPECT_NEAR(ci.upper, -0.003, 0.005);
    EXPECT_EQ(ci.method, IntervalMethod::bhm_credible);
    for (const auto& c : convergence(d)) EXPECT_LT(c.rhat, kRhatWarning) << c.model;
}

TEST(FitBhm, RejectsMismatchedPriors) {
    EXPECT_THROW(fit_bhm(simstudy_table(), default_priors(3), small_config()), Error);
}

TEST(CredibleInterval, SelfDifferenceIsZero) {
    const auto d = fit_bhm(simstudy_table(), default_priors(2), small_config());
    const auto ci = credible_interval(d, {1, 1, std::nullopt}, 0.95);
    EXPECT_EQ(ci.lower, 0.0);
    EXPECT_EQ(ci.upper, 0.0);
}

namespace {

PosteriorDraws constant_draws(double theta, std::size_t S, std::size_t M, std::size_t J) {
    PosteriorDraws d;
    for (std::size_t i = 0; i < M; ++i) d.models.push_back("m" + std::to_string(i));
    for (std::size_t j = 0; j < J; ++j) d.tasks.push_back("t" + std::to_string(j));
    d.theta = SampleCube(S, M, J);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t i = 0; i < M; ++i) {
            for (std::size_t j = 0; j < J; ++j) d.theta.at(s, i, j) = theta;
        }
    }
    d.alpha = Matrix(S, M, 1.0);
    d.beta = Matrix(S, M, 1.0);
    d.config.chains = 1;
    d.config.total_iterations = static_cast<int>(S);
    d.config.burn_in = 0;
    d.config.thinning = 1;
    return d;
}

}  // namespace

TEST(PosteriorPredictive, DegenerateThetaOne) {
    const auto d = constant_draws(1.0, 50, 2, 3);
    const std::vector<std::int64_t> sizes{10, 20, 30};
    const auto p = posterior_predictive(d, sizes, 1);
    for (double v : p.data()) EXPECT_EQ(v, 1.0);
    const std::vector<std::int64_t> wrong{10};
    EXPECT_THROW(posterior_predictive(d, wrong, 1), Error);
}

TEST(PosteriorPredictive, SingleTrialMeanMatchesPosteriorMean) {
    const auto d = fit_bhm(simstudy_table(), simstudy_priors(), small_config(5));
    const std::vector<std::int64_t> ones{1, 1, 1};
    const auto p = posterior_predictive(d, ones, 9);
    double sp = 0.0, st = 0.0;
    for (std::size_t k = 0; k < p.data().size(); ++k) {
        ASSERT_TRUE(p.data()[k] == 0.0 || p.data()[k] == 1.0);
        sp += p.data()[k];
        st += d.theta.data()[k];
    }
    EXPECT_NEAR(sp / p.data().size(), st / p.data().size(), 0.01);
}

TEST(PosteriorPredictive, ParallelismDoesNotChangeDraws) {
    const auto d = fit_bhm(simstudy_table(), simstudy_priors(), small_config(5));
    const auto sizes = simstudy_table().sizes();
    EXPECT_EQ(posterior_predictive(d, sizes, 3, 1), posterior_predictive(d, sizes, 3, 4));
}

TEST(RankProbabilities, SingletonAndDominance) {
    const auto one = constant_draws(0.3, 20, 1, 2);
    const auto p1 = posterior_rank_probabilities(one, WeightVector::uniform(2));
    EXPECT_EQ(p1(0, 0), 1.0);

    auto two = constant_draws(0.3, 40, 2, 2);
    auto rng = make_stream(1, StreamDomain::simulation, 0);
    for (std::size_t s = 0; s < 40; ++s) {
        for (std::size_t j = 0; j < 2; ++j) {
            two.theta.at(s, 0, j) = 0.1 + 0.3 * uniform_open(rng);
            two.theta.at(s, 1, j) = 0.5 + 0.3 * uniform_open(rng);
        }
    }
    const auto p2 = posterior_rank_probabilities(two, WeightVector::uniform(2));
    EXPECT_EQ(p2(1, 0), 1.0);
    EXPECT_EQ(p2(0, 1), 1.0);
    EXPECT_EQ(p2(0, 0), 0.0);
}

TEST(RankProbabilities, TiesFavourLowerIndexAndRowsSumToOne) {
    const auto d = constant_draws(0.4, 10, 3, 2);
    const auto p = posterior_rank_probabilities(d, WeightVector::uniform(2));
    EXPECT_EQ(p(0, 0), 1.0);
    EXPECT_EQ(p(1, 1), 1.0);
    EXPECT_EQ(p(2, 2), 1.0);

    const auto fit = fit_bhm(simstudy_table(), default_priors(2), small_config());
    const auto q = posterior_rank_probabilities(fit, WeightVector::uniform(3));
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(q(i, 0) + q(i, 1), 1.0, 1e-12);
}

TEST(RankProbabilities, StructuredWeightingFavoursRotation) {
    const auto dir = testutil::data_dir();
    const auto t = load_eval_table(dir / "vtab_accuracies.csv", dir / "vtab_tasks.csv", InputFormat::accuracies);
    McmcConfig cfg;
    cfg.total_iterations = 3000;
    cfg.burn_in = 1000;
    cfg.chains = 2;
    cfg.seed = 3;
    const auto d = fit_bhm(t, default_priors(t.num_models()), cfg);
    const CategoryWeights cw{{"natural", "specialized", "structured"}, {0.025, 0.025, 0.95}};
    const auto p = posterior_rank_probabilities(d, expand_category_weights(t.tasks(), cw));
    const auto rot = t.model_index("Rotation");
    std::size_t mode = 0;
    for (std::size_t r = 1; r < t.num_models(); ++r) {
        if (p(rot, r) > p(rot, mode)) mode = r;
    }
    EXPECT_EQ(mode, 0U);
}

TEST(Convergence, IidChainsAndShiftedChains) {
    auto rng = make_stream(8, StreamDomain::simulation, 0);
    std::vector<double> iid(4 * 1000), shifted(4 * 1000);
    for (std::size_t k = 0; k < iid.size(); ++k) {
        iid[k] = standard_normal(rng);
        shifted[k] = iid[k] + static_cast<double>(k / 1000);
    }
    const auto a = scalar_convergence(iid, 4);
    EXPECT_NEAR(a.rhat, 1.0, 0.01);
    EXPECT_GT(a.ess, 2500.0);
    const auto b = scalar_convergence(shifted, 4);
    EXPECT_GT(b.rhat, kRhatWarning);
}
