#include "taskagg/bhm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "parallel.hpp"
#include "taskagg/aggregate.hpp"
#include "taskagg/error.hpp"
#include "taskagg/slice.hpp"

namespace taskagg {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lgamma_safe(double x) {
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double log_beta_fn(double a, double b) { return lgamma_safe(a) + lgamma_safe(b) - lgamma_safe(a + b); }

std::vector<double> functional_values(const SampleCube& cube, const DrawFunctional& f) {
    if (cube.samples() == 0) throw computation_error("no draws to summarize");
    if (f.model >= cube.models() || (f.minus && *f.minus >= cube.models())) {
        throw usage_error("functional references a model outside the draws");
    }
    const WeightVector w = f.weights ? *f.weights : WeightVector::uniform(cube.tasks());
    auto values = weighted_scores(cube, f.model, w);
    if (f.minus) {
        const auto other = weighted_scores(cube, *f.minus, w);
        for (std::size_t s = 0; s < values.size(); ++s) values[s] -= other[s];
    }
    return values;
}

// Slice step on u = log x for a hyperparameter whose conditional density in
// x is `sum_log`, `other` and the prior; the log-Jacobian adds u.
double update_hyper(double x, double other, double sum_log, std::size_t tasks, const PriorSpec& prior,
                    const McmcConfig& cfg, PhiloxEngine& rng) {
    if (prior.kind == PriorSpec::Kind::fixed) return prior.value;
    auto logf = [&](double u) {
        return log_conditional_hyper(std::exp(u), other, sum_log, tasks, prior) + u;
    };
    const double u0 = std::log(x);
    const double f0 = logf(u0);
    return std::exp(slice_sample_step(logf, u0, f0, cfg.slice_width, cfg.slice_max_stepout, rng));
}

double initial_hyper(const PriorSpec& p) { return p.kind == PriorSpec::Kind::fixed ? p.value : 2.0; }

}  // namespace

PriorSpec PriorSpec::exponential(double rate) {
    PriorSpec p;
    p.kind = Kind::exponential;
    p.rate = rate;
    p.validate();
    return p;
}

PriorSpec PriorSpec::truncated_normal(double mean, double sd) {
    PriorSpec p;
    p.kind = Kind::truncated_normal;
    p.mean = mean;
    p.sd = sd;
    p.validate();
    return p;
}

PriorSpec PriorSpec::fixed(double value) {
    PriorSpec p;
    p.kind = Kind::fixed;
    p.value = value;
    p.validate();
    return p;
}

void PriorSpec::validate() const {
    switch (kind) {
        case Kind::exponential:
            if (!(rate > 0.0) || !std::isfinite(rate)) throw usage_error(fmt::format("prior rate {} must be > 0", rate));
            break;
        case Kind::truncated_normal:
            if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean)) {
                throw usage_error(fmt::format("truncated normal prior needs finite mean and sd > 0 (got {}, {})", mean, sd));
            }
            break;
        case Kind::fixed:
            if (!(value > 0.0) || !std::isfinite(value)) {
                throw usage_error(fmt::format("fixed hyperparameter {} must be > 0", value));
            }
            break;
    }
}

double PriorSpec::log_density(double x) const {
    if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
    switch (kind) {
        case Kind::exponential:
            return std::log(rate) - rate * x;
        case Kind::truncated_normal: {
            const double z = (x - mean) / sd;
            // log Φ(μ/σ) renormalizes the mass lost below zero.
            const double log_mass = std::log(0.5 * std::erfc(-mean / (sd * std::sqrt(2.0))));
            return -std::log(sd) - 0.5 * std::log(2.0 * M_PI) - 0.5 * z * z - log_mass;
        }
        case Kind::fixed:
            return x == value ? 0.0 : kNegInf;
    }
    return kNegInf;
}

std::string to_string(const PriorSpec& p) {
    switch (p.kind) {
        case PriorSpec::Kind::exponential:
            return fmt::format("exponential(rate={})", p.rate);
        case PriorSpec::Kind::truncated_normal:
            return fmt::format("truncated_normal(mean={}, sd={})", p.mean, p.sd);
        case PriorSpec::Kind::fixed:
            return fmt::format("fixed({})", p.value);
    }
    return "unknown";
}

std::vector<ModelPriors> default_priors(std::size_t models) {
    const auto p = PriorSpec::exponential(kDefaultPriorRate);
    return std::vector<ModelPriors>(models, ModelPriors{p, p});
}

void McmcConfig::validate() const {
    if (total_iterations < 1) throw usage_error("MCMC needs at least one iteration");
    if (burn_in < 0 || burn_in >= total_iterations) {
        throw usage_error(fmt::format("burn-in {} must lie in [0, {})", burn_in, total_iterations));
    }
    if (thinning < 1) throw usage_error("thinning must be >= 1");
    if (chains < 1) throw usage_error("at least one chain is required");
    if (!(slice_width > 0.0)) throw usage_error("slice width must be positive");
    if (slice_max_stepout < 0) throw usage_error("slice max step-out must be >= 0");
    if (retained_per_chain() < 1) throw usage_error("configuration retains no draws");
}

std::size_t PosteriorDraws::model_index(std::string_view model) const {
    const auto it = std::find(models.begin(), models.end(), model);
    if (it == models.end()) throw usage_error(fmt::format("unknown model '{}'", model));
    return static_cast<std::size_t>(it - models.begin());
}

double gibbs_theta_update(std::int64_t y, std::int64_t n, double alpha, double beta, PhiloxEngine& rng) {
    const double a = alpha + static_cast<double>(y);
    const double b = beta + static_cast<double>(n - y);
    const double t = beta_variate(rng, a, b);
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    return std::clamp(t, lo, hi);
}

double log_conditional_hyper(double x, double other, double sum_log, std::size_t tasks, const PriorSpec& prior) {
    if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
    const double lp = prior.log_density(x);
    if (tasks == 0) return lp;
    if (lp == kNegInf) return kNegInf;
    const double v = lp + (x - 1.0) * sum_log - static_cast<double>(tasks) * log_beta_fn(x, other);
    return std::isnan(v) ? kNegInf : v;
}

double log_conditional_alpha(double alpha, double beta, std::span<const double> thetas, const PriorSpec& prior) {
    double s = 0.0;
    for (double t : thetas) s += std::log(t);
    return log_conditional_hyper(alpha, beta, s, thetas.size(), prior);
}

double log_conditional_beta(double alpha, double beta, std::span<const double> thetas, const PriorSpec& prior) {
    double s = 0.0;
    for (double t : thetas) s += std::log1p(-t);
    return log_conditional_hyper(beta, alpha, s, thetas.size(), prior);
}

PosteriorDraws fit_bhm(const EvalTable& table, const std::vector<ModelPriors>& priors, const McmcConfig& config) {
    config.validate();
    const std::size_t M = table.num_models();
    const std::size_t J = table.num_tasks();
    if (priors.size() != M) {
        throw usage_error(fmt::format("{} prior sets for {} models", priors.size(), M));
    }
    for (const auto& p : priors) {
        p.alpha.validate();
        p.beta.validate();
    }
    const std::size_t K = static_cast<std::size_t>(config.retained_per_chain());
    const std::size_t C = static_cast<std::size_t>(config.chains);

    PosteriorDraws out;
    out.models = table.models();
    for (const auto& t : table.tasks()) out.tasks.push_back(t.task_id);
    out.sizes = table.sizes();
    out.theta = SampleCube(C * K, M, J);
    out.alpha = Matrix(C * K, M);
    out.beta = Matrix(C * K, M);
    out.config = config;
    out.priors = priors;

    // Initial log densities must be finite for every hyperparameter.
    for (std::size_t i = 0; i < M; ++i) {
        double sl = 0.0, sl1m = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
            const double t = (static_cast<double>(table.correct(i, j)) + 0.5) / (static_cast<double>(table.size(j)) + 1.0);
            sl += std::log(t);
            sl1m += std::log1p(-t);
        }
        const double a0 = initial_hyper(priors[i].alpha);
        const double b0 = initial_hyper(priors[i].beta);
        if (!std::isfinite(log_conditional_hyper(a0, b0, sl, J, priors[i].alpha)) ||
            !std::isfinite(log_conditional_hyper(b0, a0, sl1m, J, priors[i].beta))) {
            throw computation_error(fmt::format("non-finite log density at initialization for model '{}'",
                                                table.models()[i]));
        }
    }

    detail::parallel_chunks(C, config.parallelism, [&](std::size_t c_begin, std::size_t c_end) {
        for (std::size_t c = c_begin; c < c_end; ++c) {
            auto rng = make_stream(config.seed, StreamDomain::mcmc_chain, c);
            Matrix theta(M, J);
            std::vector<double> alpha(M), beta(M);
            for (std::size_t i = 0; i < M; ++i) {
                for (std::size_t j = 0; j < J; ++j) {
                    theta(i, j) = (static_cast<double>(table.correct(i, j)) + 0.5) /
                                  (static_cast<double>(table.size(j)) + 1.0);
                }
                alpha[i] = initial_hyper(priors[i].alpha);
                beta[i] = initial_hyper(priors[i].beta);
            }
            for (int t = 0; t < config.total_iterations; ++t) {
                for (std::size_t i = 0; i < M; ++i) {
                    double sl = 0.0, sl1m = 0.0;
                    for (std::size_t j = 0; j < J; ++j) {
                        const double th = gibbs_theta_update(table.correct(i, j), table.size(j), alpha[i], beta[i], rng);
                        theta(i, j) = th;
                        sl += std::log(th);
                        sl1m += std::log1p(-th);
                    }
                    alpha[i] = update_hyper(alpha[i], beta[i], sl, J, priors[i].alpha, config, rng);
                    beta[i] = update_hyper(beta[i], alpha[i], sl1m, J, priors[i].beta, config, rng);
                }
                const int since = t - config.burn_in + 1;
                if (since <= 0 || since % config.thinning != 0) continue;
                const std::size_t k = static_cast<std::size_t>(since / config.thinning) - 1;
                if (k >= K) continue;
                const std::size_t s = c * K + k;
                std::copy(theta.data().begin(), theta.data().end(), out.theta.sample(s).begin());
                for (std::size_t i = 0; i < M; ++i) {
                    out.alpha(s, i) = alpha[i];
                    out.beta(s, i) = beta[i];
                }
            }
        }
    });
    return out;
}

IntervalEstimate credible_interval(const PosteriorDraws& draws, const DrawFunctional& f, double level) {
    return summarize(functional_values(draws.theta, f), level, IntervalMethod::bhm_credible);
}

IntervalEstimate predictive_interval(const SampleCube& predictive, const DrawFunctional& f, double level) {
    return summarize(functional_values(predictive, f), level, IntervalMethod::bhm_posterior_predictive);
}

SampleCube posterior_predictive(const PosteriorDraws& draws, std::span<const std::int64_t> sizes, std::uint64_t seed,
                                unsigned parallelism) {
    const auto& theta = draws.theta;
    if (sizes.size() != theta.tasks()) {
        throw usage_error(fmt::format("{} task sizes for {} tasks", sizes.size(), theta.tasks()));
    }
    for (auto n : sizes) {
        if (n < 1) throw usage_error("task sizes must be >= 1");
    }
    SampleCube out(theta.samples(), theta.models(), theta.tasks());
    detail::parallel_chunks(theta.samples(), parallelism, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            for (std::size_t i = 0; i < theta.models(); ++i) {
                for (std::size_t j = 0; j < theta.tasks(); ++j) {
                    auto rng = make_stream(seed, StreamDomain::predictive, s, i, j);
                    const auto n = sizes[j];
                    out.at(s, i, j) = static_cast<double>(binomial(rng, n, theta.at(s, i, j))) / static_cast<double>(n);
                }
            }
        }
    });
    return out;
}

Matrix rank_probabilities(const SampleCube& samples, const WeightVector& weights) {
    const std::size_t M = samples.models();
    if (samples.samples() == 0) throw computation_error("no draws to rank");
    if (weights.size() != samples.tasks()) {
        throw usage_error(fmt::format("{} weights for {} tasks", weights.size(), samples.tasks()));
    }
    std::vector<std::size_t> counts(M * M, 0);
    std::vector<double> score(M);
    std::vector<std::size_t> order(M);
    for (std::size_t s = 0; s < samples.samples(); ++s) {
        for (std::size_t i = 0; i < M; ++i) score[i] = weighted_sum(samples.row(s, i), weights);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
        for (std::size_t r = 0; r < M; ++r) ++counts[order[r] * M + r];
    }
    Matrix p(M, M);
    const double n = static_cast<double>(samples.samples());
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t r = 0; r < M; ++r) p(i, r) = static_cast<double>(counts[i * M + r]) / n;
    }
    return p;
}

Matrix posterior_rank_probabilities(const PosteriorDraws& draws, const WeightVector& weights) {
    return rank_probabilities(draws.theta, weights);
}

ConvergenceSummary scalar_convergence(std::span<const double> values, std::size_t chains) {
    ConvergenceSummary out;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (chains == 0 || values.size() % chains != 0) throw usage_error("values do not split evenly into chains");
    const std::size_t n = values.size() / chains;
    const std::size_t h = n / 2;
    if (h < 2) {
        out.rhat = nan;
        out.ess = nan;
        return out;
    }
    // Split every chain into its first and last h draws.
    std::vector<std::span<const double>> parts;
    for (std::size_t c = 0; c < chains; ++c) {
        parts.push_back(values.subspan(c * n, h));
        parts.push_back(values.subspan(c * n + n - h, h));
    }
    const double m = static_cast<double>(parts.size());
    std::vector<double> means;
    double w = 0.0;
    for (const auto& p : parts) {
        means.push_back(mean(p));
        w += sample_variance(p);
    }
    w /= m;
    const double b = static_cast<double>(h) * sample_variance(means);
    const double hd = static_cast<double>(h);
    const double var_plus = (hd - 1.0) / hd * w + b / hd;
    if (!(var_plus > 0.0)) {
        out.rhat = 1.0;
        out.ess = m * hd;
        return out;
    }
    out.rhat = w > 0.0 ? std::sqrt(var_plus / w) : std::numeric_limits<double>::infinity();

    // Variogram autocorrelations, summed over Geyer's initial positive pairs.
    auto rho = [&](std::size_t lag) {
        double v = 0.0;
        for (const auto& p : parts) {
            for (std::size_t i = lag; i < h; ++i) {
                const double d = p[i] - p[i - lag];
                v += d * d;
            }
        }
        v /= m * static_cast<double>(h - lag);
        return 1.0 - v / (2.0 * var_plus);
    };
    double sum = 0.0;
    for (std::size_t t = 1; t + 1 < h; t += 2) {
        const double pair = rho(t) + rho(t + 1);
        if (pair < 0.0) break;
        sum += pair;
    }
    out.ess = m * hd / (1.0 + 2.0 * sum);
    return out;
}

std::vector<ConvergenceSummary> convergence(const PosteriorDraws& draws) {
    std::vector<ConvergenceSummary> out;
    const auto uniform = WeightVector::uniform(draws.theta.tasks());
    for (std::size_t i = 0; i < draws.theta.models(); ++i) {
        auto s = scalar_convergence(weighted_scores(draws.theta, i, uniform), draws.chains());
        s.model = draws.models[i];
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace taskagg
