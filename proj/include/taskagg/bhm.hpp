#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taskagg/core.hpp"
#include "taskagg/random.hpp"
#include "taskagg/samples.hpp"
#include "taskagg/stats.hpp"
#include "taskagg/weights.hpp"

namespace taskagg {

/// Hyperprior on one of α_i, β_i.
struct PriorSpec {
    enum class Kind {
        exponential,       ///< rate λ
        truncated_normal,  ///< N(μ, σ²) restricted to (0, ∞)
        fixed,             ///< point mass; the hyperparameter is never updated
    };

    Kind kind = Kind::exponential;
    double rate = 1e-4;
    double mean = 0.0;
    double sd = 1.0;
    double value = 1.0;

    static PriorSpec exponential(double rate);
    static PriorSpec truncated_normal(double mean, double sd);
    static PriorSpec fixed(double value);

    /// Normalized log density; -inf outside the support.
    double log_density(double x) const;
    /// Throws a usage error for λ <= 0, σ <= 0 or a nonpositive fixed value.
    void validate() const;

    bool operator==(const PriorSpec&) const = default;
};

std::string to_string(const PriorSpec& prior);

struct ModelPriors {
    PriorSpec alpha;
    PriorSpec beta;
};

inline constexpr double kDefaultPriorRate = 1e-4;

/// Exponential(1e-4) on every α_i and β_i.
std::vector<ModelPriors> default_priors(std::size_t models);

struct McmcConfig {
    int total_iterations = 12'000;
    int burn_in = 2'000;
    int thinning = 5;
    int chains = 4;
    std::uint64_t seed = 0;
    double slice_width = 1.0;  ///< on the log α / log β scale
    int slice_max_stepout = 50;
    unsigned parallelism = 1;  ///< worker threads; does not affect draws

    void validate() const;
    /// Retained iterations per chain: iteration t (0-based) is kept when
    /// t >= burn_in and (t - burn_in + 1) is a multiple of thinning.
    int retained_per_chain() const { return (total_iterations - burn_in) / thinning; }

    bool operator==(const McmcConfig&) const = default;
};

/// Retained draws. Sample s = chain * draws_per_chain + k.
struct PosteriorDraws {
    std::vector<std::string> models;
    std::vector<std::string> tasks;
    std::vector<std::int64_t> sizes;
    SampleCube theta;  ///< S x models x tasks
    Matrix alpha;      ///< S x models
    Matrix beta;       ///< S x models
    McmcConfig config;
    std::vector<ModelPriors> priors;

    std::size_t num_draws() const noexcept { return theta.samples(); }
    std::size_t chains() const noexcept { return static_cast<std::size_t>(config.chains); }
    std::size_t draws_per_chain() const noexcept { return static_cast<std::size_t>(config.retained_per_chain()); }
    std::size_t model_index(std::string_view model) const;
};

/// Beta(alpha + Y, beta + N - Y) draw kept strictly inside (0, 1).
double gibbs_theta_update(std::int64_t y, std::int64_t n, double alpha, double beta, PhiloxEngine& rng);

/// log prior(α) + (α-1) Σ_j log θ_j - J log B(α, β); -inf for α <= 0.
double log_conditional_alpha(double alpha, double beta, std::span<const double> thetas, const PriorSpec& prior);
/// log prior(β) + (β-1) Σ_j log(1-θ_j) - J log B(α, β); -inf for β <= 0.
double log_conditional_beta(double alpha, double beta, std::span<const double> thetas, const PriorSpec& prior);

/// Same densities from sufficient statistics: `sum_log` is Σ log θ_j for α
/// and Σ log(1-θ_j) for β, `other` the fixed partner hyperparameter.
double log_conditional_hyper(double x, double other, double sum_log, std::size_t tasks, const PriorSpec& prior);

/// Gibbs sampler: conjugate θ updates, then slice steps on log α_i and
/// log β_i (log-Jacobian added). Chains use streams (seed, mcmc_chain, c)
/// and are independent of the worker count.
PosteriorDraws fit_bhm(const EvalTable& table, const std::vector<ModelPriors>& priors, const McmcConfig& config);

/// Functional Σ_j w_j θ_aj, optionally minus the same for model `minus`.
struct DrawFunctional {
    std::size_t model = 0;
    std::optional<std::size_t> minus;
    std::optional<WeightVector> weights;  ///< uniform when empty
};

/// Equal-tailed interval of the functional over retained θ draws.
IntervalEstimate credible_interval(const PosteriorDraws& draws, const DrawFunctional& f, double level);

/// Y~/N_j with Y~ ~ Binomial(N_j, θ_ij) for every retained draw; cell
/// (s, i, j) uses stream (seed, predictive, s, i, j).
SampleCube posterior_predictive(const PosteriorDraws& draws, std::span<const std::int64_t> sizes,
                                std::uint64_t seed, unsigned parallelism = 1);

/// Interval of the functional over posterior-predictive accuracies.
IntervalEstimate predictive_interval(const SampleCube& predictive, const DrawFunctional& f, double level);

/// P(model i has rank r) with rank 1 the largest weighted sum. Ties within
/// a draw are broken in favour of the lower model index.
Matrix posterior_rank_probabilities(const PosteriorDraws& draws, const WeightVector& weights);
Matrix rank_probabilities(const SampleCube& samples, const WeightVector& weights);

struct ConvergenceSummary {
    std::string model;
    double rhat = 0.0;  ///< split-chain potential scale reduction of the unweighted mean θ
    double ess = 0.0;   ///< effective sample size of the same quantity
};

inline constexpr double kRhatWarning = 1.05;

std::vector<ConvergenceSummary> convergence(const PosteriorDraws& draws);

/// Split R-hat and ESS of one scalar chain set (chains x draws, row-major).
ConvergenceSummary scalar_convergence(std::span<const double> values, std::size_t chains);

}  // namespace taskagg
