#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taskagg/core.hpp"
#include "taskagg/normalize.hpp"
#include "taskagg/weights.hpp"

namespace taskagg {

/// S = Σ_j w_j x_j.
double weighted_score(std::span<const double> acc, const WeightVector& weights);
/// Category-weighted score with the equal-within-category expansion.
double weighted_score(std::span<const double> acc, std::span<const TaskSpec> tasks, const CategoryWeights& weights);

/// p(1-p)/N.
double binomial_variance(double p, std::int64_t n);

/// Σ_j w_j² p_j(1-p_j)/N_j + 2 Σ_{j<j'} w_j w_j' Cov_jj'. The diagonal of
/// `covariance` is ignored (the binomial variances are used); it must be
/// square with one row per task and symmetric.
double weighted_variance(std::span<const double> acc, std::span<const std::int64_t> sizes,
                         const WeightVector& weights, const Matrix* covariance = nullptr);

/// Var of a category average over independent tasks: n_c⁻² Σ_{j∈c} Var[p̂_j].
double category_mean_variance(std::span<const double> acc, std::span<const std::int64_t> sizes);

/// Σ_c w_c² Var[p̄_c] over the categories of `tasks` (independence).
double weighted_category_variance(std::span<const double> acc, std::span<const TaskSpec> tasks,
                                  const CategoryWeights& weights);

/// sqrt(varA + varB - 2 rho sqrt(varA varB)), radicand clamped at 0.
double difference_se(double var_a, double var_b, double rho);

/// sqrt(((k+1) - 2 rho sqrt(k)) / (k+1)) for a variance ratio k >= 1.
double se_reduction_factor(double k, double rho);

struct SimplexCell {
    double w_nat = 0.0;
    double w_sp = 0.0;
    double w_str = 0.0;
    std::optional<std::size_t> winner;  ///< model index; empty = INDETERMINATE
    double margin = 0.0;                ///< (S_1 - S_2) / SE of the top two
};

inline constexpr std::string_view kIndeterminate = "INDETERMINATE";

struct SimplexField {
    double grid_step = 0.01;
    double z = 2.0;
    double rho = 0.0;
    bool normalized = false;
    /// Category labels in (nat, sp, str) order.
    std::array<std::string, 3> categories;
    std::vector<std::string> models;
    std::vector<SimplexCell> cells;

    std::string_view winner_label(const SimplexCell& c) const {
        return c.winner ? std::string_view(models[*c.winner]) : kIndeterminate;
    }
};

struct SimplexOptions {
    double grid_step = 0.01;
    double z = 2.0;
    double rho = 0.0;
    std::array<std::string, 3> categories{"natural", "specialized", "structured"};
    /// When set, scores use normalized accuracies and variances scale by
    /// 1 / (high - low)².
    std::optional<NormalizationBounds> normalizer;
    unsigned parallelism = 1;
};

/// Number of lattice points with step h on the 2-simplex.
std::size_t simplex_cell_count(double grid_step);

/// Labels every lattice weighting (w_nat, w_sp, w_str) with the top model
/// when its lead over the runner-up is at least z standard errors and
/// positive; otherwise INDETERMINATE. An exact tie for first place is always
/// INDETERMINATE.
SimplexField simplex_scan(const EvalTable& table, const SimplexOptions& options);

/// CSV `w_nat,w_sp,w_str,winner,margin_se`.
void write_simplex_csv(const SimplexField& field, std::ostream& out);

}  // namespace taskagg
