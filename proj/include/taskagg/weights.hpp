#pragma once

#include <span>
#include <string>
#include <vector>

#include "taskagg/core.hpp"

namespace taskagg {

/// Nonnegative task weights summing to 1 (within 1e-12).
class WeightVector {
  public:
    /// Validates nonnegativity and the unit sum; throws a usage error.
    explicit WeightVector(std::vector<double> weights);

    static WeightVector uniform(std::size_t tasks);
    static WeightVector vertex(std::size_t tasks, std::size_t k);

    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t j) const { return w_[j]; }
    std::span<const double> values() const noexcept { return w_; }

    bool operator==(const WeightVector&) const = default;

  private:
    std::vector<double> w_;
};

inline constexpr double kWeightSumTolerance = 1e-12;

/// Weights over task categories (e.g. natural/specialized/structured).
struct CategoryWeights {
    std::vector<std::string> categories;
    std::vector<double> weights;
};

/// Expands category weights to per-task weights: every task in category c
/// gets w_c / n_c. Categories absent from `weights` get zero.
WeightVector expand_category_weights(std::span<const TaskSpec> tasks, const CategoryWeights& weights);

/// Weighted sum Σ_j w_j x_j; throws on dimension mismatch.
double weighted_sum(std::span<const double> x, const WeightVector& w);

}  // namespace taskagg
