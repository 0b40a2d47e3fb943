#include "taskagg/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "taskagg/error.hpp"

namespace taskagg {

WeightVector::WeightVector(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw usage_error("weight vector is empty");
    double sum = 0.0;
    for (double v : w_) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw usage_error(fmt::format("weight {} is negative or not finite", v));
        sum += v;
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
        throw usage_error(fmt::format("weights sum to {:.17g}, expected 1", sum));
    }
}

WeightVector WeightVector::uniform(std::size_t tasks) {
    if (tasks == 0) throw usage_error("uniform weights over zero tasks");
    return WeightVector(std::vector<double>(tasks, 1.0 / static_cast<double>(tasks)));
}

WeightVector WeightVector::vertex(std::size_t tasks, std::size_t k) {
    if (k >= tasks) throw usage_error("vertex index out of range");
    std::vector<double> w(tasks, 0.0);
    w[k] = 1.0;
    return WeightVector(std::move(w));
}

WeightVector expand_category_weights(std::span<const TaskSpec> tasks, const CategoryWeights& weights) {
    if (weights.categories.size() != weights.weights.size()) {
        throw usage_error("category weight labels and values differ in length");
    }
    std::vector<double> w(tasks.size(), 0.0);
    for (std::size_t c = 0; c < weights.categories.size(); ++c) {
        const auto& label = weights.categories[c];
        const auto n = std::count_if(tasks.begin(), tasks.end(), [&](const TaskSpec& t) { return t.category == label; });
        if (n == 0) {
            if (weights.weights[c] != 0.0) throw usage_error("category '" + label + "' has weight but no tasks");
            continue;
        }
        for (std::size_t j = 0; j < tasks.size(); ++j) {
            if (tasks[j].category == label) w[j] = weights.weights[c] / static_cast<double>(n);
        }
    }
    return WeightVector(std::move(w));
}

double weighted_sum(std::span<const double> x, const WeightVector& w) {
    if (x.size() != w.size()) {
        throw usage_error(fmt::format("{} values but {} weights", x.size(), w.size()));
    }
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
    return s;
}

}  // namespace taskagg
