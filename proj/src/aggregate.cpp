#include "taskagg/aggregate.hpp"

#include <fmt/format.h>

#include "taskagg/error.hpp"

namespace taskagg {

std::vector<double> weighted_scores(const SampleCube& samples, std::size_t model, const WeightVector& weights) {
    if (model >= samples.models()) throw usage_error(fmt::format("model index {} out of range", model));
    if (weights.size() != samples.tasks()) {
        throw usage_error(fmt::format("{} weights for {} tasks", weights.size(), samples.tasks()));
    }
    std::vector<double> out(samples.samples());
    for (std::size_t s = 0; s < samples.samples(); ++s) out[s] = weighted_sum(samples.row(s, model), weights);
    return out;
}

IntervalEstimate score_interval(const SampleCube& samples, std::size_t model, const WeightVector& weights,
                                double level, IntervalMethod method) {
    return summarize(weighted_scores(samples, model, weights), level, method);
}

IntervalEstimate difference_interval(const SampleCube& samples, std::size_t a, std::size_t b,
                                     const WeightVector& weights, double level, IntervalMethod method) {
    auto sa = weighted_scores(samples, a, weights);
    const auto sb = weighted_scores(samples, b, weights);
    for (std::size_t s = 0; s < sa.size(); ++s) sa[s] -= sb[s];
    return summarize(std::move(sa), level, method);
}

}  // namespace taskagg
