#pragma once

#include <cstddef>
#include <vector>

#include "taskagg/samples.hpp"
#include "taskagg/stats.hpp"
#include "taskagg/weights.hpp"

namespace taskagg {

/// Per-sample weighted score Σ_j w_j x_sij of one model.
std::vector<double> weighted_scores(const SampleCube& samples, std::size_t model, const WeightVector& weights);

/// Mean and percentile interval of a model's weighted score across samples.
IntervalEstimate score_interval(const SampleCube& samples, std::size_t model, const WeightVector& weights,
                                double level, IntervalMethod method);

/// Same for the per-sample difference score(a) - score(b).
IntervalEstimate difference_interval(const SampleCube& samples, std::size_t a, std::size_t b,
                                     const WeightVector& weights, double level, IntervalMethod method);

}  // namespace taskagg
