#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace taskagg {

enum class IntervalMethod { bootstrap_percentile, bhm_credible, bhm_posterior_predictive };

std::string_view to_string(IntervalMethod m);

struct IntervalEstimate {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0;
    IntervalMethod method = IntervalMethod::bootstrap_percentile;
};

/// Default display level: non-overlap of two 83.4% intervals approximates a
/// two-sample test at alpha = 0.05.
inline constexpr double kDisplayLevel = 0.834;
inline constexpr double kPairwiseLevel = 0.95;

/// Inclusive linear-interpolation quantile of already sorted samples
/// (Hyndman-Fan type 7): h = (n-1) q, x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
double quantile_sorted(std::span<const double> sorted, double q);

/// Equal-tailed interval at `level` by the type-7 rule. Requires >= 2
/// samples and level in (0,1). `samples` need not be sorted.
std::pair<double, double> percentile_interval(std::span<const double> samples, double level);

/// Mean plus percentile interval of a sample vector.
IntervalEstimate summarize(std::vector<double> samples, double level, IntervalMethod method);

/// Level after Bonferroni adjustment for m simultaneous comparisons.
double bonferroni_level(double level, int comparisons);

double mean(std::span<const double> x);
double sample_variance(std::span<const double> x);

}  // namespace taskagg
