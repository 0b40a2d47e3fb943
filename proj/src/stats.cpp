#include "taskagg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "taskagg/error.hpp"

namespace taskagg {

std::string_view to_string(IntervalMethod m) {
    switch (m) {
        case IntervalMethod::bootstrap_percentile: return "bootstrap-percentile";
        case IntervalMethod::bhm_credible: return "bhm-credible";
        case IntervalMethod::bhm_posterior_predictive: return "bhm-posterior-predictive";
    }
    return "unknown";
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw usage_error("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::pair<double, double> percentile_interval(std::span<const double> samples, double level) {
    if (samples.size() < 2) {
        throw usage_error(fmt::format("percentile interval needs at least 2 samples, got {}", samples.size()));
    }
    if (!(level > 0.0 && level < 1.0)) throw usage_error(fmt::format("interval level {} not in (0,1)", level));
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double tail = (1.0 - level) / 2.0;
    return {quantile_sorted(sorted, tail), quantile_sorted(sorted, 1.0 - tail)};
}

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

IntervalEstimate summarize(std::vector<double> samples, double level, IntervalMethod method) {
    IntervalEstimate out;
    out.point = mean(samples);
    std::tie(out.lower, out.upper) = percentile_interval(samples, level);
    // Summation error must not move the mean of a constant sample off its value.
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*lo == *hi) out.point = *lo;
    out.level = level;
    out.method = method;
    return out;
}

double bonferroni_level(double level, int comparisons) {
    if (comparisons < 1) throw usage_error("Bonferroni comparison count must be >= 1");
    return 1.0 - (1.0 - level) / comparisons;
}

}  // namespace taskagg
