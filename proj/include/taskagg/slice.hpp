#pragma once

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "taskagg/error.hpp"
#include "taskagg/random.hpp"

namespace taskagg {

/// Shrinkage steps allowed per transition before the sampler gives up.
inline constexpr int kSliceShrinkBudget = 1000;

/// State of a failed slice transition.
struct SliceDiagnostics {
    double x0 = 0.0;
    double logdensity_x0 = 0.0;
    double level = 0.0;  ///< auxiliary log level u
    double left = 0.0;
    double right = 0.0;
    int stepouts = 0;
    int shrinks = 0;
};

class SliceError : public Error {
  public:
    explicit SliceError(const SliceDiagnostics& d)
        : Error(ErrorKind::computation,
                fmt::format("slice sampler found no point above level {} after {} shrinks "
                            "(x0={}, log f(x0)={}, bracket=[{}, {}], {} step-outs)",
                            d.level, d.shrinks, d.x0, d.logdensity_x0, d.left, d.right, d.stepouts)),
          diagnostics_(d) {}

    const SliceDiagnostics& diagnostics() const noexcept { return diagnostics_; }

  private:
    SliceDiagnostics diagnostics_;
};

/// One univariate slice-sampling transition with stepping out and shrinkage.
///
/// Draws u = log f(x0) + log U, places a window of `width` randomly around
/// x0, extends it by whole widths (at most `max_stepout` in total, split
/// randomly between the two ends) while the ends stay above u, then samples
/// uniformly in the window, shrinking it towards x0 on every rejection.
/// `logf_x0` must equal logdensity(x0) and be finite.
template <class LogDensity>
double slice_sample_step(LogDensity&& logdensity, double x0, double logf_x0, double width, int max_stepout,
                         PhiloxEngine& rng, int shrink_budget = kSliceShrinkBudget) {
    if (!(width > 0.0) || !std::isfinite(width)) throw usage_error(fmt::format("slice width {} must be positive", width));
    if (max_stepout < 0) throw usage_error("slice max_stepout must be nonnegative");
    if (!std::isfinite(logf_x0)) {
        throw computation_error(fmt::format("slice sampler started where log density is {} (x0={})", logf_x0, x0));
    }
    SliceDiagnostics d;
    d.x0 = x0;
    d.logdensity_x0 = logf_x0;
    d.level = logf_x0 + std::log(uniform_open(rng));

    double left = x0 - width * uniform_open(rng);
    double right = left + width;
    int j = static_cast<int>(std::floor(max_stepout * uniform_open(rng)));
    int k = max_stepout > 0 ? max_stepout - 1 - j : 0;
    while (j > 0 && logdensity(left) > d.level) {
        left -= width;
        --j;
        ++d.stepouts;
    }
    while (k > 0 && logdensity(right) > d.level) {
        right += width;
        --k;
        ++d.stepouts;
    }

    for (d.shrinks = 0; d.shrinks < shrink_budget; ++d.shrinks) {
        const double x1 = left + (right - left) * uniform_open(rng);
        if (logdensity(x1) >= d.level) return x1;
        if (x1 < x0) {
            left = x1;
        } else {
            right = x1;
        }
    }
    d.left = left;
    d.right = right;
    throw SliceError(d);
}

template <class LogDensity>
double slice_sample_step(LogDensity&& logdensity, double x0, double width, int max_stepout, PhiloxEngine& rng,
                         int shrink_budget = kSliceShrinkBudget) {
    const double f0 = logdensity(x0);
    return slice_sample_step(logdensity, x0, f0, width, max_stepout, rng, shrink_budget);
}

}  // namespace taskagg
