#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "taskagg/core.hpp"
#include "taskagg/samples.hpp"

namespace taskagg {

class ReplicateStore;

/// Per-task score bounds for (raw - low) / (high - low).
struct NormalizationBounds {
    std::vector<std::string> tasks;
    std::vector<double> low;
    std::vector<double> high;

    std::size_t size() const noexcept { return low.size(); }
    /// Throws a computation error naming the first task with high <= low.
    void check() const;
};

/// high_j / low_j = max / min over every model and sample of task j.
NormalizationBounds estimate_bounds(const SampleCube& samples, std::vector<std::string> task_ids);
NormalizationBounds estimate_bounds(const ReplicateStore& store);

struct NormalizedScores {
    Matrix values;
    std::size_t clamped = 0;  ///< entries outside [low, high] pulled into [0,1]
};

NormalizedScores normalize_scores(const Matrix& accuracies, const NormalizationBounds& bounds);

/// Maps one value; no clamping.
inline double normalize_value(double raw, double low, double high) { return (raw - low) / (high - low); }

enum class BoundsMode {
    store_wide,     ///< one set of bounds estimated from the whole store
    per_replicate,  ///< bounds recomputed from each sample's own extremes
};

/// Normalizes every sample with fixed bounds. Values outside the bounds are
/// clamped; the clamp count is returned through `clamped` when non-null.
SampleCube normalize_samples(const SampleCube& samples, const NormalizationBounds& bounds,
                             std::size_t* clamped = nullptr);

/// Normalizes each sample against its own per-task extremes across models.
SampleCube normalize_samples_per_replicate(const SampleCube& samples, const std::vector<std::string>& task_ids);

/// CSV `task,low,high` (fractions).
void write_bounds_csv(const NormalizationBounds& bounds, std::ostream& out);
/// Reads user-supplied bounds; rows must follow `task_order`.
NormalizationBounds load_bounds_csv(const std::filesystem::path& path, const std::vector<std::string>& task_order);

}  // namespace taskagg
