#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taskagg/core.hpp"
#include "taskagg/normalize.hpp"
#include "taskagg/samples.hpp"
#include "taskagg/stats.hpp"
#include "taskagg/weights.hpp"

namespace taskagg {

inline constexpr std::size_t kDefaultReplicates = 10'000;

/// B bootstrap replicates of the per-task accuracy matrix.
///
/// Replicate r, cell (i, j) is Binomial(N_j, Y_ij / N_j) / N_j drawn from the
/// Philox stream make_stream(seed, bootstrap, r, i, j), so each replicate is
/// a pure function of (source, seed, r).
class ReplicateStore {
  public:
    ReplicateStore(std::shared_ptr<const EvalTable> source, std::uint64_t seed, SampleCube replicates);

    std::size_t size() const noexcept { return replicates_.samples(); }
    std::uint64_t seed() const noexcept { return seed_; }
    const EvalTable& source() const noexcept { return *source_; }
    const SampleCube& replicates() const noexcept { return replicates_; }

  private:
    std::shared_ptr<const EvalTable> source_;
    std::uint64_t seed_;
    SampleCube replicates_;
};

/// One replicate (models x tasks accuracies).
Matrix draw_replicate(const EvalTable& table, std::uint64_t replicate_index, std::uint64_t seed);

/// B >= 1 replicates on `parallelism` worker threads; content is identical
/// for every worker count.
ReplicateStore run_bootstrap(const EvalTable& table, std::size_t replicates, std::uint64_t seed,
                             unsigned parallelism = 1);

/// Interval for one model's weighted mean score across tasks. When
/// `normalizer` is given each replicate is normalized with those bounds
/// before aggregation. Unweighted when `weights` is empty.
IntervalEstimate aggregate_interval(const ReplicateStore& store, std::string_view model,
                                    const std::optional<WeightVector>& weights,
                                    const std::optional<NormalizationBounds>& normalizer, double level);

struct PairInterval {
    std::string first;
    std::string second;
    IntervalEstimate interval;  ///< first minus second
};

/// Percentile intervals for every pair (a, b), a listed before b, at the
/// Bonferroni-adjusted level 1 - (1 - level) / comparisons.
std::vector<PairInterval> pairwise_difference_intervals(
    const ReplicateStore& store, std::span<const std::string> models, double level, int comparisons,
    const std::optional<WeightVector>& weights = std::nullopt,
    const std::optional<NormalizationBounds>& normalizer = std::nullopt);

}  // namespace taskagg
