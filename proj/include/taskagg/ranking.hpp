#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskagg/core.hpp"
#include "taskagg/random.hpp"
#include "taskagg/samples.hpp"
#include "taskagg/stats.hpp"

namespace taskagg {

enum class RankScheme { by_average, geometric_mean, average_rank, average_rank_noise, average_rank_binned };

inline constexpr RankScheme kAllRankSchemes[] = {RankScheme::by_average, RankScheme::geometric_mean,
                                                 RankScheme::average_rank, RankScheme::average_rank_noise,
                                                 RankScheme::average_rank_binned};

std::string_view to_string(RankScheme s);
/// Accepts the to_string names; throws a usage error otherwise.
RankScheme parse_rank_scheme(std::string_view name);

/// How tied values share positions.
enum class TiePolicy {
    fractional,  ///< mean of the tied positions
    max,         ///< every tied entry takes the worst tied position
};

struct RankParams {
    double noise_sd = 1.0;   ///< percentage points
    double bin_width = 1.0;  ///< percentage points
    TiePolicy binned_ties = TiePolicy::fractional;
};

/// Descending ranks of `values` (rank 1 = largest).
std::vector<double> rank_descending(std::span<const double> values, TiePolicy ties = TiePolicy::fractional);

/// Rank by across-task mean accuracy.
std::vector<double> ranks_by_average(const Matrix& acc);

struct GeometricRanks {
    std::vector<double> ranks;
    std::vector<bool> zero;  ///< model had a zero accuracy, geometric mean set to 0
};

GeometricRanks ranks_by_geometric_mean(const Matrix& acc);

enum class AverageRankVariant { plain, noise, binned };

/// Per-task descending ranks averaged over tasks. Accuracies are fractions
/// and are ranked on the percentage scale: the noise variant adds
/// Normal(0, noise_sd) percentage points per cell drawn from `rng`; the
/// binned variant ranks floor(100 p / bin_width) buckets. `rng` may be null
/// unless the noise variant has noise_sd > 0.
std::vector<double> average_rank(const Matrix& acc, AverageRankVariant variant, const RankParams& params,
                                 PhiloxEngine* rng);

/// Scheme dispatch for one sample.
std::vector<double> scheme_ranks(const Matrix& acc, RankScheme scheme, const RankParams& params, PhiloxEngine* rng,
                                 std::vector<bool>* zero_flags = nullptr);

struct RankSummary {
    std::string model;
    RankScheme scheme = RankScheme::by_average;
    double point = 0.0;
    IntervalEstimate interval;
    std::size_t zero_flagged = 0;  ///< samples with a zero geometric mean
};

/// Applies the scheme to every sample; the noise variant draws from stream
/// (seed, rank_noise, s) for sample s. `method` tags the sample source.
std::vector<RankSummary> rank_intervals(const SampleCube& samples, const std::vector<std::string>& models,
                                        RankScheme scheme, double level, const RankParams& params,
                                        std::uint64_t seed, IntervalMethod method, unsigned parallelism = 1);

}  // namespace taskagg
