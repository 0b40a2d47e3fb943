#include "taskagg/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "parallel.hpp"
#include "taskagg/error.hpp"

namespace taskagg {
namespace {

// Guards floor() against representation error such as 0.68 * 100 = 67.999...
constexpr double kBinEpsilon = 1e-9;

void check_params(const RankParams& p) {
    if (!(p.bin_width > 0.0)) throw usage_error(fmt::format("bin width {} must be > 0", p.bin_width));
    if (!(p.noise_sd >= 0.0)) throw usage_error(fmt::format("noise sd {} must be >= 0", p.noise_sd));
}

}  // namespace

std::string_view to_string(RankScheme s) {
    switch (s) {
        case RankScheme::by_average: return "by_average";
        case RankScheme::geometric_mean: return "geometric_mean";
        case RankScheme::average_rank: return "average_rank";
        case RankScheme::average_rank_noise: return "average_rank_noise";
        case RankScheme::average_rank_binned: return "average_rank_binned";
    }
    return "unknown";
}

RankScheme parse_rank_scheme(std::string_view name) {
    for (auto s : kAllRankSchemes) {
        if (to_string(s) == name) return s;
    }
    throw usage_error(fmt::format("unknown rank scheme '{}'", name));
}

std::vector<double> rank_descending(std::span<const double> values, TiePolicy ties) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t start = 0; start < n;) {
        std::size_t end = start + 1;
        while (end < n && values[order[end]] == values[order[start]]) ++end;
        // positions start+1 .. end share one rank
        const double r = ties == TiePolicy::fractional ? 0.5 * static_cast<double>(start + 1 + end)
                                                       : static_cast<double>(end);
        for (std::size_t k = start; k < end; ++k) ranks[order[k]] = r;
        start = end;
    }
    return ranks;
}

std::vector<double> ranks_by_average(const Matrix& acc) {
    std::vector<double> means(acc.rows());
    for (std::size_t i = 0; i < acc.rows(); ++i) {
        const auto row = acc.row(i);
        means[i] = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size());
    }
    return rank_descending(means);
}

GeometricRanks ranks_by_geometric_mean(const Matrix& acc) {
    GeometricRanks out;
    std::vector<double> gm(acc.rows());
    out.zero.assign(acc.rows(), false);
    for (std::size_t i = 0; i < acc.rows(); ++i) {
        double log_sum = 0.0;
        for (double p : acc.row(i)) {
            if (p <= 0.0) {
                out.zero[i] = true;
                break;
            }
            log_sum += std::log(p);
        }
        gm[i] = out.zero[i] ? 0.0 : std::exp(log_sum / static_cast<double>(acc.cols()));
    }
    out.ranks = rank_descending(gm);
    return out;
}

std::vector<double> average_rank(const Matrix& acc, AverageRankVariant variant, const RankParams& params,
                                 PhiloxEngine* rng) {
    check_params(params);
    const std::size_t M = acc.rows();
    const std::size_t J = acc.cols();
    const bool noisy = variant == AverageRankVariant::noise && params.noise_sd > 0.0;
    if (noisy && rng == nullptr) throw usage_error("noise variant needs a random stream");
    std::vector<double> total(M, 0.0);
    std::vector<double> column(M);
    for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t i = 0; i < M; ++i) {
            double v = 100.0 * acc(i, j);
            if (variant == AverageRankVariant::binned) v = std::floor(v / params.bin_width + kBinEpsilon);
            if (noisy) v += params.noise_sd * standard_normal(*rng);
            column[i] = v;
        }
        const TiePolicy ties = variant == AverageRankVariant::binned ? params.binned_ties : TiePolicy::fractional;
        const auto r = rank_descending(column, ties);
        for (std::size_t i = 0; i < M; ++i) total[i] += r[i];
    }
    for (auto& t : total) t /= static_cast<double>(J);
    return total;
}

std::vector<double> scheme_ranks(const Matrix& acc, RankScheme scheme, const RankParams& params, PhiloxEngine* rng,
                                 std::vector<bool>* zero_flags) {
    switch (scheme) {
        case RankScheme::by_average:
            return ranks_by_average(acc);
        case RankScheme::geometric_mean: {
            auto g = ranks_by_geometric_mean(acc);
            if (zero_flags) *zero_flags = std::move(g.zero);
            return std::move(g.ranks);
        }
        case RankScheme::average_rank:
            return average_rank(acc, AverageRankVariant::plain, params, rng);
        case RankScheme::average_rank_noise:
            return average_rank(acc, AverageRankVariant::noise, params, rng);
        case RankScheme::average_rank_binned:
            return average_rank(acc, AverageRankVariant::binned, params, rng);
    }
    throw usage_error("unknown rank scheme");
}

std::vector<RankSummary> rank_intervals(const SampleCube& samples, const std::vector<std::string>& models,
                                        RankScheme scheme, double level, const RankParams& params,
                                        std::uint64_t seed, IntervalMethod method, unsigned parallelism) {
    check_params(params);
    if (samples.samples() < 2) throw usage_error("rank intervals need at least two samples");
    if (models.size() != samples.models()) {
        throw usage_error(fmt::format("{} model names for {} models", models.size(), samples.models()));
    }
    const std::size_t M = samples.models();
    const std::size_t S = samples.samples();
    // ranks[i * S + s]
    std::vector<double> ranks(M * S);
    std::vector<unsigned char> zero(M * S, 0);
    detail::parallel_chunks(S, parallelism, [&](std::size_t begin, std::size_t end) {
        Matrix acc(M, samples.tasks());
        std::vector<bool> flags;
        for (std::size_t s = begin; s < end; ++s) {
            const auto src = samples.sample(s);
            std::copy(src.begin(), src.end(), acc.data().begin());
            auto rng = make_stream(seed, StreamDomain::rank_noise, s);
            flags.clear();
            const auto r = scheme_ranks(acc, scheme, params, &rng, &flags);
            for (std::size_t i = 0; i < M; ++i) {
                ranks[i * S + s] = r[i];
                if (!flags.empty() && flags[i]) zero[i * S + s] = 1;
            }
        }
    });
    std::vector<RankSummary> out;
    for (std::size_t i = 0; i < M; ++i) {
        RankSummary rs;
        rs.model = models[i];
        rs.scheme = scheme;
        rs.interval = summarize({ranks.begin() + i * S, ranks.begin() + (i + 1) * S}, level, method);
        rs.point = rs.interval.point;
        rs.zero_flagged = static_cast<std::size_t>(std::count(zero.begin() + i * S, zero.begin() + (i + 1) * S, 1));
        out.push_back(std::move(rs));
    }
    return out;
}

}  // namespace taskagg
