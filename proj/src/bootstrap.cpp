#include "taskagg/bootstrap.hpp"

#include <fmt/format.h>

#include "parallel.hpp"
#include "taskagg/aggregate.hpp"
#include "taskagg/error.hpp"
#include "taskagg/random.hpp"

namespace taskagg {
namespace {

void fill_replicate(const EvalTable& table, std::uint64_t r, std::uint64_t seed, std::span<double> out) {
    const std::size_t J = table.num_tasks();
    for (std::size_t i = 0; i < table.num_models(); ++i) {
        for (std::size_t j = 0; j < J; ++j) {
            const std::int64_t n = table.size(j);
            const std::int64_t y = table.correct(i, j);
            const double p = static_cast<double>(y) / static_cast<double>(n);
            auto rng = make_stream(seed, StreamDomain::bootstrap, r, i, j);
            // Summing N_j with-replacement Bernoulli(p) draws is Binomial(N_j, p).
            out[i * J + j] = static_cast<double>(binomial(rng, n, p)) / static_cast<double>(n);
        }
    }
}

WeightVector weights_or_uniform(const std::optional<WeightVector>& w, std::size_t tasks) {
    if (!w) return WeightVector::uniform(tasks);
    if (w->size() != tasks) throw usage_error(fmt::format("{} weights for {} tasks", w->size(), tasks));
    return *w;
}

}  // namespace

ReplicateStore::ReplicateStore(std::shared_ptr<const EvalTable> source, std::uint64_t seed, SampleCube replicates)
    : source_(std::move(source)), seed_(seed), replicates_(std::move(replicates)) {
    if (!source_) throw usage_error("replicate store without a source table");
    if (replicates_.models() != source_->num_models() || replicates_.tasks() != source_->num_tasks()) {
        throw usage_error("replicate dimensions do not match the source table");
    }
}

Matrix draw_replicate(const EvalTable& table, std::uint64_t replicate_index, std::uint64_t seed) {
    Matrix out(table.num_models(), table.num_tasks());
    fill_replicate(table, replicate_index, seed, out.data());
    return out;
}

ReplicateStore run_bootstrap(const EvalTable& table, std::size_t replicates, std::uint64_t seed,
                             unsigned parallelism) {
    if (replicates < 1) throw usage_error("bootstrap needs at least one replicate");
    SampleCube cube(replicates, table.num_models(), table.num_tasks());
    detail::parallel_chunks(replicates, parallelism, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) fill_replicate(table, r, seed, cube.sample(r));
    });
    return ReplicateStore(std::make_shared<const EvalTable>(table), seed, std::move(cube));
}

IntervalEstimate aggregate_interval(const ReplicateStore& store, std::string_view model,
                                    const std::optional<WeightVector>& weights,
                                    const std::optional<NormalizationBounds>& normalizer, double level) {
    const auto i = store.source().model_index(model);
    const auto w = weights_or_uniform(weights, store.source().num_tasks());
    if (!normalizer) {
        return score_interval(store.replicates(), i, w, level, IntervalMethod::bootstrap_percentile);
    }
    if (normalizer->size() != store.source().num_tasks()) {
        throw usage_error(fmt::format("normalizer covers {} tasks, store has {}", normalizer->size(),
                                      store.source().num_tasks()));
    }
    normalizer->check();
    const auto& cube = store.replicates();
    std::vector<double> scores(cube.samples());
    for (std::size_t s = 0; s < cube.samples(); ++s) {
        const auto row = cube.row(s, i);
        double acc = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            acc += w[j] * std::clamp(normalize_value(row[j], normalizer->low[j], normalizer->high[j]), 0.0, 1.0);
        }
        scores[s] = acc;
    }
    return summarize(std::move(scores), level, IntervalMethod::bootstrap_percentile);
}

std::vector<PairInterval> pairwise_difference_intervals(const ReplicateStore& store,
                                                        std::span<const std::string> models, double level,
                                                        int comparisons, const std::optional<WeightVector>& weights,
                                                        const std::optional<NormalizationBounds>& normalizer) {
    if (models.size() < 2) throw usage_error("pairwise comparison needs at least two models");
    const std::size_t pairs = models.size() * (models.size() - 1) / 2;
    if (comparisons < static_cast<int>(pairs)) {
        throw usage_error(fmt::format("{} comparisons requested for {} pairs", comparisons, pairs));
    }
    std::vector<std::size_t> idx;
    for (const auto& m : models) idx.push_back(store.source().model_index(m));
    const auto w = weights_or_uniform(weights, store.source().num_tasks());
    const double adjusted = bonferroni_level(level, comparisons);

    const SampleCube* cube = &store.replicates();
    SampleCube normalized;
    if (normalizer) {
        normalized = normalize_samples(store.replicates(), *normalizer);
        cube = &normalized;
    }
    std::vector<PairInterval> out;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            out.push_back({models[a], models[b],
                           difference_interval(*cube, idx[a], idx[b], w, adjusted,
                                               IntervalMethod::bootstrap_percentile)});
        }
    }
    return out;
}

}  // namespace taskagg
