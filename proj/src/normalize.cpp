#include "taskagg/normalize.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "csv.hpp"
#include "taskagg/bootstrap.hpp"
#include "taskagg/error.hpp"

namespace taskagg {

void NormalizationBounds::check() const {
    if (low.size() != high.size() || low.size() != tasks.size()) {
        throw usage_error("normalization bounds have inconsistent lengths");
    }
    for (std::size_t j = 0; j < low.size(); ++j) {
        if (!(high[j] > low[j])) {
            throw computation_error(fmt::format("degenerate normalization bounds for task '{}': low = high = {}",
                                                tasks[j], low[j]));
        }
    }
}

NormalizationBounds estimate_bounds(const SampleCube& samples, std::vector<std::string> task_ids) {
    if (samples.samples() == 0 || samples.models() == 0) throw usage_error("cannot estimate bounds from an empty store");
    if (task_ids.size() != samples.tasks()) throw usage_error("task id count does not match sample width");
    NormalizationBounds b;
    b.tasks = std::move(task_ids);
    b.low.assign(samples.tasks(), std::numeric_limits<double>::infinity());
    b.high.assign(samples.tasks(), -std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s < samples.samples(); ++s) {
        for (std::size_t i = 0; i < samples.models(); ++i) {
            const auto row = samples.row(s, i);
            for (std::size_t j = 0; j < row.size(); ++j) {
                b.low[j] = std::min(b.low[j], row[j]);
                b.high[j] = std::max(b.high[j], row[j]);
            }
        }
    }
    b.check();
    return b;
}

NormalizationBounds estimate_bounds(const ReplicateStore& store) {
    std::vector<std::string> ids;
    for (const auto& t : store.source().tasks()) ids.push_back(t.task_id);
    return estimate_bounds(store.replicates(), std::move(ids));
}

NormalizedScores normalize_scores(const Matrix& accuracies, const NormalizationBounds& bounds) {
    bounds.check();
    if (accuracies.cols() != bounds.size()) {
        throw usage_error(fmt::format("accuracy matrix has {} tasks but bounds cover {}", accuracies.cols(),
                                      bounds.size()));
    }
    NormalizedScores out{Matrix(accuracies.rows(), accuracies.cols()), 0};
    for (std::size_t i = 0; i < accuracies.rows(); ++i) {
        for (std::size_t j = 0; j < accuracies.cols(); ++j) {
            double v = normalize_value(accuracies(i, j), bounds.low[j], bounds.high[j]);
            if (v < 0.0 || v > 1.0) {
                v = std::clamp(v, 0.0, 1.0);
                ++out.clamped;
            }
            out.values(i, j) = v;
        }
    }
    return out;
}

SampleCube normalize_samples(const SampleCube& samples, const NormalizationBounds& bounds, std::size_t* clamped) {
    bounds.check();
    if (samples.tasks() != bounds.size()) {
        throw usage_error(fmt::format("samples have {} tasks but bounds cover {}", samples.tasks(), bounds.size()));
    }
    SampleCube out(samples.samples(), samples.models(), samples.tasks());
    std::size_t n_clamped = 0;
    for (std::size_t s = 0; s < samples.samples(); ++s) {
        for (std::size_t i = 0; i < samples.models(); ++i) {
            const auto in = samples.row(s, i);
            auto dst = out.row(s, i);
            for (std::size_t j = 0; j < in.size(); ++j) {
                double v = normalize_value(in[j], bounds.low[j], bounds.high[j]);
                if (v < 0.0 || v > 1.0) {
                    v = std::clamp(v, 0.0, 1.0);
                    ++n_clamped;
                }
                dst[j] = v;
            }
        }
    }
    if (clamped) *clamped = n_clamped;
    return out;
}

SampleCube normalize_samples_per_replicate(const SampleCube& samples, const std::vector<std::string>& task_ids) {
    SampleCube out(samples.samples(), samples.models(), samples.tasks());
    for (std::size_t s = 0; s < samples.samples(); ++s) {
        for (std::size_t j = 0; j < samples.tasks(); ++j) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::size_t i = 0; i < samples.models(); ++i) {
                lo = std::min(lo, samples.at(s, i, j));
                hi = std::max(hi, samples.at(s, i, j));
            }
            if (!(hi > lo)) {
                throw computation_error(fmt::format("degenerate normalization bounds for task '{}' in sample {}",
                                                    j < task_ids.size() ? task_ids[j] : std::to_string(j), s));
            }
            for (std::size_t i = 0; i < samples.models(); ++i) {
                out.at(s, i, j) = normalize_value(samples.at(s, i, j), lo, hi);
            }
        }
    }
    return out;
}

void write_bounds_csv(const NormalizationBounds& bounds, std::ostream& out) {
    out << "task,low,high\n";
    for (std::size_t j = 0; j < bounds.size(); ++j) {
        out << fmt::format("{},{:.17g},{:.17g}\n", detail::csv_escape(bounds.tasks[j]), bounds.low[j], bounds.high[j]);
    }
}

NormalizationBounds load_bounds_csv(const std::filesystem::path& path, const std::vector<std::string>& task_order) {
    const auto doc = detail::read_csv(path);
    const auto c_task = detail::require_column(doc, "task");
    const auto c_low = detail::require_column(doc, "low");
    const auto c_high = detail::require_column(doc, "high");
    NormalizationBounds b;
    b.tasks = task_order;
    b.low.assign(task_order.size(), 0.0);
    b.high.assign(task_order.size(), 0.0);
    std::vector<bool> seen(task_order.size(), false);
    auto number = [&](const detail::CsvRecord& rec, std::size_t col, const char* name) {
        try {
            std::size_t used = 0;
            const double v = std::stod(rec.fields[col], &used);
            if (used != rec.fields[col].size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ParseError(doc.file, rec.line, name, "not a number: '" + rec.fields[col] + "'");
        }
    };
    for (const auto& rec : doc.records) {
        const auto it = std::find(task_order.begin(), task_order.end(), rec.fields[c_task]);
        if (it == task_order.end()) {
            throw ParseError(doc.file, rec.line, "task", "unknown task '" + rec.fields[c_task] + "'");
        }
        const auto j = static_cast<std::size_t>(it - task_order.begin());
        if (seen[j]) throw ParseError(doc.file, rec.line, "task", "duplicate task '" + rec.fields[c_task] + "'");
        seen[j] = true;
        b.low[j] = number(rec, c_low, "low");
        b.high[j] = number(rec, c_high, "high");
    }
    for (std::size_t j = 0; j < seen.size(); ++j) {
        if (!seen[j]) throw ParseError(doc.file, doc.header_line, "task", "no bounds for task '" + task_order[j] + "'");
    }
    b.check();
    return b;
}

}  // namespace taskagg
