#include "taskagg/core.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "csv.hpp"
#include "taskagg/error.hpp"
#include "taskagg/random.hpp"

namespace taskagg {

ParseError::ParseError(std::string file, std::size_t row, std::string column, const std::string& what)
    : Error(ErrorKind::validation, fmt::format("{}:{}: column '{}': {}", file, row, column, what)),
      file_(std::move(file)),
      row_(row),
      column_(std::move(column)) {}

CapacityError::CapacityError(std::size_t requested_bytes, std::size_t available_bytes)
    : Error(ErrorKind::capacity, fmt::format("cannot allocate {} bytes ({} bytes available)",
                                             requested_bytes, available_bytes)),
      requested_(requested_bytes),
      available_(available_bytes) {}

EvalTable::EvalTable(std::vector<std::string> models, std::vector<TaskSpec> tasks,
                     std::vector<std::int64_t> counts)
    : models_(std::move(models)), tasks_(std::move(tasks)), counts_(std::move(counts)) {
    if (counts_.size() != models_.size() * tasks_.size()) {
        throw validation_error(fmt::format("count matrix has {} cells, expected {} x {}", counts_.size(),
                                           models_.size(), tasks_.size()));
    }
    std::set<std::string> seen;
    for (const auto& m : models_) {
        if (!seen.insert(m).second) throw validation_error("duplicate model id '" + m + "'");
    }
    seen.clear();
    for (const auto& t : tasks_) {
        if (!seen.insert(t.task_id).second) throw validation_error("duplicate task id '" + t.task_id + "'");
        if (t.test_size < 1) {
            throw validation_error(fmt::format("task '{}' has test_size {} < 1", t.task_id, t.test_size));
        }
    }
    for (std::size_t i = 0; i < models_.size(); ++i) {
        for (std::size_t j = 0; j < tasks_.size(); ++j) {
            const auto y = counts_[i * tasks_.size() + j];
            if (y < 0 || y > tasks_[j].test_size) {
                throw validation_error(fmt::format("count {} for model '{}' on task '{}' outside [0, {}]", y,
                                                   models_[i], tasks_[j].task_id, tasks_[j].test_size));
            }
        }
    }
}

std::vector<std::int64_t> EvalTable::sizes() const {
    std::vector<std::int64_t> out;
    out.reserve(tasks_.size());
    for (const auto& t : tasks_) out.push_back(t.test_size);
    return out;
}

std::optional<std::size_t> EvalTable::find_model(std::string_view id) const {
    const auto it = std::find(models_.begin(), models_.end(), id);
    if (it == models_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - models_.begin());
}

std::size_t EvalTable::model_index(std::string_view id) const {
    if (auto i = find_model(id)) return *i;
    throw usage_error("unknown model '" + std::string(id) + "'");
}

std::vector<std::string> EvalTable::categories() const {
    std::vector<std::string> out;
    for (const auto& t : tasks_) {
        if (std::find(out.begin(), out.end(), t.category) == out.end()) out.push_back(t.category);
    }
    return out;
}

std::vector<std::size_t> EvalTable::tasks_in(std::string_view category) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < tasks_.size(); ++j) {
        if (tasks_[j].category == category) out.push_back(j);
    }
    return out;
}

EvalTable EvalTable::select_models(std::span<const std::string> ids) const {
    std::vector<std::string> models;
    std::vector<std::int64_t> counts;
    for (const auto& id : ids) {
        const auto i = model_index(id);
        models.push_back(id);
        for (std::size_t j = 0; j < tasks_.size(); ++j) counts.push_back(correct(i, j));
    }
    return EvalTable(std::move(models), tasks_, std::move(counts));
}

std::int64_t round_half_even(double x) {
    const int saved = std::fegetround();
    std::fesetround(FE_TONEAREST);
    const double r = std::nearbyint(x);
    std::fesetround(saved);
    return static_cast<std::int64_t>(r);
}

namespace {

bool category_allowed(std::span<const std::string> allowed, const std::string& c) {
    return allowed.empty() || std::find(allowed.begin(), allowed.end(), c) != allowed.end();
}

std::int64_t parse_int(const detail::CsvDocument& doc, const detail::CsvRecord& rec, std::size_t col) {
    const std::string& s = rec.fields[col];
    const bool negative = !s.empty() && s.front() == '-';
    const std::string digits = negative ? s.substr(1) : s;
    if (digits.empty() || digits.size() > 15 ||
        !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw ParseError(doc.file, rec.line, doc.header[col], "expected an integer, found '" + s + "'");
    }
    const std::int64_t v = std::stoll(digits);
    return negative ? -v : v;
}

// Decimal percent "57.5" -> (575, 10). Exact, so half-even ties are real ties.
struct Decimal {
    bool negative = false;
    __int128 mantissa = 0;
    __int128 scale = 1;
};

Decimal parse_decimal(const detail::CsvDocument& doc, const detail::CsvRecord& rec, std::size_t col) {
    const std::string& s = rec.fields[col];
    Decimal d;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) d.negative = s[i++] == '-';
    bool any_digit = false;
    bool dot = false;
    int frac_digits = 0;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '.' && !dot) {
            dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(c)) && frac_digits < 12 && d.mantissa < 1'000'000'000'000) {
            d.mantissa = d.mantissa * 10 + (c - '0');
            if (dot) {
                d.scale *= 10;
                ++frac_digits;
            }
            any_digit = true;
        } else {
            throw ParseError(doc.file, rec.line, doc.header[col], "expected a decimal number, found '" + s + "'");
        }
    }
    if (!any_digit) {
        throw ParseError(doc.file, rec.line, doc.header[col], "expected a decimal number, found '" + s + "'");
    }
    return d;
}

std::int64_t count_from_percent(const Decimal& pct, std::int64_t n) {
    // round_half_even(mantissa * n / (100 * scale))
    const __int128 num = pct.mantissa * n;
    const __int128 den = pct.scale * 100;
    __int128 q = num / den;
    const __int128 r2 = 2 * (num % den);
    if (r2 > den || (r2 == den && (q % 2) == 1)) ++q;
    return static_cast<std::int64_t>(q);
}

}  // namespace

std::vector<TaskSpec> load_task_file(const std::filesystem::path& task_file,
                                     std::span<const std::string> allowed_categories) {
    const auto doc = detail::read_csv(task_file);
    const auto c_task = detail::require_column(doc, "task");
    const auto c_cat = detail::require_column(doc, "category");
    const auto c_size = detail::require_column(doc, "test_size");
    std::vector<TaskSpec> tasks;
    std::set<std::string> seen;
    for (const auto& rec : doc.records) {
        TaskSpec t{rec.fields[c_task], rec.fields[c_cat], parse_int(doc, rec, c_size)};
        if (t.task_id.empty()) throw ParseError(doc.file, rec.line, "task", "empty task id");
        if (!seen.insert(t.task_id).second) {
            throw ParseError(doc.file, rec.line, "task", "duplicate task id '" + t.task_id + "'");
        }
        if (t.test_size < 1) {
            throw ParseError(doc.file, rec.line, "test_size", "test_size must be >= 1");
        }
        if (!category_allowed(allowed_categories, t.category)) {
            throw ParseError(doc.file, rec.line, "category", "unknown category label '" + t.category + "'");
        }
        tasks.push_back(std::move(t));
    }
    if (tasks.empty()) throw ParseError(doc.file, doc.header_line, "task", "no tasks declared");
    return tasks;
}

EvalTable load_eval_table(const std::filesystem::path& results, const std::filesystem::path& task_file,
                          InputFormat format, std::span<const std::string> allowed_categories) {
    auto tasks = load_task_file(task_file, allowed_categories);
    std::map<std::string, std::size_t> task_index;
    for (std::size_t j = 0; j < tasks.size(); ++j) task_index[tasks[j].task_id] = j;

    const auto doc = detail::read_csv(results);
    const auto c_model = detail::require_column(doc, "model");
    const auto c_task = detail::require_column(doc, "task");
    const std::string value_name = format == InputFormat::counts ? "correct" : "accuracy_percent";
    const auto c_value = detail::require_column(doc, value_name);

    std::vector<std::string> models;
    std::map<std::string, std::size_t> model_index;
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> cells;
    for (const auto& rec : doc.records) {
        const auto& model = rec.fields[c_model];
        if (model.empty()) throw ParseError(doc.file, rec.line, "model", "empty model id");
        const auto t = task_index.find(rec.fields[c_task]);
        if (t == task_index.end()) {
            throw ParseError(doc.file, rec.line, "task", "task '" + rec.fields[c_task] + "' not in task file");
        }
        const std::int64_t n = tasks[t->second].test_size;
        std::int64_t y = 0;
        if (format == InputFormat::counts) {
            y = parse_int(doc, rec, c_value);
            if (y < 0 || y > n) {
                throw ParseError(doc.file, rec.line, value_name,
                                 fmt::format("count {} outside [0, {}] for task '{}'", y, n, t->first));
            }
        } else {
            const auto pct = parse_decimal(doc, rec, c_value);
            if (pct.negative && pct.mantissa != 0) {
                throw ParseError(doc.file, rec.line, value_name, "accuracy below 0%: '" + rec.fields[c_value] + "'");
            }
            if (pct.mantissa > 100 * pct.scale) {
                throw ParseError(doc.file, rec.line, value_name, "accuracy above 100%: '" + rec.fields[c_value] + "'");
            }
            y = count_from_percent(pct, n);
        }
        auto [it, inserted] = model_index.emplace(model, models.size());
        if (inserted) models.push_back(model);
        if (!cells.emplace(std::pair{it->second, t->second}, y).second) {
            throw ParseError(doc.file, rec.line, "task",
                             "duplicate entry for model '" + model + "' on task '" + t->first + "'");
        }
    }
    if (models.empty()) throw ParseError(doc.file, doc.header_line, "model", "no result rows");

    std::vector<std::int64_t> counts(models.size() * tasks.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        for (std::size_t j = 0; j < tasks.size(); ++j) {
            const auto it = cells.find({i, j});
            if (it == cells.end()) {
                throw ParseError(doc.file, doc.records.back().line, "task",
                                 "ragged table: model '" + models[i] + "' has no entry for task '" +
                                     tasks[j].task_id + "'");
            }
            counts[i * tasks.size() + j] = it->second;
        }
    }
    return EvalTable(std::move(models), std::move(tasks), std::move(counts));
}

PublishedSummary load_published_summary(const std::filesystem::path& path) {
    const auto doc = detail::read_csv(path);
    const auto c_model = detail::require_column(doc, "model");
    const auto c_overall = detail::require_column(doc, "overall");
    PublishedSummary out;
    std::vector<std::size_t> cat_cols;
    for (std::size_t c = 0; c < doc.header.size(); ++c) {
        if (c == c_model || c == c_overall) continue;
        out.categories.push_back(doc.header[c]);
        cat_cols.push_back(c);
    }
    auto number = [&](const detail::CsvRecord& rec, std::size_t col) {
        try {
            std::size_t used = 0;
            const double v = std::stod(rec.fields[col], &used);
            if (used != rec.fields[col].size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ParseError(doc.file, rec.line, doc.header[col], "expected a number, found '" + rec.fields[col] + "'");
        }
    };
    for (const auto& rec : doc.records) {
        PublishedSummary::Row row;
        row.model = rec.fields[c_model];
        for (auto c : cat_cols) row.category_means.push_back(number(rec, c));
        row.overall = number(rec, c_overall);
        out.rows.push_back(std::move(row));
    }
    return out;
}

double category_mean(const EvalTable& table, std::size_t model, std::string_view category) {
    const auto idx = table.tasks_in(category);
    if (idx.empty()) throw usage_error("no tasks in category '" + std::string(category) + "'");
    double sum = 0.0;
    for (auto j : idx) sum += static_cast<double>(table.correct(model, j)) / static_cast<double>(table.size(j));
    return sum / static_cast<double>(idx.size());
}

double overall_mean(const EvalTable& table, std::size_t model) {
    double sum = 0.0;
    for (std::size_t j = 0; j < table.num_tasks(); ++j) {
        sum += static_cast<double>(table.correct(model, j)) / static_cast<double>(table.size(j));
    }
    return sum / static_cast<double>(table.num_tasks());
}

ValidationReport validate_consistency(const EvalTable& table, const PublishedSummary& published,
                                      double tolerance) {
    const auto have = table.categories();
    for (const auto& c : published.categories) {
        if (std::find(have.begin(), have.end(), c) == have.end()) {
            throw validation_error("published category '" + c + "' has no tasks in the table");
        }
    }
    ValidationReport report;
    report.tolerance = tolerance;
    for (const auto& row : published.rows) {
        const auto i = table.find_model(row.model);
        if (!i) throw validation_error("model '" + row.model + "' is in the published summary but not the table");
        auto add = [&](std::string what, double computed, double pub) {
            ConsistencyGap g{row.model, std::move(what), computed, pub, std::abs(computed - pub)};
            // Small slack absorbs binary rounding of values like 0.05 exactly at the boundary.
            if (g.gap > tolerance + 1e-9) report.pass = false;
            report.gaps.push_back(std::move(g));
        };
        for (std::size_t c = 0; c < published.categories.size(); ++c) {
            add(published.categories[c], 100.0 * category_mean(table, *i, published.categories[c]),
                row.category_means[c]);
        }
        add("overall", 100.0 * overall_mean(table, *i), row.overall);
    }
    return report;
}

EvalTable synthesize_counts(const AccuracyMatrix& accuracies, std::span<const TaskSpec> tasks,
                            std::uint64_t seed, SynthesisMode mode) {
    const auto& v = accuracies.values;
    if (v.cols() != tasks.size() || accuracies.models.size() != v.rows()) {
        throw usage_error(fmt::format("accuracy matrix is {} x {} but {} models and {} task sizes were given",
                                      v.rows(), v.cols(), accuracies.models.size(), tasks.size()));
    }
    std::vector<std::int64_t> counts(v.rows() * v.cols());
    for (std::size_t i = 0; i < v.rows(); ++i) {
        for (std::size_t j = 0; j < v.cols(); ++j) {
            const double p = v(i, j);
            if (!(p >= 0.0 && p <= 1.0)) {
                throw validation_error(fmt::format("accuracy {} for model '{}' task '{}' outside [0,1]", p,
                                                   accuracies.models[i], tasks[j].task_id));
            }
            const std::int64_t n = tasks[j].test_size;
            if (mode == SynthesisMode::deterministic) {
                counts[i * v.cols() + j] = round_half_even(p * static_cast<double>(n));
            } else {
                auto rng = make_stream(seed, StreamDomain::synthesis, i, j);
                counts[i * v.cols() + j] = binomial(rng, n, p);
            }
        }
    }
    return EvalTable(accuracies.models, {tasks.begin(), tasks.end()}, std::move(counts));
}

AccuracyMatrix accuracy_of(const EvalTable& table) {
    AccuracyMatrix out;
    out.models = table.models();
    for (const auto& t : table.tasks()) out.tasks.push_back(t.task_id);
    out.values = Matrix(table.num_models(), table.num_tasks());
    for (std::size_t i = 0; i < table.num_models(); ++i) {
        for (std::size_t j = 0; j < table.num_tasks(); ++j) {
            out.values(i, j) = static_cast<double>(table.correct(i, j)) / static_cast<double>(table.size(j));
        }
    }
    return out;
}

}  // namespace taskagg
