#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace taskagg {

struct TaskSpec {
    std::string task_id;
    std::string category;
    std::int64_t test_size = 0;  // N_j
};

/// Row-major models x tasks matrix of doubles.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Per-task accuracies p̂_ij in [0,1], same ordering as the source table.
struct AccuracyMatrix {
    std::vector<std::string> models;
    std::vector<std::string> tasks;
    Matrix values;
};

/// Correct-answer counts for every (model, task) cell plus task metadata.
///
/// Immutable once constructed; the constructor enforces rectangularity,
/// unique ids, N_j >= 1 and 0 <= Y_ij <= N_j.
class EvalTable {
  public:
    EvalTable(std::vector<std::string> models, std::vector<TaskSpec> tasks,
              std::vector<std::int64_t> counts);

    std::size_t num_models() const noexcept { return models_.size(); }
    std::size_t num_tasks() const noexcept { return tasks_.size(); }

    const std::vector<std::string>& models() const noexcept { return models_; }
    const std::vector<TaskSpec>& tasks() const noexcept { return tasks_; }

    std::int64_t correct(std::size_t model, std::size_t task) const {
        return counts_[model * tasks_.size() + task];
    }
    std::int64_t size(std::size_t task) const { return tasks_[task].test_size; }
    std::vector<std::int64_t> sizes() const;

    /// Index of a model id, or nullopt.
    std::optional<std::size_t> find_model(std::string_view id) const;
    std::size_t model_index(std::string_view id) const;  // throws usage error

    /// Category labels in order of first appearance.
    std::vector<std::string> categories() const;
    /// Task indices belonging to a category.
    std::vector<std::size_t> tasks_in(std::string_view category) const;

    /// Restrict to the listed models, preserving the given order.
    EvalTable select_models(std::span<const std::string> ids) const;

  private:
    std::vector<std::string> models_;
    std::vector<TaskSpec> tasks_;
    std::vector<std::int64_t> counts_;
};

enum class InputFormat { counts, accuracies };

/// Reads the task file (`task,category,test_size`) and a result file,
/// either `model,task,correct` or `model,task,accuracy_percent`.
/// Lines starting with '#' and blank lines are skipped. When
/// `allowed_categories` is non-empty, any other label is rejected.
EvalTable load_eval_table(const std::filesystem::path& results, const std::filesystem::path& task_file,
                          InputFormat format, std::span<const std::string> allowed_categories = {});

std::vector<TaskSpec> load_task_file(const std::filesystem::path& task_file,
                                     std::span<const std::string> allowed_categories = {});

/// Published per-model category means and overall mean, in percent.
struct PublishedSummary {
    std::vector<std::string> categories;
    struct Row {
        std::string model;
        std::vector<double> category_means;
        double overall = 0.0;
    };
    std::vector<Row> rows;
};

/// Reads `model,<category>...,overall` (percent values).
PublishedSummary load_published_summary(const std::filesystem::path& path);

struct ConsistencyGap {
    std::string model;
    std::string what;  // category label or "overall"
    double computed = 0.0;
    double published = 0.0;
    double gap = 0.0;
};

struct ValidationReport {
    std::vector<ConsistencyGap> gaps;
    double tolerance = 0.0;
    bool pass = true;
};

/// Compares category and overall means of `table` (percent) against a
/// published summary. `tolerance` is in percentage points.
ValidationReport validate_consistency(const EvalTable& table, const PublishedSummary& published,
                                      double tolerance);

enum class SynthesisMode { deterministic, binomial_jitter };

/// Y_ij = round_half_even(p̂_ij * N_j), or a Binomial(N_j, p̂_ij) draw in
/// jitter mode using per-cell counter streams keyed on `seed`.
EvalTable synthesize_counts(const AccuracyMatrix& accuracies, std::span<const TaskSpec> tasks,
                            std::uint64_t seed, SynthesisMode mode = SynthesisMode::deterministic);

AccuracyMatrix accuracy_of(const EvalTable& table);

/// Round half to even on a non-negative value.
std::int64_t round_half_even(double x);

/// Unweighted mean accuracy (fraction) over the tasks of one category.
double category_mean(const EvalTable& table, std::size_t model, std::string_view category);
double overall_mean(const EvalTable& table, std::size_t model);

}  // namespace taskagg
