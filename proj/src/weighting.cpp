#include "taskagg/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "csv.hpp"
#include "parallel.hpp"
#include "taskagg/error.hpp"

namespace taskagg {

double weighted_score(std::span<const double> acc, const WeightVector& weights) { return weighted_sum(acc, weights); }

double weighted_score(std::span<const double> acc, std::span<const TaskSpec> tasks, const CategoryWeights& weights) {
    return weighted_sum(acc, expand_category_weights(tasks, weights));
}

double binomial_variance(double p, std::int64_t n) {
    if (!(p >= 0.0 && p <= 1.0)) throw usage_error(fmt::format("accuracy {} outside [0,1]", p));
    if (n < 1) throw usage_error(fmt::format("test size {} must be >= 1", n));
    return p * (1.0 - p) / static_cast<double>(n);
}

double weighted_variance(std::span<const double> acc, std::span<const std::int64_t> sizes,
                         const WeightVector& weights, const Matrix* covariance) {
    const std::size_t J = acc.size();
    if (sizes.size() != J || weights.size() != J) {
        throw usage_error(fmt::format("dimension mismatch: {} accuracies, {} sizes, {} weights", J, sizes.size(),
                                      weights.size()));
    }
    double v = 0.0;
    for (std::size_t j = 0; j < J; ++j) v += weights[j] * weights[j] * binomial_variance(acc[j], sizes[j]);
    if (covariance == nullptr) return v;
    const Matrix& c = *covariance;
    if (c.rows() != J || c.cols() != J) {
        throw usage_error(fmt::format("covariance is {}x{}, expected {}x{}", c.rows(), c.cols(), J, J));
    }
    for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t k = j + 1; k < J; ++k) {
            const double tol = 1e-12 * std::max({1.0, std::abs(c(j, k)), std::abs(c(k, j))});
            if (std::abs(c(j, k) - c(k, j)) > tol) {
                throw usage_error(fmt::format("covariance not symmetric at ({}, {})", j, k));
            }
            v += 2.0 * weights[j] * weights[k] * c(j, k);
        }
    }
    return v;
}

double category_mean_variance(std::span<const double> acc, std::span<const std::int64_t> sizes) {
    if (acc.empty() || acc.size() != sizes.size()) throw usage_error("category needs matching, nonempty inputs");
    double v = 0.0;
    for (std::size_t j = 0; j < acc.size(); ++j) v += binomial_variance(acc[j], sizes[j]);
    const double n = static_cast<double>(acc.size());
    return v / (n * n);
}

double weighted_category_variance(std::span<const double> acc, std::span<const TaskSpec> tasks,
                                  const CategoryWeights& weights) {
    if (acc.size() != tasks.size()) throw usage_error("accuracies and tasks differ in length");
    if (weights.categories.size() != weights.weights.size()) throw usage_error("category weights malformed");
    double v = 0.0;
    for (std::size_t c = 0; c < weights.categories.size(); ++c) {
        std::vector<double> p;
        std::vector<std::int64_t> n;
        for (std::size_t j = 0; j < tasks.size(); ++j) {
            if (tasks[j].category == weights.categories[c]) {
                p.push_back(acc[j]);
                n.push_back(tasks[j].test_size);
            }
        }
        if (p.empty()) {
            if (weights.weights[c] != 0.0) {
                throw usage_error(fmt::format("weight on empty category '{}'", weights.categories[c]));
            }
            continue;
        }
        v += weights.weights[c] * weights.weights[c] * category_mean_variance(p, n);
    }
    return v;
}

double difference_se(double var_a, double var_b, double rho) {
    if (var_a < 0.0 || var_b < 0.0) throw usage_error("variances must be nonnegative");
    if (!(rho >= -1.0 && rho <= 1.0)) throw usage_error(fmt::format("rho {} outside [-1, 1]", rho));
    return std::sqrt(std::max(0.0, var_a + var_b - 2.0 * rho * std::sqrt(var_a * var_b)));
}

double se_reduction_factor(double k, double rho) {
    if (!(k >= 1.0)) throw usage_error(fmt::format("variance ratio {} must be >= 1", k));
    if (!(rho >= -1.0 && rho <= 1.0)) throw usage_error(fmt::format("rho {} outside [-1, 1]", rho));
    return std::sqrt(std::max(0.0, ((k + 1.0) - 2.0 * rho * std::sqrt(k)) / (k + 1.0)));
}

std::size_t simplex_cell_count(double grid_step) {
    if (!(grid_step > 0.0 && grid_step <= 1.0)) throw usage_error(fmt::format("grid step {} outside (0, 1]", grid_step));
    const double inv = 1.0 / grid_step;
    const auto n = static_cast<std::size_t>(std::llround(inv));
    if (std::abs(inv - static_cast<double>(n)) > 1e-9 * inv) {
        throw usage_error(fmt::format("grid step {} does not divide 1", grid_step));
    }
    return (n + 1) * (n + 2) / 2;
}

SimplexField simplex_scan(const EvalTable& table, const SimplexOptions& o) {
    simplex_cell_count(o.grid_step);
    const auto n = static_cast<std::size_t>(std::llround(1.0 / o.grid_step));
    if (!(o.z >= 0.0)) throw usage_error("z must be >= 0");
    if (!(o.rho >= -1.0 && o.rho <= 1.0)) throw usage_error("rho outside [-1, 1]");
    const auto present = table.categories();
    if (present.size() != 3) {
        throw usage_error(fmt::format("simplex needs exactly 3 categories, table has {}", present.size()));
    }
    for (const auto& c : o.categories) {
        if (std::find(present.begin(), present.end(), c) == present.end()) {
            throw usage_error(fmt::format("category '{}' not in table", c));
        }
    }
    const std::size_t M = table.num_models();
    const std::size_t J = table.num_tasks();
    if (M < 2) throw usage_error("simplex scan needs at least two models");
    if (o.normalizer) {
        if (o.normalizer->size() != J) throw usage_error("normalizer does not match the task count");
        o.normalizer->check();
    }

    // Category means and their variances per model, in (nat, sp, str) order.
    std::vector<std::array<double, 3>> mean(M), var(M);
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            double s = 0.0, v = 0.0;
            std::size_t count = 0;
            for (std::size_t j = 0; j < J; ++j) {
                if (table.tasks()[j].category != o.categories[c]) continue;
                const double p = static_cast<double>(table.correct(i, j)) / static_cast<double>(table.size(j));
                double x = p;
                double vj = binomial_variance(p, table.size(j));
                if (o.normalizer) {
                    const double span = o.normalizer->high[j] - o.normalizer->low[j];
                    x = normalize_value(p, o.normalizer->low[j], o.normalizer->high[j]);
                    vj /= span * span;
                }
                s += x;
                v += vj;
                ++count;
            }
            const double k = static_cast<double>(count);
            mean[i][c] = s / k;
            var[i][c] = v / (k * k);
        }
    }

    SimplexField field;
    field.grid_step = o.grid_step;
    field.z = o.z;
    field.rho = o.rho;
    field.normalized = o.normalizer.has_value();
    field.categories = o.categories;
    field.models = table.models();
    for (std::size_t a = 0; a <= n; ++a) {
        for (std::size_t b = 0; a + b <= n; ++b) {
            SimplexCell cell;
            cell.w_nat = static_cast<double>(a) / static_cast<double>(n);
            cell.w_sp = static_cast<double>(b) / static_cast<double>(n);
            cell.w_str = static_cast<double>(n - a - b) / static_cast<double>(n);
            field.cells.push_back(cell);
        }
    }

    detail::parallel_chunks(field.cells.size(), o.parallelism, [&](std::size_t begin, std::size_t end) {
        std::vector<double> score(M), variance(M);
        for (std::size_t k = begin; k < end; ++k) {
            auto& cell = field.cells[k];
            const std::array<double, 3> w{cell.w_nat, cell.w_sp, cell.w_str};
            for (std::size_t i = 0; i < M; ++i) {
                score[i] = w[0] * mean[i][0] + w[1] * mean[i][1] + w[2] * mean[i][2];
                variance[i] = w[0] * w[0] * var[i][0] + w[1] * w[1] * var[i][1] + w[2] * w[2] * var[i][2];
            }
            std::size_t first = 0;
            for (std::size_t i = 1; i < M; ++i) {
                if (score[i] > score[first]) first = i;
            }
            std::size_t second = first == 0 ? 1 : 0;
            for (std::size_t i = 0; i < M; ++i) {
                if (i != first && score[i] > score[second]) second = i;
            }
            const double diff = score[first] - score[second];
            const double se = difference_se(variance[first], variance[second], o.rho);
            if (se > 0.0) {
                cell.margin = diff / se;
            } else {
                cell.margin = diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            }
            if (diff > 0.0 && cell.margin >= o.z) cell.winner = first;
        }
    });
    return field;
}

void write_simplex_csv(const SimplexField& field, std::ostream& out) {
    out << "w_nat,w_sp,w_str,winner,margin_se\n";
    for (const auto& c : field.cells) {
        out << fmt::format("{:.4f},{:.4f},{:.4f},{},{:.6f}\n", c.w_nat, c.w_sp, c.w_str, detail::csv_escape(std::string(field.winner_label(c))),
                           c.margin);
    }
}

}  // namespace taskagg
