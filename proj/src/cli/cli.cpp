#include "taskagg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "cli/fixtures.hpp"
#include "cli/report.hpp"
#include "csv.hpp"
#include "taskagg/aggregate.hpp"
#include "taskagg/error.hpp"
#include "taskagg/normalize.hpp"
#include "taskagg/viz.hpp"
#include "taskagg/weighting.hpp"

namespace taskagg {
namespace {

using cli::Cell;
using cli::Document;
using cli::Table;

constexpr double kPercent = 100.0;
const std::array<std::string, 3> kCategories{"natural", "specialized", "structured"};

// ---------------------------------------------------------------- helpers

IntervalEstimate scaled(IntervalEstimate e, double factor) {
    e.point *= factor;
    e.lower *= factor;
    e.upper *= factor;
    return e;
}

Cell pct(const IntervalEstimate& e) { return Cell::of_interval(scaled(e, kPercent), 1); }

std::string num(double v) { return fmt::format("{:g}", v); }

unsigned workers(const RunConfig& c) {
    if (c.parallelism > 0) return c.parallelism;
    return std::max(1U, std::thread::hardware_concurrency());
}

std::ofstream open_output(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw usage_error(fmt::format("cannot write '{}'", p.string()));
    return f;
}

class Output {
  public:
    Output(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.out_dir, ec);
        if (ec) throw usage_error(fmt::format("cannot create '{}': {}", cfg.out_dir.string(), ec.message()));
    }

    std::filesystem::path path(const std::string& name) const { return cfg_.out_dir / name; }

    void text(const std::string& name, const std::string& content) {
        auto f = open_output(path(name));
        f << content;
        note(name);
    }

    template <class Writer>
    void stream(const std::string& name, Writer&& w) {
        auto f = open_output(path(name));
        w(f);
        note(name);
    }

    void document(const Document& doc, const std::string& stem) {
        if (cfg_.format == "markdown") {
            stream(stem + ".md", [&](std::ostream& o) { cli::write_markdown(doc, o); });
        } else if (cfg_.format == "json") {
            stream(stem + ".json", [&](std::ostream& o) { cli::write_json(doc, o); });
        } else {
            for (const auto& t : doc.tables) {
                stream(stem + "_" + t.id + ".csv", [&](std::ostream& o) { cli::write_csv(t, o); });
            }
            if (!doc.messages.empty()) {
                std::string m;
                for (const auto& s : doc.messages) m += s + "\n";
                text(stem + "_messages.txt", m);
            }
        }
    }

  private:
    void note(const std::string& name) { log_ << "wrote " << path(name).string() << '\n'; }

    const RunConfig& cfg_;
    std::ostream& log_;
};

InputFormat detect_format(const RunConfig& cfg, const std::filesystem::path& input) {
    if (cfg.input_format == "counts") return InputFormat::counts;
    if (cfg.input_format == "accuracies") return InputFormat::accuracies;
    const auto doc = detail::read_csv(input);
    const auto has = [&](const char* c) { return std::find(doc.header.begin(), doc.header.end(), c) != doc.header.end(); };
    if (has("correct")) return InputFormat::counts;
    if (has("accuracy_percent")) return InputFormat::accuracies;
    throw ParseError(doc.file, doc.header_line, "correct", "header has neither 'correct' nor 'accuracy_percent'");
}

EvalTable load_table(const RunConfig& cfg) {
    const auto input = cfg.input.empty() ? cfg.data_dir / "vtab_accuracies.csv" : cfg.input;
    const auto tasks = cfg.tasks.empty() ? cfg.data_dir / "vtab_tasks.csv" : cfg.tasks;
    auto table = load_eval_table(input, tasks, detect_format(cfg, input));
    if (cfg.models_given) {
        if (cfg.models.empty()) throw usage_error("empty model list");
        for (const auto& m : cfg.models) {
            if (m.empty()) throw usage_error("empty model id in --models");
        }
        table = table.select_models(cfg.models);
    }
    return table;
}

/// Leaderboard order: bootstrap point estimate of the unweighted mean, descending.
std::vector<std::size_t> leaderboard_order(const std::vector<IntervalEstimate>& raw) {
    std::vector<std::size_t> order(raw.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return raw[a].point > raw[b].point; });
    return order;
}

std::vector<std::string> ordered_names(const EvalTable& t, const std::vector<std::size_t>& order) {
    std::vector<std::string> out;
    for (auto i : order) out.push_back(t.models()[i]);
    return out;
}

std::vector<std::string> task_ids(const EvalTable& t) {
    std::vector<std::string> ids;
    for (const auto& task : t.tasks()) ids.push_back(task.task_id);
    return ids;
}

std::vector<ModelPriors> exponential_priors(const RunConfig& cfg, std::size_t models) {
    const auto p = PriorSpec::exponential(cfg.prior_rate);
    return std::vector<ModelPriors>(models, ModelPriors{p, p});
}

McmcConfig mcmc_of(const RunConfig& cfg) {
    McmcConfig m = cfg.mcmc;
    m.seed = cfg.seed;
    m.parallelism = workers(cfg);
    return m;
}

std::vector<RankScheme> schemes_of(const RunConfig& cfg) {
    if (cfg.scheme == "all") return {std::begin(kAllRankSchemes), std::end(kAllRankSchemes)};
    return {parse_rank_scheme(cfg.scheme)};
}

std::string scheme_title(RankScheme s) {
    switch (s) {
        case RankScheme::by_average: return "By avg";
        case RankScheme::geometric_mean: return "Geom mean";
        case RankScheme::average_rank: return "Avg rank (AvR)";
        case RankScheme::average_rank_noise: return "AvR (noise)";
        case RankScheme::average_rank_binned: return "AvR (bins)";
    }
    return "?";
}

void add_common_settings(Document& doc, const RunConfig& cfg) {
    doc.settings.emplace_back("seed", std::to_string(cfg.seed));
}

void add_bootstrap_settings(Document& doc, const RunConfig& cfg) {
    doc.settings.emplace_back("replicates", std::to_string(cfg.replicates));
    doc.settings.emplace_back("level", num(cfg.level));
}

void add_mcmc_settings(Document& doc, const RunConfig& cfg) {
    const auto& m = cfg.mcmc;
    doc.settings.emplace_back("mcmc", fmt::format("{} chains x {} iterations, burn-in {}, thinning {}", m.chains,
                                                  m.total_iterations, m.burn_in, m.thinning));
    doc.settings.emplace_back("prior", fmt::format("exponential(rate={})", num(cfg.prior_rate)));
}

/// Normalized bootstrap samples plus the bounds used (store-wide mode).
struct NormalizedStore {
    std::optional<NormalizationBounds> bounds;
    SampleCube samples;
    std::size_t clamped = 0;
};

NormalizedStore normalize_store(const ReplicateStore& store, const RunConfig& cfg) {
    NormalizedStore n;
    if (cfg.bounds_mode == "per-replicate") {
        n.samples = normalize_samples_per_replicate(store.replicates(), task_ids(store.source()));
        return n;
    }
    n.bounds = cfg.bounds_file.empty() ? estimate_bounds(store) : load_bounds_csv(cfg.bounds_file, task_ids(store.source()));
    n.samples = normalize_samples(store.replicates(), *n.bounds, &n.clamped);
    return n;
}

/// Interval of the unweighted normalized mean for one model.
IntervalEstimate normalized_interval(const ReplicateStore& store, const NormalizedStore& ns, std::size_t model,
                                     double level) {
    if (ns.bounds) {
        return aggregate_interval(store, store.source().models()[model], std::nullopt, ns.bounds, level);
    }
    return score_interval(ns.samples, model, WeightVector::uniform(ns.samples.tasks()), level,
                          IntervalMethod::bootstrap_percentile);
}

std::vector<PairInterval> normalized_pairs(const ReplicateStore& store, const NormalizedStore& ns,
                                           const std::vector<std::string>& names, double level, int m) {
    if (ns.bounds) return pairwise_difference_intervals(store, names, level, m, std::nullopt, ns.bounds);
    std::vector<PairInterval> out;
    const double adj = bonferroni_level(level, m);
    const auto w = WeightVector::uniform(ns.samples.tasks());
    for (std::size_t a = 0; a < names.size(); ++a) {
        for (std::size_t b = a + 1; b < names.size(); ++b) {
            out.push_back({names[a], names[b],
                           difference_interval(ns.samples, store.source().model_index(names[a]),
                                               store.source().model_index(names[b]), w, adj,
                                               IntervalMethod::bootstrap_percentile)});
        }
    }
    return out;
}

Table rank_table(const std::string& id, const std::string& title, const SampleCube& samples, const EvalTable& t,
                 const std::vector<std::size_t>& order, const RunConfig& cfg, IntervalMethod method,
                 std::vector<std::string>& messages) {
    Table tab;
    tab.id = id;
    tab.title = title;
    tab.columns.push_back("Model");
    const auto schemes = schemes_of(cfg);
    std::vector<std::vector<RankSummary>> results;
    for (auto s : schemes) {
        tab.columns.push_back(scheme_title(s));
        results.push_back(rank_intervals(samples, t.models(), s, cfg.rank_level, cfg.rank, cfg.seed, method,
                                         workers(cfg)));
    }
    for (auto i : order) {
        std::vector<Cell> row{Cell::of_text(t.models()[i])};
        for (const auto& r : results) row.push_back(Cell::of_interval(r[i].interval, 1));
        tab.rows.push_back(std::move(row));
    }
    for (std::size_t k = 0; k < schemes.size(); ++k) {
        for (const auto& r : results[k]) {
            if (r.zero_flagged > 0) {
                messages.push_back(fmt::format("note: {}: {} has a zero accuracy in {} samples (geometric mean 0)",
                                               id, r.model, r.zero_flagged));
            }
        }
    }
    tab.notes.push_back(fmt::format("{:g}% intervals; rank 1 is best.", cfg.rank_level * 100));
    return tab;
}

std::string svg_tag(double v) { return fmt::format("{:.4g}", v); }

// -------------------------------------------------------------- commands

void cmd_ingest(const RunConfig& cfg, std::ostream& out) {
    const auto table = load_table(cfg);
    Output o(cfg, out);
    out << fmt::format("{} models x {} tasks; categories:", table.num_models(), table.num_tasks());
    for (const auto& c : table.categories()) out << ' ' << c << '(' << table.tasks_in(c).size() << ')';
    out << '\n';
    o.stream("ingest_counts.csv", [&](std::ostream& f) {
        f << "model,task,correct,test_size\n";
        for (std::size_t i = 0; i < table.num_models(); ++i) {
            for (std::size_t j = 0; j < table.num_tasks(); ++j) {
                f << detail::csv_escape(table.models()[i]) << ',' << detail::csv_escape(table.tasks()[j].task_id)
                  << ',' << table.correct(i, j) << ',' << table.size(j) << '\n';
            }
        }
    });
    auto published = cfg.published;
    if (published.empty() && cfg.input.empty()) published = cfg.data_dir / "vtab_published.csv";
    if (published.empty()) return;
    const auto report = validate_consistency(table, load_published_summary(published), cfg.tolerance);
    o.stream("ingest_validation.csv", [&](std::ostream& f) {
        f << "model,mean,computed_percent,published_percent,gap\n";
        for (const auto& g : report.gaps) {
            f << fmt::format("{},{},{:.4f},{:.4f},{:.4f}\n", detail::csv_escape(g.model), g.what, g.computed,
                             g.published, g.gap);
        }
    });
    double worst = 0.0;
    for (const auto& g : report.gaps) worst = std::max(worst, g.gap);
    out << fmt::format("consistency: {} (largest gap {:.4f} points, tolerance {})\n", report.pass ? "PASS" : "FAIL",
                       worst, num(cfg.tolerance));
    if (!report.pass) throw validation_error("published summary does not match the table within tolerance");
}

void cmd_bootstrap(const RunConfig& cfg, std::ostream& out) {
    const auto table = load_table(cfg);
    const auto store = run_bootstrap(table, cfg.replicates, cfg.seed, workers(cfg));
    Output o(cfg, out);
    Document doc;
    doc.command = "bootstrap";
    add_common_settings(doc, cfg);
    add_bootstrap_settings(doc, cfg);

    std::vector<IntervalEstimate> raw;
    for (const auto& m : table.models()) raw.push_back(aggregate_interval(store, m, std::nullopt, std::nullopt, cfg.level));
    const auto order = leaderboard_order(raw);
    std::optional<NormalizedStore> ns;
    if (cfg.normalized) ns = normalize_store(store, cfg);

    Table lb;
    lb.id = "leaderboard";
    lb.title = fmt::format("Average accuracy, {:g}% bootstrap intervals", cfg.level * 100);
    lb.columns = {"Model", "Avg Acc"};
    if (ns) lb.columns.push_back("Avg Norm Acc");
    for (auto i : order) {
        std::vector<Cell> row{Cell::of_text(table.models()[i]), pct(raw[i])};
        if (ns) row.push_back(pct(normalized_interval(store, *ns, i, cfg.level)));
        lb.rows.push_back(std::move(row));
    }
    doc.tables.push_back(std::move(lb));

    if (table.num_models() >= 2) {
        const auto top = ordered_names(table, {order.begin(), order.begin() + std::min<std::size_t>(3, order.size())});
        const auto pairs = pairwise_difference_intervals(store, top, cfg.pairwise_level, cfg.comparisons);
        std::optional<std::vector<PairInterval>> npairs;
        if (ns) npairs = normalized_pairs(store, *ns, top, cfg.pairwise_level, cfg.comparisons);
        Table pt;
        pt.id = "pairwise";
        pt.title = fmt::format("Pairwise differences, {:g}% intervals, Bonferroni m = {}", cfg.pairwise_level * 100,
                               cfg.comparisons);
        pt.columns = {"Pair", "Avg Acc Diff"};
        if (ns) pt.columns.push_back("Avg Norm Acc Diff");
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            std::vector<Cell> row{Cell::of_text(pairs[k].first + " - " + pairs[k].second), pct(pairs[k].interval)};
            if (npairs) row.push_back(pct((*npairs)[k].interval));
            pt.rows.push_back(std::move(row));
        }
        doc.tables.push_back(std::move(pt));
    }
    if (ns && ns->clamped > 0) doc.messages.push_back(fmt::format("note: {} normalized values clamped", ns->clamped));
    o.document(doc, "bootstrap");

    if (ns && ns->bounds && (cfg.normalized || cfg.export_bounds)) {
        o.stream("bootstrap_bounds.csv", [&](std::ostream& f) { write_bounds_csv(*ns->bounds, f); });
    } else if (cfg.export_bounds) {
        o.stream("bootstrap_bounds.csv", [&](std::ostream& f) { write_bounds_csv(estimate_bounds(store), f); });
    }
    if (cfg.dump_replicates) {
        o.stream("bootstrap_replicates.csv", [&](std::ostream& f) {
            f << "replicate,model,task,accuracy\n";
            const auto& c = store.replicates();
            for (std::size_t r = 0; r < c.samples(); ++r) {
                for (std::size_t i = 0; i < c.models(); ++i) {
                    for (std::size_t j = 0; j < c.tasks(); ++j) {
                        f << r << ',' << detail::csv_escape(table.models()[i]) << ','
                          << detail::csv_escape(table.tasks()[j].task_id) << ',' << fmt::format("{:.17g}", c.at(r, i, j))
                          << '\n';
                    }
                }
            }
        });
    }
}

struct BhmRun {
    PosteriorDraws draws;
    SampleCube predictive;
    std::vector<ConvergenceSummary> diagnostics;
};

BhmRun run_bhm(const RunConfig& cfg, const EvalTable& table, std::vector<ModelPriors> priors) {
    BhmRun r;
    r.draws = fit_bhm(table, priors, mcmc_of(cfg));
    const auto sizes = table.sizes();
    r.predictive = posterior_predictive(r.draws, sizes, cfg.seed, workers(cfg));
    r.diagnostics = convergence(r.draws);
    return r;
}

Table diagnostics_table(const BhmRun& run, std::vector<std::string>& messages, bool& warned) {
    Table t;
    t.id = "diagnostics";
    t.title = "MCMC convergence of each model's mean task accuracy";
    t.columns = {"Model", "Split R-hat", "ESS"};
    for (const auto& d : run.diagnostics) {
        t.rows.push_back({Cell::of_text(d.model), Cell::of_number(d.rhat, 3), Cell::of_number(d.ess, 0)});
        if (!(d.rhat <= kRhatWarning)) {
            warned = true;
            messages.push_back(fmt::format("warning: split R-hat {:.3f} above {} for {}", d.rhat, kRhatWarning, d.model));
        }
    }
    return t;
}

void write_draws(Output& o, const PosteriorDraws& d) {
    const std::size_t K = d.draws_per_chain();
    auto iteration = [&](std::size_t k) { return d.config.burn_in + static_cast<int>(k + 1) * d.config.thinning - 1; };
    o.stream("bhm_theta_draws.csv", [&](std::ostream& f) {
        f << "chain,iteration,model,task,theta\n";
        for (std::size_t s = 0; s < d.num_draws(); ++s) {
            for (std::size_t i = 0; i < d.models.size(); ++i) {
                for (std::size_t j = 0; j < d.tasks.size(); ++j) {
                    f << s / K << ',' << iteration(s % K) << ',' << detail::csv_escape(d.models[i]) << ','
                      << detail::csv_escape(d.tasks[j]) << ',' << fmt::format("{:.17g}", d.theta.at(s, i, j)) << '\n';
                }
            }
        }
    });
    o.stream("bhm_hyper_draws.csv", [&](std::ostream& f) {
        f << "chain,iteration,model,alpha,beta\n";
        for (std::size_t s = 0; s < d.num_draws(); ++s) {
            for (std::size_t i = 0; i < d.models.size(); ++i) {
                f << s / K << ',' << iteration(s % K) << ',' << detail::csv_escape(d.models[i]) << ','
                  << fmt::format("{:.17g},{:.17g}", d.alpha(s, i), d.beta(s, i)) << '\n';
            }
        }
    });
    o.stream("bhm_config.json", [&](std::ostream& f) {
        nlohmann::ordered_json j;
        j["total_iterations"] = d.config.total_iterations;
        j["burn_in"] = d.config.burn_in;
        j["thinning"] = d.config.thinning;
        j["chains"] = d.config.chains;
        j["seed"] = d.config.seed;
        j["slice_width"] = d.config.slice_width;
        j["slice_max_stepout"] = d.config.slice_max_stepout;
        nlohmann::ordered_json pri = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < d.priors.size(); ++i) {
            pri.push_back({{"model", d.models[i]}, {"alpha", to_string(d.priors[i].alpha)},
                           {"beta", to_string(d.priors[i].beta)}});
        }
        j["priors"] = pri;
        f << j.dump(2) << '\n';
    });
}

void cmd_bhm(const RunConfig& cfg, std::ostream& out) {
    const auto table = load_table(cfg);
    const auto run = run_bhm(cfg, table, exponential_priors(cfg, table.num_models()));
    Output o(cfg, out);
    Document doc;
    doc.command = "bhm";
    add_common_settings(doc, cfg);
    doc.settings.emplace_back("level", num(cfg.level));
    add_mcmc_settings(doc, cfg);

    std::vector<IntervalEstimate> cred, pred;
    for (std::size_t i = 0; i < table.num_models(); ++i) {
        cred.push_back(credible_interval(run.draws, {i, std::nullopt, std::nullopt}, cfg.level));
        pred.push_back(predictive_interval(run.predictive, {i, std::nullopt, std::nullopt}, cfg.level));
    }
    const auto order = leaderboard_order(cred);
    Table lb;
    lb.id = "leaderboard";
    lb.title = fmt::format("Average accuracy, {:g}% BHM intervals", cfg.level * 100);
    lb.columns = {"Model", "Avg Acc (credible)", "Avg Acc (posterior predictive)"};
    for (auto i : order) lb.rows.push_back({Cell::of_text(table.models()[i]), pct(cred[i]), pct(pred[i])});
    doc.tables.push_back(std::move(lb));
    bool warned = false;
    doc.tables.push_back(diagnostics_table(run, doc.messages, warned));
    o.document(doc, "bhm");
    if (cfg.export_draws) write_draws(o, run.draws);
    for (const auto& m : doc.messages) out << m << '\n';
    if (warned && cfg.strict) throw computation_error("MCMC did not converge (--strict)");
}

void cmd_ranks(const RunConfig& cfg, std::ostream& out) {
    const auto table = load_table(cfg);
    Output o(cfg, out);
    Document doc;
    doc.command = "ranks";
    add_common_settings(doc, cfg);
    doc.settings.emplace_back("rank level", num(cfg.rank_level));
    doc.settings.emplace_back("source", cfg.source);

    if (cfg.source == "bhm") {
        add_mcmc_settings(doc, cfg);
        const auto run = run_bhm(cfg, table, exponential_priors(cfg, table.num_models()));
        std::vector<IntervalEstimate> pred;
        for (std::size_t i = 0; i < table.num_models(); ++i) {
            pred.push_back(predictive_interval(run.predictive, {i, std::nullopt, std::nullopt}, cfg.level));
        }
        doc.tables.push_back(rank_table("ranks_bhm", "Rank aggregation, BHM posterior predictive", run.predictive,
                                        table, leaderboard_order(pred), cfg,
                                        IntervalMethod::bhm_posterior_predictive, doc.messages));
        bool warned = false;
        doc.tables.push_back(diagnostics_table(run, doc.messages, warned));
        o.document(doc, "ranks");
        if (warned && cfg.strict) throw computation_error("MCMC did not converge (--strict)");
        return;
    }
    doc.settings.emplace_back("replicates", std::to_string(cfg.replicates));
    const auto store = run_bootstrap(table, cfg.replicates, cfg.seed, workers(cfg));
    std::vector<IntervalEstimate> raw;
    for (const auto& m : table.models()) raw.push_back(aggregate_interval(store, m, std::nullopt, std::nullopt, cfg.level));
    const auto order = leaderboard_order(raw);
    doc.tables.push_back(rank_table("ranks", "Rank aggregation, accuracy (bootstrap)", store.replicates(), table, order,
                                    cfg, IntervalMethod::bootstrap_percentile, doc.messages));
    if (cfg.normalized) {
        const auto ns = normalize_store(store, cfg);
        doc.tables.push_back(rank_table("ranks_normalized", "Rank aggregation, normalized accuracy (bootstrap)",
                                        ns.samples, table, order, cfg, IntervalMethod::bootstrap_percentile,
                                        doc.messages));
    }
    o.document(doc, "ranks");
}

void cmd_simplex(const RunConfig& cfg, std::ostream& out) {
    const auto table = load_table(cfg);
    Output o(cfg, out);
    std::vector<std::pair<double, double>> settings;
    if (cfg.z || cfg.rho) {
        settings.emplace_back(cfg.z.value_or(2.0), cfg.rho.value_or(0.0));
    } else {
        settings = {{2.0, 0.0}, {2.0 * std::sqrt(0.5), 0.5}};
    }
    // Colours follow the observed overall-mean leaderboard.
    std::vector<double> overall;
    for (std::size_t i = 0; i < table.num_models(); ++i) overall.push_back(overall_mean(table, i));
    std::vector<std::size_t> order(table.num_models());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return overall[a] > overall[b]; });
    RenderSpec spec;
    spec.model_order = ordered_names(table, order);

    std::optional<NormalizationBounds> bounds;
    if (cfg.normalized) {
        bounds = cfg.bounds_file.empty()
                     ? estimate_bounds(run_bootstrap(table, cfg.replicates, cfg.seed, workers(cfg)))
                     : load_bounds_csv(cfg.bounds_file, task_ids(table));
    }
    for (bool normalized : {false, true}) {
        if (normalized && !bounds) continue;
        for (const auto& [z, rho] : settings) {
            SimplexOptions opt;
            opt.grid_step = cfg.grid_step;
            opt.z = z;
            opt.rho = rho;
            opt.categories = kCategories;
            opt.parallelism = workers(cfg);
            if (normalized) opt.normalizer = bounds;
            const auto field = simplex_scan(table, opt);
            const std::string stem = fmt::format("simplex{}_{}_{}", normalized ? "_normalized" : "", svg_tag(z),
                                                 svg_tag(rho));
            o.stream(stem + ".csv", [&](std::ostream& f) { write_simplex_csv(field, f); });
            spec.title = normalized ? "Best model by category weighting (normalized accuracy)"
                                    : "Best model by category weighting";
            o.text(stem + ".svg", render_ternary(field, spec));
            std::size_t indeterminate = 0;
            for (const auto& c : field.cells) indeterminate += !c.winner;
            out << fmt::format("{}: {} cells, {} indeterminate\n", stem, field.cells.size(), indeterminate);
        }
    }
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
    const auto table = load_table(cfg);
    const std::size_t M = table.num_models();
    const auto store = run_bootstrap(table, cfg.replicates, cfg.seed, workers(cfg));
    const auto ns = normalize_store(store, cfg);
    std::optional<BhmRun> bhm;
    if (!cfg.no_bhm) bhm = run_bhm(cfg, table, exponential_priors(cfg, M));

    Output o(cfg, out);
    Document doc;
    doc.command = "report";
    add_common_settings(doc, cfg);
    add_bootstrap_settings(doc, cfg);
    doc.settings.emplace_back("normalization bounds", cfg.bounds_mode);
    if (bhm) add_mcmc_settings(doc, cfg);

    std::vector<IntervalEstimate> raw, norm, pred, cred;
    for (std::size_t i = 0; i < M; ++i) {
        raw.push_back(aggregate_interval(store, table.models()[i], std::nullopt, std::nullopt, cfg.level));
        norm.push_back(normalized_interval(store, ns, i, cfg.level));
        if (bhm) {
            pred.push_back(predictive_interval(bhm->predictive, {i, std::nullopt, std::nullopt}, cfg.level));
            cred.push_back(credible_interval(bhm->draws, {i, std::nullopt, std::nullopt}, cfg.level));
        }
    }
    const auto order = leaderboard_order(raw);

    Table lb;
    lb.id = "leaderboard";
    lb.title = fmt::format("Average accuracy across {} tasks, {:g}% intervals", table.num_tasks(), cfg.level * 100);
    lb.columns = {"Model", "Avg Acc (bootstrap)"};
    if (bhm) {
        lb.columns.push_back("Avg Acc (BHM predictive)");
        lb.columns.push_back("Avg Acc (BHM credible)");
    }
    lb.columns.push_back("Avg Norm Acc (bootstrap)");
    for (auto i : order) {
        std::vector<Cell> row{Cell::of_text(table.models()[i]), pct(raw[i])};
        if (bhm) {
            row.push_back(pct(pred[i]));
            row.push_back(pct(cred[i]));
        }
        row.push_back(pct(norm[i]));
        lb.rows.push_back(std::move(row));
    }
    lb.notes.push_back("Non-overlapping intervals at this level approximate a pairwise test at the 5% level.");
    doc.tables.push_back(std::move(lb));

    // Category means.
    const auto cats = table.categories();
    Table ct;
    ct.id = "categories";
    ct.title = fmt::format("Category mean accuracy (bootstrap), {:g}% intervals", cfg.level * 100);
    ct.columns = {"Model"};
    std::vector<WeightVector> cat_weights;
    for (const auto& c : cats) {
        ct.columns.push_back(c);
        CategoryWeights cw;
        cw.categories = {c};
        cw.weights = {1.0};
        cat_weights.push_back(expand_category_weights(table.tasks(), cw));
    }
    for (auto i : order) {
        std::vector<Cell> row{Cell::of_text(table.models()[i])};
        for (const auto& w : cat_weights) {
            row.push_back(pct(aggregate_interval(store, table.models()[i], w, std::nullopt, cfg.level)));
        }
        ct.rows.push_back(std::move(row));
    }
    doc.tables.push_back(std::move(ct));

    // Top three pairwise.
    if (M >= 2) {
        const auto top = ordered_names(table, {order.begin(), order.begin() + std::min<std::size_t>(3, M)});
        const auto pairs = pairwise_difference_intervals(store, top, cfg.pairwise_level, cfg.comparisons);
        const auto npairs = normalized_pairs(store, ns, top, cfg.pairwise_level, cfg.comparisons);
        Table pt;
        pt.id = "pairwise";
        pt.title = fmt::format("Differences among the top {}, {:g}% intervals, Bonferroni m = {}", top.size(),
                               cfg.pairwise_level * 100, cfg.comparisons);
        pt.columns = {"Pair", "Avg Acc Diff (bootstrap)"};
        if (bhm) pt.columns.push_back("Avg Acc Diff (BHM predictive)");
        pt.columns.push_back("Avg Norm Acc Diff (bootstrap)");
        const double adj = bonferroni_level(cfg.pairwise_level, cfg.comparisons);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            std::vector<Cell> row{Cell::of_text(pairs[k].first + " - " + pairs[k].second), pct(pairs[k].interval)};
            if (bhm) {
                const DrawFunctional f{table.model_index(pairs[k].first), table.model_index(pairs[k].second),
                                       std::nullopt};
                row.push_back(pct(predictive_interval(bhm->predictive, f, adj)));
            }
            row.push_back(pct(npairs[k].interval));
            pt.rows.push_back(std::move(row));
        }
        doc.tables.push_back(std::move(pt));
    }

    doc.tables.push_back(rank_table("ranks", "Rank aggregation, accuracy (bootstrap)", store.replicates(), table, order,
                                    cfg, IntervalMethod::bootstrap_percentile, doc.messages));
    doc.tables.push_back(rank_table("ranks_normalized", "Rank aggregation, normalized accuracy (bootstrap)",
                                    ns.samples, table, order, cfg, IntervalMethod::bootstrap_percentile,
                                    doc.messages));
    std::optional<Matrix> rank_prob;
    std::vector<std::string> prob_models;
    if (bhm) {
        doc.tables.push_back(rank_table("ranks_bhm", "Rank aggregation, accuracy (BHM posterior predictive)",
                                        bhm->predictive, table, order, cfg,
                                        IntervalMethod::bhm_posterior_predictive, doc.messages));
        // Posterior rank probabilities with structured tasks weighted heavily.
        if (cats.size() == 3) {
            CategoryWeights cw{{kCategories[0], kCategories[1], kCategories[2]}, {0.025, 0.025, 0.95}};
            const auto p = posterior_rank_probabilities(bhm->draws, expand_category_weights(table.tasks(), cw));
            Table rp;
            rp.id = "rank_probabilities";
            rp.title = "Posterior rank probabilities, weights natural 0.025, specialized 0.025, structured 0.95";
            rp.columns = {"Model", "P(rank 1)", "P(rank 2)", "P(rank 3)", "Modal rank"};
            Matrix ordered(M, M);
            for (std::size_t k = 0; k < M; ++k) {
                const auto i = order[k];
                std::size_t mode = 0;
                for (std::size_t r = 0; r < M; ++r) {
                    ordered(k, r) = p(i, r);
                    if (p(i, r) > p(i, mode)) mode = r;
                }
                std::vector<Cell> row{Cell::of_text(table.models()[i])};
                for (std::size_t r = 0; r < 3; ++r) row.push_back(Cell::of_number(r < M ? p(i, r) : 0.0, 3));
                row.push_back(Cell::of_number(static_cast<double>(mode + 1), 0));
                rp.rows.push_back(std::move(row));
                prob_models.push_back(table.models()[i]);
            }
            doc.tables.push_back(std::move(rp));
            rank_prob = std::move(ordered);
        }
        bool warned = false;
        doc.tables.push_back(diagnostics_table(*bhm, doc.messages, warned));
        if (warned && cfg.strict) throw computation_error("MCMC did not converge (--strict)");
    }
    if (ns.clamped > 0) doc.messages.push_back(fmt::format("note: {} normalized values clamped", ns.clamped));

    o.document(doc, "report");
    RenderSpec spec;
    spec.model_order = ordered_names(table, order);
    std::vector<ForestRow> rows;
    for (auto i : order) rows.push_back({table.models()[i], scaled(raw[i], kPercent)});
    spec.title = fmt::format("Average accuracy (%), {:g}% bootstrap intervals", cfg.level * 100);
    o.text("report_forest.svg", render_forest(rows, spec, true));
    rows.clear();
    for (auto i : order) rows.push_back({table.models()[i], scaled(norm[i], kPercent)});
    spec.title = fmt::format("Average normalized accuracy (%), {:g}% bootstrap intervals", cfg.level * 100);
    o.text("report_forest_normalized.svg", render_forest(rows, spec, true));
    if (rank_prob) {
        spec.title = "Posterior rank probabilities (structured weight 0.95)";
        o.text("report_rank_probabilities.svg", render_rank_bars(*rank_prob, prob_models, spec));
    }
    for (const auto& m : doc.messages) out << m << '\n';
}

void cmd_simstudy(const RunConfig& cfg, std::ostream& out) {
    const auto table = cli::simstudy_table();
    Output o(cfg, out);
    Document doc;
    doc.command = "simstudy";
    add_common_settings(doc, cfg);
    doc.settings.emplace_back("replicates", std::to_string(cfg.replicates));

    const double level = 0.95;
    const auto store = run_bootstrap(table, cfg.replicates, cfg.seed, workers(cfg));
    const std::vector<std::string> pair{"A", "B"};
    const auto boot = pairwise_difference_intervals(store, pair, level, 1).front().interval;
    Table t;
    t.id = "intervals";
    t.title = "95% intervals for the difference in mean accuracy, A - B";
    t.columns = {"Method", "Estimate"};
    t.rows.push_back({Cell::of_text("bootstrap"), Cell::of_interval(boot, 4)});
    bool ok = true;
    auto check = [&](bool pass, const std::string& what) {
        ok = ok && pass;
        doc.messages.push_back(fmt::format("{} {}", pass ? "PASS" : "FAIL", what));
    };
    check(boot.lower <= 0.0 && boot.upper >= 0.0, "bootstrap interval contains 0");

    bool warned = false;
    if (!cfg.bootstrap_only) {
        add_mcmc_settings(doc, cfg);
        doc.settings.back() = {"prior", "truncated normal, sd 10"};
        const auto draws = fit_bhm(table, cli::simstudy_priors(), mcmc_of(cfg));
        const auto bhm = credible_interval(draws, {0, 1, std::nullopt}, level);
        t.rows.push_back({Cell::of_text("BHM credible"), Cell::of_interval(bhm, 4)});
        check(bhm.upper < 0.0, "BHM interval strictly negative");
        const bool close = std::abs(bhm.lower - -0.021) <= 0.005 && std::abs(bhm.upper - -0.003) <= 0.005;
        check(close, "BHM endpoints within 0.005 of (-0.021, -0.003)");
        BhmRun run;
        run.diagnostics = convergence(draws);
        doc.tables.push_back(t);
        doc.tables.push_back(diagnostics_table(run, doc.messages, warned));
    } else {
        doc.tables.push_back(t);
    }
    o.document(doc, "simstudy");
    for (const auto& row : t.rows) {
        const auto& e = row[1].interval;
        out << fmt::format("{}: {} ({}, {})\n", row[0].text, cli::fixed(e.point, 4), cli::fixed(e.lower, 4),
                           cli::fixed(e.upper, 4));
    }
    for (const auto& m : doc.messages) out << m << '\n';
    if (warned && cfg.strict) throw computation_error("MCMC did not converge (--strict)");
    if (!ok) throw computation_error("simulation study check failed");
}

// ----------------------------------------------------------------- parser

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::usage: return 1;
        case ErrorKind::validation: return 2;
        case ErrorKind::computation: return 3;
        case ErrorKind::capacity: return 3;
    }
    return 3;
}

}  // namespace

void run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    (void)err;
    static const std::map<std::string, std::function<void(const RunConfig&, std::ostream&)>> commands{
        {"ingest", cmd_ingest}, {"bootstrap", cmd_bootstrap}, {"bhm", cmd_bhm},          {"ranks", cmd_ranks},
        {"simplex", cmd_simplex}, {"report", cmd_report},    {"simstudy", cmd_simstudy},
    };
    const auto it = commands.find(cfg.command);
    if (it == commands.end()) throw usage_error(fmt::format("unknown command '{}'", cfg.command));
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw usage_error("--level must lie in (0, 1)");
    it->second(cfg, out);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    cfg.data_dir = cli::default_data_dir();
    CLI::App app{"Leaderboards with uncertainty for per-task evaluation results", "taskagg"};
    app.set_config("--config", "", "TOML file with option values (command-line flags take precedence)");
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string data_dir = cfg.data_dir.string(), input, tasks, published, out_dir = cfg.out_dir.string(), bounds_file;
    double z = 2.0, rho = 0.0;
    std::string bin_ties = "fractional";
    app.add_option("--data-dir", data_dir, "Directory with the bundled fixture files")->capture_default_str();
    app.add_option("--input", input, "Results CSV: model,task,correct or model,task,accuracy_percent");
    app.add_option("--tasks", tasks, "Task CSV: task,category,test_size");
    app.add_option("--published", published, "Published summary CSV for ingest");
    app.add_option("--input-format", cfg.input_format, "auto, counts or accuracies")
        ->check(CLI::IsMember({"auto", "counts", "accuracies"}))
        ->capture_default_str();
    app.add_option("--tolerance", cfg.tolerance, "Consistency tolerance in percentage points")->capture_default_str();
    auto* models_opt = app.add_option("--models", cfg.models, "Comma-separated model subset")->delimiter(',');
    app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    app.add_option("--replicates", cfg.replicates, "Bootstrap replicates")->capture_default_str();
    app.add_option("--level", cfg.level, "Interval level for leaderboards")->capture_default_str();
    app.add_option("--pairwise-level", cfg.pairwise_level, "Family level for pairwise differences")
        ->capture_default_str();
    app.add_option("--comparisons", cfg.comparisons, "Bonferroni comparison count")->capture_default_str();
    app.add_option("--rank-level", cfg.rank_level, "Interval level for rank tables")->capture_default_str();
    app.add_flag("--normalized", cfg.normalized, "Add normalized-accuracy outputs");
    app.add_option("--bounds-mode", cfg.bounds_mode, "store-wide or per-replicate normalization bounds")
        ->check(CLI::IsMember({"store-wide", "per-replicate"}))
        ->capture_default_str();
    app.add_option("--bounds-file", bounds_file, "CSV task,low,high with fixed normalization bounds");
    app.add_option("--scheme", cfg.scheme, "Rank scheme or 'all'")->capture_default_str();
    app.add_option("--source", cfg.source, "Samples for ranks: bootstrap or bhm")
        ->check(CLI::IsMember({"bootstrap", "bhm"}))
        ->capture_default_str();
    app.add_option("--noise-sd", cfg.rank.noise_sd, "Noise sd in percentage points")->capture_default_str();
    app.add_option("--bin-width", cfg.rank.bin_width, "Bin width in percentage points")->capture_default_str();
    app.add_option("--bin-ties", bin_ties, "Tie rule inside a bin: fractional or max")
        ->check(CLI::IsMember({"fractional", "max"}))
        ->capture_default_str();
    auto* z_opt = app.add_option("--z", z, "Standard-error multiplier for simplex fields");
    auto* rho_opt = app.add_option("--rho", rho, "Assumed correlation between models");
    app.add_option("--grid-step", cfg.grid_step, "Simplex lattice step")->capture_default_str();
    app.add_option("--chains", cfg.mcmc.chains, "MCMC chains")->capture_default_str();
    app.add_option("--iterations", cfg.mcmc.total_iterations, "MCMC iterations per chain")->capture_default_str();
    app.add_option("--burn-in", cfg.mcmc.burn_in, "Discarded iterations per chain")->capture_default_str();
    app.add_option("--thin", cfg.mcmc.thinning, "Keep every n-th iteration")->capture_default_str();
    app.add_option("--slice-width", cfg.mcmc.slice_width, "Slice width on the log scale")->capture_default_str();
    app.add_option("--slice-max-stepout", cfg.mcmc.slice_max_stepout, "Slice step-out limit")->capture_default_str();
    app.add_option("--prior-rate", cfg.prior_rate, "Exponential hyperprior rate")->capture_default_str();
    app.add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    app.add_option("--format", cfg.format, "csv, markdown or json")
        ->check(CLI::IsMember({"csv", "markdown", "json"}))
        ->capture_default_str();
    app.add_option("--parallelism", cfg.parallelism, "Worker threads (0 = all cores); never changes results")
        ->capture_default_str();
    app.add_flag("--strict", cfg.strict, "Treat convergence warnings as failures");
    app.add_flag("--no-bhm", cfg.no_bhm, "Skip the hierarchical model in report");
    app.add_flag("--bootstrap-only", cfg.bootstrap_only, "simstudy: bootstrap interval only");
    app.add_flag("--dump-replicates", cfg.dump_replicates, "bootstrap: write every replicate");
    app.add_flag("--export-draws", cfg.export_draws, "bhm: write retained draws");
    app.add_flag("--export-bounds", cfg.export_bounds, "bootstrap: write normalization bounds");

    const std::vector<std::pair<std::string, std::string>> subcommands{
        {"ingest", "Load and validate a results table"},
        {"bootstrap", "Bootstrap leaderboard and pairwise differences"},
        {"bhm", "Hierarchical beta-binomial model intervals"},
        {"ranks", "Rank aggregation tables"},
        {"simplex", "Winning model over category weightings"},
        {"report", "Full leaderboard report"},
        {"simstudy", "Two-model simulation study"},
    };
    for (const auto& [name, help] : subcommands) app.add_subcommand(name, help);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.data_dir = data_dir;
    cfg.input = input;
    cfg.tasks = tasks;
    cfg.published = published;
    cfg.out_dir = out_dir;
    cfg.bounds_file = bounds_file;
    cfg.models_given = models_opt->count() > 0;
    cfg.models.erase(std::remove(cfg.models.begin(), cfg.models.end(), std::string{}), cfg.models.end());
    if (z_opt->count() > 0) cfg.z = z;
    if (rho_opt->count() > 0) cfg.rho = rho;
    cfg.rank.binned_ties = bin_ties == "max" ? TiePolicy::max : TiePolicy::fractional;

    try {
        run_command(cfg, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

}  // namespace taskagg
