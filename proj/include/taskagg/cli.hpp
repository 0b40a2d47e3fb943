#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "taskagg/bhm.hpp"
#include "taskagg/bootstrap.hpp"
#include "taskagg/ranking.hpp"
#include "taskagg/stats.hpp"

namespace taskagg {

/// Everything a subcommand needs. Defaults equal the library defaults.
struct RunConfig {
    std::string command;

    std::filesystem::path data_dir;   ///< bundled fixture directory
    std::filesystem::path input;      ///< results file; fixture accuracies when empty
    std::filesystem::path tasks;      ///< task file; fixture tasks when empty
    std::filesystem::path published;  ///< published summary for `ingest`
    std::string input_format = "auto";  ///< auto | counts | accuracies
    double tolerance = 0.05;            ///< percentage points
    std::vector<std::string> models;    ///< subset and order; all when empty
    bool models_given = false;

    std::uint64_t seed = 0;
    std::size_t replicates = kDefaultReplicates;
    double level = kDisplayLevel;
    double pairwise_level = kPairwiseLevel;
    int comparisons = 3;
    double rank_level = 0.95;

    bool normalized = false;
    std::string bounds_mode = "store-wide";  ///< store-wide | per-replicate
    std::filesystem::path bounds_file;

    std::string scheme = "all";
    std::string source = "bootstrap";  ///< bootstrap | bhm (ranks)
    RankParams rank;

    std::optional<double> z;
    std::optional<double> rho;
    double grid_step = 0.01;

    McmcConfig mcmc;
    double prior_rate = kDefaultPriorRate;

    std::filesystem::path out_dir = "taskagg-out";
    std::string format = "markdown";  ///< csv | markdown | json
    unsigned parallelism = 1;

    bool strict = false;
    bool no_bhm = false;
    bool bootstrap_only = false;
    bool dump_replicates = false;
    bool export_draws = false;
    bool export_bounds = false;
};

/// Parses `args` (without the program name) and runs the subcommand.
/// Returns the process exit code: 0 success, 1 usage, 2 data validation,
/// 3 computation failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs an already parsed configuration; throws taskagg::Error.
void run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace taskagg
