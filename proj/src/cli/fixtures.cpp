#include "cli/fixtures.hpp"

#include <cstdlib>

namespace taskagg::cli {

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("TASKAGG_DATA"); env != nullptr && *env != '\0') return env;
#ifdef TASKAGG_DATA_DIR
    return TASKAGG_DATA_DIR;
#else
    return "data";
#endif
}

EvalTable simstudy_table() {
    const std::vector<TaskSpec> tasks{{"task1", "simulated", 200}, {"task2", "simulated", 10000},
                                      {"task3", "simulated", 20000}};
    return EvalTable({"A", "B"}, tasks, {100, 5000, 10000, 115, 5000, 10000});
}

std::vector<ModelPriors> simstudy_priors() {
    constexpr double sd = 10.0;
    return {
        {PriorSpec::truncated_normal(2000, sd), PriorSpec::truncated_normal(2000, sd)},
        {PriorSpec::truncated_normal(2100, sd), PriorSpec::truncated_normal(1900, sd)},
    };
}

}  // namespace taskagg::cli
