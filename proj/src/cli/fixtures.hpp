#pragma once

#include <filesystem>
#include <vector>

#include "taskagg/bhm.hpp"
#include "taskagg/core.hpp"

namespace taskagg::cli {

/// Bundled data directory: $TASKAGG_DATA when set, else the build-time path.
std::filesystem::path default_data_dir();

/// Two models over three tasks of sizes 200, 10000 and 20000. Model A
/// answers 100, 5000, 10000 correctly; model B 115, 5000, 10000.
EvalTable simstudy_table();

/// Truncated-normal hyperpriors (sd 10): A has α, β centred at 2000;
/// B has α at 2100 and β at 1900.
std::vector<ModelPriors> simstudy_priors();

}  // namespace taskagg::cli
