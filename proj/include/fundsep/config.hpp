#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fundsep/types.hpp"

namespace fundsep {

// experiment knobs shared by the CLI subcommands; each subcommand reads the
// subset it needs and ignores the rest
struct ExperimentConfig {
    double z = 1.0;
    double t = 0.0;
    double horizon = 1.0;  // T for portfolio / f / sensitivity runs
    std::vector<double> t_grid;
    std::string parameter = "b";
    double y0_hat = std::numeric_limits<double>::quiet_NaN();
    double burn_in = -1.0;  // negative: use the model's 1/lambda_hat
    bool static_only = false;
    std::string representation = "auto";
};

struct RunConfig {
    PreferenceMarketSpec market;
    StateModelSpec model;
    SimConfig sim;
    ExperimentConfig experiment;
};

// default parameter sets: market is shared, the state parameters depend on
// the model family
RunConfig default_config(ModelKind kind = ModelKind::ThreeHalves);

// parse the sectioned key-value format ([market] / [model] / [simulation] /
// [experiment], '#' comments, vectors space-separated, matrix rows split by
// ';'); unknown sections or keys are ParseErrors with the line number
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

// resolved configuration in a fixed key order: equal strings <=> runs are
// byte-identical (this is what gets hashed into manifests)
std::string canonical_config(const RunConfig& cfg);

} // namespace fundsep
