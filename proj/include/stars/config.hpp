#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "stars/bench.hpp"
#include "stars/oracle.hpp"
#include "stars/solver.hpp"

namespace stars {

/// The JSON run configuration shared by `solve` and `bench`. Unknown keys are
/// rejected and the schema version is checked; `print-default-config` emits a
/// complete template.
struct RunConfigFile {
    int schema_version = 1;
    std::uint64_t seed = 0;
    std::string output_dir = "out";

    // solve section
    std::string problem;
    EnsembleKind ensemble = EnsembleKind::gaussian;
    int p = 0; // 0 = conventional choice (n for identity, min(n,100) otherwise)
    int r = 1;
    NoiseModel noise;
    SolverConfig solver; // ensemble/x0/budget filled in at dispatch time
    long long budget_mult = 1500;
    double h_opt_override = 0.0; // 0 = use the catalog value

    // bench section
    ExperimentGrid grid;
    bool has_grid = false;

    static RunConfigFile from_json(const nlohmann::json& j);
    static RunConfigFile load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

nlohmann::json default_config_json();

} // namespace stars
