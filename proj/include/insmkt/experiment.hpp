#pragma once

// Experiment configuration: one JSON document with market, solver,
// simulation, sweep and output blocks. Values resolve as
// command-line override > environment > config file > built-in default
// (the benchmark).

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "insmkt/dynamics.hpp"
#include "insmkt/solver.hpp"

namespace insmkt {

struct SweepSpec {
    std::string axis = "gamma";
    std::vector<double> values{0.02, 0.1, 0.2, 0.3};

    bool operator==(const SweepSpec&) const = default;
};

struct OutputSpec {
    std::string directory = "out";
    bool emit_csv = true;
    bool emit_svg = false;
    std::size_t stride = 100;  // thinning of written sample paths

    bool operator==(const OutputSpec&) const = default;
};

struct ExperimentConfig {
    MarketParams market;
    SolverConfig solver;
    SimulationConfig simulation{.stride = OutputSpec{}.stride};  // mirrors output.stride
    SweepSpec sweep;
    OutputSpec output;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Environment variable that overrides output.directory.
inline constexpr const char* kOutputDirEnv = "INSMKT_OUTPUT_DIR";

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Strict parse on top of the defaults; unknown keys raise ConfigError.
ExperimentConfig experiment_from_json(const nlohmann::json& j);

/// Applies "block.key=value" to a config document. The value is read as JSON
/// when possible (numbers, booleans, arrays), otherwise as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Defaults, then the optional file, then the output-directory environment
/// variable, then overrides in order. Validates the
/// market and solver blocks.
ExperimentConfig load_experiment(const std::optional<std::filesystem::path>& file,
                                 const std::vector<std::string>& overrides);

}  // namespace insmkt
