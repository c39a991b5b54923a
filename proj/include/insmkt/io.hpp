#pragma once

// File interchange: equilibrium CSV + JSON sidecar, and the CSV products of
// the simulation and cycle analytics. CSV files carry a header row, use '.'
// as decimal separator and '\n' line endings; doubles are written in the
// shortest form that reads back bit-exactly.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "insmkt/analytics.hpp"
#include "insmkt/dynamics.hpp"
#include "insmkt/solver.hpp"

namespace insmkt::io {

using nlohmann::json;

std::string format_double(double v);
double parse_double(std::string_view s);

struct Column {
    std::string name;
    std::span<const double> values;
};

void write_csv(const std::filesystem::path& path, const std::vector<Column>& columns);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& column(const std::string& name) const;
};

Table read_csv(const std::filesystem::path& path);

json to_json(const MarketParams& p);
json to_json(const SolverConfig& c);
json to_json(const SimulationConfig& c);
json to_json(const SolverDiagnostics& d);

/// Strict readers: unknown keys raise ConfigError; missing keys keep the
/// value already held by `out`.
void from_json(const json& j, MarketParams& out);
void from_json(const json& j, SolverConfig& out);
void from_json(const json& j, SimulationConfig& out);
void from_json(const json& j, SolverDiagnostics& out);

/// Writes `<stem>.csv` (M,u,du,p,D,Y,hI,hS) and `<stem>.json`
/// ({M_low, M_high, params, solver, diagnostics}).
void write_solution(const EquilibriumSolution& sol, const std::filesystem::path& csv_path,
                    const std::filesystem::path& json_path);

EquilibriumSolution read_solution(const std::filesystem::path& csv_path,
                                  const std::filesystem::path& json_path);

void write_path(const std::filesystem::path& path, const PathSample& sample);
void write_histogram(const std::filesystem::path& path, const OccupancyHistogram& h);
void write_durations(const std::filesystem::path& path, const PhaseDurations& d);
void write_density(const std::filesystem::path& path, const StationaryDensity& d);

void write_sweep(const std::filesystem::path& path, const std::string& axis,
                 const std::vector<SweepRow>& rows);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

}  // namespace insmkt::io
