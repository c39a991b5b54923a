#include "insmkt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "insmkt/errors.hpp"

namespace insmkt::io {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("not a number: '" + std::string(s) + "'");
    return v;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const std::vector<Column>& columns) {
    if (columns.empty()) throw InvalidParameters("CSV needs at least one column");
    const std::size_t rows = columns.front().values.size();
    for (const auto& c : columns)
        if (c.values.size() != rows) throw InvalidParameters("CSV columns must be aligned");
    auto out = open_out(path);
    for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << columns[k].name;
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < columns.size(); ++k)
            out << (k ? "," : "") << format_double(columns[k].values[i]);
        out << '\n';
    }
}

const std::vector<double>& Table::column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return columns[k];
    throw ConfigError("missing CSV column '" + name + "'");
}

Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path.string() + "'");
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty CSV '" + path.string() + "'");
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    t.columns.resize(t.header.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t start = 0, k = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string_view cell(line.data() + start,
                                        (comma == std::string::npos ? line.size() : comma) - start);
            if (k >= t.columns.size()) throw ConfigError("ragged CSV row in '" + path.string() + "'");
            t.columns[k++].push_back(parse_double(cell));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (k != t.columns.size()) throw ConfigError("ragged CSV row in '" + path.string() + "'");
    }
    return t;
}

json to_json(const MarketParams& p) {
    json j = json::object();
    for (const auto& name : market_param_names()) j[name] = get_param(p, name);
    return j;
}

json to_json(const SolverConfig& c) {
    return json{{"boundary_tol", c.boundary_tol},
                {"interior_tol", c.interior_tol},
                {"grid_size", c.grid_size},
                {"max_iters", c.max_iters},
                {"bracket", {c.bracket.first, c.bracket.second}},
                {"capacity_cap", c.capacity_cap},
                {"event_tol", c.event_tol},
                {"ode_rtol", c.ode_rtol},
                {"ode_atol", c.ode_atol},
                {"max_refinements", c.max_refinements}};
}

json to_json(const SimulationConfig& c) {
    json m0 = std::isnan(c.M0) ? json(nullptr) : json(c.M0);
    return json{{"horizon", c.horizon}, {"dt", c.dt},       {"M0", m0},
                {"seed", c.seed},       {"paths", c.paths}, {"bins", c.bins},
                {"measure", to_string(c.measure)},          {"burn_in", c.burn_in}};
}

json to_json(const SolverDiagnostics& d) {
    return json{{"u_low_residual", d.u_low_residual},
                {"u_high_residual", d.u_high_residual},
                {"du_low_residual", d.du_low_residual},
                {"du_high_residual", d.du_high_residual},
                {"max_ode_residual", d.max_ode_residual},
                {"shooting_iterations", d.shooting_iterations},
                {"ode_steps", d.ode_steps},
                {"grid_refinements", d.grid_refinements},
                {"min_underwriting_profit", d.min_underwriting_profit},
                {"min_investment_profit", d.min_investment_profit}};
}

namespace {

template <class T>
T typed(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + key + "' has the wrong type");
    }
}

double number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("key '" + key + "' must be a number");
    return v.get<double>();
}

std::size_t count(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError("key '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

void require_object(const json& j, const char* what) {
    if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

}  // namespace

void from_json(const json& j, MarketParams& out) {
    require_object(j, "market block");
    for (const auto& [key, v] : j.items()) {
        const auto& names = market_param_names();
        if (std::find(names.begin(), names.end(), key) == names.end())
            throw ConfigError("unknown key 'market." + key + "'");
        set_param(out, key, number(v, "market." + key));
    }
}

void from_json(const json& j, SolverConfig& out) {
    require_object(j, "solver block");
    for (const auto& [key, v] : j.items()) {
        const std::string k = "solver." + key;
        if (key == "boundary_tol") out.boundary_tol = number(v, k);
        else if (key == "interior_tol") out.interior_tol = number(v, k);
        else if (key == "grid_size") out.grid_size = count(v, k);
        else if (key == "max_iters") out.max_iters = count(v, k);
        else if (key == "capacity_cap") out.capacity_cap = number(v, k);
        else if (key == "event_tol") out.event_tol = number(v, k);
        else if (key == "ode_rtol") out.ode_rtol = number(v, k);
        else if (key == "ode_atol") out.ode_atol = number(v, k);
        else if (key == "max_refinements") out.max_refinements = count(v, k);
        else if (key == "bracket") {
            if (!v.is_array() || v.size() != 2) throw ConfigError(k + " must be [lo, hi]");
            out.bracket = {number(v[0], k), number(v[1], k)};
        } else {
            throw ConfigError("unknown key '" + k + "'");
        }
    }
}

void from_json(const json& j, SimulationConfig& out) {
    require_object(j, "simulation block");
    for (const auto& [key, v] : j.items()) {
        const std::string k = "simulation." + key;
        if (key == "horizon") out.horizon = number(v, k);
        else if (key == "dt") out.dt = number(v, k);
        else if (key == "M0") out.M0 = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : number(v, k);
        else if (key == "seed") {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
                throw ConfigError(k + " must be a non-negative integer");
            out.seed = v.get<std::uint64_t>();
        } else if (key == "paths") out.paths = count(v, k);
        else if (key == "bins") out.bins = count(v, k);
        else if (key == "burn_in") out.burn_in = number(v, k);
        else if (key == "measure") {
            try {
                out.measure = measure_from_string(typed<std::string>(v, k));
            } catch (const InvalidParameters& e) {
                throw ConfigError(e.what());
            }
        } else {
            throw ConfigError("unknown key '" + k + "'");
        }
    }
}

void from_json(const json& j, SolverDiagnostics& out) {
    require_object(j, "diagnostics block");
    for (const auto& [key, v] : j.items()) {
        const std::string k = "diagnostics." + key;
        if (key == "u_low_residual") out.u_low_residual = number(v, k);
        else if (key == "u_high_residual") out.u_high_residual = number(v, k);
        else if (key == "du_low_residual") out.du_low_residual = number(v, k);
        else if (key == "du_high_residual") out.du_high_residual = number(v, k);
        else if (key == "max_ode_residual") out.max_ode_residual = number(v, k);
        else if (key == "shooting_iterations") out.shooting_iterations = count(v, k);
        else if (key == "ode_steps") out.ode_steps = count(v, k);
        else if (key == "grid_refinements") out.grid_refinements = count(v, k);
        else if (key == "min_underwriting_profit") out.min_underwriting_profit = number(v, k);
        else if (key == "min_investment_profit") out.min_investment_profit = number(v, k);
        else throw ConfigError("unknown key '" + k + "'");
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
    }
}

void write_solution(const EquilibriumSolution& sol, const std::filesystem::path& csv_path,
                    const std::filesystem::path& json_path) {
    write_csv(csv_path, {{"M", sol.M},
                         {"u", sol.u},
                         {"du", sol.du},
                         {"p", sol.p},
                         {"D", sol.D},
                         {"Y", sol.Y},
                         {"hI", sol.hI},
                         {"hS", sol.hS}});
    json j{{"M_low", sol.M_low},
           {"M_high", sol.M_high},
           {"params", to_json(sol.params)},
           {"solver", to_json(sol.config)},
           {"diagnostics", to_json(sol.diagnostics)}};
    write_json(json_path, j);
}

EquilibriumSolution read_solution(const std::filesystem::path& csv_path,
                                  const std::filesystem::path& json_path) {
    const json j = read_json(json_path);
    require_object(j, "solution sidecar");
    EquilibriumSolution sol;
    for (const auto& [key, v] : j.items()) {
        if (key == "M_low") sol.M_low = number(v, key);
        else if (key == "M_high") sol.M_high = number(v, key);
        else if (key == "params") from_json(v, sol.params);
        else if (key == "solver") from_json(v, sol.config);
        else if (key == "diagnostics") from_json(v, sol.diagnostics);
        else throw ConfigError("unknown key '" + key + "' in solution sidecar");
    }
    const Table t = read_csv(csv_path);
    sol.M = t.column("M");
    sol.u = t.column("u");
    sol.du = t.column("du");
    sol.p = t.column("p");
    sol.D = t.column("D");
    sol.Y = t.column("Y");
    sol.hI = t.column("hI");
    sol.hS = t.column("hS");
    if (sol.M.size() < 3) throw ConfigError("solution CSV has fewer than three rows");
    if (sol.M.front() != sol.M_low || sol.M.back() != sol.M_high)
        throw ConfigError("solution CSV grid does not span [M_low, M_high] of the sidecar");
    return sol;
}

void write_path(const std::filesystem::path& path, const PathSample& sample) {
    write_csv(path, {{"t", sample.t}, {"M", sample.M}});
}

void write_histogram(const std::filesystem::path& path, const OccupancyHistogram& h) {
    const std::size_t n = h.fractions.size();
    const std::span<const double> edges(h.edges);
    write_csv(path, {{"bin_left", edges.first(n)},
                     {"bin_right", edges.subspan(1, n)},
                     {"fraction", h.fractions}});
}

void write_durations(const std::filesystem::path& path, const PhaseDurations& d) {
    write_csv(path, {{"M", d.M}, {"Ts", d.Ts}, {"Th", d.Th}});
}

void write_density(const std::filesystem::path& path, const StationaryDensity& d) {
    write_csv(path, {{"M", d.M}, {"pi", d.pi}});
}

void write_sweep(const std::filesystem::path& path, const std::string& axis,
                 const std::vector<SweepRow>& rows) {
    auto out = open_out(path);
    out << axis << ",M_low,M_high,delta_M,status,invariant\n";
    for (const auto& r : rows) {
        const bool ok = r.status == "ok";
        std::string invariant = r.invariant;
        for (char& ch : invariant)
            if (ch == ',' || ch == '\n') ch = ' ';
        out << format_double(r.value) << ',' << (ok ? format_double(r.M_low) : "") << ','
            << (ok ? format_double(r.M_high) : "") << ',' << (ok ? format_double(r.range) : "")
            << ',' << r.status << ',' << invariant << '\n';
    }
}

}  // namespace insmkt::io
