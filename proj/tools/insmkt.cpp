// insmkt: command-line front end for the equilibrium, simulation and
// cycle analytics. Data goes to files (and short summaries to stdout);
// diagnostics go to stderr.
//
// Exit status: 0 success, 1 no equilibrium or other model failure,
// 2 configuration error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "insmkt/acceptance.hpp"
#include "insmkt/analytics.hpp"
#include "insmkt/dynamics.hpp"
#include "insmkt/errors.hpp"
#include "insmkt/experiment.hpp"
#include "insmkt/io.hpp"
#include "insmkt/solver.hpp"
#include "insmkt/svg.hpp"

namespace fs = std::filesystem;
using namespace insmkt;

namespace {

struct Args {
    std::string config;
    std::vector<std::string> sets;
    std::string out;
    std::string axis;
    std::string values;
    std::string solution;
};

std::vector<std::string> split_values(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        parts.push_back(text.substr(start, comma == std::string::npos ? comma : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return parts;
}

ExperimentConfig load(const Args& a) {
    std::vector<std::string> overrides = a.sets;
    if (!a.axis.empty()) overrides.push_back("sweep.axis=" + nlohmann::json(a.axis).dump());
    if (!a.values.empty()) {
        nlohmann::json values = nlohmann::json::array();
        for (const auto& v : split_values(a.values)) values.push_back(io::parse_double(v));
        overrides.push_back("sweep.values=" + values.dump());
    }
    std::optional<fs::path> file;
    if (!a.config.empty()) file = a.config;
    ExperimentConfig cfg = load_experiment(file, overrides);
    if (!a.out.empty()) cfg.output.directory = a.out;

    std::error_code ec;
    fs::create_directories(cfg.output.directory, ec);
    if (ec || !fs::is_directory(cfg.output.directory))
        throw ConfigError("output directory '" + cfg.output.directory + "' is not writable");
    return cfg;
}

fs::path out_path(const ExperimentConfig& cfg, const std::string& name) {
    return fs::path(cfg.output.directory) / name;
}

EquilibriumSolution obtain_solution(const ExperimentConfig& cfg, const Args& a) {
    if (a.solution.empty()) return solve_equilibrium(cfg.market, cfg.solver);
    fs::path json_path = a.solution;
    fs::path csv_path = json_path;
    csv_path.replace_extension(".csv");
    return io::read_solution(csv_path, json_path);
}

void plot(const ExperimentConfig& cfg, const std::string& name, const std::string& title,
          const std::string& y_label, std::span<const double> x, std::span<const double> y,
          const std::string& x_label = "M") {
    svg::write(out_path(cfg, name), {title, x_label, y_label, {{"", x, y}}});
}

int run_solve(const Args& a) {
    const auto cfg = load(a);
    const auto sol = solve_equilibrium(cfg.market, cfg.solver);
    if (cfg.output.emit_csv)
        io::write_solution(sol, out_path(cfg, "equilibrium.csv"), out_path(cfg, "equilibrium.json"));
    if (cfg.output.emit_svg) {
        plot(cfg, "u.svg", "Market-to-book ratio", "u", sol.M, sol.u);
        plot(cfg, "p.svg", "Equilibrium price", "p", sol.M, sol.p);
        plot(cfg, "Y.svg", "Aggregate investment", "Y", sol.M, sol.Y);
    }
    std::cout << nlohmann::json{{"M_low", sol.M_low}, {"M_high", sol.M_high},
                                {"delta_M", sol.M_high - sol.M_low}}
                     .dump()
              << '\n';
    return 0;
}

int run_sweep(const Args& a) {
    const auto cfg = load(a);
    const auto rows = sweep(cfg.market, cfg.sweep.axis, cfg.sweep.values, cfg.solver);
    const auto path = out_path(cfg, "sweep_" + cfg.sweep.axis + ".csv");
    io::write_sweep(path, cfg.sweep.axis, rows);
    std::cout << cfg.sweep.axis << ",M_low,M_high,delta_M,status\n";
    for (const auto& r : rows) {
        std::cout << io::format_double(r.value) << ',' << io::format_double(r.M_low) << ','
                  << io::format_double(r.M_high) << ',' << io::format_double(r.range) << ','
                  << r.status << '\n';
        if (r.status != "ok")
            std::cerr << "insmkt: " << cfg.sweep.axis << '=' << r.value << ": " << r.status << " ("
                      << r.invariant << ")\n";
    }
    return 0;
}

int run_simulate(const Args& a) {
    const auto cfg = load(a);
    const auto sol = obtain_solution(cfg, a);
    const auto dyn = build_dynamics(sol);
    cfg.simulation.validate(dyn);
    const auto path = simulate_path(dyn, cfg.simulation, 0);
    const auto occ = simulate_occupancy(dyn, cfg.simulation);
    if (cfg.output.emit_csv) {
        io::write_path(out_path(cfg, "path.csv"), path);
        io::write_histogram(out_path(cfg, "occupancy.csv"), occ);
    }
    if (cfg.output.emit_svg) plot(cfg, "path.svg", "Sample capacity path", "M", path.t, path.M, "t");
    std::cout << nlohmann::json{{"time_average_M", occ.time_average_M},
                                {"total_time", occ.total_time},
                                {"samples", occ.samples}}
                     .dump()
              << '\n';
    return 0;
}

int run_cycles(const Args& a) {
    const auto cfg = load(a);
    const auto sol = obtain_solution(cfg, a);
    const auto dyn = build_dynamics(sol);
    const auto cyc = analyze_cycles(dyn, sol.size());
    const auto erg = ergodic_check(dyn, cyc.density, cfg.simulation);

    nlohmann::json summary{{"soft_duration", cyc.soft_duration()},
                           {"hard_duration", cyc.hard_duration()},
                           {"cycle_duration", cyc.cycle_duration()},
                           {"kappa", cyc.density.kappa}};
    if (erg.sufficient) {
        summary["L1"] = erg.L1;
        summary["mean_gap"] = erg.mean_gap;
    } else {
        summary["L1"] = nullptr;
        summary["mean_gap"] = nullptr;
        summary["note"] = erg.note;
        std::cerr << "insmkt: ergodic comparison skipped: " << erg.note << '\n';
    }
    if (cfg.output.emit_csv) {
        io::write_durations(out_path(cfg, "durations.csv"), cyc.durations);
        io::write_json(out_path(cfg, "cycles.json"), summary);
    }
    std::cout << summary.dump() << '\n';
    return 0;
}

int run_density(const Args& a) {
    const auto cfg = load(a);
    const auto sol = obtain_solution(cfg, a);
    const auto dens = stationary_density(build_dynamics(sol), sol.size());
    if (cfg.output.emit_csv) io::write_density(out_path(cfg, "density.csv"), dens);
    if (cfg.output.emit_svg) plot(cfg, "density.svg", "Stationary density", "pi", dens.M, dens.pi);
    std::cout << nlohmann::json{{"kappa", dens.kappa}, {"mean", dens.mean()}}.dump() << '\n';
    return 0;
}

int run_reproduce() {
    std::cout << "status  id  criterion  [measured]  (time)\n";
    const auto results = run_acceptance(&std::cout);
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::cout << (results.size() - failed) << '/' << results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust insurance-market equilibrium and underwriting cycles"};
    app.require_subcommand(1);
    Args args;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config, "Experiment configuration (JSON)");
        sub->add_option("--set", args.sets, "Override a field, e.g. market.rho=0.2")->allow_extra_args(false);
        sub->add_option("--out", args.out, "Output directory");
    };

    auto* solve = app.add_subcommand("solve", "Solve for the equilibrium");
    auto* sweep_cmd = app.add_subcommand("sweep", "Boundaries across one parameter");
    auto* simulate = app.add_subcommand("simulate", "Simulate the capacity diffusion");
    auto* cycles = app.add_subcommand("cycles", "Expected phase durations");
    auto* density = app.add_subcommand("density", "Stationary capacity density");
    auto* reproduce = app.add_subcommand("reproduce", "Run the acceptance suite");
    for (auto* sub : {solve, sweep_cmd, simulate, cycles, density, reproduce}) add_common(sub);
    sweep_cmd->add_option("--axis", args.axis, "Parameter to vary");
    sweep_cmd->add_option("--values", args.values, "Comma-separated values");
    for (auto* sub : {simulate, cycles, density})
        sub->add_option("--solution", args.solution, "Previously written equilibrium JSON sidecar");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*solve) return run_solve(args);
        if (*sweep_cmd) return run_sweep(args);
        if (*simulate) return run_simulate(args);
        if (*cycles) return run_cycles(args);
        if (*density) return run_density(args);
        if (*reproduce) return run_reproduce();
    } catch (const ConfigError& e) {
        std::cerr << "insmkt: configuration error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidParameters& e) {
        std::cerr << "insmkt: invalid parameters: " << e.what() << '\n';
        return 2;
    } catch (const NoEquilibrium& e) {
        std::cerr << "insmkt: no equilibrium (invariant '" << e.invariant() << "'): " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "insmkt: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "insmkt: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
