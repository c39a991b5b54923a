#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "insmkt/errors.hpp"
#include "insmkt/io.hpp"

using namespace insmkt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "insmkt_test_io";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int k = 0; k < 10000; ++k) {
        const double v = std::ldexp(mant(rng), expo(rng));
        REQUIRE(io::parse_double(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.5) == "0.5");
    CHECK(io::format_double(-0.0) == "-0");
    CHECK_THROWS_AS(io::parse_double("1,5"), ConfigError);
    CHECK_THROWS_AS(io::parse_double(""), ConfigError);
}

TEST_CASE("equilibrium solution round-trips bit-exactly") {
    MarketParams p;
    p.rho = 0.5;  // exercises a refined grid
    const auto sol = solve_equilibrium(p);
    const auto csv = scratch("eq.csv"), js = scratch("eq.json");
    io::write_solution(sol, csv, js);
    const auto back = io::read_solution(csv, js);
    CHECK(back == sol);

    const std::string text = slurp(csv);
    CHECK(text.rfind("M,u,du,p,D,Y,hI,hS\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);

    // Rewriting the re-read solution gives identical bytes.
    io::write_solution(back, scratch("eq2.csv"), scratch("eq2.json"));
    CHECK(slurp(scratch("eq2.csv")) == text);
    CHECK(slurp(scratch("eq2.json")) == slurp(js));
}

TEST_CASE("solution reader is strict") {
    const auto sol = solve_equilibrium(MarketParams{});
    const auto csv = scratch("s.csv"), js = scratch("s.json");
    io::write_solution(sol, csv, js);

    auto doc = io::read_json(js);
    doc["extra"] = 1;
    io::write_json(scratch("bad.json"), doc);
    CHECK_THROWS_AS(io::read_solution(csv, scratch("bad.json")), ConfigError);

    doc = io::read_json(js);
    doc["M_high"] = sol.M_high + 1.0;
    io::write_json(scratch("shifted.json"), doc);
    CHECK_THROWS_AS(io::read_solution(csv, scratch("shifted.json")), ConfigError);

    doc = io::read_json(js);
    doc["params"]["rho"] = "high";
    io::write_json(scratch("typed.json"), doc);
    CHECK_THROWS_AS(io::read_solution(csv, scratch("typed.json")), ConfigError);

    CHECK_THROWS_AS(io::read_solution(scratch("missing.csv"), js), ConfigError);
}

TEST_CASE("config blocks round-trip and reject unknown keys") {
    SimulationConfig sim;
    sim.seed = 123;
    sim.measure = Measure::reference;
    sim.M0 = 0.9;
    SimulationConfig back;
    io::from_json(io::to_json(sim), back);
    CHECK(back.seed == 123);
    CHECK(back.measure == Measure::reference);
    CHECK(back.M0 == 0.9);

    SolverConfig s;
    s.bracket = {0.01, 0.9};
    SolverConfig s2;
    io::from_json(io::to_json(s), s2);
    CHECK(s2 == s);

    MarketParams m;
    CHECK_THROWS_AS(io::from_json(io::json{{"kappa", 1.0}}, m), ConfigError);
    CHECK_THROWS_AS(io::from_json(io::json{{"grid", 3}}, s2), ConfigError);
    CHECK_THROWS_AS(io::from_json(io::json{{"grid_size", -3}}, s2), ConfigError);
}

TEST_CASE("csv tables") {
    const std::vector<double> a{1.0, 2.5}, b{-3.0, 1e-300};
    io::write_csv(scratch("t.csv"), {{"a", a}, {"b", b}});
    CHECK(slurp(scratch("t.csv")) == "a,b\n1,-3\n2.5,1e-300\n");
    const auto t = io::read_csv(scratch("t.csv"));
    CHECK(t.column("b") == b);
    CHECK_THROWS_AS(t.column("c"), ConfigError);

    std::ofstream(scratch("ragged.csv")) << "a,b\n1\n";
    CHECK_THROWS_AS(io::read_csv(scratch("ragged.csv")), ConfigError);

    const std::vector<double> short_col{1.0};
    CHECK_THROWS_AS(io::write_csv(scratch("x.csv"), {{"a", a}, {"b", short_col}}), InvalidParameters);
}

TEST_CASE("sweep table") {
    std::vector<SweepRow> rows(2);
    rows[0] = {0.1, 0.4, 1.9, 1.5, "ok", ""};
    rows[1] = {50.0, 0.0, 0.0, 0.0, "NoEquilibrium", "payout_barrier"};
    io::write_sweep(scratch("sweep.csv"), "theta", rows);
    CHECK(slurp(scratch("sweep.csv")) ==
          "theta,M_low,M_high,delta_M,status,invariant\n0.1,0.4,1.9,1.5,ok,\n50,,,,NoEquilibrium,payout_barrier\n");
}
