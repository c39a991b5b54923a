#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "insmkt/dynamics.hpp"
#include "insmkt/errors.hpp"

using namespace insmkt;

namespace {

const EquilibriumSolution& bench() {
    static const EquilibriumSolution sol = solve_equilibrium(MarketParams::benchmark());
    return sol;
}

const CapacityDynamics& bench_dyn() {
    static const CapacityDynamics dyn = build_dynamics(bench());
    return dyn;
}

SimulationConfig short_run(double horizon = 50.0) {
    SimulationConfig cfg;
    cfg.horizon = horizon;
    return cfg;
}

}  // namespace

TEST_CASE("drift and volatility tables") {
    const auto& sol = bench();
    const auto& dyn = bench_dyn();
    const auto& phi = dyn.drift_table();
    CHECK(phi.front() == sol.M_low * sol.params.r);
    for (std::size_t i = 0; i < sol.size(); ++i) {
        const auto e = evaluate_point(sol.state(i), sol.params);
        REQUIRE(std::abs(phi[i] - (sol.M[i] * sol.params.r + e.R * e.sigma2)) < 1e-10);
        REQUIRE(std::abs(phi[i] - direct_drift(sol, i)) < 1e-10);
        REQUIRE(dyn.variance_table()[i] > 0.0);
        if (i > 0 && i + 1 < sol.size()) REQUIRE(phi[i] > 0.0);
    }
    // Interpolation hits the nodes.
    CHECK(dyn.drift(sol.M[1000]) == phi[1000]);
    CHECK(dyn.volatility(sol.M[10]) == dyn.volatility_table()[10]);
    CHECK(dyn.source().get() != nullptr);
}

TEST_CASE("reference drift differs by the distortion terms") {
    const auto& sol = bench();
    const auto& dyn = bench_dyn();
    const double q = sol.params.sharpe();
    for (std::size_t i = 0; i < sol.size(); i += 50) {
        const double De = sol.D[i] * sol.params.eta, Ys = sol.Y[i] * sol.params.sigma;
        const double diff = dyn.reference_drift_table()[i] - dyn.drift_table()[i];
        CHECK(std::abs(diff + De * sol.hI[i] + Ys * sol.hS[i]) < 1e-12);
        CHECK(reference_drift(sol, i) ==
              doctest::Approx(De * sol.p[i] + Ys * q + sol.M[i] * sol.params.r).epsilon(1e-14));
    }
    CHECK(dyn.drift(1.0, Measure::reference) != dyn.drift(1.0, Measure::worst_case));
    CHECK(measure_from_string("reference") == Measure::reference);
    CHECK_THROWS_AS(measure_from_string("physical"), InvalidParameters);
}

TEST_CASE("bad solutions are rejected") {
    EquilibriumSolution sol = bench();
    sol.D.assign(sol.size(), 0.0);
    sol.Y.assign(sol.size(), 0.0);
    CHECK_THROWS_AS(build_dynamics(sol), InvalidSolution);
}

TEST_CASE("deterministic stub moves up and sticks at the payout barrier") {
    const auto dyn = CapacityDynamics::from_tables({0.5, 1.0, 1.5}, {0.2, 0.2, 0.2}, {0.0, 0.0, 0.0});
    SimulationConfig cfg = short_run(10.0);
    cfg.dt = 0.01;
    const auto path = simulate_path(dyn, cfg);
    for (std::size_t i = 1; i < path.M.size(); ++i) REQUIRE(path.M[i] >= path.M[i - 1]);
    CHECK(path.M.back() == 1.5);
    CHECK(path.M[1] == doctest::Approx(1.0 + 0.002));
}

TEST_CASE("paths stay between the barriers") {
    const auto& dyn = bench_dyn();
    for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
        SimulationConfig cfg = short_run(200.0);
        cfg.seed = seed;
        cfg.M0 = dyn.M_low();
        const auto path = simulate_path(dyn, cfg);
        const auto [lo, hi] = std::minmax_element(path.M.begin(), path.M.end());
        REQUIRE(*lo >= dyn.M_low());
        REQUIRE(*hi <= dyn.M_high());
    }
}

TEST_CASE("seeds make runs reproducible and paths independent of the ensemble") {
    const auto& dyn = bench_dyn();
    const SimulationConfig cfg = short_run();
    CHECK(simulate_path(dyn, cfg).M == simulate_path(dyn, cfg).M);
    SimulationConfig other = cfg;
    other.seed = cfg.seed + 1;
    CHECK(simulate_path(dyn, cfg).M != simulate_path(dyn, other).M);

    const auto few = first_passage_times(dyn, cfg, dyn.M_low(), dyn.M_high(), 3);
    const auto many = first_passage_times(dyn, cfg, dyn.M_low(), dyn.M_high(), 8);
    CHECK(std::equal(few.begin(), few.end(), many.begin()));

    // Path 2 of an ensemble equals path 2 run alone.
    SimulationConfig single = cfg;
    single.paths = 1;
    CHECK(simulate_path(dyn, single, 2).M == simulate_path(dyn, cfg, 2).M);
}

TEST_CASE("stride thins the sampled path") {
    SimulationConfig cfg = short_run(10.0);
    cfg.stride = 100;
    const auto path = simulate_path(bench_dyn(), cfg);
    CHECK(path.M.size() == 101);
    CHECK(path.t.back() == doctest::Approx(10.0));
}

TEST_CASE("normal stream has unit moments") {
    NormalStream z(7, 0);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = z();
        s += x;
        s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.01);
}

TEST_CASE("occupancy histogram") {
    SimulationConfig cfg = short_run(500.0);
    cfg.paths = 2;
    cfg.bins = 50;
    const auto h = simulate_occupancy(bench_dyn(), cfg);
    CHECK(h.edges.size() == 51);
    double total = 0.0;
    for (double f : h.fractions) total += f;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.samples == 2 * (500000 - 5000));
    CHECK(h.time_average_M > bench_dyn().M_low());
}

TEST_CASE("simulation config validation") {
    SimulationConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(bench_dyn()), InvalidParameters);
    cfg = {};
    cfg.M0 = 100.0;
    CHECK_THROWS_AS(cfg.validate(bench_dyn()), InvalidParameters);
    cfg = {};
    cfg.burn_in = 1.0;
    CHECK_THROWS_AS(cfg.validate(bench_dyn()), InvalidParameters);
    cfg = {};
    CHECK(cfg.initial_capacity(bench_dyn()) ==
          doctest::Approx(0.5 * (bench_dyn().M_low() + bench_dyn().M_high())));
}
