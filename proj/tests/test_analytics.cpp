#include <doctest.h>

#include <cmath>

#include "insmkt/analytics.hpp"
#include "insmkt/errors.hpp"

using namespace insmkt;
using doctest::Approx;

namespace {

const CapacityDynamics& bench_dyn() {
    static const CapacityDynamics dyn = build_dynamics(solve_equilibrium(MarketParams::benchmark()));
    return dyn;
}

constexpr double kA = 0.3240, kB = 2.1322, kPhi = 0.02, kSig = 0.15;

CapacityDynamics constant_stub() {
    return CapacityDynamics::from_tables({kA, 0.5 * (kA + kB), kB}, {kPhi, kPhi, kPhi},
                                         {kSig, kSig, kSig});
}

// Closed-form expected time to reach b from x with reflection at a.
double soft_exact(double x) {
    const double k = 2 * kPhi / (kSig * kSig);
    return (kB - x) / kPhi - (std::exp(-k * (x - kA)) - std::exp(-k * (kB - kA))) / (kPhi * k);
}

// Closed-form expected time to reach a from x with reflection at b.
double hard_exact(double x) {
    const double k = 2 * kPhi / (kSig * kSig);
    return (std::exp(k * (kB - kA)) - std::exp(k * (kB - x))) / (kPhi * k) - (x - kA) / kPhi;
}

}  // namespace

TEST_CASE("tridiagonal solver") {
    const std::vector<double> a{0, -1, -1, -1}, b{2, 2, 2, 2}, c{-1, -1, -1, 0}, d{1, 0, 0, 1};
    const auto x = solve_tridiagonal(a, b, c, d);
    for (double v : x) CHECK(v == Approx(1.0).epsilon(1e-14));
    const std::vector<double> zero{0, 1, 1, 1};
    CHECK_THROWS_AS(solve_tridiagonal(a, zero, c, d), SingularSystem);
}

TEST_CASE("constant-coefficient durations match the closed form") {
    const auto dyn = constant_stub();
    const auto d = phase_durations(dyn, 2001);
    for (std::size_t i = 0; i < d.M.size(); i += 100) {
        CHECK(d.Ts[i] == Approx(soft_exact(d.M[i])).epsilon(1e-5));
        if (i > 0) CHECK(d.Th[i] == Approx(hard_exact(d.M[i])).epsilon(1e-5));
    }
}

TEST_CASE("benchmark durations") {
    const auto d = phase_durations(bench_dyn(), 2001);
    CHECK(d.Ts.back() == 0.0);
    CHECK(d.Th.front() == 0.0);
    for (std::size_t i = 1; i < d.M.size(); ++i) {
        REQUIRE(d.Ts[i] < d.Ts[i - 1]);
        REQUIRE(d.Th[i] > d.Th[i - 1]);
        REQUIRE(d.Ts[i] >= 0.0);
    }
    CHECK(d.soft() == Approx(39.28).epsilon(0.03));
    CHECK(d.hard() == Approx(33.82).epsilon(0.03));
    CHECK(d.cycle() == Approx(73.10).epsilon(0.03));
    CHECK(d.soft() > d.hard());

    const auto fine = phase_durations(bench_dyn(), 4001);
    CHECK(std::abs(fine.soft() / d.soft() - 1.0) < 0.005);
    CHECK(std::abs(fine.hard() / d.hard() - 1.0) < 0.005);
}

TEST_CASE("reduction durations") {
    const auto d = phase_durations(build_dynamics(solve_equilibrium(MarketParams::no_investment())), 2001);
    CHECK(d.soft() == Approx(14.05).epsilon(0.03));
    CHECK(d.hard() == Approx(11.92).epsilon(0.03));
    CHECK(d.cycle() == Approx(25.97).epsilon(0.03));
}

TEST_CASE("vanishing diffusion makes the duration system singular") {
    const auto dyn = CapacityDynamics::from_tables({0.5, 1.0, 1.5}, {0.2, 0.2, 0.2}, {0.0, 0.0, 0.0});
    CHECK_THROWS_AS(phase_durations(dyn, 101), SingularSystem);
    CHECK_THROWS_AS(stationary_density(dyn, 101), InvalidSolution);
}

TEST_CASE("constant-coefficient density oracle and convergence order") {
    const double c = 2 * kPhi / (kSig * kSig);
    const double norm = (std::exp(c * (kB - kA)) - 1.0) / c;
    auto max_error = [&](std::size_t n) {
        const auto dens = stationary_density(constant_stub(), n);
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double exact = std::exp(c * (dens.M[i] - kA)) / norm;
            worst = std::max(worst, std::abs(dens.pi[i] / exact - 1.0));
        }
        return worst;
    };
    const double e1 = max_error(2001), e2 = max_error(4001);
    CHECK(e2 < 1e-6);
    CHECK(e1 / e2 == Approx(4.0).epsilon(0.05));
    CHECK(max_error(20001) < 1e-8);
}

TEST_CASE("benchmark density") {
    const auto dens = stationary_density(bench_dyn(), 2001);
    CHECK(std::abs(dens.total_mass() - 1.0) < 1e-6);
    for (std::size_t i = 1; i < dens.pi.size(); ++i) {
        REQUIRE(dens.pi[i] <= dens.pi[i - 1]);
        REQUIRE(dens.pi[i] > 0.0);
    }
    CHECK(dens.kappa > 0.0);
    const auto masses = dens.bin_masses(uniform_grid(dens.M.front(), dens.M.back(), 11));
    double total = 0.0;
    for (double m : masses) total += m;
    CHECK(total == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ergodic check guard on degenerate horizons") {
    SimulationConfig sim;
    sim.horizon = sim.dt;
    const auto dens = stationary_density(bench_dyn(), 2001);
    const auto rep = ergodic_check(bench_dyn(), dens, sim);
    CHECK_FALSE(rep.sufficient);
    CHECK(rep.note == "insufficient samples");
    CHECK(std::isnan(rep.L1));
}

TEST_CASE("long-run occupancy matches the density") {
    const auto& dyn = bench_dyn();
    const auto dens = stationary_density(dyn, 2001);
    const SimulationConfig sim;  // horizon 1e5, dt 1e-3
    const auto rep = ergodic_check(dyn, dens, sim);
    REQUIRE(rep.sufficient);
    CHECK(rep.L1 < 0.05);
    // Time averages of f(M) = M and of the lower-half indicator.
    CHECK(rep.mean_gap < 0.01 * (dyn.M_high() - dyn.M_low()));
    double sim_lower = 0.0, exact_lower = 0.0;
    for (std::size_t k = 0; k < sim.bins / 2; ++k) {
        sim_lower += rep.occupancy.fractions[k];
        exact_lower += rep.analytic_masses[k];
    }
    CHECK(std::abs(sim_lower - exact_lower) < 0.02);
}
