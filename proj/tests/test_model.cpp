#include <doctest.h>

#include <cmath>
#include <random>

#include "insmkt/errors.hpp"
#include "insmkt/model.hpp"

using namespace insmkt;
using doctest::Approx;

TEST_CASE("premium rate and demand are linear in the loading") {
    const MarketParams p;
    CHECK(premium_rate(0.0, p) == 1.0);
    CHECK(premium_rate(p.alpha * p.eta, p) == Approx(1.1568).epsilon(1e-14));
    CHECK(premium_rate(-0.1, p) == Approx(0.972).epsilon(1e-14));

    CHECK(demand(0.0, p) == 1.0);
    CHECK(demand(p.alpha * p.eta, p) == 0.0);
    CHECK(demand(0.28, p) == Approx(0.5).epsilon(1e-14));
    // No clamping: negative loadings give more than full coverage.
    CHECK(demand(-0.1, p) > 1.0);
}

TEST_CASE("parameter validation") {
    MarketParams p;
    CHECK_NOTHROW(p.validate());
    CHECK_NOTHROW(MarketParams::no_investment().validate());
    CHECK(MarketParams::no_investment().sharpe() == 0.0);

    p.theta = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidParameters);
    try {
        p.validate();
    } catch (const InvalidParameters& e) {
        CHECK(std::string(e.what()).find("theta > 0") != std::string::npos);
    }

    p = MarketParams{};
    p.rho = 1.0;
    CHECK_THROWS_AS(p.validate(), InvalidParameters);

    // alpha*eta/q = 5.04 for the benchmark, so rho = 0.9 is admissible.
    p.rho = 0.9;
    CHECK(p.alpha * p.eta / p.sharpe() == Approx(5.04));
    CHECK_NOTHROW(p.validate());

    // Tighten the bound below |rho| through a large Sharpe ratio.
    p = MarketParams{};
    p.mu = 1.0;
    p.rho = 0.5;
    CHECK_FALSE(p.correlation_bound_holds());
    CHECK_THROWS_AS(p.validate(), InvalidParameters);

    p = MarketParams{};
    p.lambda = 0.01;
    CHECK_THROWS_AS(p.validate(), InvalidParameters);
}

TEST_CASE("named parameter access") {
    MarketParams p;
    for (const auto& name : market_param_names()) {
        set_param(p, name, 0.123);
        CHECK(get_param(p, name) == 0.123);
    }
    CHECK_THROWS_AS(set_param(p, "kappa", 1.0), InvalidParameters);
}

TEST_CASE("risk aversion guard") {
    CHECK(LocalState{1.0, 1.1, -1e-15}.risk_aversion() == 0.0);
    CHECK(LocalState{1.0, 1.1, -0.11}.risk_aversion() == Approx(0.1));
}

TEST_CASE("g coefficients") {
    const MarketParams p;
    const GCoefficients b = g_coefficients({0.5, 1.2, 0.0}, p);
    CHECK(b.g1 == 1.0);
    CHECK(b.g2 == 0.0);

    MarketParams p0 = p;
    p0.rho = 0.0;
    CHECK(g_coefficients({1.0, 1.1, -0.1}, p0).g2 == 0.0);

    // Exact rational evaluation of the defining expressions.
    const GCoefficients g = g_coefficients({1.0, 1.1, -0.1}, p);
    CHECK(g.g1 == Approx(1.1497520661157026).epsilon(1e-14));
    CHECK(g.g2 == Approx(-0.09256198347107437).epsilon(1e-14));
}

TEST_CASE("equilibrium price, demand and investment") {
    const MarketParams p;
    const LocalState s{1.0, 1.1, -0.1};
    CHECK(equilibrium_price(s, p) == Approx(0.11498181553020657).epsilon(1e-13));
    CHECK(equilibrium_demand(s, p) == Approx(0.7946753294103454).epsilon(1e-13));
    CHECK(aggregate_investment(s, equilibrium_price(s, p), p) ==
          Approx(1.1832887762200635).epsilon(1e-13));

    SUBCASE("financing boundary closed form") {
        const double M = 0.3240, u = 1.2, c = M * p.theta / u, q = p.sharpe();
        const LocalState b{M, u, 0.0};
        const double price = (p.eta - c * p.rho * q) / (1.0 / p.alpha + c);
        CHECK(equilibrium_price(b, p) == Approx(price).epsilon(1e-14));
        CHECK(aggregate_investment(b, price, p) ==
              Approx(c * (q + p.rho * price) / p.sigma).epsilon(1e-14));
    }
    SUBCASE("no correlation and no excess return") {
        const MarketParams r = MarketParams::no_investment();
        const LocalState st{0.5, 1.1, -0.05};
        const GCoefficients g = g_coefficients(st, r);
        const double price = r.eta / (1.0 / r.alpha + st.M * r.theta / (st.u * g.g1));
        CHECK(equilibrium_price(st, r) == Approx(price).epsilon(1e-13));
        CHECK(aggregate_investment(st, price, r) == 0.0);
    }
    SUBCASE("vanishing capacity shuts demand down") {
        const LocalState tiny{1e-12, 1.1, -0.1};
        CHECK(equilibrium_price(tiny, p) == Approx(p.alpha * p.eta).epsilon(1e-9));
        CHECK(std::abs(equilibrium_demand(tiny, p)) < 1e-9);
    }
    SUBCASE("large robustness limit of investment") {
        // The gap to the limit closes like 1/theta.
        const LocalState st{1.0, 1.1, -0.1};
        auto gap = [&](double theta) {
            MarketParams big = p;
            big.theta = theta;
            const double price = equilibrium_price(st, big);
            const double limit = aggregate_investment_large_theta(st, price, big);
            return std::abs(aggregate_investment(st, price, big) - limit) / std::abs(limit);
        };
        CHECK(gap(1e3) < 2e-2);
        CHECK(gap(1e5) < 2e-4);
        CHECK(gap(1e3) / gap(1e5) == Approx(100.0).epsilon(0.02));
    }
}

TEST_CASE("composition identity over random states") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> M(0.05, 5.0), u(1.0, 1.3), du(-0.3, 0.0),
        rho(-0.8, 0.8), theta(0.5, 6.0);
    for (int k = 0; k < 2000; ++k) {
        MarketParams p;
        p.rho = rho(rng);
        p.theta = theta(rng);
        const LocalState s{M(rng), u(rng), du(rng)};
        double lhs = 0.0, rhs = 0.0;
        try {
            lhs = demand(equilibrium_price(s, p), p);
            rhs = equilibrium_demand(s, p);
        } catch (const DegenerateSystem&) {
            continue;
        }
        REQUIRE(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("worst-case generators") {
    const MarketParams p;
    SUBCASE("exact at the boundary") {
        const auto h = worst_case_generators({0.4, 1.2, 0.0}, 0.23, 0.6, 0.3, p);
        CHECK(h.hI == -0.23);
        CHECK(h.hS == -p.sharpe());
    }
    SUBCASE("no cross terms without correlation or investment") {
        MarketParams r = p;
        r.rho = 0.0;
        const LocalState s{1.0, 1.1, -0.1};
        const auto h = worst_case_generators(s, 0.1, 0.8, 0.0, r);
        CHECK(h.hI == Approx(s.risk_aversion() * 0.8 * r.eta - 0.1).epsilon(1e-15));
        CHECK(h.hS == Approx(-r.sharpe()).epsilon(1e-15));
    }
    SUBCASE("identities at an interior point") {
        const LocalState s{1.0, 1.1, -0.1};
        const auto e = evaluate_point(s, p);
        const double R = e.R, a = e.D * p.eta, b = e.Y * p.sigma;
        CHECK(std::abs(e.p + e.h.hI - R * (a + p.rho * b)) < 1e-12);
        CHECK(std::abs(p.sharpe() + e.h.hS - R * (b + p.rho * a)) < 1e-12);
    }
    SUBCASE("negative profits are flagged, not thrown") {
        const auto h = worst_case_generators({1.0, 1.1, -0.1}, 0.1, -5.0, 0.0, p);
        CHECK_FALSE(h.underwriting_profit_ok);
    }
}

TEST_CASE("individual policies") {
    const LocalState s{2.0, 1.1, -0.1};
    CHECK_THROWS_AS(individual_policies(-0.1, s, 0.7, 0.3), NegativeReserves);
    const Policy zero = individual_policies(0.0, s, 0.7, 0.3);
    CHECK(zero.underwriting == 0.0);
    CHECK(zero.investment == 0.0);
    const Policy all = individual_policies(2.0, s, 0.7, 0.3);
    CHECK(all.underwriting == 0.7);
    CHECK(all.investment == 0.3);
    const Policy half = individual_policies(1.0, s, 0.7, 0.3);
    CHECK(half.underwriting == 0.35);
    CHECK(half.investment == 0.15);

    // Homogeneity and market clearing over a partition of M.
    for (double c : {0.0, 0.25, 3.0}) {
        const Policy base = individual_policies(0.4, s, 0.7, 0.3);
        const Policy scaled = individual_policies(c * 0.4, s, 0.7, 0.3);
        CHECK(scaled.underwriting == Approx(c * base.underwriting).epsilon(1e-15));
    }
    double sum = 0.0;
    for (double m : {0.1, 0.3, 0.6, 1.0}) sum += individual_policies(m, s, 0.7, 0.3).underwriting;
    CHECK(std::abs(sum - 0.7) < 1e-12);
}

TEST_CASE("interior-regime certificate") {
    const MarketParams p;
    const LocalState b{0.3240, 1.2, 0.0};
    const double price = equilibrium_price(b, p);
    const double f = f_condition(b, price, demand(price, p), 0.0, p);
    CHECK(f == Approx(p.theta / (1.2 * p.eta) * (price + p.rho * p.sharpe())).epsilon(1e-14));
    CHECK(f > 0.0);

    // The two forms agree in sign at equilibrium prices.
    for (double du : {-0.02, -0.1, -0.2}) {
        for (double M : {0.4, 1.0, 1.8}) {
            const LocalState s{M, 1.1, du};
            const auto e = evaluate_point(s, p);
            const double f1 = f_condition(s, e.p, e.D, e.Y, p);
            const double f2 = f_condition_equivalent(s, p);
            CHECK((f1 > 0.0) == (f2 > 0.0));
        }
    }
}
