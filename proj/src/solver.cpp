#include "insmkt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "insmkt/errors.hpp"
#include "insmkt/interpolation.hpp"
#include "insmkt/ode.hpp"

namespace insmkt {

void SolverConfig::validate() const {
    if (!(boundary_tol > 0.0)) throw InvalidParameters("solver.boundary_tol must be > 0");
    if (!(interior_tol > 0.0)) throw InvalidParameters("solver.interior_tol must be > 0");
    if (grid_size < 3) throw InvalidParameters("solver.grid_size must be >= 3");
    if (max_iters < 1) throw InvalidParameters("solver.max_iters must be >= 1");
    if (!(bracket.first > 0.0 && bracket.first < bracket.second))
        throw InvalidParameters("solver.bracket must satisfy 0 < lo < hi");
    if (!(capacity_cap > bracket.second))
        throw InvalidParameters("solver.capacity_cap must exceed the bracket");
    if (!(event_tol > 0.0 && ode_rtol > 0.0 && ode_atol > 0.0))
        throw InvalidParameters("solver ODE tolerances must be > 0");
    if (max_refinements > 8) throw InvalidParameters("solver.max_refinements must be <= 8");
}

namespace {

constexpr double kMinDiffusion = 1e-14;

ode::Options ode_options(const SolverConfig& cfg) {
    ode::Options o;
    o.rtol = cfg.ode_rtol;
    o.atol = cfg.ode_atol;
    o.initial_step = 1e-5;
    return o;
}

}  // namespace

double u_curvature(const LocalState& s, const MarketParams& params) {
    if (!(s.u > 0.0)) throw DegenerateSystem("market-to-book ratio must stay positive");
    const PointEquilibrium e = evaluate_point(s, params);
    if (!(e.sigma2 > kMinDiffusion)) {
        std::ostringstream os;
        os << "Sigma^2 = " << e.sigma2 << " at M = " << s.M;
        throw VanishingDiffusion(os.str());
    }
    const double drive =
        params.lambda - params.r - params.theta / (2.0 * s.u) * e.penalty + s.M * params.r * e.R;
    return 2.0 * s.u * (drive / e.sigma2 + e.R * e.R);
}

double ode_residual(const LocalState& s, double d2u, const MarketParams& params) {
    const PointEquilibrium e = evaluate_point(s, params);
    const double rhs = params.theta / (2.0 * s.u) * e.penalty - s.M * params.r * e.R +
                       (0.5 * d2u / s.u - e.R * e.R) * e.sigma2;
    return params.lambda - params.r - rhs;
}

std::vector<double> interior_ode_residuals(const EquilibriumSolution& sol) {
    std::vector<double> res;
    const std::size_t n = sol.size();
    if (n < 3) return res;
    res.reserve(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = sol.M[i] - sol.M[i - 1];
        const double hr = sol.M[i + 1] - sol.M[i];
        // non-uniform three-point formula; reduces to the central one on a uniform grid
        const double d2u = 2.0 *
                           (hl * sol.u[i + 1] - (hl + hr) * sol.u[i] + hr * sol.u[i - 1]) /
                           (hl * hr * (hl + hr));
        res.push_back(ode_residual(sol.state(i), d2u, sol.params));
    }
    return res;
}

const char* to_string(ShotOutcome o) {
    switch (o) {
        case ShotOutcome::payout_barrier: return "payout_barrier";
        case ShotOutcome::fell_below_payout: return "fell_below_payout";
        case ShotOutcome::rose_above_financing: return "rose_above_financing";
        case ShotOutcome::capacity_cap: return "capacity_cap";
        case ShotOutcome::breakdown: return "breakdown";
    }
    return "unknown";
}

ShotResult shoot(const MarketParams& params, double M_low, const SolverConfig& cfg) {
    const double top = 1.0 + params.gamma;
    auto rhs = [&](double M, const ode::State<2>& y) -> ode::State<2> {
        return {y[1], u_curvature({M, y[0], y[1]}, params)};
    };

    ShotResult shot;
    shot.M_low = M_low;
    shot.M_end = M_low;
    shot.u_end = top;
    bool decreasing = false;

    auto observer = [&](const ode::DenseStep<2>& step) {
        ++shot.steps;
        shot.M_end = step.x1();
        shot.u_end = step.y1[0];
        const double du0 = step.y0[1];
        const double du1 = step.y1[1];
        if (du1 < 0.0) decreasing = true;
        if (!decreasing && du1 > 0.0) {
            shot.outcome = ShotOutcome::rose_above_financing;
            return false;
        }
        if (decreasing && du0 < 0.0 && du1 >= 0.0) {
            // Bisection on the dense output for du = 0.
            double lo = step.x0, hi = step.x1();
            while (hi - lo > cfg.event_tol) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                (step(mid)[1] < 0.0 ? lo : hi) = mid;
            }
            shot.M_end = hi;
            shot.u_end = step(hi)[0];
            shot.outcome = ShotOutcome::payout_barrier;
            return false;
        }
        if (decreasing && step.y1[0] < 1.0) {
            shot.outcome = ShotOutcome::fell_below_payout;
            return false;
        }
        return true;
    };

    try {
        const auto status = ode::integrate<2>(rhs, M_low, ode::State<2>{top, 0.0},
                                              cfg.capacity_cap, ode_options(cfg), observer);
        if (status == ode::Status::reached_end) shot.outcome = ShotOutcome::capacity_cap;
        else if (status != ode::Status::stopped_by_observer) shot.outcome = ShotOutcome::breakdown;
    } catch (const Error&) {
        shot.outcome = ShotOutcome::breakdown;
    }
    shot.objective = shot.u_end - 1.0;
    return shot;
}

void fill_pointwise(EquilibriumSolution& sol) {
    const std::size_t n = sol.size();
    sol.p.resize(n);
    sol.D.resize(n);
    sol.Y.resize(n);
    sol.hI.resize(n);
    sol.hS.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PointEquilibrium e = evaluate_point(sol.state(i), sol.params);
        sol.p[i] = e.p;
        sol.D[i] = e.D;
        sol.Y[i] = e.Y;
        sol.hI[i] = e.h.hI;
        sol.hS[i] = e.h.hS;
    }
}

namespace {

struct Bracket {
    ShotResult lo;
    ShotResult hi;
};

std::optional<Bracket> find_bracket(const MarketParams& params, const SolverConfig& cfg,
                                    std::size_t& evaluations) {
    const auto [a, b] = cfg.bracket;
    ShotResult fa = shoot(params, a, cfg);
    ShotResult fb = shoot(params, b, cfg);
    evaluations += 2;
    if (fa.objective < 0.0 && fb.objective > 0.0) return Bracket{fa, fb};

    // Scan log-spaced interior points for the first sign change from - to +.
    constexpr int kScan = 48;
    ShotResult prev = fa;
    for (int k = 1; k <= kScan; ++k) {
        const double x = a * std::pow(b / a, static_cast<double>(k) / kScan);
        ShotResult cur = (k == kScan) ? fb : shoot(params, x, cfg);
        if (k != kScan) ++evaluations;
        if (prev.objective < 0.0 && cur.objective > 0.0) return Bracket{prev, cur};
        prev = cur;
    }
    return std::nullopt;
}

std::string describe_no_bracket(const MarketParams& params, const SolverConfig& cfg) {
    const ShotResult hi = shoot(params, cfg.bracket.second, cfg);
    std::ostringstream os;
    os << "no payout barrier with u(M_high) = 1 for M_low in [" << cfg.bracket.first << ", "
       << cfg.bracket.second << "]; trajectory from the upper end ends by "
       << to_string(hi.outcome) << " at M = " << hi.M_end << " with u = " << hi.u_end;
    return os.str();
}

// Resamples the trajectory started at M_low on a uniform grid ending at M_high,
// with integrator steps landing exactly on grid nodes.
void integrate_on_grid(EquilibriumSolution& sol, const SolverConfig& cfg, std::size_t grid_size) {
    const MarketParams& params = sol.params;
    sol.M = uniform_grid(sol.M_low, sol.M_high, grid_size);
    const std::size_t n = sol.M.size();
    sol.u.assign(n, 0.0);
    sol.du.assign(n, 0.0);
    sol.u[0] = 1.0 + params.gamma;
    sol.du[0] = 0.0;

    auto rhs = [&](double M, const ode::State<2>& y) -> ode::State<2> {
        return {y[1], u_curvature({M, y[0], y[1]}, params)};
    };
    std::size_t next = 1;
    auto observer = [&](const ode::DenseStep<2>& step) {
        ++sol.diagnostics.ode_steps;
        while (next < n && step.x1() >= sol.M[next]) {
            const auto y = (step.x1() == sol.M[next]) ? step.y1 : step(sol.M[next]);
            sol.u[next] = y[0];
            sol.du[next] = y[1];
            ++next;
        }
        return next < n;
    };
    const std::span<const double> stops(sol.M.data() + 1, n - 1);
    ode::integrate<2>(rhs, sol.M_low, ode::State<2>{sol.u[0], 0.0}, sol.M_high, ode_options(cfg),
                      observer, stops);
    if (next < n) throw NoEquilibrium("trajectory", "failed to integrate converged trajectory");
}

}  // namespace

EquilibriumSolution solve_equilibrium(const MarketParams& params, const SolverConfig& cfg) {
    params.validate();
    cfg.validate();

    std::size_t evaluations = 0;
    auto bracket = find_bracket(params, cfg, evaluations);
    if (!bracket) throw NoBracket("payout_barrier", describe_no_bracket(params, cfg));

    ShotResult lo = bracket->lo;
    ShotResult hi = bracket->hi;
    ShotResult best = std::abs(lo.objective) < std::abs(hi.objective) ? lo : hi;
    // Illinois-modified regula falsi, falling back to bisection whenever an
    // endpoint did not come from a genuine barrier event.
    double flo = lo.objective, fhi = hi.objective;
    int side = 0;
    std::size_t iter = 0;
    const double goal = 1e-3 * cfg.boundary_tol;
    for (; iter < cfg.max_iters; ++iter) {
        if (best.outcome == ShotOutcome::payout_barrier && std::abs(best.objective) < goal) break;
        const double width = hi.M_low - lo.M_low;
        if (width <= 4.0 * std::numeric_limits<double>::epsilon() * hi.M_low) break;

        double x = 0.5 * (lo.M_low + hi.M_low);
        const bool secant_ok = lo.outcome == ShotOutcome::payout_barrier &&
                               hi.outcome == ShotOutcome::payout_barrier;
        if (secant_ok) {
            const double xs = (lo.M_low * fhi - hi.M_low * flo) / (fhi - flo);
            if (xs > lo.M_low && xs < hi.M_low) x = xs;
        }
        ShotResult mid = shoot(params, x, cfg);
        ++evaluations;
        if (std::abs(mid.objective) < std::abs(best.objective) ||
            (mid.outcome == ShotOutcome::payout_barrier &&
             best.outcome != ShotOutcome::payout_barrier))
            best = mid;
        if (mid.objective < 0.0) {
            lo = mid;
            flo = mid.objective;
            if (side == -1) fhi *= 0.5;
            side = -1;
        } else {
            hi = mid;
            fhi = mid.objective;
            if (side == 1) flo *= 0.5;
            side = 1;
        }
    }
    if (iter >= cfg.max_iters)
        throw NoEquilibrium("max_iters", "free-boundary iteration limit exhausted");
    if (best.outcome != ShotOutcome::payout_barrier) {
        throw NoEquilibrium("payout_barrier",
                            std::string("shooting converged to a trajectory without a payout "
                                        "barrier (") +
                                to_string(best.outcome) + ")");
    }

    EquilibriumSolution sol;
    sol.params = params;
    sol.config = cfg;
    sol.M_low = best.M_low;
    sol.M_high = best.M_end;
    sol.diagnostics.shooting_iterations = evaluations;
    auto& d = sol.diagnostics;
    auto max_residual = [&] {
        double worst = 0.0;
        for (double r : interior_ode_residuals(sol)) worst = std::max(worst, std::abs(r));
        return worst;
    };
    try {
        std::size_t grid = cfg.grid_size;
        integrate_on_grid(sol, cfg, grid);
        fill_pointwise(sol);
        d.max_ode_residual = max_residual();
        // The three-point residual carries O(h^2) truncation error, so refine
        // the output grid rather than report a discretisation artefact.
        while (d.max_ode_residual >= cfg.interior_tol && d.grid_refinements < cfg.max_refinements) {
            grid = 2 * (grid - 1) + 1;
            d.ode_steps = 0;
            integrate_on_grid(sol, cfg, grid);
            fill_pointwise(sol);
            d.max_ode_residual = max_residual();
            ++d.grid_refinements;
        }
    } catch (const NoEquilibrium&) {
        throw;
    } catch (const Error& e) {
        throw NoEquilibrium("trajectory", e.what());
    }

    const std::size_t n = sol.size();
    d.u_low_residual = std::abs(sol.u[0] - (1.0 + params.gamma));
    d.u_high_residual = std::abs(sol.u[n - 1] - 1.0);
    d.du_low_residual = std::abs(sol.du[0]);
    d.du_high_residual = std::abs(sol.du[n - 1]);
    d.min_underwriting_profit = std::numeric_limits<double>::infinity();
    d.min_investment_profit = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        d.min_underwriting_profit = std::min(d.min_underwriting_profit, params.eta * (sol.p[i] + sol.hI[i]));
        d.min_investment_profit =
            std::min(d.min_investment_profit, params.sigma * (params.sharpe() + sol.hS[i]));
    }

    const ValidationReport report = check_assumptions(sol, params);
    if (const CheckResult* bad = report.first_blocking_failure()) {
        std::ostringstream os;
        os << "equilibrium invariant '" << bad->name << "' violated at M = " << bad->worst_M
           << " (margin " << bad->margin << ")";
        throw NoEquilibrium(bad->name, os.str());
    }
    return sol;
}

bool ValidationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* ValidationReport::first_failure() const {
    for (const auto& c : checks)
        if (!c.passed) return &c;
    return nullptr;
}

const CheckResult* ValidationReport::first_blocking_failure() const {
    for (const auto& c : checks)
        if (!c.passed && !c.advisory) return &c;
    return nullptr;
}

const CheckResult* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

// Tracks the smallest margin over grid points; margin >= 0 passes.
class MarginTracker {
public:
    MarginTracker(std::string name, const EquilibriumSolution& sol) : sol_(sol) {
        result_.name = std::move(name);
        result_.margin = std::numeric_limits<double>::infinity();
    }

    void observe(std::size_t i, double margin) {
        if (std::isnan(margin)) margin = -std::numeric_limits<double>::infinity();
        if (margin < result_.margin) {
            result_.margin = margin;
            result_.worst_index = i;
            result_.worst_M = i < sol_.M.size() ? sol_.M[i] : 0.0;
        }
    }

    CheckResult finish() {
        result_.passed = result_.margin >= 0.0;
        return result_;
    }

private:
    const EquilibriumSolution& sol_;
    CheckResult result_;
};

}  // namespace

ValidationReport check_assumptions(const EquilibriumSolution& sol, const MarketParams& params) {
    ValidationReport report;
    const std::size_t n = sol.size();
    const double tol = sol.config.boundary_tol;
    const double top = 1.0 + params.gamma;
    const double q = params.sharpe();

    {
        MarginTracker t("grid_shape", sol);
        const bool aligned = n >= 3 && sol.u.size() == n && sol.du.size() == n &&
                             sol.p.size() == n && sol.D.size() == n && sol.Y.size() == n &&
                             sol.hI.size() == n && sol.hS.size() == n;
        t.observe(0, aligned ? 0.0 : -1.0);
        report.checks.push_back(t.finish());
        if (!aligned) return report;
    }
    {
        MarginTracker t("barrier_order", sol);
        t.observe(0, sol.M_low);
        t.observe(n - 1, sol.M_high - sol.M_low);
        CheckResult c = t.finish();
        c.passed = sol.M_low > 0.0 && sol.M_high > sol.M_low;
        report.checks.push_back(c);
    }
    {
        MarginTracker t("correlation_bound", sol);
        t.observe(0, q == 0.0 ? 1.0 : params.alpha * params.eta / q - std::abs(params.rho));
        report.checks.push_back(t.finish());
    }
    {
        MarginTracker t("value_matching", sol);
        t.observe(0, tol - std::abs(sol.u[0] - top));
        t.observe(n - 1, tol - std::abs(sol.u[n - 1] - 1.0));
        report.checks.push_back(t.finish());
    }
    {
        MarginTracker t("no_arbitrage_slope", sol);
        t.observe(0, tol - std::abs(sol.du[0]));
        t.observe(n - 1, tol - std::abs(sol.du[n - 1]));
        report.checks.push_back(t.finish());
    }
    {
        // V(M) = M u(M): V'(M_low) = 1 + gamma and V'(M_high) = 1.
        MarginTracker t("market_value_slope", sol);
        t.observe(0, tol * (1.0 + sol.M[0]) - std::abs(sol.u[0] + sol.M[0] * sol.du[0] - top));
        t.observe(n - 1, tol * (1.0 + sol.M[n - 1]) -
                             std::abs(sol.u[n - 1] + sol.M[n - 1] * sol.du[n - 1] - 1.0));
        report.checks.push_back(t.finish());
    }
    {
        MarginTracker t("u_corridor", sol);
        for (std::size_t i = 0; i < n; ++i)
            t.observe(i, std::min(sol.u[i] - 1.0, top - sol.u[i]) + tol);
        report.checks.push_back(t.finish());
    }
    {
        MarginTracker t("u_decreasing", sol);
        for (std::size_t i = 0; i < n; ++i) t.observe(i, tol - sol.du[i]);
        report.checks.push_back(t.finish());
    }
    {
        MarginTracker t("capacity_risk_aversion", sol);
        for (std::size_t i = 0; i < n; ++i)
            t.observe(i, 1.0 - sol.M[i] * sol.state(i).risk_aversion());
        CheckResult c = t.finish();
        c.passed = c.margin > 0.0;
        report.checks.push_back(c);
    }
    {
        MarginTracker t("interior_underwriting", sol);
        for (std::size_t i = 0; i < n; ++i)
            t.observe(i, f_condition(sol.state(i), sol.p[i], sol.D[i], sol.Y[i], params));
        CheckResult c = t.finish();
        c.passed = c.margin > 0.0;
        report.checks.push_back(c);
    }
    {
        // Rounding can leave p + hI at -1e-16 where R = 0 makes it exactly zero.
        constexpr double kSignSlack = 1e-12;
        MarginTracker ti("underwriting_profit", sol);
        MarginTracker ts("investment_profit", sol);
        for (std::size_t i = 0; i < n; ++i) {
            ti.observe(i, params.eta * (sol.p[i] + sol.hI[i]) + kSignSlack);
            ts.observe(i, params.sigma * (q + sol.hS[i]) + kSignSlack);
        }
        // Sign conditions on worst-case profits are diagnostics only.
        for (auto* t : {&ti, &ts}) {
            CheckResult c = t->finish();
            c.advisory = true;
            report.checks.push_back(c);
        }
    }
    {
        MarginTracker t("ode_residual", sol);
        const auto res = interior_ode_residuals(sol);
        for (std::size_t i = 0; i < res.size(); ++i)
            t.observe(i + 1, sol.config.interior_tol - std::abs(res[i]));
        report.checks.push_back(t.finish());
    }
    return report;
}

const std::vector<std::string>& sweep_axes() {
    static const std::vector<std::string> axes = {"rho",   "theta", "gamma", "alpha", "eta",
                                                  "sigma", "mu",    "r",     "lambda"};
    return axes;
}

std::vector<SweepRow> sweep(const MarketParams& base, const std::string& axis,
                            const std::vector<double>& values, const SolverConfig& cfg) {
    if (std::find(sweep_axes().begin(), sweep_axes().end(), axis) == sweep_axes().end())
        throw InvalidParameters("unsupported sweep axis '" + axis + "'");
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    std::optional<double> warm;
    for (double v : values) {
        SweepRow row;
        row.value = v;
        MarketParams p = base;
        set_param(p, axis, v);
        try {
            std::optional<EquilibriumSolution> sol;
            if (warm) {
                SolverConfig local = cfg;
                local.bracket = {std::max(0.5 * *warm, 1e-6), 2.0 * *warm};
                if (local.bracket.second >= local.capacity_cap)
                    local.bracket.second = 0.5 * local.capacity_cap;
                try {
                    sol = solve_equilibrium(p, local);
                } catch (const NoBracket&) {
                }
            }
            if (!sol) sol = solve_equilibrium(p, cfg);
            row.M_low = sol->M_low;
            row.M_high = sol->M_high;
            row.range = sol->M_high - sol->M_low;
            row.status = "ok";
            warm = sol->M_low;
        } catch (const NoEquilibrium& e) {
            row.status = "NoEquilibrium";
            row.invariant = e.invariant();
        } catch (const InvalidParameters& e) {
            row.status = "InvalidParameters";
            row.invariant = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace insmkt
