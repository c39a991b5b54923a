#include "insmkt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "insmkt/errors.hpp"

namespace insmkt {

const char* to_string(Measure m) {
    return m == Measure::worst_case ? "worst_case" : "reference";
}

Measure measure_from_string(const std::string& s) {
    if (s == "worst_case") return Measure::worst_case;
    if (s == "reference") return Measure::reference;
    throw InvalidParameters("measure must be 'worst_case' or 'reference', got '" + s + "'");
}

CapacityDynamics CapacityDynamics::from_tables(std::vector<double> grid,
                                               std::vector<double> drift,
                                               std::vector<double> volatility,
                                               std::vector<double> reference_drift) {
    const std::size_t n = grid.size();
    if (n < 2 || drift.size() != n || volatility.size() != n)
        throw InvalidParameters("dynamics tables must be aligned and hold >= 2 points");
    if (reference_drift.empty()) reference_drift = drift;
    if (reference_drift.size() != n) throw InvalidParameters("reference drift misaligned");
    for (double s : volatility)
        if (!(s >= 0.0)) throw InvalidParameters("volatility must be non-negative");

    CapacityDynamics dyn;
    const double a = grid.front(), b = grid.back();
    std::vector<double> var(n);
    for (std::size_t i = 0; i < n; ++i) var[i] = volatility[i] * volatility[i];
    dyn.phi_ = MonotoneCubic(a, b, drift);
    dyn.phi_ref_ = MonotoneCubic(a, b, reference_drift);
    dyn.sigma_ = MonotoneCubic(a, b, volatility);
    dyn.sigma2_ = MonotoneCubic(a, b, var);
    dyn.grid_ = std::move(grid);
    return dyn;
}

double direct_drift(const EquilibriumSolution& sol, std::size_t i) {
    const MarketParams& p = sol.params;
    return sol.D[i] * p.eta * (sol.p[i] + sol.hI[i]) +
           sol.Y[i] * p.sigma * (p.sharpe() + sol.hS[i]) + sol.M[i] * p.r;
}

double reference_drift(const EquilibriumSolution& sol, std::size_t i) {
    const MarketParams& p = sol.params;
    return sol.D[i] * p.eta * sol.p[i] + sol.Y[i] * p.sigma * p.sharpe() + sol.M[i] * p.r;
}

CapacityDynamics build_dynamics(const EquilibriumSolution& sol) {
    const std::size_t n = sol.size();
    if (n < 3) throw InvalidSolution("equilibrium solution has fewer than three grid points");
    const MarketParams& params = sol.params;
    std::vector<double> phi(n), vol(n), phi_ref(n), var(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = sol.D[i] * params.eta;
        const double b = sol.Y[i] * params.sigma;
        var[i] = a * a + 2.0 * params.rho * a * b + b * b;
        if (!(var[i] > 0.0)) {
            std::ostringstream os;
            os << "Sigma^2 = " << var[i] << " at M = " << sol.M[i];
            throw InvalidSolution(os.str());
        }
        vol[i] = std::sqrt(var[i]);
        phi[i] = sol.M[i] * params.r + sol.state(i).risk_aversion() * var[i];
        phi_ref[i] = reference_drift(sol, i);
        const double direct = direct_drift(sol, i);
        if (std::abs(direct - phi[i]) > 1e-10 * std::max(1.0, std::abs(phi[i]))) {
            std::ostringstream os;
            os << "drift identity fails at M = " << sol.M[i] << ": " << phi[i] << " vs " << direct;
            throw InvalidSolution(os.str());
        }
    }
    CapacityDynamics dyn;
    dyn.source_ = std::make_shared<const EquilibriumSolution>(sol);
    dyn.grid_ = sol.M;
    const double a = sol.M.front(), b = sol.M.back();
    dyn.phi_ = MonotoneCubic(a, b, phi);
    dyn.phi_ref_ = MonotoneCubic(a, b, phi_ref);
    dyn.sigma_ = MonotoneCubic(a, b, vol);
    dyn.sigma2_ = MonotoneCubic(a, b, var);
    return dyn;
}

bool SimulationConfig::operator==(const SimulationConfig& o) const {
    const bool same_m0 = (std::isnan(M0) && std::isnan(o.M0)) || M0 == o.M0;
    return horizon == o.horizon && dt == o.dt && same_m0 && seed == o.seed && paths == o.paths &&
           bins == o.bins && measure == o.measure && burn_in == o.burn_in && stride == o.stride;
}

void SimulationConfig::validate(const CapacityDynamics& dyn) const {
    if (!(dt > 0.0)) throw InvalidParameters("simulation.dt must be > 0");
    if (!(horizon >= dt)) throw InvalidParameters("simulation.horizon must be >= dt");
    if (bins < 2) throw InvalidParameters("simulation.bins must be >= 2");
    if (paths < 1) throw InvalidParameters("simulation.paths must be >= 1");
    if (stride < 1) throw InvalidParameters("simulation.stride must be >= 1");
    if (!(burn_in >= 0.0 && burn_in < 1.0))
        throw InvalidParameters("simulation.burn_in must lie in [0, 1)");
    const double m0 = initial_capacity(dyn);
    if (!(m0 >= dyn.M_low() && m0 <= dyn.M_high()))
        throw InvalidParameters("simulation.M0 must lie in [M_low, M_high]");
}

double SimulationConfig::initial_capacity(const CapacityDynamics& dyn) const {
    return std::isnan(M0) ? 0.5 * (dyn.M_low() + dyn.M_high()) : M0;
}

NormalStream::NormalStream(std::uint64_t master_seed, std::uint64_t path_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(path_index),
                      static_cast<std::uint32_t>(path_index >> 32)};
    engine_.seed(seq);
}

double NormalStream::operator()() {
    constexpr double kTwoPowMinus53 = 1.0 / 9007199254740992.0;
    const double u = (static_cast<double>(engine_() >> 11) + 0.5) * kTwoPowMinus53;
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

namespace {

// One Euler-Maruyama step followed by projection onto [lo, hi].
struct Stepper {
    const CapacityDynamics& dyn;
    Measure measure;
    double dt;
    double sqrt_dt;
    double lo;
    double hi;

    double operator()(double M, double z) const {
        M += dyn.drift(M, measure) * dt + dyn.volatility(M) * sqrt_dt * z;
        return std::clamp(M, lo, hi);
    }
};

std::size_t step_count(const SimulationConfig& cfg) {
    return static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
}

}  // namespace

PathSample simulate_path(const CapacityDynamics& dyn, const SimulationConfig& cfg,
                         std::size_t path_index) {
    cfg.validate(dyn);
    const Stepper step{dyn, cfg.measure, cfg.dt, std::sqrt(cfg.dt), dyn.M_low(), dyn.M_high()};
    NormalStream normal(cfg.seed, path_index);
    const std::size_t n = step_count(cfg);
    PathSample path;
    path.t.reserve(n / cfg.stride + 2);
    path.M.reserve(n / cfg.stride + 2);
    double M = cfg.initial_capacity(dyn);
    path.t.push_back(0.0);
    path.M.push_back(M);
    for (std::size_t k = 1; k <= n; ++k) {
        M = step(M, normal());
        if (k % cfg.stride == 0) {
            path.t.push_back(static_cast<double>(k) * cfg.dt);
            path.M.push_back(M);
        }
    }
    return path;
}

void OccupancyHistogram::merge(const OccupancyHistogram& other) {
    if (other.total_time == 0.0) return;
    if (total_time == 0.0) {
        *this = other;
        return;
    }
    const double T = total_time + other.total_time;
    for (std::size_t i = 0; i < fractions.size(); ++i)
        fractions[i] = (fractions[i] * total_time + other.fractions[i] * other.total_time) / T;
    time_average_M = (time_average_M * total_time + other.time_average_M * other.total_time) / T;
    total_time = T;
    samples += other.samples;
}

OccupancyHistogram simulate_occupancy(const CapacityDynamics& dyn, const SimulationConfig& cfg) {
    cfg.validate(dyn);
    const double lo = dyn.M_low(), hi = dyn.M_high();
    const Stepper step{dyn, cfg.measure, cfg.dt, std::sqrt(cfg.dt), lo, hi};
    const std::size_t n = step_count(cfg);
    const auto burn = static_cast<std::size_t>(std::floor(cfg.burn_in * static_cast<double>(n)));
    const double width = (hi - lo) / static_cast<double>(cfg.bins);

    OccupancyHistogram total;
    total.edges = uniform_grid(lo, hi, cfg.bins + 1);
    total.fractions.assign(cfg.bins, 0.0);

    for (std::size_t path = 0; path < cfg.paths; ++path) {
        NormalStream normal(cfg.seed, path);
        std::vector<std::uint64_t> counts(cfg.bins, 0);
        double sum_M = 0.0;
        std::size_t kept = 0;
        double M = cfg.initial_capacity(dyn);
        for (std::size_t k = 1; k <= n; ++k) {
            M = step(M, normal());
            if (k <= burn) continue;
            auto b = static_cast<std::size_t>((M - lo) / width);
            if (b >= cfg.bins) b = cfg.bins - 1;
            ++counts[b];
            sum_M += M;
            ++kept;
        }
        OccupancyHistogram h;
        h.edges = total.edges;
        h.fractions.assign(cfg.bins, 0.0);
        h.samples = kept;
        h.total_time = static_cast<double>(kept) * cfg.dt;
        if (kept > 0) {
            for (std::size_t b = 0; b < cfg.bins; ++b)
                h.fractions[b] = static_cast<double>(counts[b]) / static_cast<double>(kept);
            h.time_average_M = sum_M / static_cast<double>(kept);
        }
        total.merge(h);
    }
    return total;
}

std::vector<double> first_passage_times(const CapacityDynamics& dyn, const SimulationConfig& cfg,
                                        double from, double target, std::size_t n_paths,
                                        double max_time) {
    if (!(cfg.dt > 0.0)) throw InvalidParameters("simulation.dt must be > 0");
    const double lo = dyn.M_low(), hi = dyn.M_high();
    if (!(from >= lo && from <= hi && target >= lo && target <= hi))
        throw InvalidParameters("first-passage endpoints must lie in [M_low, M_high]");
    const Stepper step{dyn, cfg.measure, cfg.dt, std::sqrt(cfg.dt), lo, hi};
    const bool upward = target >= from;
    const auto max_steps = static_cast<std::size_t>(std::ceil(max_time / cfg.dt));
    std::vector<double> times;
    times.reserve(n_paths);
    for (std::size_t path = 0; path < n_paths; ++path) {
        NormalStream normal(cfg.seed, path);
        double M = from;
        std::size_t k = 0;
        while (k < max_steps && (upward ? M < target : M > target)) {
            M = step(M, normal());
            ++k;
        }
        times.push_back(static_cast<double>(k) * cfg.dt);
    }
    return times;
}

}  // namespace insmkt
