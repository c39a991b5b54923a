#include "insmkt/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "insmkt/errors.hpp"

namespace insmkt {

std::vector<double> solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                                      std::span<const double> c, std::span<const double> d) {
    const std::size_t n = b.size();
    if (a.size() != n || c.size() != n || d.size() != n || n == 0)
        throw InvalidParameters("tridiagonal bands must be aligned and non-empty");
    std::vector<double> cp(n), dp(n), x(n);
    auto pivot_ok = [](double p, double scale) {
        return std::isfinite(p) && std::abs(p) > 1e-14 * scale;
    };
    double scale = std::abs(b[0]) + (n > 1 ? std::abs(c[0]) : 0.0);
    if (!pivot_ok(b[0], scale)) throw SingularSystem("zero pivot in row 0");
    cp[0] = n > 1 ? c[0] / b[0] : 0.0;
    dp[0] = d[0] / b[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = b[i] - a[i] * cp[i - 1];
        scale = std::abs(a[i]) + std::abs(b[i]) + (i + 1 < n ? std::abs(c[i]) : 0.0);
        if (!pivot_ok(m, scale)) {
            std::ostringstream os;
            os << "vanishing pivot in row " << i;
            throw SingularSystem(os.str());
        }
        cp[i] = i + 1 < n ? c[i] / m : 0.0;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    x[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
    return x;
}

namespace {

enum class Target { upper, lower };

std::vector<double> expected_hitting_time(const std::vector<double>& M,
                                          const std::vector<double>& phi,
                                          const std::vector<double>& var, Target target) {
    const std::size_t n = M.size();
    const double h = (M.back() - M.front()) / static_cast<double>(n - 1);
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(n, -1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = 0.5 * var[i] / (h * h);
        const double adv = 0.5 * phi[i] / h;
        lo[i] = diff - adv;
        di[i] = -2.0 * diff;
        up[i] = diff + adv;
    }
    if (target == Target::upper) {
        // reflecting at M_low: ghost value T[-1] = T[1]
        up[0] += lo[0];
        lo[0] = 0.0;
        lo[n - 1] = 0.0;
        di[n - 1] = 1.0;
        up[n - 1] = 0.0;
        rhs[n - 1] = 0.0;
    } else {
        di[0] = 1.0;
        up[0] = 0.0;
        rhs[0] = 0.0;
        lo[n - 1] += up[n - 1];
        up[n - 1] = 0.0;
    }
    return solve_tridiagonal(lo, di, up, rhs);
}

void tabulate(const CapacityDynamics& dyn, std::size_t grid_size, std::vector<double>& M,
              std::vector<double>& phi, std::vector<double>& var) {
    if (grid_size < 3) throw InvalidParameters("grid_size must be >= 3");
    M = uniform_grid(dyn.M_low(), dyn.M_high(), grid_size);
    phi.resize(grid_size);
    var.resize(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) {
        phi[i] = dyn.drift(M[i]);
        var[i] = dyn.variance(M[i]);
    }
}

}  // namespace

PhaseDurations phase_durations(const CapacityDynamics& dyn, std::size_t grid_size) {
    PhaseDurations out;
    std::vector<double> phi, var;
    tabulate(dyn, grid_size, out.M, phi, var);
    out.Ts = expected_hitting_time(out.M, phi, var, Target::upper);
    out.Th = expected_hitting_time(out.M, phi, var, Target::lower);
    out.Ts.back() = 0.0;
    out.Th.front() = 0.0;
    return out;
}

double StationaryDensity::total_mass() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < M.size(); ++i) s += 0.5 * (pi[i] + pi[i + 1]) * (M[i + 1] - M[i]);
    return s;
}

double StationaryDensity::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < M.size(); ++i)
        s += 0.5 * (M[i] * pi[i] + M[i + 1] * pi[i + 1]) * (M[i + 1] - M[i]);
    return s;
}

std::vector<double> StationaryDensity::bin_masses(std::span<const double> edges) const {
    const std::size_t n = M.size();
    std::vector<double> cdf(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        cdf[i] = cdf[i - 1] + 0.5 * (pi[i - 1] + pi[i]) * (M[i] - M[i - 1]);
    const double h = (M.back() - M.front()) / static_cast<double>(n - 1);
    auto cdf_at = [&](double x) {
        if (x <= M.front()) return 0.0;
        if (x >= M.back()) return cdf.back();
        auto i = std::min(static_cast<std::size_t>((x - M.front()) / h), n - 2);
        const double dx = x - M[i];
        const double slope = (pi[i + 1] - pi[i]) / (M[i + 1] - M[i]);
        return cdf[i] + dx * (pi[i] + 0.5 * slope * dx);
    };
    std::vector<double> mass;
    mass.reserve(edges.size() > 0 ? edges.size() - 1 : 0);
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
        mass.push_back(cdf_at(edges[k + 1]) - cdf_at(edges[k]));
    return mass;
}

StationaryDensity stationary_density(const CapacityDynamics& dyn, std::size_t grid_size) {
    StationaryDensity out;
    std::vector<double> phi, var;
    tabulate(dyn, grid_size, out.M, phi, var);
    const std::size_t n = out.M.size();
    for (double v : var)
        if (!(v > 0.0)) throw InvalidSolution("stationary density needs Sigma^2 > 0");

    std::vector<double> expo(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        expo[i] = expo[i - 1] +
                  (phi[i - 1] / var[i - 1] + phi[i] / var[i]) * (out.M[i] - out.M[i - 1]);
    const double shift = *std::max_element(expo.begin(), expo.end());
    out.pi.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.pi[i] = std::exp(expo[i] - shift) / var[i];
    const double mass = out.total_mass();
    for (double& v : out.pi) v /= mass;
    out.kappa = std::exp(-shift) / mass;
    return out;
}

ErgodicReport ergodic_check(const CapacityDynamics& dyn, const StationaryDensity& density,
                            const SimulationConfig& sim) {
    ErgodicReport rep;
    rep.density_mean = density.mean();
    rep.occupancy = simulate_occupancy(dyn, sim);
    rep.samples = rep.occupancy.samples;
    rep.time_average_M = rep.occupancy.time_average_M;
    rep.analytic_masses = density.bin_masses(rep.occupancy.edges);
    if (rep.samples < kMinErgodicSamples) {
        rep.sufficient = false;
        rep.note = "insufficient samples";
        rep.L1 = std::numeric_limits<double>::quiet_NaN();
        rep.mean_gap = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    rep.sufficient = true;
    double l1 = 0.0;
    for (std::size_t k = 0; k < rep.analytic_masses.size(); ++k)
        l1 += std::abs(rep.occupancy.fractions[k] - rep.analytic_masses[k]);
    rep.L1 = l1;
    rep.mean_gap = std::abs(rep.time_average_M - rep.density_mean);
    return rep;
}

CycleAnalytics analyze_cycles(const CapacityDynamics& dyn, std::size_t grid_size) {
    return {phase_durations(dyn, grid_size), stationary_density(dyn, grid_size)};
}

}  // namespace insmkt
