#pragma once

// Underwriting-cycle durations and the stationary capacity density.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "insmkt/dynamics.hpp"

namespace insmkt {

/// Solves a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = d[i] (a[0], c[n-1] unused).
/// Throws SingularSystem when elimination meets a vanishing pivot.
std::vector<double> solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                                      std::span<const double> c, std::span<const double> d);

struct PhaseDurations {
    std::vector<double> M;
    std::vector<double> Ts;  // expected time to reach M_high
    std::vector<double> Th;  // expected time to reach M_low

    double soft() const { return Ts.front(); }
    double hard() const { return Th.back(); }
    double cycle() const { return soft() + hard(); }
};

/// Expected first-passage times solving -1 = Phi T' + Sigma^2 T'' / 2 with a
/// Dirichlet zero at the target barrier and a reflecting (Neumann) condition
/// at the other, by second-order central differences on a uniform grid.
PhaseDurations phase_durations(const CapacityDynamics& dyn, std::size_t grid_size);

struct StationaryDensity {
    std::vector<double> M;
    std::vector<double> pi;
    double kappa = 0.0;

    /// Trapezoidal integral of pi.
    double total_mass() const;
    /// Trapezoidal integral of M pi.
    double mean() const;
    /// Probability of each bin [edges[k], edges[k+1]], integrating the
    /// piecewise-linear interpolant of pi.
    std::vector<double> bin_masses(std::span<const double> edges) const;
};

/// pi(M) = kappa / Sigma^2 exp(2 int_{M_low}^M Phi / Sigma^2), inner integral by
/// cumulative trapezoid, kappa by trapezoidal normalization.
StationaryDensity stationary_density(const CapacityDynamics& dyn, std::size_t grid_size);

struct ErgodicReport {
    bool sufficient = false;
    std::string note;
    double L1 = 0.0;
    double mean_gap = 0.0;
    double time_average_M = 0.0;
    double density_mean = 0.0;
    std::size_t samples = 0;
    OccupancyHistogram occupancy;
    std::vector<double> analytic_masses;
};

/// Simulated occupancy against the bin-averaged analytic density.
ErgodicReport ergodic_check(const CapacityDynamics& dyn, const StationaryDensity& density,
                            const SimulationConfig& sim);

/// Minimum number of post-burn-in samples for a meaningful comparison.
inline constexpr std::size_t kMinErgodicSamples = 1000;

struct CycleAnalytics {
    PhaseDurations durations;
    StationaryDensity density;

    double soft_duration() const { return durations.soft(); }
    double hard_duration() const { return durations.hard(); }
    double cycle_duration() const { return durations.cycle(); }
};

CycleAnalytics analyze_cycles(const CapacityDynamics& dyn, std::size_t grid_size);

}  // namespace insmkt
