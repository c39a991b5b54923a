#pragma once

// Reflected capacity diffusion dM = Phi(M) dt + Sigma(M) dW on [M_low, M_high]
// under the worst-case measure, and its Euler-Maruyama simulation.

#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "insmkt/interpolation.hpp"
#include "insmkt/solver.hpp"

namespace insmkt {

enum class Measure { worst_case, reference };

const char* to_string(Measure m);
Measure measure_from_string(const std::string& s);

class CapacityDynamics {
public:
    /// Tabulated coefficients on a uniform grid over [grid.front(), grid.back()].
    /// `reference_drift` defaults to `drift` when empty. Sigma may vanish, which
    /// only stub dynamics in tests rely on.
    static CapacityDynamics from_tables(std::vector<double> grid, std::vector<double> drift,
                                        std::vector<double> volatility,
                                        std::vector<double> reference_drift = {});

    double M_low() const { return grid_.front(); }
    double M_high() const { return grid_.back(); }

    double drift(double M, Measure m = Measure::worst_case) const {
        return m == Measure::worst_case ? phi_(M) : phi_ref_(M);
    }
    double volatility(double M) const { return sigma_(M); }
    double variance(double M) const { return sigma2_(M); }

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& drift_table() const { return phi_.values(); }
    const std::vector<double>& reference_drift_table() const { return phi_ref_.values(); }
    const std::vector<double>& volatility_table() const { return sigma_.values(); }
    const std::vector<double>& variance_table() const { return sigma2_.values(); }

    /// Solution the coefficients were built from; null for stub dynamics.
    const std::shared_ptr<const EquilibriumSolution>& source() const { return source_; }

private:
    friend CapacityDynamics build_dynamics(const EquilibriumSolution& sol);

    std::shared_ptr<const EquilibriumSolution> source_;
    std::vector<double> grid_;
    MonotoneCubic phi_;
    MonotoneCubic phi_ref_;
    MonotoneCubic sigma_;
    MonotoneCubic sigma2_;
};

/// Tabulates Phi = M r + R Sigma^2 and Sigma on the solution grid. Throws
/// InvalidSolution if Sigma^2 <= 0 anywhere or the two drift forms disagree.
CapacityDynamics build_dynamics(const EquilibriumSolution& sol);

/// Drift written out in the generator form D eta (p + hI) + Y sigma (q + hS) + M r.
double direct_drift(const EquilibriumSolution& sol, std::size_t i);

/// Drift before the worst-case distortion: D eta p + Y sigma q + M r.
double reference_drift(const EquilibriumSolution& sol, std::size_t i);

struct SimulationConfig {
    double horizon = 1e5;
    double dt = 1e-3;
    /// Initial capacity; NaN selects the midpoint of the barriers.
    double M0 = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 20251016;
    std::size_t paths = 1;
    std::size_t bins = 200;
    Measure measure = Measure::worst_case;
    /// Fraction of the horizon discarded before occupancy statistics.
    double burn_in = 0.01;
    /// Keep every stride-th point of sampled paths.
    std::size_t stride = 1;

    /// Throws InvalidParameters.
    void validate(const CapacityDynamics& dyn) const;
    double initial_capacity(const CapacityDynamics& dyn) const;

    bool operator==(const SimulationConfig&) const;
};

/// Standard-normal stream for one path. Streams are derived from
/// (master seed, path index), so a path does not depend on how many others run.
class NormalStream {
public:
    NormalStream(std::uint64_t master_seed, std::uint64_t path_index);

    /// Inverse-CDF transform of a 53-bit uniform on (0, 1).
    double operator()();

private:
    std::mt19937_64 engine_;
};

struct PathSample {
    std::vector<double> t;
    std::vector<double> M;
};

PathSample simulate_path(const CapacityDynamics& dyn, const SimulationConfig& cfg,
                         std::size_t path_index = 0);

struct OccupancyHistogram {
    std::vector<double> edges;      // bins + 1 edges over [M_low, M_high]
    std::vector<double> fractions;  // time fraction per bin
    double total_time = 0.0;        // simulated time after burn-in, all paths
    double time_average_M = 0.0;
    std::size_t samples = 0;

    void merge(const OccupancyHistogram& other);
};

/// Occupancy over all paths after burn-in. Bins are half-open except the
/// last, which also holds M_high.
OccupancyHistogram simulate_occupancy(const CapacityDynamics& dyn, const SimulationConfig& cfg);

/// Times for paths started at `from` to first reach `target`; the opposite
/// barrier reflects. Uses cfg.dt, cfg.seed and cfg.measure; `max_time` caps
/// each path (capped paths report max_time).
std::vector<double> first_passage_times(const CapacityDynamics& dyn, const SimulationConfig& cfg,
                                        double from, double target, std::size_t n_paths,
                                        double max_time = 1e6);

}  // namespace insmkt
