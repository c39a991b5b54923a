#pragma once

// Dormand-Prince 5(4) with the Hairer-Wanner quartic dense output.
//
// The integrator hands every accepted step to an observer as a DenseStep; the
// observer can evaluate the continuous extension anywhere inside the step and
// ask integration to stop. Optional stop points force step ends to land on
// prescribed abscissae exactly, which is how solutions are sampled on a grid
// without interpolation noise.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace insmkt::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
    double rtol = 1e-11;
    double atol = 1e-13;
    double initial_step = 1e-4;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 2'000'000;
};

enum class Status {
    reached_end,
    stopped_by_observer,
    max_steps_exceeded,
    step_underflow,
};

template <std::size_t N>
struct DenseStep {
    double x0 = 0.0;
    double h = 0.0;
    State<N> y0{};
    State<N> y1{};

    double x1() const { return x0 + h; }

    State<N> operator()(double x) const {
        const double s = (x - x0) / h;
        const double s1 = 1.0 - s;
        State<N> out;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])));
        return out;
    }

    // Continuous-extension coefficients.
    State<N> r1{}, r2{}, r3{}, r4{}, r5{};
};

namespace detail {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace detail

/// Integrates y' = rhs(x, y) from x0 towards x_end (x_end > x0).
///
/// `observer(const DenseStep<N>&)` is called after every accepted step and
/// returns false to stop. `stops` is an ascending list of abscissae that step
/// ends must hit exactly. Exceptions thrown by `rhs` propagate unchanged.
template <std::size_t N, class Rhs, class Observer>
Status integrate(Rhs&& rhs, double x0, const State<N>& y0, double x_end, const Options& opt,
                 Observer&& observer, std::span<const double> stops = {}) {
    using namespace detail;
    double x = x0;
    State<N> y = y0;
    State<N> k1 = rhs(x, y), k2, k3, k4, k5, k6, k7, tmp, ynew;
    double h = std::min(opt.initial_step, x_end - x0);
    auto next_stop = std::lower_bound(stops.begin(), stops.end(), x0,
                                      [](double s, double v) { return s <= v; });
    double err_prev = 1e-4;

    for (std::size_t n = 0; n < opt.max_steps; ++n) {
        if (x >= x_end) return Status::reached_end;
        h = std::min(h, opt.max_step);
        double target = x_end;
        if (next_stop != stops.end() && *next_stop < target) target = *next_stop;
        bool hits_target = false;
        if (x + h >= target || x + 1.01 * h >= target) {
            h = target - x;
            hits_target = true;
        }
        if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
            return Status::step_underflow;

        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        k2 = rhs(x + c2 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = rhs(x + c3 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs(x + c4 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs(x + c5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] +
                     h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const double xnew = hits_target ? target : x + h;
        k6 = rhs(x + h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] +
                      h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        k7 = rhs(xnew, ynew);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
            const double scale = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += (e / scale) * (e / scale);
        }
        err = std::sqrt(err / static_cast<double>(N));
        if (!std::isfinite(err)) err = 1e10;

        if (err <= 1.0) {
            DenseStep<N> step;
            step.x0 = x;
            step.h = xnew - x;
            step.y0 = y;
            step.y1 = ynew;
            for (std::size_t i = 0; i < N; ++i) {
                const double dy = ynew[i] - y[i];
                const double bspl = h * k1[i] - dy;
                step.r1[i] = y[i];
                step.r2[i] = dy;
                step.r3[i] = bspl;
                step.r4[i] = dy - h * k7[i] - bspl;
                step.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                   d6 * k6[i] + d7 * k7[i]);
            }
            x = xnew;
            y = ynew;
            k1 = k7;
            if (hits_target && next_stop != stops.end() && *next_stop == target) ++next_stop;
            if (!observer(step)) return Status::stopped_by_observer;
            // PI step-size control.
            const double e = std::max(err, 1e-10);
            double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, 10.0);
            err_prev = e;
            h *= fac;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    return Status::max_steps_exceeded;
}

}  // namespace insmkt::ode
