#include "insmkt/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "insmkt/errors.hpp"

namespace insmkt {

std::vector<double> uniform_grid(double a, double b, std::size_t n) {
    if (n < 2) throw InvalidParameters("uniform grid needs at least two points");
    std::vector<double> x(n);
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + h * static_cast<double>(i);
    x.back() = b;
    return x;
}

MonotoneCubic::MonotoneCubic(double x_min, double x_max, std::span<const double> values)
    : x_min_(x_min), x_max_(x_max), y_(values.begin(), values.end()) {
    const std::size_t n = y_.size();
    if (n < 2 || !(x_max > x_min))
        throw InvalidParameters("monotone cubic needs >= 2 values on a non-empty interval");
    h_ = (x_max - x_min) / static_cast<double>(n - 1);

    std::vector<double> secant(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (y_[i + 1] - y_[i]) / h_;

    slope_.assign(n, 0.0);
    if (n == 2) {
        slope_[0] = slope_[1] = secant[0];
        return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double a = secant[i - 1];
        const double b = secant[i];
        // harmonic mean of same-signed secants, zero at local extrema
        slope_[i] = (a * b > 0.0) ? 2.0 * a * b / (a + b) : 0.0;
    }
    // Three-point end slopes, limited to keep monotonicity.
    auto end_slope = [](double s0, double s1) {
        double d = 0.5 * (3.0 * s0 - s1);
        if (d * s0 <= 0.0) return 0.0;
        if (s0 * s1 <= 0.0 && std::abs(d) > std::abs(3.0 * s0)) d = 3.0 * s0;
        return d;
    };
    slope_[0] = end_slope(secant[0], secant[1]);
    slope_[n - 1] = end_slope(secant[n - 2], secant[n - 3]);
}

std::size_t MonotoneCubic::locate(double x, double& t) const {
    const std::size_t last = y_.size() - 1;
    if (!(x > x_min_)) {
        t = 0.0;
        return 0;
    }
    if (!(x < x_max_)) {
        t = 1.0;
        return last - 1;
    }
    const double s = (x - x_min_) / h_;
    auto i = static_cast<std::size_t>(s);
    if (i >= last) i = last - 1;
    t = s - static_cast<double>(i);
    return i;
}

double MonotoneCubic::operator()(double x) const {
    double t;
    const std::size_t i = locate(x, t);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h_ * slope_[i] + h01 * y_[i + 1] + h11 * h_ * slope_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
    double t;
    const std::size_t i = locate(x, t);
    const double t2 = t * t;
    const double d00 = 6.0 * t2 - 6.0 * t;
    const double d10 = 3.0 * t2 - 4.0 * t + 1.0;
    const double d01 = -6.0 * t2 + 6.0 * t;
    const double d11 = 3.0 * t2 - 2.0 * t;
    return (d00 * y_[i] + d01 * y_[i + 1]) / h_ + d10 * slope_[i] + d11 * slope_[i + 1];
}

}  // namespace insmkt
