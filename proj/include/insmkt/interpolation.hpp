#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace insmkt {

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Butland
/// slopes) on a uniform grid. Monotone data stay monotone between nodes.
/// Arguments outside [x_min, x_max] are clamped to the end values; the
/// interpolant never extrapolates.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(double x_min, double x_max, std::span<const double> values);

    double operator()(double x) const;
    double derivative(double x) const;

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    std::size_t size() const { return y_.size(); }
    const std::vector<double>& values() const { return y_; }

private:
    std::size_t locate(double x, double& t) const;

    double x_min_ = 0.0;
    double x_max_ = 0.0;
    double h_ = 1.0;
    std::vector<double> y_;
    std::vector<double> slope_;
};

/// n equally spaced points from a to b inclusive; the last point is exactly b.
std::vector<double> uniform_grid(double a, double b, std::size_t n);

}  // namespace insmkt
