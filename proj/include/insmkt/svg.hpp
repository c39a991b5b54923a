#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace insmkt::svg {

struct Series {
    std::string label;
    std::span<const double> x;
    std::span<const double> y;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

/// Standalone SVG line chart with axes, ticks and a legend.
std::string render(const LinePlot& plot);
void write(const std::filesystem::path& path, const LinePlot& plot);

}  // namespace insmkt::svg
