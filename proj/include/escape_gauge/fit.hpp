#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace escape_gauge {

/// Ordinary least-squares slope of y against x; NaN with fewer than two
/// points or no spread in x.
inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return sxy / sxx;
}

} // namespace escape_gauge
