#pragma once

#include <cmath>
#include <functional>

namespace escape_gauge {

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                    int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson with Richardson correction.  The tolerance is relative
/// to a coarse estimate of the integral, floored by abs_floor.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double rel_tol = 1e-10, double abs_floor = 0.0,
                        int max_depth = 40) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // coarse 16-panel estimate to scale the tolerance
    double coarse = 0.0;
    const int panels = 16;
    for (int i = 0; i < panels; ++i) {
        const double x0 = a + (b - a) * i / panels, x1 = a + (b - a) * (i + 1) / panels;
        coarse += (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(0.5 * (x0 + x1)) + f(x1));
    }
    const double tol = std::max(rel_tol * std::abs(coarse), abs_floor);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

} // namespace escape_gauge
