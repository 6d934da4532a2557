#pragma once

// Pole counting n(r), the integrated counting function N(r), the asymptote
// 2 int q'(s)^2 s ds and the n-th order estimate from log^{n+1} N against log r.

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <vector>

#include "escape_gauge/errors.hpp"
#include "escape_gauge/fit.hpp"
#include "escape_gauge/growth.hpp"
#include "escape_gauge/quadrature.hpp"

namespace escape_gauge {

// Largest ring index summed term by term.
inline constexpr double kMaxCountedRing = 2e8;

namespace detail {

// floor(q(r)), or -1 when q(r) < k0 + 1
inline std::int64_t ring_limit(const GrowthModel& m, double r) {
    if (r < m.q_domain_start()) return -1;
    const LogDepthMagnitude q = log_q(m, r);
    if (!q.is_plain() || q.mantissa() > kMaxCountedRing)
        throw DomainError("pole count: q(r) = " + q.str() + " exceeds the summable range");
    const auto kq = static_cast<std::int64_t>(std::floor(q.mantissa()));
    return kq < m.k0() + 1 ? -1 : kq;
}

} // namespace detail

/// n(r) = sum_{k=k0+1}^{floor q(r)} 2 n_k.
inline std::int64_t pole_count(const GrowthModel& m, double r) {
    const std::int64_t kq = detail::ring_limit(m, r);
    std::int64_t s = 0;
    for (std::int64_t k = m.k0() + 1; k <= kq; ++k) s += 2 * n_index(m, k);
    return s;
}

/// N(r) = int_0^r n(t)/t dt = sum_{p(k) <= r} 2 n_k log(r / p(k)).
inline double counting_N(const GrowthModel& m, double r) {
    const std::int64_t kq = detail::ring_limit(m, r);
    double s = 0.0;
    for (std::int64_t k = m.k0() + 1; k <= kq; ++k)
        s += 2.0 * static_cast<double>(n_index(m, k)) * std::log(r / p_of(m, static_cast<double>(k)));
    return s;
}

struct Asymptote {
    double log_integral;   // log(2 int_{r0}^{r} q'(s)^2 s ds); -inf below r0
    double log_comparator; // log(q(r) q'(r) r)
};

/// The integral is scaled by q'(r)^2 r so that only exp of non-positive numbers is taken.
inline Asymptote pole_count_asymptote(const GrowthModel& m, double r) {
    const double r0 = p_of(m, static_cast<double>(m.k0() + 1));
    auto phi = [&](double s) {
        const LogDepthMagnitude lqp = log_of_q_prime_at_log_radius(m, std::log(s));
        if (!lqp.is_plain()) throw DomainError("pole_count_asymptote: log q'(r) beyond double range");
        return 2.0 * lqp.mantissa() + std::log(s);
    };
    const LogDepthMagnitude lq = log_of(log_q(m, r));
    if (!lq.is_plain()) throw DomainError("pole_count_asymptote: log q(r) beyond double range");
    const double phi_r = phi(r);
    const double comparator = lq.mantissa() + 0.5 * (phi_r - std::log(r)) + std::log(r);
    if (r <= r0) return {-std::numeric_limits<double>::infinity(), comparator};
    const double J = adaptive_simpson([&](double s) { return std::exp(phi(s) - phi_r); }, r0, r, 1e-11);
    return {std::log(2.0) + phi_r + std::log(J), comparator};
}

struct CountReport {
    double r;
    std::int64_t exact_count;
    double asymptote_log;
    double ratio;
};

inline CountReport count_report(const GrowthModel& m, double r) {
    const std::int64_t c = pole_count(m, r);
    const Asymptote a = pole_count_asymptote(m, r);
    const double ratio = c == 0 ? 0.0 : std::exp(std::log(static_cast<double>(c)) - a.log_integral);
    return {r, c, a.log_integral, ratio};
}

inline void write_count_csv(std::ostream& os, const std::vector<CountReport>& rows) {
    os << "r,exact,asymptote_log,ratio\n";
    os.precision(17);
    for (const auto& row : rows) os << row.r << ',' << row.exact_count << ',' << row.asymptote_log << ',' << row.ratio << '\n';
}

/// Radii p(k + 1/2) for the given ring indices.
inline std::vector<double> half_ring_radii(const GrowthModel& m, const std::vector<std::int64_t>& ks) {
    std::vector<double> out;
    out.reserve(ks.size());
    for (auto k : ks) out.push_back(p_of(m, static_cast<double>(k) + 0.5));
    return out;
}

struct OrderEstimate {
    double slope;
    std::size_t used;
};

/// Least-squares slope of log^{n+1} N(r) against log r.
inline OrderEstimate order_estimate(const GrowthModel& m, const std::vector<double>& r_samples) {
    std::vector<double> x, y;
    for (double r : r_samples) {
        const double N = counting_N(m, r);
        if (!(N > 0.0)) continue;
        double v = N;
        for (int i = 0; i < m.n() && v > 0.0; ++i) v = std::log(v);
        if (!(v > 0.0) || !std::isfinite(v)) continue;
        x.push_back(std::log(r));
        y.push_back(std::log(v));
    }
    if (x.size() < 4) throw InsufficientRange("order_estimate: fewer than 4 usable radii");
    const double slope = least_squares_slope(x, y);
    if (std::isnan(slope)) throw InsufficientRange("order_estimate: radii do not spread");
    return {slope, x.size()};
}

} // namespace escape_gauge
