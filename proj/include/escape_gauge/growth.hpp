#pragma once

// The growth scaffolding of the constructed function:
//   q(r) = exp^n(r^rho),  p(t) = (log^n t)^(1/rho) = q^{-1}(t),
//   n_k = floor(p(k)/p'(k)),  k0 = floor(exp^n(2)) + 1.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "escape_gauge/errors.hpp"
#include "escape_gauge/quadrature.hpp"
#include "escape_gauge/tower.hpp"

namespace escape_gauge {

class GrowthModel {
public:
    GrowthModel(double rho, int n) : rho_(rho), n_(n) {
        if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("GrowthModel: rho must be positive");
        if (n < 1) throw DomainError("GrowthModel: n must be >= 1");
        const LogDepthMagnitude start = iter_exp(n, 2.0);
        // k0 must be an exact 53-bit integer
        if (!start.is_plain() || start.mantissa() >= 0x1.0p52)
            throw DomainError("GrowthModel: floor(exp^n(2)) + 1 exceeds the integer range (n = " + std::to_string(n) +
                              ")");
        start_ = start.mantissa();
        k0_ = static_cast<std::int64_t>(std::floor(start_)) + 1;
    }

    double rho() const { return rho_; }
    int n() const { return n_; }
    std::int64_t k0() const { return k0_; }
    /// exp^n(2), the left end of the domain of p.
    double domain_start() const { return start_; }
    /// 2^(1/rho), the left end of the domain of q.
    double q_domain_start() const { return std::pow(2.0, 1.0 / rho_); }

private:
    double rho_;
    int n_;
    double start_;
    std::int64_t k0_;
};

namespace detail {

inline void check_p_domain(const GrowthModel& m, double t) {
    if (!(t >= m.domain_start() * (1.0 - 1e-15))) throw DomainError("p: t below exp^n(2)");
}

// log t, log^2 t, ..., log^n t
inline std::vector<double> log_chain(int n, double t) {
    std::vector<double> out(static_cast<std::size_t>(n));
    double v = t;
    for (int i = 0; i < n; ++i) {
        v = std::log(v);
        out[static_cast<std::size_t>(i)] = v;
    }
    return out;
}

} // namespace detail

inline double p_of(const GrowthModel& m, double t) {
    detail::check_p_domain(m, t);
    return std::pow(iter_log(m.n(), t), 1.0 / m.rho());
}

inline double p_of(const GrowthModel& m, const LogDepthMagnitude& t) {
    if (t.is_plain()) return p_of(m, t.mantissa());
    if (t < LogDepthMagnitude::plain(m.domain_start())) throw DomainError("p: t below exp^n(2)");
    return std::pow(iter_log(m.n(), t), 1.0 / m.rho());
}

/// p(t)/p'(t) = rho t log t ... log^n t.
inline double p_over_p_prime(const GrowthModel& m, double t) {
    detail::check_p_domain(m, t);
    double v = m.rho() * t;
    for (double l : detail::log_chain(m.n(), t)) v *= l;
    return v;
}

inline double p_prime(const GrowthModel& m, double t) { return p_of(m, t) / p_over_p_prime(m, t); }

/// d/dt of p/p'; increasing, so n_k is strictly increasing once it exceeds 1.
inline double p_over_p_prime_slope(const GrowthModel& m, double t) {
    detail::check_p_domain(m, t);
    const auto chain = detail::log_chain(m.n(), t);
    double full = 1.0;
    for (double l : chain) full *= l;
    double s = full;
    double suffix = 1.0; // L_{i+1} ... L_n
    for (int i = m.n(); i >= 1; --i) {
        s += suffix;
        suffix *= chain[static_cast<std::size_t>(i - 1)];
    }
    return m.rho() * s;
}

/// p(t + dt) - p(t) without cancellation.
inline double p_increment(const GrowthModel& m, double t, double dt) {
    detail::check_p_domain(m, t);
    const auto chain = detail::log_chain(m.n(), t);
    // d_i = log^i(t+dt) - log^i(t)
    double d = std::log1p(dt / t);
    for (int i = 1; i < m.n(); ++i) d = std::log1p(d / chain[static_cast<std::size_t>(i - 1)]);
    const double ln = chain.back();
    return p_of(m, t) * std::expm1(std::log1p(d / ln) / m.rho());
}

/// q(r) = exp^n(r^rho) for r given through log r.
inline LogDepthMagnitude log_q_at_log_radius(const GrowthModel& m, double log_r) {
    return iter_exp(m.n(), exp_of(LogDepthMagnitude::plain(m.rho() * log_r)));
}

inline void check_q_domain(const GrowthModel& m, double r) {
    if (!(r >= m.q_domain_start() * (1.0 - 1e-15))) throw DomainError("q: r below 2^(1/rho)");
}

/// q(r) in tower form.
inline LogDepthMagnitude log_q(const GrowthModel& m, double r) {
    check_q_domain(m, r);
    return log_q_at_log_radius(m, std::log(r));
}

/// log q'(r) = sum_{i=1..n} exp^{i-1}(r^rho) + log rho + (rho - 1) log r.
inline LogDepthMagnitude log_of_q_prime_at_log_radius(const GrowthModel& m, double log_r) {
    const LogDepthMagnitude base = exp_of(LogDepthMagnitude::plain(m.rho() * log_r));
    LogDepthMagnitude acc = base;
    LogDepthMagnitude e = base;
    for (int i = 2; i <= m.n(); ++i) {
        e = exp_of(e);
        acc = add(acc, e);
    }
    return add_plain(acc, std::log(m.rho()) + (m.rho() - 1.0) * log_r);
}

/// q'(r) in tower form.
inline LogDepthMagnitude log_q_prime(const GrowthModel& m, double r) {
    check_q_domain(m, r);
    return exp_of(log_of_q_prime_at_log_radius(m, std::log(r)));
}

/// n_k = floor(p(k)/p'(k)).
inline std::int64_t n_index(const GrowthModel& m, std::int64_t k) {
    if (k < m.k0()) throw DomainError("n_index: k below k0");
    return static_cast<std::int64_t>(std::floor(p_over_p_prime(m, static_cast<double>(k))));
}

/// c = (log 2)^(n+1) / 2.
inline double separation_constant(int n) { return 0.5 * std::pow(std::numbers::ln2, n + 1); }

struct SeparationMargin {
    bool outward; // l > k: (p(l)/p(k))^{n_k} >= exp(c min{k, l-k}); else (p(k)/p(l))^{n_k} >= exp(c(k-l))
    double lhs;   // n_k log of the ratio
    double rhs;
    double margin;
};

namespace detail {

// log(p(b)/p(a)) for a < b without cancellation
inline double log_p_ratio(const GrowthModel& m, double a, double b) {
    return std::log1p(p_increment(m, a, b - a) / p_of(m, a));
}

} // namespace detail

inline SeparationMargin separation_margin(const GrowthModel& m, std::int64_t k, double l) {
    if (k < m.k0() || l < static_cast<double>(m.k0())) throw DomainError("separation_margin: index below k0");
    const double kd = static_cast<double>(k);
    if (l == kd) throw DomainError("separation_margin: k == l");
    const double c = separation_constant(m.n());
    const double nk = static_cast<double>(n_index(m, k));
    if (l > kd) {
        const double lhs = nk * detail::log_p_ratio(m, kd, l);
        const double rhs = c * std::min(kd, l - kd);
        return {true, lhs, rhs, lhs - rhs};
    }
    const double lhs = nk * detail::log_p_ratio(m, l, kd);
    const double rhs = c * (kd - l);
    return {false, lhs, rhs, lhs - rhs};
}

struct PartialSum {
    double sum;
    double integral;
    double ratio;
};

/// sum_{k=k0+1}^{floor l} n_k against the integral of p/p' over [k0+1, l].
inline PartialSum partial_sum_nk(const GrowthModel& m, double l) {
    const std::int64_t lo = m.k0() + 1;
    const auto hi = static_cast<std::int64_t>(std::floor(l));
    if (hi < lo) throw DomainError("partial_sum_nk: floor(l) below k0+1");
    std::int64_t s = 0;
    for (std::int64_t k = lo; k <= hi; ++k) s += n_index(m, k);
    // t = e^x keeps the integrand slowly varying
    auto integrand = [&](double x) {
        const double t = std::exp(x);
        return p_over_p_prime(m, t) * t;
    };
    const double integral = adaptive_simpson(integrand, std::log(static_cast<double>(lo)), std::log(l), 1e-12);
    const double sum = static_cast<double>(s);
    const double ratio = integral > 0.0 ? sum / integral : std::numeric_limits<double>::infinity();
    return {sum, integral, ratio};
}

struct ForGrowthTerms {
    double q_over_r_qprime;    // q(r)/(r q'(r))
    double d_q_over_qprime;    // d/dr (q(r)/q'(r))
};

/// Both quantities that tend to 0, in closed form.
inline ForGrowthTerms forgrowth_terms(const GrowthModel& m, double r) {
    check_q_domain(m, r);
    const double rho = m.rho();
    const double log_r = std::log(r);
    const double base = std::pow(r, rho);
    // log E_i = E_{i-1}, E_0 = r^rho
    std::vector<double> e(static_cast<std::size_t>(m.n()));
    e[0] = base;
    for (int i = 1; i < m.n(); ++i) e[static_cast<std::size_t>(i)] = iter_exp(i, base).to_double();
    double log_prod = 0.0; // log(E_1 ... E_{n-1})
    for (int i = 1; i < m.n(); ++i) log_prod += e[static_cast<std::size_t>(i - 1)];
    const double q_over = std::exp(-log_prod - std::log(rho) - rho * log_r);
    if (m.n() == 1) return {q_over, (1.0 - rho) / (rho * base)};
    double d = 0.0;
    for (int j = 1; j <= m.n() - 2; ++j) {
        double s = 0.0; // log(E_{j+1} ... E_{n-1})
        for (int i = j + 1; i <= m.n() - 1; ++i) s += e[static_cast<std::size_t>(i - 1)];
        d -= std::exp(-s);
    }
    d -= std::exp(-log_prod) * (1.0 + (rho - 1.0) / (rho * base));
    return {q_over, d};
}

/// (p(t + 1/2) - p(t)) / p'(t); tends to 1/2.
inline double pm_ratio(const GrowthModel& m, double t) { return p_increment(m, t, 0.5) / p_prime(m, t); }

struct Threshold {
    bool found = false;
    double t0 = 0.0;
};

/// First point of a geometric grid on [exp^n(2), t_max] after which every grid
/// point satisfies pred.
template <class Pred>
Threshold grid_threshold(const GrowthModel& m, double t_max, int points, Pred pred) {
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double a = std::log(m.domain_start() * (1.0 + 1e-9)), b = std::log(t_max);
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
    Threshold th;
    for (int i = points - 1; i >= 0; --i) {
        if (!pred(grid, i)) break;
        th.found = true;
        th.t0 = grid[static_cast<std::size_t>(i)];
    }
    return th;
}

/// Threshold after which 0.45 <= pm_ratio <= 0.55 on the grid.
inline Threshold pm_threshold(const GrowthModel& m, double t_max = 1e12, int points = 400) {
    return grid_threshold(m, t_max, points, [&](const std::vector<double>& g, int i) {
        const double r = pm_ratio(m, g[static_cast<std::size_t>(i)]);
        return r >= 0.45 && r <= 0.55;
    });
}

/// Threshold after which p' is nonincreasing along the grid.
inline Threshold p_prime_monotone_threshold(const GrowthModel& m, double t_max = 1e12, int points = 400) {
    return grid_threshold(m, t_max, points, [&](const std::vector<double>& g, int i) {
        if (static_cast<std::size_t>(i) + 1 >= g.size()) return true;
        return p_prime(m, g[static_cast<std::size_t>(i) + 1]) <= p_prime(m, g[static_cast<std::size_t>(i)]);
    });
}

/// Smallest k >= k0 from which n_k >= k holds up to k_limit; -1 if none.
inline std::int64_t first_k_with_nk_at_least_k(const GrowthModel& m, std::int64_t k_limit) {
    std::int64_t first = -1;
    for (std::int64_t k = k_limit; k >= m.k0(); --k) {
        if (n_index(m, k) < k) break;
        first = k;
    }
    return first;
}

} // namespace escape_gauge
