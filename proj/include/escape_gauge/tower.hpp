#pragma once

// Extended-range positive reals of the form exp(exp(...exp(x))) and the
// iterated exponential / logarithm used by the growth and gauge code.

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>
#include <string>

#include "escape_gauge/errors.hpp"

namespace escape_gauge {

// A mantissa above this value is pushed one level up the tower.
inline constexpr double kTowerThreshold = 700.0;

/// exp^depth(mantissa).
///
/// Canonical form: depth 0 holds every value up to exp(700); depth d >= 1
/// always has mantissa > 700.  With that rule the ordering of canonical
/// values is lexicographic in (depth, mantissa).
class LogDepthMagnitude {
public:
    constexpr LogDepthMagnitude() = default;

    static LogDepthMagnitude plain(double x) { return tower(0, x); }

    static LogDepthMagnitude tower(int depth, double mantissa) {
        if (depth < 0) throw DomainError("tower depth must be non-negative");
        if (!std::isfinite(mantissa)) throw DomainError("tower mantissa must be finite");
        while (depth > 0 && mantissa <= kTowerThreshold) {
            mantissa = std::exp(mantissa);
            --depth;
        }
        if (depth == 0 && mantissa > 0.0 && std::log(mantissa) > kTowerThreshold) {
            mantissa = std::log(mantissa);
            depth = 1;
        }
        LogDepthMagnitude v;
        v.depth_ = depth;
        v.mantissa_ = mantissa;
        return v;
    }

    int depth() const { return depth_; }
    double mantissa() const { return mantissa_; }
    bool is_plain() const { return depth_ == 0; }

    /// Value as a double; +inf when it does not fit.
    double to_double() const {
        if (depth_ == 0) return mantissa_;
        if (depth_ == 1) return std::exp(mantissa_);
        return std::numeric_limits<double>::infinity();
    }

    friend std::partial_ordering operator<=>(const LogDepthMagnitude& a, const LogDepthMagnitude& b) {
        if (a.depth_ != b.depth_) return a.depth_ <=> b.depth_;
        return a.mantissa_ <=> b.mantissa_;
    }
    friend bool operator==(const LogDepthMagnitude& a, const LogDepthMagnitude& b) {
        return a.depth_ == b.depth_ && a.mantissa_ == b.mantissa_;
    }

    std::string str() const {
        if (depth_ == 0) return std::to_string(mantissa_);
        return "exp^" + std::to_string(depth_) + "(" + std::to_string(mantissa_) + ")";
    }

private:
    int depth_ = 0;
    double mantissa_ = 0.0;
};

inline std::ostream& operator<<(std::ostream& os, const LogDepthMagnitude& v) { return os << v.str(); }

inline LogDepthMagnitude exp_of(const LogDepthMagnitude& v) {
    if (v.depth() == 0) {
        if (v.mantissa() <= kTowerThreshold) return LogDepthMagnitude::plain(std::exp(v.mantissa()));
        return LogDepthMagnitude::tower(1, v.mantissa());
    }
    return LogDepthMagnitude::tower(v.depth() + 1, v.mantissa());
}

inline LogDepthMagnitude log_of(const LogDepthMagnitude& v) {
    if (v.depth() == 0) {
        if (!(v.mantissa() > 0.0)) throw DomainError("log of non-positive value " + std::to_string(v.mantissa()));
        return LogDepthMagnitude::plain(std::log(v.mantissa()));
    }
    return LogDepthMagnitude::tower(v.depth() - 1, v.mantissa());
}

/// exp^n(x); exact identity for n == 0.
inline LogDepthMagnitude iter_exp(int n, const LogDepthMagnitude& x) {
    if (n < 0) throw DomainError("iter_exp: negative iteration count");
    LogDepthMagnitude v = x;
    for (int i = 0; i < n; ++i) v = exp_of(v);
    return v;
}

inline LogDepthMagnitude iter_exp(int n, double x) { return iter_exp(n, LogDepthMagnitude::plain(x)); }

/// log^n(v) kept in tower form.  Every argument handed to log must be > 0.
inline LogDepthMagnitude iter_log_tower(int n, const LogDepthMagnitude& v) {
    if (n < 0) throw DomainError("iter_log: negative iteration count");
    LogDepthMagnitude r = v;
    for (int i = 0; i < n; ++i) r = log_of(r);
    return r;
}

/// log^n(v) as a plain real (+inf if it still exceeds double range).
inline double iter_log(int n, const LogDepthMagnitude& v) { return iter_log_tower(n, v).to_double(); }

inline double iter_log(int n, double x) { return iter_log(n, LogDepthMagnitude::plain(x)); }

/// a + x for a signed plain x.  The result must stay positive when a is a tower.
inline LogDepthMagnitude add_plain(const LogDepthMagnitude& a, double x) {
    if (a.depth() == 0) {
        const double s = a.mantissa() + x;
        if (std::isfinite(s)) return LogDepthMagnitude::plain(s);
        // both near DBL_MAX
        const double big = std::max(a.mantissa(), x), small = std::min(a.mantissa(), x);
        return LogDepthMagnitude::tower(1, std::log(big) + std::log1p(small / big));
    }
    if (a.depth() == 1) {
        const double rel = x * std::exp(-a.mantissa());
        if (rel <= -1.0) throw DomainError("add_plain: result not positive");
        return LogDepthMagnitude::tower(1, a.mantissa() + std::log1p(rel));
    }
    return a; // below double resolution
}

/// a + b for non-negative a, b.
inline LogDepthMagnitude add(const LogDepthMagnitude& a, const LogDepthMagnitude& b) {
    const auto& big = (a >= b) ? a : b;
    const auto& small = (a >= b) ? b : a;
    if (big.depth() == 0) return add_plain(big, small.mantissa());
    if (small.depth() == 0) return add_plain(big, small.mantissa());
    if (big.depth() == 1) {
        // both depth 1: exp(m1) + exp(m2)
        return LogDepthMagnitude::tower(1, big.mantissa() + std::log1p(std::exp(small.mantissa() - big.mantissa())));
    }
    if (big.depth() == 2 && small.depth() == 2) {
        // exp(exp(m1)) + exp(exp(m2)) = exp(exp(m1) + log1p(exp(exp(m2) - exp(m1))))
        const double d = std::exp(big.mantissa()) * std::expm1(small.mantissa() - big.mantissa());
        const double corr = std::log1p(std::exp(d));
        return exp_of(add_plain(LogDepthMagnitude::tower(1, big.mantissa()), corr));
    }
    return big;
}

/// c * a for c > 0.
inline LogDepthMagnitude scale(const LogDepthMagnitude& a, double c) {
    if (!(c > 0.0)) throw DomainError("scale: factor must be positive");
    if (a.depth() == 0) {
        const double s = a.mantissa() * c;
        if (std::isfinite(s)) return LogDepthMagnitude::plain(s);
        return LogDepthMagnitude::tower(1, std::log(a.mantissa()) + std::log(c));
    }
    return exp_of(add_plain(log_of(a), std::log(c)));
}

} // namespace escape_gauge
