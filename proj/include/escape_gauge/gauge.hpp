#pragma once

// The gauge h(t) = t^2 (log^n(1/t))^gamma, its companion G(t) = h(sqrt t),
// and margin evaluators for the scaling, log-superadditivity and product
// inequalities it satisfies.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "escape_gauge/errors.hpp"
#include "escape_gauge/rng.hpp"
#include "escape_gauge/tower.hpp"

namespace escape_gauge {

// Slack on domain endpoints so that t = delta_n computed in doubles is admitted.
inline constexpr double kDomainSlack = 1e-12;

/// A positive real t held as u = log(1/t).  Values far below the double
/// range (1/exp^3(2) ~ e^-1618) stay exact in this form.
class SmallReal {
public:
    static SmallReal from_value(double t) {
        if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("SmallReal: value must be positive and finite");
        return SmallReal(-std::log(t));
    }
    static SmallReal from_log_inverse(double u) {
        if (!std::isfinite(u)) throw DomainError("SmallReal: log-inverse must be finite");
        return SmallReal(u);
    }

    double log_inverse() const { return u_; }
    double value() const { return std::exp(-u_); }

    SmallReal times(SmallReal o) const { return SmallReal(u_ + o.u_); }
    SmallReal scaled(double c) const { return SmallReal(u_ - std::log(c)); }
    SmallReal sqrt() const { return SmallReal(0.5 * u_); }
    SmallReal squared() const { return SmallReal(2.0 * u_); }

private:
    explicit SmallReal(double u) : u_(u) {}
    double u_;
};

/// Parameters (n, gamma) of the gauge; delta_n = 1/exp^n(gamma).
class GaugeSpec {
public:
    GaugeSpec(int n, double gamma) : n_(n), gamma_(gamma) {
        if (n < 1) throw DomainError("GaugeSpec: n must be >= 1");
        if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("GaugeSpec: gamma must be positive");
        inv_delta_ = iter_exp(n, gamma);
        // log(1/delta_n) = exp^{n-1}(gamma) must be a double for SmallReal domain points to exist.
        log_inv_delta_ = iter_exp(n - 1, gamma).to_double();
        if (!std::isfinite(log_inv_delta_)) throw DomainError("GaugeSpec: exp^(n-1)(gamma) exceeds double range");
    }

    int n() const { return n_; }
    double gamma() const { return gamma_; }
    /// exp^n(gamma) in tower form.
    const LogDepthMagnitude& inverse_delta() const { return inv_delta_; }
    /// delta_n as a double (0 when it underflows).
    double delta_n() const { return std::exp(-log_inv_delta_); }
    SmallReal delta() const { return SmallReal::from_log_inverse(log_inv_delta_); }

    bool in_domain(SmallReal t) const { return t.log_inverse() >= log_inv_delta_ * (1.0 - kDomainSlack); }
    bool in_concavity_domain(SmallReal t) const {
        return t.log_inverse() >= 2.0 * log_inv_delta_ * (1.0 - kDomainSlack);
    }

private:
    int n_;
    double gamma_;
    LogDepthMagnitude inv_delta_;
    double log_inv_delta_;
};

namespace detail {

// log^n(1/t) from u = log(1/t): log^{n-1}(u).
inline double gauge_inner(int n, double u) { return iter_log(n - 1, LogDepthMagnitude::plain(u)); }

} // namespace detail

/// log^n(1/t) for t in the gauge domain.
inline double gauge_log_term(const GaugeSpec& spec, SmallReal t) { return detail::gauge_inner(spec.n(), t.log_inverse()); }

/// log h(t); defined on (0, delta_n] including values below the double range.
inline double gauge_log_h(const GaugeSpec& spec, SmallReal t) {
    if (!spec.in_domain(t)) throw DomainError("gauge_h: t outside (0, delta_n]");
    return -2.0 * t.log_inverse() + spec.gamma() * std::log(gauge_log_term(spec, t));
}

/// h(t) = t^2 (log^n(1/t))^gamma.
inline double gauge_h(const GaugeSpec& spec, SmallReal t) {
    if (!spec.in_domain(t)) throw DomainError("gauge_h: t outside (0, delta_n]");
    const double tv = t.value();
    return tv * tv * std::pow(gauge_log_term(spec, t), spec.gamma());
}

inline double gauge_h(const GaugeSpec& spec, double t) {
    if (!(t > 0.0)) throw DomainError("gauge_h: t must be positive");
    return gauge_h(spec, SmallReal::from_value(t));
}

/// G(t) = h(sqrt t) = t (log^n(1/sqrt t))^gamma.
inline double gauge_G(const GaugeSpec& spec, double t) {
    if (!(t > 0.0)) throw DomainError("gauge_G: t must be positive");
    const SmallReal s = SmallReal::from_value(t);
    if (!spec.in_concavity_domain(s)) throw DomainError("gauge_G: t outside (0, delta_n^2]");
    return t * std::pow(detail::gauge_inner(spec.n(), 0.5 * s.log_inverse()), spec.gamma());
}

struct ConcavityMargin {
    double margin;  // 1 - (gamma/2) / prod_{i=1..n} log^i(1/sqrt t)
    double g_prime; // G'(t) = (log^n(1/sqrt t))^gamma * margin
};

inline ConcavityMargin gauge_concavity_margin(const GaugeSpec& spec, SmallReal t) {
    if (!spec.in_concavity_domain(t)) throw DomainError("gauge_concavity_margin: t outside (0, delta_n^2]");
    // log^i(1/sqrt t) = log^{i-1}(u/2)
    double v = 0.5 * t.log_inverse();
    double prod = 1.0;
    for (int i = 1; i <= spec.n(); ++i) {
        if (i > 1) v = std::log(v);
        prod *= v;
    }
    const double margin = 1.0 - 0.5 * spec.gamma() / prod;
    return {margin, std::pow(v, spec.gamma()) * margin};
}

inline ConcavityMargin gauge_concavity_margin(const GaugeSpec& spec, double t) {
    return gauge_concavity_margin(spec, SmallReal::from_value(t));
}

enum class GaugeLemma { Scaling, Superadditivity, Product };

inline const char* to_string(GaugeLemma l) {
    switch (l) {
    case GaugeLemma::Scaling: return "scaling";
    case GaugeLemma::Superadditivity: return "superadditivity";
    case GaugeLemma::Product: return "product";
    }
    return "?";
}

/// One inequality lhs <= rhs.  When log_scale is set, lhs and rhs are logs
/// and margin is log(rhs/lhs) with the common t^2 factor cancelled exactly.
struct LemmaMargin {
    GaugeLemma lemma;
    double lhs;
    double rhs;
    double margin;
    bool log_scale;
};

struct MarginReport {
    std::vector<LemmaMargin> entries;

    double min_margin(GaugeLemma lemma) const {
        double m = INFINITY;
        for (const auto& e : entries)
            if (e.lemma == lemma) m = std::min(m, e.margin);
        return m;
    }
};

namespace detail {

// h-values at or above this log are reported on the linear scale.
inline constexpr double kLinearLogFloor = -700.0;

} // namespace detail

/// h(ct) <= c^2 h(t) for c > 1 with ct still in the domain.
inline LemmaMargin scaling_margin(const GaugeSpec& spec, SmallReal t, double c) {
    if (!(c > 1.0)) throw DomainError("scaling lemma requires c > 1");
    const SmallReal ct = t.scaled(c);
    if (!spec.in_domain(t) || !spec.in_domain(ct)) throw DomainError("scaling lemma: t or ct outside (0, delta_n]");
    const double log_lhs = gauge_log_h(spec, ct);
    const double log_rhs = 2.0 * std::log(c) + gauge_log_h(spec, t);
    if (log_lhs > detail::kLinearLogFloor && log_rhs > detail::kLinearLogFloor) {
        const double lhs = gauge_h(spec, ct);
        const double rhs = c * c * gauge_h(spec, t);
        return {GaugeLemma::Scaling, lhs, rhs, rhs - lhs, false};
    }
    const double m = spec.gamma() * (std::log(gauge_log_term(spec, t)) - std::log(gauge_log_term(spec, ct)));
    return {GaugeLemma::Scaling, log_lhs, log_rhs, m, true};
}

inline double lemma_input_bound_log_inverse(int n) {
    // t_j <= 1/exp^n(2)  <=>  log(1/t_j) >= exp^{n-1}(2)
    return iter_exp(n - 1, 2.0).to_double();
}

inline void check_lemma_inputs(const GaugeSpec& spec, std::span<const SmallReal> ts, bool needs_h) {
    if (ts.empty()) throw DomainError("lemma inputs must be non-empty");
    const double umin = lemma_input_bound_log_inverse(spec.n());
    for (const auto& t : ts) {
        if (t.log_inverse() < umin * (1.0 - kDomainSlack))
            throw DomainError("lemma input exceeds 1/exp^n(2)");
        if (needs_h && !spec.in_domain(t)) throw DomainError("lemma input outside (0, delta_n]");
    }
}

/// log^n(1/(t_1...t_l)) <= prod log^n(1/t_j) for t_j <= 1/exp^n(2).
inline LemmaMargin superadditivity_margin(const GaugeSpec& spec, std::span<const SmallReal> ts) {
    check_lemma_inputs(spec, ts, false);
    double usum = 0.0, rhs = 1.0;
    for (const auto& t : ts) {
        usum += t.log_inverse();
        rhs *= detail::gauge_inner(spec.n(), t.log_inverse());
    }
    const double lhs = detail::gauge_inner(spec.n(), usum);
    return {GaugeLemma::Superadditivity, lhs, rhs, rhs - lhs, false};
}

/// h(t_1...t_l) <= prod h(t_j).
inline LemmaMargin product_margin(const GaugeSpec& spec, std::span<const SmallReal> ts) {
    check_lemma_inputs(spec, ts, true);
    double usum = 0.0, log_rhs = 0.0, log_terms = 0.0;
    for (const auto& t : ts) {
        usum += t.log_inverse();
        log_rhs += gauge_log_h(spec, t);
        log_terms += std::log(gauge_log_term(spec, t));
    }
    const SmallReal prod = SmallReal::from_log_inverse(usum);
    const double log_lhs = gauge_log_h(spec, prod);
    if (log_lhs > detail::kLinearLogFloor && log_rhs > detail::kLinearLogFloor) {
        double rhs = 1.0;
        for (const auto& t : ts) rhs *= gauge_h(spec, t);
        const double lhs = gauge_h(spec, prod);
        return {GaugeLemma::Product, lhs, rhs, rhs - lhs, false};
    }
    const double m = spec.gamma() * (log_terms - std::log(gauge_log_term(spec, prod)));
    return {GaugeLemma::Product, log_lhs, log_rhs, m, true};
}

/// All three inequalities for one input tuple; the scaling check runs on every t_j.
inline MarginReport gauge_inequality_margins(const GaugeSpec& spec, std::span<const SmallReal> ts, double c) {
    MarginReport r;
    for (const auto& t : ts) r.entries.push_back(scaling_margin(spec, t, c));
    r.entries.push_back(superadditivity_margin(spec, ts));
    r.entries.push_back(product_margin(spec, ts));
    return r;
}

/// Summary of a seeded randomized sweep of the gauge inequalities.
struct GaugeSuiteResult {
    int n;
    double gamma;
    std::uint64_t seed;
    std::size_t samples;
    double min_scaling = INFINITY;
    double min_superadditivity = INFINITY;
    double min_product = INFINITY;
    double min_concavity = INFINITY;
    std::size_t domain_errors = 0;

    bool passed(double tol) const {
        return domain_errors == 0 && min_scaling >= -tol && min_superadditivity >= -tol && min_product >= -tol &&
               min_concavity >= 0.0;
    }
};

/// Random tuples of length 1..6 drawn log-uniformly above the lemma bound,
/// plus one concavity sample per draw on (0, delta_n^2].
inline GaugeSuiteResult run_gauge_suite(const GaugeSpec& spec, std::size_t samples, std::uint64_t seed) {
    GaugeSuiteResult res{spec.n(), spec.gamma(), seed, samples};
    SplitMix64 rng(seed);
    const double u_lemma = lemma_input_bound_log_inverse(spec.n());
    const double u_delta = spec.delta().log_inverse();
    const double u_lo = std::max(u_lemma, u_delta);
    // log-uniform over about two and a half decades above the lower bound
    const double span = std::log(300.0);
    std::vector<SmallReal> ts;
    for (std::size_t s = 0; s < samples; ++s) {
        const int l = 1 + static_cast<int>(rng.below(6));
        ts.clear();
        for (int j = 0; j < l; ++j) ts.push_back(SmallReal::from_log_inverse(u_lo * std::exp(span * rng.uniform())));
        try {
            auto sa = superadditivity_margin(spec, ts);
            res.min_superadditivity = std::min(res.min_superadditivity, sa.margin);
            auto pr = product_margin(spec, ts);
            res.min_product = std::min(res.min_product, pr.margin);
            // largest admissible c keeps ct inside the domain; c itself must be a finite double
            const double room = std::min(ts[0].log_inverse() - u_delta, 700.0);
            if (room > 1e-9) {
                const double c = std::exp(room * (1e-6 + (1.0 - 1e-6) * rng.uniform()));
                if (c > 1.0) res.min_scaling = std::min(res.min_scaling, scaling_margin(spec, ts[0], c).margin);
            }
            const double uc = 2.0 * u_delta * std::exp(span * rng.uniform());
            res.min_concavity =
                std::min(res.min_concavity, gauge_concavity_margin(spec, SmallReal::from_log_inverse(uc)).margin);
        } catch (const DomainError&) {
            ++res.domain_errors;
        }
    }
    return res;
}

} // namespace escape_gauge
