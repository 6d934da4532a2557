#pragma once

// The meromorphic map
//   g(z) = 2 sum_{k > k0} p(k)^{n_k} z^{n_k} / (z^{2 n_k} - p(k)^{2 n_k}),   f = g^M,
// its poles and residues, the spider's web bound, and orbits.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "escape_gauge/errors.hpp"
#include "escape_gauge/growth.hpp"

namespace escape_gauge {

using cplx = std::complex<double>;

struct Ring {
    std::int64_t k;
    std::int64_t nk;
    double p;       // p(k), the ring radius
    double log_p;
    double p_prime; // p'(k)
};

// Pole proximity is measured in units of the local pole spacing pi p'(k).
inline constexpr double kPoleProximity = 1e-12;

// Ring terms with |x| < e^{kNegligibleLog} are not evaluated; their majorant
// joins the reported tail bound.
inline constexpr double kNegligibleLog = -50.0;

class FunctionParams {
public:
    /// The ring count is raised above k_max if needed so that 2^{1-n_{k_max+1}} < tail_policy / 4
    /// and n_k is strictly increasing beyond k_max.
    FunctionParams(GrowthModel model, int M, std::int64_t k_max, double tail_policy)
        : model_(model), M_(M), tail_policy_(tail_policy) {
        if (M < 1) throw DomainError("FunctionParams: M must be >= 1");
        if (!(tail_policy > 0.0)) throw DomainError("FunctionParams: tail policy must be positive");
        if (k_max < model.k0() + 1) throw DomainError("FunctionParams: k_max must be >= k0 + 1");
        std::int64_t k = k_max;
        while (std::ldexp(1.0, static_cast<int>(std::max<std::int64_t>(-1000, 1 - n_index(model, k + 1)))) >=
                   tail_policy / 4.0 ||
               p_over_p_prime_slope(model, static_cast<double>(k + 1)) < 1.0)
            ++k;
        k_max_ = k;
        rings_.reserve(static_cast<std::size_t>(k - model.k0()));
        for (std::int64_t j = model.k0() + 1; j <= k; ++j) {
            const double kd = static_cast<double>(j);
            const double p = p_of(model, kd);
            rings_.push_back({j, n_index(model, j), p, std::log(p), p_prime(model, kd)});
        }
        tail_bound_ = 4.0 * std::ldexp(1.0, static_cast<int>(std::max<std::int64_t>(-1000, 1 - n_index(model, k + 1))));
    }

    const GrowthModel& model() const { return model_; }
    int M() const { return M_; }
    std::int64_t k_max() const { return k_max_; }
    double tail_policy() const { return tail_policy_; }
    /// Bound on |g - g_truncated| valid for |z| <= p(k_max)/2.
    double tail_bound() const { return tail_bound_; }
    /// Largest modulus at which the truncated series is certified.
    double max_modulus() const { return 0.5 * rings_.back().p; }
    const std::vector<Ring>& rings() const { return rings_; }

    const Ring& ring(std::int64_t k) const {
        if (k <= model_.k0() || k > k_max_) throw DomainError("ring index outside [k0+1, k_max]");
        return rings_[static_cast<std::size_t>(k - model_.k0() - 1)];
    }

    FunctionParams with_k_max(std::int64_t k_max) const { return FunctionParams(model_, M_, k_max, tail_policy_); }

    /// Same function with enough rings that |z| <= radius is certified.
    FunctionParams covering(double radius) const {
        const LogDepthMagnitude q = log_q(model_, std::max(2.0 * radius, model_.q_domain_start()));
        if (!q.is_plain() || q.mantissa() > 5e7) throw DomainError("covering: radius needs too many rings");
        return with_k_max(std::max(k_max_, static_cast<std::int64_t>(std::ceil(q.mantissa())) + 1));
    }

private:
    GrowthModel model_;
    int M_;
    std::int64_t k_max_ = 0;
    double tail_policy_;
    double tail_bound_ = 0.0;
    std::vector<Ring> rings_;
};

struct PoleDatum {
    std::int64_t k;
    std::int64_t l;
    std::int64_t nk;
    cplx location;
    cplx residue;
    int multiplicity_f;
};

inline PoleDatum make_pole(const Ring& r, std::int64_t l, int M) {
    const double nk = static_cast<double>(r.nk);
    const double angle = std::numbers::pi * static_cast<double>(l) / nk;
    // e^{i pi l (1 - n_k)/n_k} = (-1)^l e^{i pi l / n_k}
    const double sign = (l % 2 == 0) ? 1.0 : -1.0;
    const cplx unit = std::polar(1.0, angle);
    return {r.k, l, r.nk, r.p * unit, sign * (r.p / nk) * unit, M};
}

/// All poles with k0+1 <= k <= k_max, ordered by modulus then angle.
inline std::vector<PoleDatum> poles_up_to(const FunctionParams& fp, std::int64_t k_max) {
    if (k_max < fp.model().k0() + 1) throw DomainError("poles_up_to: k_max must be >= k0 + 1");
    std::vector<PoleDatum> out;
    for (const Ring& r : fp.rings()) {
        if (r.k > k_max) break;
        for (std::int64_t l = 0; l < 2 * r.nk; ++l) out.push_back(make_pole(r, l, fp.M()));
    }
    if (k_max > fp.k_max()) {
        const FunctionParams wider = fp.with_k_max(k_max);
        for (const Ring& r : wider.rings()) {
            if (r.k <= fp.k_max()) continue;
            if (r.k > k_max) break;
            for (std::int64_t l = 0; l < 2 * r.nk; ++l) out.push_back(make_pole(r, l, fp.M()));
        }
    }
    return out;
}

inline void write_pole_csv(std::ostream& os, const std::vector<PoleDatum>& poles) {
    os << "k,l,re_u,im_u,re_nu,im_nu,n_k\n";
    os.precision(17);
    for (const auto& p : poles)
        os << p.k << ',' << p.l << ',' << p.location.real() << ',' << p.location.imag() << ',' << p.residue.real() << ','
           << p.residue.imag() << ',' << p.nk << '\n';
}

namespace detail {

// e^w - 1 without cancellation near w = 0
inline cplx cexpm1(cplx w) {
    const double a = w.real(), b = w.imag();
    const double s = std::sin(0.5 * b);
    return {std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b)};
}

struct PolarPoint {
    double log_r;
    double arg;
    bool negative_real;
};

inline PolarPoint polar_of(cplx z) {
    return {std::log(std::abs(z)), std::arg(z), z.imag() == 0.0 && z.real() < 0.0};
}

// n_k arg z reduced mod 2 pi with its cosine and sine; exact on the real axis
inline double ring_phase(const PolarPoint& pz, std::int64_t nk, double& c, double& s) {
    if (pz.arg == 0.0 || (pz.negative_real && nk % 2 == 0)) {
        c = 1.0;
        s = 0.0;
        return 0.0;
    }
    if (pz.negative_real) {
        c = -1.0;
        s = 0.0;
        return std::numbers::pi;
    }
    const double theta = std::remainder(static_cast<double>(nk) * pz.arg, 2.0 * std::numbers::pi);
    c = std::cos(theta);
    s = std::sin(theta);
    return theta;
}

inline void check_pole_proximity(const Ring& r, cplx z, const PolarPoint& pz) {
    const double tol = kPoleProximity * std::numbers::pi * r.p_prime;
    if (std::abs(std::exp(pz.log_r) - r.p) >= tol) return;
    const double nk = static_cast<double>(r.nk);
    auto l = static_cast<std::int64_t>(std::llround(pz.arg * nk / std::numbers::pi));
    l = ((l % (2 * r.nk)) + 2 * r.nk) % (2 * r.nk);
    const cplx u = r.p * std::polar(1.0, std::numbers::pi * static_cast<double>(l) / nk);
    if (std::abs(z - u) < tol)
        throw PoleProximity("z within " + std::to_string(tol) + " of pole (k=" + std::to_string(r.k) +
                            ", l=" + std::to_string(l) + ")");
}

// One ring term w/(w^2-1), w = (z/p)^{n_k}, through x = w (|w| <= 1) or x = 1/w:
// the term is -x/(1-x^2) or x/(1-x^2) and its z-derivative -(n_k/z) x(1+x^2)/(1-x^2)^2.
struct RingTerm {
    cplx value;
    cplx x;
    cplx one_minus_x2;
};

inline RingTerm ring_term_at(const Ring& r, const PolarPoint& pz, double L) {
    const double mag = -std::abs(L);
    double c, s;
    const double theta = ring_phase(pz, r.nk, c, s);
    const double phase_sign = (L <= 0.0) ? 1.0 : -1.0;
    const double sgn = (L <= 0.0) ? -1.0 : 1.0;
    const double ex = std::exp(mag);
    const cplx x(ex * c, phase_sign * ex * s);
    // 1 - x^2 = -(e^{2 log x} - 1)
    const cplx one_minus_x2 =
        (s == 0.0) ? cplx(-std::expm1(2.0 * mag), 0.0) : -cexpm1(cplx(2.0 * mag, 2.0 * phase_sign * theta));
    return {sgn * x / one_minus_x2, x, one_minus_x2};
}

// Sums of ring terms and of their derivatives; returns the majorant of the skipped terms of g.
template <bool WithDerivative>
inline double ring_sums(const FunctionParams& fp, cplx z, cplx& value, cplx& derivative) {
    value = 0.0;
    derivative = 0.0;
    if (z == cplx(0.0, 0.0)) return 0.0;
    if (std::abs(z) > fp.max_modulus())
        throw TruncationUnsafe("|z| = " + std::to_string(std::abs(z)) + " exceeds p(k_max)/2 = " +
                               std::to_string(fp.max_modulus()));
    const PolarPoint pz = polar_of(z);
    double skipped = 0.0;
    for (const Ring& r : fp.rings()) {
        const double nk = static_cast<double>(r.nk);
        const double L = nk * (pz.log_r - r.log_p);
        if (-std::abs(L) < kNegligibleLog) {
            const double ex = std::exp(-std::abs(L));
            skipped += ex / (1.0 - ex * ex);
            continue;
        }
        check_pole_proximity(r, z, pz);
        const RingTerm t = ring_term_at(r, pz, L);
        value += t.value;
        if constexpr (WithDerivative) {
            derivative += -(nk / z) * t.x * (1.0 + t.x * t.x) / (t.one_minus_x2 * t.one_minus_x2);
        }
    }
    value *= 2.0;
    derivative *= 2.0;
    return 2.0 * skipped;
}

} // namespace detail

/// p(k)^{n_k} z^{n_k} / (z^{2 n_k} - p(k)^{2 n_k}) for one ring.
inline cplx ring_term(const Ring& r, cplx z) {
    if (z == cplx(0.0, 0.0)) return 0.0;
    const detail::PolarPoint pz = detail::polar_of(z);
    detail::check_pole_proximity(r, z, pz);
    return detail::ring_term_at(r, pz, static_cast<double>(r.nk) * (pz.log_r - r.log_p)).value;
}

struct GValue {
    cplx value;
    double tail_bound;
};

/// Truncated g(z) with a bound on the discarded tail.
inline GValue eval_g(const FunctionParams& fp, cplx z) {
    cplx v, d;
    const double skipped = detail::ring_sums<false>(fp, z, v, d);
    return {v, fp.tail_bound() + skipped};
}

inline cplx eval_g_prime(const FunctionParams& fp, cplx z) {
    cplx v, d;
    detail::ring_sums<true>(fp, z, v, d);
    return d;
}

inline cplx int_power(cplx w, int M) {
    cplx out(1.0, 0.0);
    cplx base = w;
    for (int e = M; e > 0; e >>= 1) {
        if (e & 1) out *= base;
        base *= base;
    }
    return out;
}

struct FValue {
    cplx value;
    double tail_bound; // bound on |f - f_truncated|
};

/// f = g^M; the tail bound is (|g| + e)^M - |g|^M.
inline FValue eval_f(const FunctionParams& fp, cplx z) {
    const GValue g = eval_g(fp, z);
    const double a = std::abs(g.value);
    const double e = g.tail_bound;
    const double bound = std::pow(a + e, fp.M()) - std::pow(a, fp.M());
    return {int_power(g.value, fp.M()), bound};
}

/// f and f' together.
inline std::pair<cplx, cplx> eval_f_with_derivative(const FunctionParams& fp, cplx z) {
    cplx g, dg;
    detail::ring_sums<true>(fp, z, g, dg);
    const cplx gm1 = int_power(g, fp.M() - 1);
    return {gm1 * g, static_cast<double>(fp.M()) * gm1 * dg};
}

/// Circle average of (z - u) g(z) at the given radius; isolates the residue.
inline cplx residue_circle_average(const FunctionParams& fp, const PoleDatum& pole, double radius, int samples = 64) {
    cplx acc = 0.0;
    for (int j = 0; j < samples; ++j) {
        const cplx dz = std::polar(radius, 2.0 * std::numbers::pi * (j + 0.5) / samples);
        acc += dz * eval_g(fp, pole.location + dz).value;
    }
    return acc / static_cast<double>(samples);
}

// ---------------------------------------------------------------------------
// spider's web

struct WebSpec {
    std::int64_t m_lo;
    std::int64_t m_hi;
    int samples_per_circle = 1024;
    int samples_per_segment = 16;
};

struct WebConstant {
    double c; // (log 2)^{n+1} / 2
    double C; // sum 1/(e^{ck}-1) + sum 1/(e^{c(j+1/2)}-1)
    double bound() const { return 4.0 * C + 4.0; }
};

/// C summed until the geometric remainder is below abs_tol.
inline WebConstant web_constant(int n, double abs_tol = 1e-10) {
    const double c = separation_constant(n);
    const double ratio = std::exp(-c); // term_{j+1} <= e^{-c} term_j
    auto series = [&](double shift) {
        double s = 0.0;
        for (int j = 0;; ++j) {
            const double term = 1.0 / std::expm1(c * (j + shift));
            s += term;
            if (term * ratio / (1.0 - ratio) < 0.5 * abs_tol) break;
        }
        return s;
    };
    return {c, series(1.0) + series(0.5)};
}

struct WebReport {
    double sup_sampled = 0.0;
    cplx argmax{};
    double theoretical_bound = 0.0;
    double tail_allowance = 0.0;
    WebConstant constant{};
    std::size_t samples = 0;
    double lambda_empirical = std::numeric_limits<double>::infinity();
    bool within_bound() const { return sup_sampled <= theoretical_bound + tail_allowance; }
};

/// Points of W on ring m: the circle |z| = p(m + 1/2) and the 2 n_m rays between poles.
inline std::vector<cplx> web_points(const FunctionParams& fp, std::int64_t m, const WebSpec& spec) {
    const GrowthModel& g = fp.model();
    const double md = static_cast<double>(m);
    const double outer = p_of(g, md + 0.5), inner = p_of(g, md - 0.5);
    const std::int64_t nm = n_index(g, m);
    std::vector<cplx> pts;
    pts.reserve(static_cast<std::size_t>(spec.samples_per_circle + 2 * nm * spec.samples_per_segment));
    for (int j = 0; j < spec.samples_per_circle; ++j)
        pts.push_back(std::polar(outer, 2.0 * std::numbers::pi * j / spec.samples_per_circle));
    for (std::int64_t eta = 1; eta <= 2 * nm; ++eta) {
        const double angle = std::numbers::pi * (2.0 * static_cast<double>(eta) - 1.0) / (2.0 * static_cast<double>(nm));
        for (int i = 0; i < spec.samples_per_segment; ++i) {
            const double r = inner + (outer - inner) * i / std::max(1, spec.samples_per_segment - 1);
            pts.push_back(std::polar(r, angle));
        }
    }
    return pts;
}

/// min(p(m+1/2)-p(m), p(m)-p(m-1/2), p(m) sin(pi/(2 n_m))) / (2 p'(m)).
inline double web_lambda(const GrowthModel& g, std::int64_t m) {
    const double md = static_cast<double>(m);
    const double pm = p_of(g, md);
    const double d = std::min({p_increment(g, md, 0.5), p_increment(g, md - 0.5, 0.5),
                               pm * std::sin(std::numbers::pi / (2.0 * static_cast<double>(n_index(g, m))))});
    return d / (2.0 * p_prime(g, md));
}

inline WebReport web_sup(const FunctionParams& fp, const WebSpec& spec) {
    const GrowthModel& g = fp.model();
    if (spec.m_lo < g.k0() + 1 || spec.m_hi > fp.k_max() - 1 || spec.m_lo > spec.m_hi)
        throw DomainError("web_sup: rings must lie in [k0+1, k_max-1]");
    WebReport rep;
    rep.constant = web_constant(g.n());
    rep.theoretical_bound = rep.constant.bound();
    rep.tail_allowance = fp.tail_bound();
    for (std::int64_t m = spec.m_lo; m <= spec.m_hi; ++m) {
        rep.lambda_empirical = std::min(rep.lambda_empirical, web_lambda(g, m));
        for (const cplx z : web_points(fp, m, spec)) {
            const double a = std::abs(eval_g(fp, z).value);
            ++rep.samples;
            if (a > rep.sup_sampled) {
                rep.sup_sampled = a;
                rep.argmax = z;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// orbits

enum class OrbitStatus { Escaped, BoundedAfter, HitPole, TruncationUnsafe };

inline const char* to_string(OrbitStatus s) {
    switch (s) {
    case OrbitStatus::Escaped: return "escaped";
    case OrbitStatus::BoundedAfter: return "bounded_after";
    case OrbitStatus::HitPole: return "hit_pole";
    case OrbitStatus::TruncationUnsafe: return "truncation_unsafe";
    }
    return "?";
}

struct OrbitRecord {
    cplx start;
    std::vector<cplx> iterates;
    OrbitStatus status = OrbitStatus::BoundedAfter;
    int step = 0;             // step of the status event (max_iter for bounded_after)
    std::size_t radius_index = 0;

    /// Poles are prepoles of infinity: a hit counts as escape at the next step.
    bool escapes() const { return status == OrbitStatus::Escaped || status == OrbitStatus::HitPole; }
    int escape_step() const { return status == OrbitStatus::HitPole ? step + 1 : step; }
};

/// Iterates f from z0.  The level radius at step s is radii[min(s, last)].
inline OrbitRecord orbit(const FunctionParams& fp, cplx z0, const std::vector<double>& radii, int max_iter) {
    if (radii.empty()) throw DomainError("orbit: empty radius schedule");
    if (max_iter < 1) throw DomainError("orbit: max_iter must be >= 1");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (radii[i] < radii[i - 1]) throw DomainError("orbit: radii must be nondecreasing");
    OrbitRecord rec;
    rec.start = z0;
    rec.iterates.push_back(z0);
    auto level = [&](int s) { return std::min<std::size_t>(static_cast<std::size_t>(s), radii.size() - 1); };
    double pending_tail = 0.0; // uncertainty of the current iterate's modulus
    cplx z = z0;
    for (int s = 0;; ++s) {
        const std::size_t li = level(s);
        const double R = radii[li];
        const double az = std::abs(z);
        if (pending_tail > 0.0 && std::abs(az - R) <= pending_tail) {
            rec.status = OrbitStatus::TruncationUnsafe;
            rec.step = s;
            return rec;
        }
        if (az > R) {
            rec.status = OrbitStatus::Escaped;
            rec.step = s;
            rec.radius_index = li;
            return rec;
        }
        if (s == max_iter) break;
        FValue fv;
        try {
            fv = eval_f(fp, z);
        } catch (const PoleProximity&) {
            rec.status = OrbitStatus::HitPole;
            rec.step = s;
            return rec;
        } catch (const TruncationUnsafe&) {
            rec.status = OrbitStatus::TruncationUnsafe;
            rec.step = s;
            return rec;
        }
        z = fv.value;
        pending_tail = fv.tail_bound;
        rec.iterates.push_back(z);
    }
    rec.status = OrbitStatus::BoundedAfter;
    rec.step = max_iter;
    return rec;
}

} // namespace escape_gauge
