#pragma once

// Inverse branches of f near its poles, diameters of composed branch images,
// the key series sum h(|b_j| / |a_j|^{1+1/M}) and the mass-distribution levels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "escape_gauge/errors.hpp"
#include "escape_gauge/fit.hpp"
#include "escape_gauge/gauge.hpp"
#include "escape_gauge/growth.hpp"
#include "escape_gauge/meromap.hpp"
#include "escape_gauge/tower.hpp"

namespace escape_gauge {

/// chi(z, w) = |z - w| / sqrt((1 + |z|^2)(1 + |w|^2)).
inline double chordal_distance(cplx z, cplx w) {
    return std::abs(z - w) / std::sqrt((1.0 + std::norm(z)) * (1.0 + std::norm(w)));
}

// ---------------------------------------------------------------------------
// constants

struct MassParams {
    double R0;
    double lambda;
    double delta;
    double A;
    int M;

    static constexpr double tau() { return 0.5 + 0.5 * std::numbers::pi; }
    double alpha() const { return 1.0 / (16.0 * (1.0 + delta) * 324.0 * 324.0 * tau() * tau()); }
    double B() const { return alpha() / (81.0 * 256.0); }
    /// A = 32 * (2^{1+1/M} * 12).
    static double default_A(int M) { return 32.0 * std::pow(2.0, 1.0 + 1.0 / M) * 12.0; }
    /// R0 = 4C + 4 + 1/lambda + 2/(delta lambda).
    static double admissible_R0(int n, double lambda, double delta) {
        return web_constant(n).bound() + 1.0 / lambda + 2.0 / (delta * lambda);
    }
    static MassParams defaults(int n, int M, double lambda = 0.25, double delta = 0.5) {
        return {admissible_R0(n, lambda, delta), lambda, delta, default_A(M), M};
    }

    double log_R(int l) const { return std::log(R0) + std::ldexp(1.0, l); }
    /// R_l = R0 exp(2^l); +inf once it leaves the double range.
    double R(int l) const { return R0 * std::exp(std::ldexp(1.0, l)); }

    void validate() const {
        if (!(R0 > 0.0) || !(lambda > 0.0) || !(delta > 0.0) || !(A > 0.0) || M < 1)
            throw DomainError("MassParams: R0, lambda, delta, A must be positive and M >= 1");
    }
};

// ---------------------------------------------------------------------------
// inverse branches

struct BranchOptions {
    int max_iter = 50;
    int max_halvings = 8;
    double rel_tol = 1e-9;
};

/// zeta_b = |z|^{1/M} e^{i (arg z + 2 pi b)/M}, arg in (-pi, pi].
inline cplx branch_root(cplx z, int M, int b) {
    return std::polar(std::pow(std::abs(z), 1.0 / M), (std::arg(z) + 2.0 * std::numbers::pi * b) / M);
}

/// The disk D(a, 2|b| R^{-1/M}) that contains the component U_j for |z| >= R.
inline double outer_disk_radius(const PoleDatum& pole, int M, double R) {
    return 2.0 * std::abs(pole.residue) * std::pow(R, -1.0 / M);
}

/// D(a, |b| / (4 R^{1/M})) contained in U_j.
inline double inner_disk_radius(const PoleDatum& pole, int M, double R) {
    return std::abs(pole.residue) / (4.0 * std::pow(R, 1.0 / M));
}

/// w near pole.location with f(w) = z; Newton on g(w) = zeta_b from the seed
/// u + nu/zeta_b (or a caller-supplied seed).
inline cplx inverse_branch(const FunctionParams& fp, const PoleDatum& pole, cplx z, int root_branch, double R0,
                           std::optional<cplx> seed = std::nullopt, const BranchOptions& opt = {}) {
    if (std::abs(z) < R0) throw DomainError("inverse_branch: |z| below R0");
    if (root_branch < 0 || root_branch >= fp.M()) throw DomainError("inverse_branch: root branch out of range");
    const cplx zeta = branch_root(z, fp.M(), root_branch);
    cplx w = seed.value_or(pole.location + pole.residue / zeta);
    const double neighborhood = 0.5 * std::numbers::pi * fp.ring(pole.k).p_prime;
    auto residual = [&](cplx x) { return std::abs(eval_g(fp, x).value - zeta); };
    double res = residual(w);
    for (int it = 0; it <= opt.max_iter; ++it) {
        const cplx fw = int_power(eval_g(fp, w).value, fp.M());
        if (std::abs(fw - z) <= opt.rel_tol * std::abs(z)) {
            if (std::abs(w - pole.location) > neighborhood)
                throw NoConvergence("inverse_branch: solution left the pole neighborhood");
            return w;
        }
        if (it == opt.max_iter) break;
        cplx g, dg;
        detail::ring_sums<true>(fp, w, g, dg);
        cplx step = (g - zeta) / dg;
        cplx next = w - step;
        double next_res = std::numeric_limits<double>::infinity();
        for (int h = 0; h <= opt.max_halvings; ++h) {
            try {
                next_res = residual(next);
            } catch (const PoleProximity&) {
                next_res = std::numeric_limits<double>::infinity();
            }
            if (next_res < res) break;
            step *= 0.5;
            next = w - step;
        }
        w = next;
        res = next_res;
        if (!std::isfinite(res)) break;
    }
    throw NoConvergence("inverse_branch: Newton did not converge in " + std::to_string(opt.max_iter) + " steps");
}

struct KoebeSample {
    cplx z;
    cplx w;
    double forward_residual; // |f(w) - z| / |z|
    double derivative;       // |g_j'(z)| = 1 / |f'(w)|
    double derivative_fd;    // central difference
    double bound;            // 12 |b| / (M |z|^{1+1/M})
    double margin() const { return bound - derivative; }
};

inline KoebeSample koebe_sample(const FunctionParams& fp, const PoleDatum& pole, cplx z, int root_branch, double R0) {
    const cplx w = inverse_branch(fp, pole, z, root_branch, R0);
    const auto [fw, dfw] = eval_f_with_derivative(fp, w);
    KoebeSample s;
    s.z = z;
    s.w = w;
    s.forward_residual = std::abs(fw - z) / std::abs(z);
    s.derivative = 1.0 / std::abs(dfw);
    // stay on one side of the branch cut
    const double h = 1e-6 * std::abs(z);
    const cplx dir = z / std::abs(z);
    const cplx wp = inverse_branch(fp, pole, z + h * dir, root_branch, R0, w);
    const cplx wm = inverse_branch(fp, pole, z - h * dir, root_branch, R0, w);
    s.derivative_fd = std::abs((wp - wm) / (2.0 * h));
    const double M = fp.M();
    s.bound = 12.0 * std::abs(pole.residue) / (M * std::pow(std::abs(z), 1.0 + 1.0 / M));
    return s;
}

// ---------------------------------------------------------------------------
// chains

struct CoverChain {
    std::vector<PoleDatum> levels;   // j_1, ..., j_l
    std::vector<double> radii;       // R_0, ..., R_{l-1}

    /// |a_{j_k}| >= R_{k-1} for every level.
    bool admissible() const {
        if (radii.size() < levels.size()) return false;
        for (std::size_t k = 0; k < levels.size(); ++k)
            if (std::abs(levels[k].location) < radii[k]) return false;
        return true;
    }
};

struct ChainDiameter {
    double measured;
    double measured_euclidean;
    double bound;
};

/// Chordal diameter of (g_{j_1} o ... o g_{j_{l-1}})(D_l) with D_l the outer disk of
/// the terminal pole, against (2^{1+1/M} 12)^{l-1} (32/R^{1/M}) prod |b|/|a|^{1+1/M}.
inline ChainDiameter chain_diameter(const FunctionParams& fp, const CoverChain& chain, int boundary_samples = 256) {
    if (chain.levels.empty()) throw DomainError("chain_diameter: empty chain");
    if (!chain.admissible()) throw DomainError("chain_diameter: chain not admissible");
    const std::size_t l = chain.levels.size();
    const double M = fp.M();
    const double R = chain.radii[l - 1];
    const PoleDatum& last = chain.levels.back();
    const double rad = outer_disk_radius(last, fp.M(), R);
    std::vector<cplx> pts(static_cast<std::size_t>(boundary_samples));
    for (int i = 0; i < boundary_samples; ++i)
        pts[static_cast<std::size_t>(i)] =
            last.location + std::polar(rad, 2.0 * std::numbers::pi * i / boundary_samples);
    for (std::size_t k = l - 1; k-- > 0;) {
        const PoleDatum& pole = chain.levels[k];
        std::optional<cplx> prev;
        for (auto& z : pts) {
            // continuation around the boundary keeps one branch
            const cplx w = inverse_branch(fp, pole, z, 0, chain.radii[k], prev);
            prev = w;
            z = w;
        }
    }
    ChainDiameter out{0.0, 0.0, 0.0};
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            out.measured = std::max(out.measured, chordal_distance(pts[a], pts[b]));
            out.measured_euclidean = std::max(out.measured_euclidean, std::abs(pts[a] - pts[b]));
        }
    double prod = 1.0;
    for (const auto& p : chain.levels) prod *= std::abs(p.residue) / std::pow(std::abs(p.location), 1.0 + 1.0 / M);
    out.bound = std::pow(std::pow(2.0, 1.0 + 1.0 / M) * 12.0, static_cast<double>(l - 1)) * (32.0 / std::pow(R, 1.0 / M)) *
                prod;
    return out;
}

// ---------------------------------------------------------------------------
// key series

struct KeyBin {
    int l;                    // 2^l <= |a_j| < 2^{l+1}
    std::int64_t count = 0;   // Card P_l (within the summation range)
    double S = 0.0;           // sum of h over admissible summands
    double sum_c = 0.0;       // sum of c_j = (|b_j| / |a_j|^{1+1/M})^2
    double c_bound = 0.0;     // 144 R^2 2^{-2l/M}
    double jensen_bound = std::numeric_limits<double>::quiet_NaN(); // Card G(sum_c / Card)
    double cum_sum = 0.0;
    bool complete = false;
};

struct KeyBlock {
    int i;                    // 2^i <= j < 2^{i+1}
    std::int64_t j_lo, j_hi;  // inclusive
    std::int64_t first_ring, last_ring;
    double S = 0.0;
    double cum_sum = 0.0;
    bool complete = false;
};

struct KeySeriesLedger {
    std::vector<KeyBin> bins;
    std::vector<KeyBlock> blocks;
    std::int64_t terms = 0;
    std::int64_t skipped = 0;   // leading summands above delta_n
    double total = 0.0;
    double R = 0.0;

    /// exp of the least-squares slope of log S over complete blocks that span
    /// more than one ring; NaN with fewer than two such blocks.
    double block_decay_factor() const;
    double bin_decay_factor() const;
};

namespace detail {

inline double geometric_factor(const std::vector<double>& x, const std::vector<double>& y) {
    return std::exp(least_squares_slope(x, y));
}

} // namespace detail

inline double KeySeriesLedger::block_decay_factor() const {
    std::vector<double> x, y;
    for (const auto& b : blocks)
        if (b.complete && b.first_ring != b.last_ring && b.S > 0.0) {
            x.push_back(b.i);
            y.push_back(std::log(b.S));
        }
    return detail::geometric_factor(x, y);
}

inline double KeySeriesLedger::bin_decay_factor() const {
    std::vector<double> x, y;
    for (const auto& b : bins)
        if (b.complete && b.S > 0.0) {
            x.push_back(b.l);
            y.push_back(std::log(b.S));
        }
    return detail::geometric_factor(x, y);
}

/// Sums over the first j_max poles in order of modulus.  Every pole on ring k
/// contributes the same summand 1/(n_k p(k)^{1/M}), so rings are aggregated.
inline KeySeriesLedger key_series(const GrowthModel& model, int M, const GaugeSpec& gauge, std::int64_t j_max, double R) {
    if (gauge.n() != model.n()) throw DomainError("key_series: gauge depth differs from the growth depth");
    if (j_max < 1) throw DomainError("key_series: j_max must be >= 1");
    KeySeriesLedger led;
    led.R = R;
    const double K = 144.0 * R * R;
    auto bin_for = [&](int l) -> KeyBin& {
        while (led.bins.empty() || led.bins.back().l < l) {
            KeyBin b;
            b.l = led.bins.empty() ? l : led.bins.back().l + 1;
            b.c_bound = K * std::pow(2.0, -2.0 * b.l / M);
            if (!led.bins.empty()) led.bins.back().complete = true;
            led.bins.push_back(b);
        }
        return led.bins.back();
    };
    auto block_for = [&](std::int64_t j, std::int64_t ring) -> KeyBlock& {
        const int i = static_cast<int>(std::floor(std::log2(static_cast<double>(j))));
        while (led.blocks.empty() || led.blocks.back().i < i) {
            KeyBlock b;
            b.i = led.blocks.empty() ? i : led.blocks.back().i + 1;
            b.j_lo = std::int64_t{1} << b.i;
            b.j_hi = (std::int64_t{1} << (b.i + 1)) - 1;
            b.first_ring = ring;
            b.last_ring = ring;
            led.blocks.push_back(b);
        }
        return led.blocks.back();
    };
    std::int64_t j = 1;
    double cum = 0.0;
    std::int64_t k = model.k0() + 1;
    bool ring_exhausted = true;
    for (; j <= j_max; ++k) {
        const double p = p_of(model, static_cast<double>(k));
        const std::int64_t nk = n_index(model, k);
        const double x = 1.0 / (static_cast<double>(nk) * std::pow(p, 1.0 / M));
        const double c = x * x;
        const SmallReal xs = SmallReal::from_value(x);
        const bool admissible = gauge.in_domain(xs);
        const double hx = admissible ? gauge_h(gauge, xs) : 0.0;
        const int l = static_cast<int>(std::floor(std::log2(p)));
        std::int64_t left = std::min<std::int64_t>(2 * nk, j_max - j + 1);
        ring_exhausted = left == 2 * nk;
        KeyBin& bin = bin_for(l);
        bin.count += left;
        bin.sum_c += static_cast<double>(left) * c;
        if (admissible) {
            bin.S += static_cast<double>(left) * hx;
        } else {
            led.skipped += left;
        }
        while (left > 0) {
            KeyBlock& blk = block_for(j, k);
            blk.last_ring = k;
            const std::int64_t take = std::min(left, blk.j_hi - j + 1);
            blk.S += static_cast<double>(take) * hx;
            cum += static_cast<double>(take) * hx;
            blk.cum_sum = cum;
            j += take;
            left -= take;
            blk.complete = (j > blk.j_hi);
        }
        bin.cum_sum = cum;
    }
    led.terms = j - 1;
    // the last bin is complete only if the next ring already lies beyond it
    if (!led.bins.empty())
        led.bins.back().complete =
            ring_exhausted && std::floor(std::log2(p_of(model, static_cast<double>(k)))) > led.bins.back().l;
    for (auto& b : led.bins) {
        if (b.count == 0) continue;
        const double mean_c = b.sum_c / static_cast<double>(b.count);
        if (gauge.in_concavity_domain(SmallReal::from_value(mean_c)))
            b.jensen_bound = static_cast<double>(b.count) * gauge_G(gauge, mean_c);
    }
    led.total = cum;
    return led;
}

// ---------------------------------------------------------------------------
// mass distribution levels

struct MassLevel {
    int l;
    LogDepthMagnitude log_inv_d;  // log(1/d_l)
    double log_delta;             // log Delta_l = log B - (2/M) log R_l
    double log_g_d;               // log g(d_l) = gamma log(log^n(1/d_l))
    double log_product;           // log(g(d_l) prod_{k<=l} Delta_k)
    double growth_ratio;          // log^n(1/d_l) / R_{l-1}^rho
};

/// d_l = prod_{k=1}^{l} A / (q'(R_{k-1}) R_{k-1}^{1+1/M}), kept as log(1/d_l).
inline std::vector<MassLevel> mass_sequence(const GrowthModel& model, const MassParams& mp, const GaugeSpec& gauge, int L) {
    mp.validate();
    if (gauge.n() != model.n()) throw DomainError("mass_sequence: gauge depth differs from the growth depth");
    if (L < 1 || L > 60) throw DomainError("mass_sequence: L must lie in [1, 60]");
    const double M = mp.M;
    std::vector<MassLevel> out;
    LogDepthMagnitude log_inv_d = LogDepthMagnitude::plain(0.0);
    double sum_log_delta = 0.0;
    for (int l = 1; l <= L; ++l) {
        const double log_r = mp.log_R(l - 1);
        if (log_r < std::log(model.q_domain_start())) throw DomainError("mass_sequence: R below the domain of q");
        const LogDepthMagnitude lqp = log_of_q_prime_at_log_radius(model, log_r);
        log_inv_d = add_plain(add(log_inv_d, lqp), (1.0 + 1.0 / M) * log_r - std::log(mp.A));
        if (l == 1 && log_inv_d < log_of(gauge.inverse_delta()))
            throw DomainError("mass_sequence: d_1 exceeds delta_n; R0 too small");
        MassLevel row;
        row.l = l;
        row.log_inv_d = log_inv_d;
        row.log_delta = std::log(mp.B()) - (2.0 / M) * mp.log_R(l);
        sum_log_delta += row.log_delta;
        // log(log^n(1/d)) = log^n(log(1/d))
        const double ll = iter_log(model.n(), log_inv_d);
        row.log_g_d = gauge.gamma() * ll;
        row.log_product = row.log_g_d + sum_log_delta;
        row.growth_ratio = std::exp(ll - model.rho() * log_r);
        out.push_back(row);
    }
    return out;
}

enum class Trend { Increasing, Decreasing, Mixed };

inline const char* to_string(Trend t) {
    switch (t) {
    case Trend::Increasing: return "increasing";
    case Trend::Decreasing: return "decreasing";
    case Trend::Mixed: return "mixed";
    }
    return "?";
}

/// Strict monotonicity of log_product over levels [lo, hi].
inline Trend product_trend(const std::vector<MassLevel>& rows, int lo, int hi) {
    bool inc = true, dec = true;
    for (const auto& r : rows) {
        if (r.l <= lo || r.l > hi) continue;
        const double prev = rows[static_cast<std::size_t>(r.l - 2)].log_product;
        if (!(r.log_product > prev)) inc = false;
        if (!(r.log_product < prev)) dec = false;
    }
    if (inc) return Trend::Increasing;
    if (dec) return Trend::Decreasing;
    return Trend::Mixed;
}

/// Sign of the last increment of log_product.
inline Trend eventual_trend(const std::vector<MassLevel>& rows) {
    if (rows.size() < 2) return Trend::Mixed;
    const double d = rows.back().log_product - rows[rows.size() - 2].log_product;
    return d > 0 ? Trend::Increasing : (d < 0 ? Trend::Decreasing : Trend::Mixed);
}

// ---------------------------------------------------------------------------
// densities

/// 1 + delta = area A(S) / area A_eps(S) = 3 / (4 (1-eps)^2 - (1+eps)^2).
inline double annulus_one_plus_delta(double eps) {
    if (!(eps > 0.0 && eps < 0.25)) throw DomainError("annulus: eps must lie in (0, 1/4)");
    return 3.0 / (4.0 * (1.0 - eps) * (1.0 - eps) - (1.0 + eps) * (1.0 + eps));
}

struct AnnulusDensity {
    double euclidean;
    double lower_bound;
    double one_plus_delta;
    std::int64_t disks;
};

/// Area of the inner disks D(a_j, |b_j| / (4 R^{1/M})) with a_j in A_eps(S), over area A(S).
inline AnnulusDensity annulus_density(const FunctionParams& fp, double S, double eps, double R) {
    const double opd = annulus_one_plus_delta(eps);
    const double lo = (1.0 + eps) * S, hi = 2.0 * (1.0 - eps) * S;
    const GrowthModel& model = fp.model();
    const double M = fp.M();
    double area = 0.0;
    std::int64_t disks = 0;
    for (std::int64_t k = model.k0() + 1;; ++k) {
        const double p = p_of(model, static_cast<double>(k));
        if (p >= hi) break;
        if (p <= lo) continue;
        const std::int64_t nk = n_index(model, k);
        const double r = (p / static_cast<double>(nk)) / (4.0 * std::pow(R, 1.0 / M));
        area += static_cast<double>(2 * nk) * std::numbers::pi * r * r;
        disks += 2 * nk;
    }
    if (disks == 0) throw DomainError("annulus_density: no ring meets A_eps(S)");
    const double tau = MassParams::tau();
    return {area / (3.0 * std::numbers::pi * S * S), 1.0 / (16.0 * opd * tau * tau * std::pow(R, 2.0 / M)), opd, disks};
}

struct SumBSquared {
    double sum;
    double bound; // 36 R^2 r^2
};

/// sum_{|a_j| <= r} |b_j|^2 = sum 2 p(k)^2 / n_k.
inline SumBSquared sum_b_squared(const GrowthModel& model, double r, double R) {
    double s = 0.0;
    for (std::int64_t k = model.k0() + 1;; ++k) {
        const double p = p_of(model, static_cast<double>(k));
        if (p > r) break;
        s += 2.0 * p * p / static_cast<double>(n_index(model, k));
    }
    return {s, 36.0 * R * R * r * r};
}

} // namespace escape_gauge
