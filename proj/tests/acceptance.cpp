// Acceptance harness: one PASS/FAIL line per criterion.  Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "escape_gauge/escape_gauge.hpp"
#include "escape_gauge_tools/report.hpp"

using namespace escape_gauge;
using namespace escape_gauge::tools;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Outcome gauge_suite() {
    const auto t0 = Clock::now();
    bool ok = true;
    double worst = INFINITY, worst_concavity = INFINITY;
    std::size_t errors = 0;
    for (int n : {1, 2, 3})
        for (double gamma : {0.5, 1.0, 2.0}) {
            const GaugeSuiteResult r = run_gauge_suite(GaugeSpec(n, gamma), 10000, 20240601u + n);
            ok &= r.passed(1e-12);
            worst = std::min({worst, r.min_scaling, r.min_superadditivity, r.min_product});
            worst_concavity = std::min(worst_concavity, r.min_concavity);
            errors += r.domain_errors;
        }
    const double secs = seconds_since(t0);
    return {ok && secs < 10.0,
            fmt("min margin %.3g, min concavity %.3g, domain errors %zu, %.2f s", worst, worst_concavity, errors, secs)};
}

Outcome separation_grid() {
    const auto t0 = Clock::now();
    double worst = INFINITY;
    std::size_t pairs = 0;
    for (int n : {1, 2})
        for (double rho : {0.5, 1.0, 2.0}) {
            const GrowthModel m(rho, n);
            const std::int64_t lo = m.k0() + 1, hi = m.k0() + 200;
            for (std::int64_t k = lo; k <= hi; ++k)
                for (std::int64_t l = lo; l <= hi; ++l) {
                    if (k == l) continue;
                    worst = std::min(worst, separation_margin(m, k, static_cast<double>(l)).margin);
                    ++pairs;
                }
        }
    const double secs = seconds_since(t0);
    return {worst >= -1e-12 && secs < 10.0, fmt("%zu pairs, min margin %.4g, %.2f s", pairs, worst, secs)};
}

Outcome residues() {
    const auto t0 = Clock::now();
    const GrowthModel m(1.0, 1);
    const FunctionParams fp = FunctionParams(m, 1, 20, 1e-12).covering(p_of(m, 20.5));
    double worst = 0.0;
    std::size_t count = 0;
    for (const auto& pole : poles_up_to(fp, 20)) {
        const double radius = 1e-3 * std::numbers::pi * fp.ring(pole.k).p_prime;
        const cplx avg = residue_circle_average(fp, pole, radius);
        worst = std::max(worst, std::abs(avg - pole.residue) / std::abs(pole.residue));
        ++count;
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && secs < 60.0, fmt("%zu poles, worst relative error %.3g, %.2f s", count, worst, secs)};
}

// The second configuration keeps few rings so the tail bound is far from zero.
Outcome tail_soundness() {
    struct Config {
        double rho;
        double tail;
        double radius;
    };
    std::string detail;
    std::size_t violations = 0;
    SplitMix64 rng(4);
    for (const Config c : {Config{1.0, 1e-12, 3.0}, Config{0.25, 1e-2, 0.0}}) {
        const GrowthModel m(c.rho, 1);
        FunctionParams fp(m, 1, m.k0() + 1, c.tail);
        if (c.radius > 0.0) fp = fp.covering(c.radius);
        const FunctionParams wide = fp.with_k_max(fp.k_max() + 5);
        double worst_ratio = 0.0;
        for (int i = 0; i < 200;) {
            const cplx z = std::polar(fp.max_modulus() * std::sqrt(rng.uniform()),
                                      rng.uniform(-std::numbers::pi, std::numbers::pi));
            try {
                const GValue a = eval_g(fp, z), b = eval_g(wide, z);
                const double diff = std::abs(a.value - b.value);
                if (diff > a.tail_bound) ++violations;
                worst_ratio = std::max(worst_ratio, diff / a.tail_bound);
                ++i;
            } catch (const PoleProximity&) {
            }
        }
        detail += fmt("%srho %g: k_max %lld, bound %.3g, worst diff/bound %.3g", detail.empty() ? "" : "; ", c.rho,
                      static_cast<long long>(fp.k_max()), fp.tail_bound(), worst_ratio);
    }
    return {violations == 0, detail + fmt(", violations %zu", violations)};
}

Outcome web_bound() {
    const GrowthModel m(1.0, 1);
    const WebSpec spec{m.k0() + 2, m.k0() + 8, 1024, 16};
    const FunctionParams fp = FunctionParams(m, 1, m.k0() + 1, 1e-12).covering(p_of(m, static_cast<double>(spec.m_hi) + 0.5));
    const WebReport w = web_sup(fp, spec);
    const WebConstant exact = web_constant(1, 1e-10);
    const std::size_t rings = static_cast<std::size_t>(spec.m_hi - spec.m_lo + 1);
    const bool enough = w.samples >= 1000 * rings;
    return {w.within_bound() && enough,
            fmt("sup %.4g <= 4C+4 = %.6f + %.2g (C = %.10f), %zu samples on %zu rings", w.sup_sampled,
                w.theoretical_bound, w.tail_allowance, exact.C, w.samples, rings)};
}

Outcome inverse_branches() {
    const GrowthModel m(1.0, 1);
    const MassParams mp = MassParams::defaults(1, 1);
    const FunctionParams fp = FunctionParams(m, 1, m.k0() + 1, 1e-12).covering(p_of(m, m.k0() + 6.5));
    SplitMix64 rng(6);
    std::size_t samples = 0, failures = 0;
    double worst_residual = 0.0, worst_koebe = INFINITY;
    for (std::int64_t k = m.k0() + 2; k <= m.k0() + 6; ++k) {
        const Ring& ring = fp.ring(k);
        for (int i = 0; i < 100; ++i) {
            const auto pole = make_pole(ring, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * ring.nk))), 1);
            const cplx z = std::polar(mp.R0 * rng.uniform(1.0, 10.0), rng.uniform(-std::numbers::pi, std::numbers::pi));
            ++samples;
            try {
                const KoebeSample s = koebe_sample(fp, pole, z, 0, mp.R0);
                worst_residual = std::max(worst_residual, s.forward_residual);
                worst_koebe = std::min(worst_koebe, s.margin() / s.bound);
                if (s.forward_residual > 1e-9 || s.margin() < 0.0) ++failures;
            } catch (const std::exception&) {
                ++failures;
            }
        }
    }
    return {failures == 0, fmt("%zu samples, worst residual %.3g, min relative Koebe margin %.3g, failures %zu", samples,
                               worst_residual, worst_koebe, failures)};
}

Outcome chain_diameters() {
    const auto t0 = Clock::now();
    const GrowthModel m(0.25, 1);
    const double R = 20.0;
    const FunctionParams fp = FunctionParams(m, 1, m.k0() + 1, 1e-12).covering(60.0);
    SplitMix64 rng(7);
    std::vector<std::int64_t> ks;
    for (std::int64_t k = m.k0() + 1; k <= m.k0() + 6; ++k) ks.push_back(k);
    std::size_t chains = 0, failures = 0;
    double worst = 0.0;
    for (int len = 1; len <= 3; ++len) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(len), 0);
        for (;;) {
            CoverChain chain;
            for (std::size_t i : idx) {
                const Ring& ring = fp.ring(ks[i]);
                chain.levels.push_back(make_pole(ring, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * ring.nk))), 1));
                chain.radii.push_back(R);
            }
            if (chain.admissible()) {
                ++chains;
                try {
                    const ChainDiameter d = chain_diameter(fp, chain);
                    worst = std::max(worst, d.measured / d.bound);
                    if (d.measured > d.bound) ++failures;
                } catch (const std::exception&) {
                    ++failures;
                }
            }
            std::size_t i = 0;
            while (i < idx.size() && ++idx[i] == ks.size()) idx[i++] = 0;
            if (i == idx.size()) break;
        }
    }
    return {failures == 0 && chains > 0, fmt("rho 0.25, R %.0f: %zu chains, worst measured/bound %.3g, failures %zu, %.2f s",
                                             R, chains, worst, failures, seconds_since(t0))};
}

Outcome key_series_decay() {
    const GrowthModel m(1.0, 1);
    const MassParams mp = MassParams::defaults(1, 1);
    const KeySeriesLedger led = key_series(m, 1, GaugeSpec(1, 1.0), 10000, mp.R0);
    bool bound_ok = true;
    std::size_t complete_bins = 0;
    for (const auto& b : led.bins) {
        bound_ok &= b.sum_c <= b.c_bound;
        complete_bins += b.complete ? 1 : 0;
    }
    const double bin_factor = led.bin_decay_factor();
    const double block_factor = led.block_decay_factor();
    const bool decay_ok = std::isfinite(bin_factor) && bin_factor < 0.9;
    return {decay_ok && bound_ok,
            fmt("bins %zu (complete %zu), bin factor %.4g, dyadic index-block factor %.4g, bin bound %s, total %.6g",
                led.bins.size(), complete_bins, bin_factor, block_factor, bound_ok ? "holds" : "violated", led.total)};
}

Outcome mass_trend() {
    const GrowthModel m(1.0, 1);
    const MassParams mp = MassParams::defaults(1, 1);
    const auto hi = mass_sequence(m, mp, GaugeSpec(1, 9.0), 12);
    const auto lo = mass_sequence(m, mp, GaugeSpec(1, 7.0), 12);
    const Trend th = product_trend(hi, 4, 12), tl = product_trend(lo, 4, 12);
    bool finite = true;
    for (const auto* rows : {&hi, &lo})
        for (const auto& r : *rows) finite &= std::isfinite(r.log_product);
    std::string inc;
    for (int l = 5; l <= 12; ++l)
        inc += fmt("%s%.1f", l == 5 ? "" : ",",
                   hi[static_cast<std::size_t>(l - 1)].log_product - hi[static_cast<std::size_t>(l - 2)].log_product);
    return {finite && th == Trend::Increasing && tl == Trend::Decreasing,
            fmt("gamma 9: %s (increments %s), gamma 7: %s", to_string(th), inc.c_str(), to_string(tl))};
}

Outcome counting() {
    const auto t0 = Clock::now();
    const GrowthModel m(1.0, 1);
    const std::int64_t exact = pole_count(m, 3.0);
    std::int64_t independent = 0;
    for (std::int64_t k = 9; std::log(static_cast<double>(k)) <= 3.0; ++k)
        independent += 2 * static_cast<std::int64_t>(std::floor(static_cast<double>(k) * std::log(static_cast<double>(k))));
    const bool count_ok = exact == 928 && independent == 928;

    const CountOutput c = count_output(Scenario{}, {});
    const auto& rows = c.rows;
    const std::size_t n = rows.size();
    const double last = std::abs(rows[n - 1].ratio - 1.0);
    const bool ratio_ok = last <= 0.25 && std::abs(rows[n - 2].ratio - 1.0) > last &&
                          std::abs(rows[n - 3].ratio - 1.0) > std::abs(rows[n - 2].ratio - 1.0);

    bool order_ok = true;
    std::string orders;
    for (double rho : {1.0, 2.0}) {
        Scenario s;
        s.rho = rho;
        const CountOutput co = count_output(s, {});
        order_ok &= co.order_error.empty() && std::abs(co.order / rho - 1.0) <= 0.15;
        orders += fmt("%srho %g: %.4f", rho == 1.0 ? "" : ", ", rho, co.order);
    }
    const double secs = seconds_since(t0);
    return {count_ok && ratio_ok && order_ok && secs < 60.0,
            fmt("n(3) = %lld (independent %lld), ratio at r = %.4g: %.9f, order %s, %.2f s", static_cast<long long>(exact),
                static_cast<long long>(independent), rows[n - 1].r, rows[n - 1].ratio, orders.c_str(), secs)};
}

Outcome determinism() {
    Scenario s;
    s.seed = 42;
    std::vector<std::pair<std::string, std::function<std::string()>>> builders{
        {"verify-lemmas", [&] { return verify_lemmas_report(s, {2000, 50}).dump(2); }},
        {"poles", [&] { return poles_csv(s, 12); }},
        {"sums", [&] { return sums_report(s, {10000, 12}).dump(2); }},
        {"count", [&] { return count_output(s, {}).csv(); }},
        {"grid", [&] {
             GridOptions g;
             g.px = 32;
             g.iter = 8;
             return escape_grid(s, g).pgm();
         }},
    };
    std::string mismatched;
    for (const auto& [name, build] : builders) {
        const std::string a = build(), b = build();
        if (git_blob_sha1(a) != git_blob_sha1(b)) mismatched += name + " ";
    }
    GridOptions g1;
    g1.px = 32;
    g1.iter = 8;
    g1.threads = 1;
    GridOptions g4 = g1;
    g4.threads = 4;
    if (escape_grid(s, g1).pgm() != escape_grid(s, g4).pgm()) mismatched += "grid-threads ";
    return {mismatched.empty(),
            mismatched.empty() ? std::string("5 report kinds byte-identical across runs and thread counts")
                               : "mismatch: " + mismatched};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"gauge lemma suite", gauge_suite},
        {"separation grid", separation_grid},
        {"residues", residues},
        {"tail soundness", tail_soundness},
        {"spider's web bound", web_bound},
        {"inverse branches", inverse_branches},
        {"chain diameters", chain_diameters},
        {"key-series decay", key_series_decay},
        {"mass-sequence trend", mass_trend},
        {"pole counting", counting},
        {"determinism", determinism},
    };
    int failed = 0;
    int idx = 0;
    for (const auto& [name, run] : criteria) {
        ++idx;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", idx, name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
