#pragma once

// Report builders behind the command line subcommands.  Every builder is a
// pure function of the scenario and its options, so equal inputs give equal bytes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "escape_gauge/escape_gauge.hpp"
#include "escape_gauge_tools/scenario.hpp"

namespace escape_gauge::tools {

inline const char* gamma_position(const Scenario& s) {
    if (s.gamma < s.convergence_threshold()) return "below_convergence_threshold";
    if (s.gamma > s.divergence_threshold()) return "above_divergence_threshold";
    return "between_thresholds";
}

inline ojson report_header(const std::string& command, const Scenario& s, const ojson& options) {
    ojson h;
    h["schema"] = 1;
    h["command"] = command;
    h["scenario"] = to_json(s);
    h["options"] = options;
    h["thresholds"] = {{"convergence", s.convergence_threshold()},
                       {"divergence", s.divergence_threshold()},
                       {"gamma_position", gamma_position(s)}};
    h["input_hash"] = input_hash(s, options);
    return h;
}

/// The header as '#' comment lines for CSV and PGM outputs.
inline std::string comment_header(const ojson& header) {
    std::ostringstream os;
    os << "# " << header.dump() << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// verify-lemmas

struct VerifyOptions {
    std::size_t samples = 10000;
    int grid = 200;
};

inline ojson verify_lemmas_report(const Scenario& s, const VerifyOptions& opt) {
    ojson rep = report_header("verify-lemmas", s, {{"samples", opt.samples}, {"grid", opt.grid}});
    ojson failures = ojson::array();
    try {
        const GaugeSpec spec(s.n, s.gamma);
        const GaugeSuiteResult g = run_gauge_suite(spec, opt.samples, s.seed);
        rep["gauge"] = {{"n", g.n},
                        {"gamma", g.gamma},
                        {"seed", g.seed},
                        {"samples", g.samples},
                        {"delta_n", spec.delta_n()},
                        {"min_scaling_margin", g.min_scaling},
                        {"min_superadditivity_margin", g.min_superadditivity},
                        {"min_product_margin", g.min_product},
                        {"min_concavity_margin", g.min_concavity},
                        {"domain_errors", g.domain_errors},
                        {"passed", g.passed(kDomainSlack)}};
        if (!g.passed(kDomainSlack)) failures.push_back("gauge lemma margins");
    } catch (const DomainError& e) {
        failures.push_back(std::string("gauge: ") + e.what());
    }
    try {
        const GrowthModel m = s.growth();
        const std::int64_t lo = m.k0() + 1, hi = m.k0() + opt.grid;
        double min_out = INFINITY, min_in = INFINITY;
        std::size_t pairs = 0;
        for (std::int64_t k = lo; k <= hi; ++k)
            for (std::int64_t l = lo; l <= hi; ++l) {
                if (k == l) continue;
                const SeparationMargin sm = separation_margin(m, k, static_cast<double>(l));
                (sm.outward ? min_out : min_in) = std::min(sm.outward ? min_out : min_in, sm.margin);
                ++pairs;
            }
        const bool sep_ok = min_out >= -kDomainSlack && min_in >= -kDomainSlack;
        rep["separation"] = {{"c", separation_constant(m.n())},
                             {"k_range", {lo, hi}},
                             {"pairs", pairs},
                             {"min_outward_margin", min_out},
                             {"min_inward_margin", min_in},
                             {"passed", sep_ok}};
        if (!sep_ok) failures.push_back("separation margins");

        ojson fg = ojson::array();
        for (double r : {5.0, 10.0, 20.0}) {
            const ForGrowthTerms t = forgrowth_terms(m, r);
            fg.push_back({{"r", r}, {"q_over_r_qprime", t.q_over_r_qprime}, {"d_q_over_qprime", t.d_q_over_qprime}});
        }
        rep["forgrowth"] = fg;

        const Threshold pm = pm_threshold(m);
        const Threshold mono = p_prime_monotone_threshold(m);
        rep["half_step"] = {{"found", pm.found}, {"t0", pm.t0}};
        rep["p_prime_nonincreasing"] = {{"found", mono.found}, {"t0", mono.t0}};
        rep["first_k_with_nk_at_least_k"] = first_k_with_nk_at_least_k(m, m.k0() + 10000);

        ojson ps = ojson::array();
        const double k1 = static_cast<double>(m.k0() + 1);
        for (double l : {k1, 2.0 * k1, 10.0 * k1, 100.0 * k1}) {
            const PartialSum p = partial_sum_nk(m, l);
            ps.push_back({{"l", l}, {"sum", p.sum}, {"integral", p.integral}, {"ratio", p.ratio}});
        }
        rep["partial_sums"] = ps;
    } catch (const DomainError& e) {
        failures.push_back(std::string("growth: ") + e.what());
    }
    rep["failures"] = failures;
    rep["passed"] = failures.empty();
    return rep;
}

// ---------------------------------------------------------------------------
// poles

inline std::string poles_csv(const Scenario& s, std::int64_t ring_max) {
    const ojson header = report_header("poles", s, {{"ring_max", ring_max}});
    const FunctionParams fp = s.function();
    std::ostringstream os;
    os << comment_header(header);
    write_pole_csv(os, poles_up_to(fp, ring_max));
    return os.str();
}

// ---------------------------------------------------------------------------
// web

struct WebOptions {
    std::int64_t m_lo = 0; // 0: k0 + 2
    std::int64_t m_hi = 0; // 0: k0 + 8
    int samples_per_circle = 1024;
    int samples_per_segment = 16;
};

inline ojson web_report(const Scenario& s, const WebOptions& opt) {
    const GrowthModel m = s.growth();
    WebSpec spec{opt.m_lo > 0 ? opt.m_lo : m.k0() + 2, opt.m_hi > 0 ? opt.m_hi : m.k0() + 8, opt.samples_per_circle,
                 opt.samples_per_segment};
    ojson rep = report_header("web", s,
                              {{"m_lo", spec.m_lo},
                               {"m_hi", spec.m_hi},
                               {"samples_per_circle", spec.samples_per_circle},
                               {"samples_per_segment", spec.samples_per_segment}});
    const FunctionParams fp = s.function().covering(p_of(m, static_cast<double>(spec.m_hi) + 0.5));
    const WebReport w = web_sup(fp, spec);
    rep["k_max_used"] = fp.k_max();
    rep["c"] = w.constant.c;
    rep["C"] = w.constant.C;
    rep["bound_4C_plus_4"] = w.theoretical_bound;
    rep["tail_allowance"] = w.tail_allowance;
    rep["sup_sampled"] = w.sup_sampled;
    rep["argmax"] = {w.argmax.real(), w.argmax.imag()};
    rep["samples"] = w.samples;
    rep["lambda_empirical"] = w.lambda_empirical;
    ojson failures = ojson::array();
    if (!w.within_bound()) failures.push_back("sampled sup exceeds 4C+4 plus tail allowance");
    rep["failures"] = failures;
    rep["passed"] = failures.empty();
    return rep;
}

// ---------------------------------------------------------------------------
// grid

struct GridOptions {
    double re_min = NAN, re_max = NAN, im_min = NAN, im_max = NAN; // NaN: window around u_{k0+2,0}
    int px = 128;
    int iter = 16;
    double escape = 0.0; // 0: 1.5 times the largest modulus in the window
    unsigned threads = 0; // 0: hardware concurrency
};

// Raster codes: escape step clipped to 253; 254 truncation unsafe; 255 bounded.
inline constexpr int kRasterUnsafe = 254;
inline constexpr int kRasterBounded = 255;

struct GridResult {
    ojson header;
    int width = 0;
    int height = 0;
    std::vector<int> codes;   // row-major, row 0 at im_max
    std::vector<cplx> points;
    std::vector<OrbitStatus> status;
    std::vector<int> steps;
    double re_min = 0, re_max = 0, im_min = 0, im_max = 0;

    std::string pgm() const {
        std::ostringstream os;
        os << "P2\n" << comment_header(header) << width << ' ' << height << "\n255\n";
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) os << (x ? " " : "") << codes[static_cast<std::size_t>(y * width + x)];
            os << '\n';
        }
        return os.str();
    }

    std::string csv() const {
        std::ostringstream os;
        os << comment_header(header) << "x,y,re,im,status,step,code\n";
        os.precision(17);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const auto i = static_cast<std::size_t>(y * width + x);
                os << x << ',' << y << ',' << points[i].real() << ',' << points[i].imag() << ',' << to_string(status[i])
                   << ',' << steps[i] << ',' << codes[i] << '\n';
            }
        return os.str();
    }
};

inline GridResult escape_grid(const Scenario& s, GridOptions opt) {
    const GrowthModel m = s.growth();
    if (std::isnan(opt.re_min) || std::isnan(opt.re_max) || std::isnan(opt.im_min) || std::isnan(opt.im_max)) {
        const double k = static_cast<double>(m.k0() + 2);
        const double c = p_of(m, k), h = 3.0 * std::numbers::pi * p_prime(m, k);
        opt.re_min = c - h;
        opt.re_max = c + h;
        opt.im_min = -h;
        opt.im_max = h;
    }
    if (!(opt.re_max > opt.re_min) || !(opt.im_max > opt.im_min) || opt.px < 1 || opt.iter < 1)
        throw DomainError("grid: empty window, px < 1 or iter < 1");
    const double far = std::max({std::abs(cplx(opt.re_min, opt.im_min)), std::abs(cplx(opt.re_min, opt.im_max)),
                                 std::abs(cplx(opt.re_max, opt.im_min)), std::abs(cplx(opt.re_max, opt.im_max))});
    if (opt.escape <= 0.0) opt.escape = 1.5 * far;
    const FunctionParams fp = s.function().covering(std::max(opt.escape, far));

    GridResult g;
    g.width = opt.px;
    g.height = std::max(1, static_cast<int>(std::lround(opt.px * (opt.im_max - opt.im_min) / (opt.re_max - opt.re_min))));
    g.re_min = opt.re_min;
    g.re_max = opt.re_max;
    g.im_min = opt.im_min;
    g.im_max = opt.im_max;
    g.header = report_header("grid", s,
                             {{"re_min", opt.re_min},
                              {"re_max", opt.re_max},
                              {"im_min", opt.im_min},
                              {"im_max", opt.im_max},
                              {"px", opt.px},
                              {"iter", opt.iter},
                              {"escape", opt.escape}});
    g.header["k_max_used"] = fp.k_max();
    g.header["height"] = g.height;
    const auto total = static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height);
    g.codes.assign(total, 0);
    g.points.assign(total, cplx{});
    g.status.assign(total, OrbitStatus::BoundedAfter);
    g.steps.assign(total, 0);
    const std::vector<double> radii{opt.escape};
    auto pixel = [&](int x, int y) {
        const double re = opt.re_min + (opt.re_max - opt.re_min) * (x + 0.5) / g.width;
        const double im = opt.im_max - (opt.im_max - opt.im_min) * (y + 0.5) / g.height;
        return cplx(re, im);
    };
    auto row = [&](int y) {
        for (int x = 0; x < g.width; ++x) {
            const auto i = static_cast<std::size_t>(y * g.width + x);
            const cplx z = pixel(x, y);
            const OrbitRecord rec = orbit(fp, z, radii, opt.iter);
            g.points[i] = z;
            g.status[i] = rec.status;
            g.steps[i] = rec.escapes() ? rec.escape_step() : rec.step;
            if (rec.escapes()) g.codes[i] = std::min(rec.escape_step(), 253);
            else if (rec.status == OrbitStatus::TruncationUnsafe) g.codes[i] = kRasterUnsafe;
            else g.codes[i] = kRasterBounded;
        }
    };
    unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(g.height));
    // rows are dealt round-robin; each pixel is written by exactly one worker
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int y = static_cast<int>(t); y < g.height; y += static_cast<int>(threads)) row(y);
        });
    for (auto& th : pool) th.join();
    return g;
}

// ---------------------------------------------------------------------------
// sums

struct SumsOptions {
    std::int64_t j_max = 10000;
    int levels = 12;
};

inline ojson sums_report(const Scenario& s, const SumsOptions& opt) {
    ojson rep = report_header("sums", s, {{"j_max", opt.j_max}, {"levels", opt.levels}});
    ojson failures = ojson::array();
    const GrowthModel m = s.growth();
    const GaugeSpec gauge(s.n, s.gamma);
    const MassParams mp = s.mass();

    const KeySeriesLedger led = key_series(m, s.M, gauge, opt.j_max, mp.R0);
    ojson bins = ojson::array();
    for (const auto& b : led.bins) {
        const bool c_ok = b.sum_c <= b.c_bound;
        const bool jensen_ok = std::isnan(b.jensen_bound) || b.S <= b.jensen_bound * (1.0 + 1e-12);
        if (!c_ok) failures.push_back("bin " + std::to_string(b.l) + ": sum c_j exceeds 144 R^2 2^(-2l/M)");
        if (!jensen_ok) failures.push_back("bin " + std::to_string(b.l) + ": S_l exceeds the Jensen bound");
        ojson jb = b.jensen_bound;
        if (std::isnan(b.jensen_bound)) jb = nullptr;
        bins.push_back({{"l", b.l},
                        {"count", b.count},
                        {"S_l", b.S},
                        {"sum_c", b.sum_c},
                        {"c_bound", b.c_bound},
                        {"jensen_bound", jb},
                        {"cum_sum", b.cum_sum},
                        {"complete", b.complete}});
    }
    ojson blocks = ojson::array();
    for (const auto& b : led.blocks)
        blocks.push_back({{"i", b.i},
                          {"j_lo", b.j_lo},
                          {"j_hi", b.j_hi},
                          {"rings", {b.first_ring, b.last_ring}},
                          {"S", b.S},
                          {"cum_sum", b.cum_sum},
                          {"complete", b.complete}});
    auto nullable = [](double v) { return std::isnan(v) ? ojson(nullptr) : ojson(v); };
    rep["key_series"] = {{"R", led.R},
                         {"terms", led.terms},
                         {"skipped_above_delta", led.skipped},
                         {"total", led.total},
                         {"bins", bins},
                         {"blocks", blocks},
                         {"block_decay_factor", nullable(led.block_decay_factor())},
                         {"bin_decay_factor", nullable(led.bin_decay_factor())}};

    try {
        const auto rows = mass_sequence(m, mp, gauge, opt.levels);
        ojson table = ojson::array();
        for (const auto& r : rows)
            table.push_back({{"l", r.l},
                             {"log_inv_d_l", {{"depth", r.log_inv_d.depth()}, {"mantissa", r.log_inv_d.mantissa()}}},
                             {"log_delta_l", r.log_delta},
                             {"log_g_d_l", r.log_g_d},
                             {"log_product", r.log_product},
                             {"growth_ratio", r.growth_ratio}});
        const double sign = s.rho * s.gamma - 8.0 / s.M;
        const Trend eventual = eventual_trend(rows);
        const bool consistent = (sign > 0) == (eventual == Trend::Increasing);
        if (!consistent) failures.push_back("eventual trend of the mass product disagrees with the sign of rho gamma - 8/M");
        rep["mass_sequence"] = {{"R0", mp.R0},
                                {"tau", MassParams::tau()},
                                {"alpha", mp.alpha()},
                                {"B", mp.B()},
                                {"A", mp.A},
                                {"rho_gamma_minus_8_over_M", sign},
                                {"trend_levels_4_on", to_string(product_trend(rows, 4, opt.levels))},
                                {"eventual_trend", to_string(eventual)},
                                {"consistent_with_sign", consistent},
                                {"levels", table}};
    } catch (const DomainError& e) {
        failures.push_back(std::string("mass_sequence: ") + e.what());
    }
    rep["failures"] = failures;
    rep["passed"] = failures.empty();
    return rep;
}

// ---------------------------------------------------------------------------
// count

struct CountOptions {
    std::vector<std::int64_t> rings; // radii p(k + 1/2); empty: geometric ladder from max(k0 + 2, 1000)
};

struct CountOutput {
    ojson header;
    std::vector<CountReport> rows;
    double order = NAN;
    std::size_t order_samples = 0;
    std::string order_error;

    std::string csv() const {
        std::ostringstream os;
        ojson h = header;
        h["order_estimate"] = std::isnan(order) ? ojson(nullptr) : ojson(order);
        os << comment_header(h);
        write_count_csv(os, rows);
        return os.str();
    }

    ojson json() const {
        ojson j = header;
        ojson rs = ojson::array();
        for (const auto& r : rows)
            rs.push_back({{"r", r.r}, {"exact", r.exact_count}, {"asymptote_log", r.asymptote_log}, {"ratio", r.ratio}});
        j["rows"] = rs;
        j["order_estimate"] = std::isnan(order) ? ojson(nullptr) : ojson(order);
        j["order_samples"] = order_samples;
        if (!order_error.empty()) j["failures"] = {order_error};
        j["passed"] = order_error.empty();
        return j;
    }
};

inline std::vector<std::int64_t> default_count_rings(const GrowthModel& m) {
    std::vector<std::int64_t> ks;
    const double lo = std::max(static_cast<double>(m.k0() + 2), 1e3);
    const double hi = std::min(1e7, std::max(lo * 1e3, 1e6));
    for (int i = 0; i <= 12; ++i) ks.push_back(static_cast<std::int64_t>(std::llround(lo * std::pow(hi / lo, i / 12.0))));
    return ks;
}

inline CountOutput count_output(const Scenario& s, const CountOptions& opt) {
    const GrowthModel m = s.growth();
    const std::vector<std::int64_t> ks = opt.rings.empty() ? default_count_rings(m) : opt.rings;
    CountOutput out;
    out.header = report_header("count", s, {{"rings", ks}});
    const std::vector<double> radii = half_ring_radii(m, ks);
    for (double r : radii) out.rows.push_back(count_report(m, r));
    try {
        const OrderEstimate oe = order_estimate(m, radii);
        out.order = oe.slope;
        out.order_samples = oe.used;
    } catch (const InsufficientRange& e) {
        out.order_error = e.what();
    }
    return out;
}

} // namespace escape_gauge::tools
