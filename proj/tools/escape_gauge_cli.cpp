// escape-gauge: command line front end for the construction and its diagnostics.
//
//   escape-gauge verify-lemmas --seed 42
//   escape-gauge poles --ring-max 12 --out poles.csv
//   escape-gauge grid --px 256 --format pgm --out grid.pgm
//   escape-gauge sums --gamma 9
//   escape-gauge count --format csv

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "escape_gauge_tools/report.hpp"

namespace {

using namespace escape_gauge;
using namespace escape_gauge::tools;

struct Overrides {
    std::optional<int> n;
    std::optional<double> rho;
    std::optional<int> M;
    std::optional<double> gamma;
    std::optional<std::int64_t> k_max;
    std::optional<double> tail;
    std::optional<double> R0;
    std::optional<double> lambda;
    std::optional<double> delta;
    std::optional<std::uint64_t> seed;
};

void add_scenario_flags(CLI::App& app, std::string& config, Overrides& o, std::string& out, std::string& format) {
    app.add_option("--config", config, "scenario file (JSON or flat TOML)");
    app.add_option("--n", o.n, "tower depth n");
    app.add_option("--rho", o.rho, "target n-th order rho");
    app.add_option("--M", o.M, "pole multiplicity of f = g^M");
    app.add_option("--gamma", o.gamma, "gauge exponent gamma");
    app.add_option("--kmax", o.k_max, "series truncation ring (raised to meet --tail)");
    app.add_option("--tail", o.tail, "absolute tail tolerance");
    app.add_option("--R0", o.R0, "base radius (default 4C+4+1/lambda+2/(delta lambda))");
    app.add_option("--lambda", o.lambda, "web distance constant");
    app.add_option("--delta", o.delta, "density slack");
    app.add_option("--seed", o.seed, "random seed");
    app.add_option("--out", out, "output path (default stdout)");
    app.add_option("--format", format, "json, csv or pgm")->check(CLI::IsMember({"json", "csv", "pgm"}));
}

Scenario resolve(const std::string& config, const Overrides& o) {
    Scenario s = config.empty() ? Scenario{} : load_scenario(config);
    if (o.n) s.n = *o.n;
    if (o.rho) s.rho = *o.rho;
    if (o.M) s.M = *o.M;
    if (o.gamma) s.gamma = *o.gamma;
    if (o.k_max) s.k_max = *o.k_max;
    if (o.tail) s.tail_policy = *o.tail;
    if (o.R0) s.R0 = *o.R0;
    if (o.lambda) s.lambda = *o.lambda;
    if (o.delta) s.delta = *o.delta;
    if (o.seed) s.seed = *o.seed;
    return s;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

std::string json_text(const ojson& j) { return j.dump(2) + "\n"; }

unsigned thread_cap() {
    const char* env = std::getenv("ESCAPE_GAUGE_THREADS");
    if (!env || !*env) return 0;
    return static_cast<unsigned>(std::strtoul(env, nullptr, 10));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diagnostics for a meromorphic function with prescribed n-th order growth"};
    app.require_subcommand(1);

    std::string config, out, format;
    Overrides o;

    auto* verify = app.add_subcommand("verify-lemmas", "gauge and growth inequality margins (JSON)");
    VerifyOptions vopt;
    verify->add_option("--samples", vopt.samples, "random tuples in the gauge suite");
    verify->add_option("--grid", vopt.grid, "separation grid size above k0");

    auto* poles = app.add_subcommand("poles", "pole and residue table (CSV)");
    std::int64_t ring_max = 0;
    poles->add_option("--ring-max", ring_max, "largest ring index (default k0 + 4)");

    auto* web = app.add_subcommand("web", "sampled sup of |g| on the spider's web (JSON)");
    WebOptions wopt;
    web->add_option("--m-lo", wopt.m_lo, "first ring (default k0 + 2)");
    web->add_option("--m-hi", wopt.m_hi, "last ring (default k0 + 8)");
    web->add_option("--circle-samples", wopt.samples_per_circle, "samples per circle");
    web->add_option("--segment-samples", wopt.samples_per_segment, "samples per radial segment");

    auto* grid = app.add_subcommand("grid", "escape-step raster (PGM or CSV)");
    GridOptions gopt;
    grid->add_option("--re-min", gopt.re_min);
    grid->add_option("--re-max", gopt.re_max);
    grid->add_option("--im-min", gopt.im_min);
    grid->add_option("--im-max", gopt.im_max);
    grid->add_option("--px", gopt.px, "raster width in pixels");
    grid->add_option("--iter", gopt.iter, "maximum iterations");
    grid->add_option("--escape", gopt.escape, "escape radius (default 1.5 x window extent)");

    auto* sums = app.add_subcommand("sums", "key series ledger and mass sequence (JSON)");
    SumsOptions sopt;
    sums->add_option("--jmax", sopt.j_max, "number of key-series terms");
    sums->add_option("--levels", sopt.levels, "mass-sequence levels");

    auto* count = app.add_subcommand("count", "pole counts and order estimate (CSV or JSON)");
    CountOptions copt;
    count->add_option("--rings", copt.rings, "ring indices k; radii are p(k + 1/2)");

    for (auto* sub : {verify, poles, web, grid, sums, count}) add_scenario_flags(*sub, config, o, out, format);

    CLI11_PARSE(app, argc, argv);

    try {
        const Scenario s = resolve(config, o);
        if (verify->parsed()) {
            const ojson rep = verify_lemmas_report(s, vopt);
            emit(out, json_text(rep));
            return rep["passed"].get<bool>() ? EXIT_SUCCESS : EXIT_FAILURE;
        }
        if (poles->parsed()) {
            const std::int64_t km = ring_max > 0 ? ring_max : s.growth().k0() + 4;
            emit(out, poles_csv(s, km));
            return EXIT_SUCCESS;
        }
        if (web->parsed()) {
            const ojson rep = web_report(s, wopt);
            emit(out, json_text(rep));
            return rep["passed"].get<bool>() ? EXIT_SUCCESS : EXIT_FAILURE;
        }
        if (grid->parsed()) {
            gopt.threads = thread_cap();
            const GridResult g = escape_grid(s, gopt);
            emit(out, format == "csv" ? g.csv() : g.pgm());
            return EXIT_SUCCESS;
        }
        if (sums->parsed()) {
            const ojson rep = sums_report(s, sopt);
            emit(out, json_text(rep));
            return rep["passed"].get<bool>() ? EXIT_SUCCESS : EXIT_FAILURE;
        }
        if (count->parsed()) {
            const CountOutput c = count_output(s, copt);
            emit(out, format == "json" ? json_text(c.json()) : c.csv());
            return c.order_error.empty() ? EXIT_SUCCESS : EXIT_FAILURE;
        }
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return EXIT_FAILURE;
}
