#pragma once

// Scenario configuration shared by the command line front end and the
// acceptance harness: loading, canonical JSON form, content hashing.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include <openssl/sha.h>

#include "json.hpp"

#include "escape_gauge/cover.hpp"
#include "escape_gauge/errors.hpp"
#include "escape_gauge/meromap.hpp"

namespace escape_gauge::tools {

using ojson = nlohmann::ordered_json;

struct Scenario {
    int n = 1;
    double rho = 1.0;
    int M = 1;
    double gamma = 1.0;
    std::int64_t k_max = 0;  // 0: smallest admissible ring count
    double tail_policy = 1e-12;
    double R0 = 0.0;         // 0: 4C + 4 + 1/lambda + 2/(delta lambda)
    double lambda = 0.25;
    double delta = 0.5;
    std::uint64_t seed = 1;

    double convergence_threshold() const { return 2.0 / (M * rho); }
    double divergence_threshold() const { return 8.0 / (M * rho); }

    double effective_R0() const { return R0 > 0.0 ? R0 : MassParams::admissible_R0(n, lambda, delta); }

    GrowthModel growth() const { return GrowthModel(rho, n); }

    FunctionParams function() const {
        const GrowthModel g = growth();
        return FunctionParams(g, M, k_max > 0 ? k_max : g.k0() + 1, tail_policy);
    }

    MassParams mass() const { return {effective_R0(), lambda, delta, MassParams::default_A(M), M}; }
};

inline ojson to_json(const Scenario& s) {
    ojson j;
    j["n"] = s.n;
    j["rho"] = s.rho;
    j["M"] = s.M;
    j["gamma"] = s.gamma;
    j["k_max"] = s.k_max;
    j["tail_policy"] = s.tail_policy;
    j["R0"] = s.R0;
    j["lambda"] = s.lambda;
    j["delta"] = s.delta;
    j["seed"] = s.seed;
    return j;
}

inline void apply_key(Scenario& s, const std::string& key, const nlohmann::json& v) {
    if (key == "n") s.n = v.get<int>();
    else if (key == "rho") s.rho = v.get<double>();
    else if (key == "M") s.M = v.get<int>();
    else if (key == "gamma") s.gamma = v.get<double>();
    else if (key == "k_max" || key == "kmax") s.k_max = v.get<std::int64_t>();
    else if (key == "tail_policy" || key == "tail") s.tail_policy = v.get<double>();
    else if (key == "R0") s.R0 = v.get<double>();
    else if (key == "lambda") s.lambda = v.get<double>();
    else if (key == "delta") s.delta = v.get<double>();
    else if (key == "seed") s.seed = v.get<std::uint64_t>();
    else throw std::runtime_error("unknown scenario key '" + key + "'");
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::runtime_error("scenario JSON must be an object");
    Scenario s;
    for (const auto& [key, value] : j.items()) apply_key(s, key, value);
    return s;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

} // namespace detail

/// Flat TOML: `key = value` lines, `#` comments, table headers ignored.
/// Values are numbers (integers or floats, exponents allowed).
inline Scenario scenario_from_toml(std::istream& in) {
    Scenario s;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty() || line.front() == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("scenario line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        nlohmann::json v;
        try {
            v = nlohmann::json::parse(value);
        } catch (const nlohmann::json::parse_error&) {
            throw std::runtime_error("scenario line " + std::to_string(lineno) + ": bad value '" + value + "'");
        }
        if (!v.is_number()) throw std::runtime_error("scenario line " + std::to_string(lineno) + ": value must be a number");
        apply_key(s, key, v);
    }
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open scenario file " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return scenario_from_json(nlohmann::json::parse(text));
    std::istringstream in(text);
    return scenario_from_toml(in);
}

/// SHA-1 of "blob <size>\0<content>", as git computes object ids.
inline std::string git_blob_sha1(const std::string& content) {
    const std::string data = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
    unsigned char md[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(data.data()), data.size(), md);
    std::ostringstream hex;
    for (unsigned char c : md) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
    return hex.str();
}

/// Hash of the canonical scenario JSON plus the command and its own options.
inline std::string input_hash(const Scenario& s, const ojson& command_options) {
    ojson j;
    j["scenario"] = to_json(s);
    j["options"] = command_options;
    return git_blob_sha1(j.dump());
}

} // namespace escape_gauge::tools
