// Copyright 2026 The majq Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file config.hpp
 * @brief JSON model configuration and the Fermi-Hubbard preset.
 *
 * Schema (indices are 1-based and must be given in strictly increasing order):
 *
 *   {
 *     "M": 2,
 *     "t_entries": [[1, 3, 0.25], ...],
 *     "g_entries": [[1, 2, 3, 4, -0.1], ...],
 *     "preset": {"name": "hubbard", "sites": 1, "J": 1.0, "U": 4.0, "geometry": "chain"},
 *     "seed": 42,
 *     "tolerances": {"fpe": 1e-5}
 *   }
 *
 * "preset" excludes "t_entries"/"g_entries"; with a preset "M" may be omitted.
 */

#pragma once

#include "majq/errors.hpp"
#include "majq/tensor_core.hpp"

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include "json.hpp"
#endif

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace majq {

// ============================================================================
// Hubbard preset
// ============================================================================

struct HubbardModel {
    HamiltonianSpec spec;
    /// Constant c with H_Hubbard = build_hamiltonian(spec) + c I.
    double identity_shift = 0.0;
};

/**
 * Majorana couplings of -J sum (a^dag_{s,sigma} a_{s+1,sigma} + h.c.) + U sum n_{s,up} n_{s,down}
 * on an open chain, mode k = 2 s + sigma, using n_k = (1 + i g_k g_{M+k}) / 2.
 */
inline HubbardModel preset_hubbard(int sites, double hop, double onsite, const std::string& geometry = "chain")
{
    if (geometry != "chain") {
        throw ConfigError("unsupported Hubbard geometry '" + geometry + "' (only 'chain' is available)");
    }
    if (sites < 1) {
        throw ConfigError("Hubbard preset needs sites >= 1");
    }
    const int m = 2 * sites;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    auto add_t = [&](int a, int b, double v) {
        t(a, b) += v;
        t(b, a) -= v;
    };
    // a^dag_p a_q + a^dag_q a_p = (i/2)(g_p g_{M+q} + g_q g_{M+p}) + (terms that cancel)
    for (int s = 0; s + 1 < sites; ++s) {
        for (int sigma = 0; sigma < 2; ++sigma) {
            const int p = 2 * s + sigma;
            const int q = 2 * (s + 1) + sigma;
            add_t(p, m + q, -hop / 4.0);
            add_t(q, m + p, -hop / 4.0);
        }
    }
    std::vector<QuarticCoupling::Entry> quartic;
    for (int s = 0; s < sites; ++s) {
        const int up = 2 * s;
        const int dn = 2 * s + 1;
        add_t(up, m + up, onsite / 8.0);
        add_t(dn, m + dn, onsite / 8.0);
        quartic.push_back({{up, m + up, dn, m + dn}, -onsite / 48.0});
    }
    HubbardModel out{HamiltonianSpec(m), onsite / 4.0 * sites};
    out.spec.t = CouplingMatrix::from_dense(t, 1e-14);
    out.spec.g = QuarticCoupling(m, quartic);
    return out;
}

// ============================================================================
// Model configuration
// ============================================================================

struct HubbardPreset {
    int sites = 1;
    double hop = 1.0;
    double onsite = 0.0;
    std::string geometry = "chain";

    bool operator==(const HubbardPreset&) const = default;
};

struct ModelConfig {
    struct TEntry {
        int i;
        int j;
        double value;
        bool operator==(const TEntry&) const = default;
    };
    struct GEntry {
        std::array<int, 4> idx;
        double value;
        bool operator==(const GEntry&) const = default;
    };

    int modes = 1;
    std::vector<TEntry> t_entries;  ///< 1-based
    std::vector<GEntry> g_entries;  ///< 1-based
    std::optional<HubbardPreset> preset;
    std::uint64_t seed = 0;
    std::map<std::string, double> tolerances;

    bool operator==(const ModelConfig&) const = default;

    bool has_couplings() const { return preset.has_value() || !t_entries.empty() || !g_entries.empty(); }

    double tolerance(const std::string& name, double fallback) const
    {
        const auto it = tolerances.find(name);
        return it == tolerances.end() ? fallback : it->second;
    }
};

/// Names accepted under "tolerances"; each overrides the bar of the check with that name.
inline const std::set<std::string>& known_tolerances()
{
    static const std::set<std::string> names{
        "anticommutation", "basis_origin", "basis_single_mode", "boundary_purity", "quadratic_identities",
        "four_gamma",      "fpe",          "div_diffusion",     "drift_divergence", "double_divergence",
        "rhs_forms",       "traceless",    "trace_sum",         "decomposition",    "forward_psd",
        "tangency",        "flow_margin",  "moment",            "moment_vacuum",    "covariance",
        "hubbard_preset"};
    return names;
}

namespace detail {

inline int config_index(const nlohmann::json& v, int modes, const std::string& where)
{
    if (!v.is_number_integer()) {
        throw ConfigError(where + ": index must be an integer");
    }
    const long long i = v.get<long long>();
    if (i < 1 || i > 2 * modes) {
        throw ConfigError(where + ": index " + std::to_string(i) + " is outside [1, " + std::to_string(2 * modes)
                          + "]");
    }
    return static_cast<int>(i);
}

inline double config_number(const nlohmann::json& v, const std::string& where)
{
    if (!v.is_number()) {
        throw ConfigError(where + ": expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw ConfigError(where + ": value must be finite");
    }
    return d;
}

}  // namespace detail

/// Validates and converts a parsed JSON document. Throws ConfigError naming the offending field.
inline ModelConfig parse_config(const nlohmann::json& doc)
{
    if (!doc.is_object()) {
        throw ConfigError("config: top level must be a JSON object");
    }
    static const std::set<std::string> keys{"M", "t_entries", "g_entries", "preset", "seed", "tolerances"};
    for (const auto& [k, v] : doc.items()) {
        if (!keys.contains(k)) {
            throw ConfigError("config: unknown field '" + k + "'");
        }
    }
    ModelConfig cfg;
    if (doc.contains("preset")) {
        if (doc.contains("t_entries") || doc.contains("g_entries")) {
            throw ConfigError("preset: cannot be combined with t_entries or g_entries");
        }
        const auto& p = doc["preset"];
        if (!p.is_object()) {
            throw ConfigError("preset: expected an object");
        }
        static const std::set<std::string> pkeys{"name", "sites", "J", "U", "geometry"};
        for (const auto& [k, v] : p.items()) {
            if (!pkeys.contains(k)) {
                throw ConfigError("preset: unknown field '" + k + "'");
            }
        }
        if (!p.contains("name") || p["name"] != "hubbard") {
            throw ConfigError("preset.name: only \"hubbard\" is supported");
        }
        HubbardPreset h;
        if (!p.contains("sites") || !p["sites"].is_number_integer() || p["sites"].get<long long>() < 1
            || p["sites"].get<long long>() > 6) {
            throw ConfigError("preset.sites: expected an integer in [1, 6]");
        }
        h.sites = p["sites"].get<int>();
        h.hop = p.contains("J") ? detail::config_number(p["J"], "preset.J") : 0.0;
        h.onsite = p.contains("U") ? detail::config_number(p["U"], "preset.U") : 0.0;
        if (p.contains("geometry")) {
            if (!p["geometry"].is_string() || p["geometry"] != "chain") {
                throw ConfigError("preset.geometry: only \"chain\" is supported");
            }
        }
        cfg.preset = h;
        cfg.modes = 2 * h.sites;
        if (doc.contains("M") && (!doc["M"].is_number_integer() || doc["M"].get<long long>() != cfg.modes)) {
            throw ConfigError("M: Hubbard preset with " + std::to_string(h.sites) + " site(s) requires M = "
                              + std::to_string(cfg.modes));
        }
    } else {
        if (!doc.contains("M")) {
            throw ConfigError("M: required unless a preset is given");
        }
        if (!doc["M"].is_number_integer() || doc["M"].get<long long>() < 1 || doc["M"].get<long long>() > 12) {
            throw ConfigError("M: expected an integer in [1, 12]");
        }
        cfg.modes = doc["M"].get<int>();
    }

    const int m = cfg.modes;
    if (doc.contains("t_entries")) {
        const auto& arr = doc["t_entries"];
        if (!arr.is_array()) {
            throw ConfigError("t_entries: expected an array");
        }
        std::set<std::pair<int, int>> seen;
        for (std::size_t n = 0; n < arr.size(); ++n) {
            const std::string where = "t_entries[" + std::to_string(n) + "]";
            const auto& e = arr[n];
            if (!e.is_array() || e.size() != 3) {
                throw ConfigError(where + ": expected [i, j, value]");
            }
            const int i = detail::config_index(e[0], m, where);
            const int j = detail::config_index(e[1], m, where);
            if (i == j) {
                throw ConfigError(where + ": repeated index " + std::to_string(i));
            }
            if (i > j) {
                throw ConfigError(where + ": indices must be in increasing order (write [" + std::to_string(j) + ", "
                                  + std::to_string(i) + ", -value])");
            }
            if (!seen.insert({i, j}).second) {
                throw ConfigError(where + ": duplicate entry for (" + std::to_string(i) + ", " + std::to_string(j)
                                  + ")");
            }
            cfg.t_entries.push_back({i, j, detail::config_number(e[2], where)});
        }
    }
    if (doc.contains("g_entries")) {
        const auto& arr = doc["g_entries"];
        if (!arr.is_array()) {
            throw ConfigError("g_entries: expected an array");
        }
        std::set<std::array<int, 4>> seen;
        for (std::size_t n = 0; n < arr.size(); ++n) {
            const std::string where = "g_entries[" + std::to_string(n) + "]";
            const auto& e = arr[n];
            if (!e.is_array() || e.size() != 5) {
                throw ConfigError(where + ": expected [i, j, k, l, value]");
            }
            std::array<int, 4> idx{};
            for (int a = 0; a < 4; ++a) {
                idx[a] = detail::config_index(e[a], m, where);
            }
            for (int a = 0; a < 4; ++a) {
                for (int b = a + 1; b < 4; ++b) {
                    if (idx[a] == idx[b]) {
                        throw ConfigError(where + ": repeated index " + std::to_string(idx[a])
                                          + " (such a coupling vanishes identically)");
                    }
                }
            }
            if (!(idx[0] < idx[1] && idx[1] < idx[2] && idx[2] < idx[3])) {
                throw ConfigError(where + ": indices must be in increasing order");
            }
            if (!seen.insert(idx).second) {
                throw ConfigError(where + ": duplicate entry");
            }
            cfg.g_entries.push_back({idx, detail::config_number(e[4], where)});
        }
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer() || doc["seed"].get<long long>() < 0) {
            throw ConfigError("seed: expected a non-negative integer");
        }
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("tolerances")) {
        const auto& tol = doc["tolerances"];
        if (!tol.is_object()) {
            throw ConfigError("tolerances: expected an object");
        }
        for (const auto& [k, v] : tol.items()) {
            if (!known_tolerances().contains(k)) {
                throw ConfigError("tolerances: unknown check '" + k + "'");
            }
            const double d = detail::config_number(v, "tolerances." + k);
            if (!(d > 0.0)) {
                throw ConfigError("tolerances." + k + ": must be positive");
            }
            cfg.tolerances[k] = d;
        }
    }
    return cfg;
}

/// Parses JSON text; syntax errors are reported with line and column.
inline ModelConfig parse_config_text(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: JSON syntax error: ") + e.what());
    }
    return parse_config(doc);
}

inline ModelConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config_text(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline nlohmann::json to_json(const ModelConfig& cfg)
{
    nlohmann::json doc;
    doc["M"] = cfg.modes;
    if (cfg.preset) {
        doc["preset"] = {{"name", "hubbard"},
                         {"sites", cfg.preset->sites},
                         {"J", cfg.preset->hop},
                         {"U", cfg.preset->onsite},
                         {"geometry", cfg.preset->geometry}};
    } else {
        doc["t_entries"] = nlohmann::json::array();
        for (const auto& e : cfg.t_entries) {
            doc["t_entries"].push_back({e.i, e.j, e.value});
        }
        doc["g_entries"] = nlohmann::json::array();
        for (const auto& e : cfg.g_entries) {
            doc["g_entries"].push_back({e.idx[0], e.idx[1], e.idx[2], e.idx[3], e.value});
        }
    }
    doc["seed"] = cfg.seed;
    doc["tolerances"] = nlohmann::json::object();
    for (const auto& [k, v] : cfg.tolerances) {
        doc["tolerances"][k] = v;
    }
    return doc;
}

/// Couplings described by the config (0-based), plus the identity constant a preset drops.
inline HubbardModel model_from_config(const ModelConfig& cfg)
{
    if (cfg.preset) {
        return preset_hubbard(cfg.preset->sites, cfg.preset->hop, cfg.preset->onsite, cfg.preset->geometry);
    }
    HubbardModel out{HamiltonianSpec(cfg.modes), 0.0};
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2 * cfg.modes, 2 * cfg.modes);
    for (const auto& e : cfg.t_entries) {
        t(e.i - 1, e.j - 1) = e.value;
        t(e.j - 1, e.i - 1) = -e.value;
    }
    out.spec.t = CouplingMatrix::from_dense(t, 0.0);
    std::vector<QuarticCoupling::Entry> g;
    for (const auto& e : cfg.g_entries) {
        g.push_back({{e.idx[0] - 1, e.idx[1] - 1, e.idx[2] - 1, e.idx[3] - 1}, e.value});
    }
    out.spec.g = QuarticCoupling(cfg.modes, g);
    return out;
}

}  // namespace majq
