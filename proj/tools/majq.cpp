// Copyright 2026 The majq Authors
// SPDX-License-Identifier: Apache-2.0

// majq: verification sweeps, drift-flow export and model presets.
//
// Exit codes: 0 pass, 1 verification failure, 2 usage/config error,
// 3 runtime/numerical error.

#include "majq/config.hpp"
#include "majq/dynamics.hpp"
#include "majq/verify.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

/// Shortest round-trip decimal, independent of the global locale.
std::string fmt(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

/// Interior/boundary start point from {"x_entries": [[a, b, value], ...]} (1-based, a < b).
majq::PhasePoint load_phase_point(const std::string& path, int modes)
{
    std::ifstream in(path);
    if (!in) {
        throw majq::ConfigError("cannot open initial-point file '" + path + "'");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw majq::ConfigError(path + ": JSON syntax error: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("x_entries") || !doc["x_entries"].is_array()) {
        throw majq::ConfigError(path + ": expected {\"x_entries\": [[a, b, value], ...]}");
    }
    majq::PhasePoint x(modes);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
    std::vector<bool> seen(static_cast<std::size_t>(x.size()), false);
    for (const auto& e : doc["x_entries"]) {
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer()
            || !e[2].is_number()) {
            throw majq::ConfigError(path + ": each entry must be [a, b, value]");
        }
        const int a = e[0].get<int>();
        const int b = e[1].get<int>();
        if (a < 1 || b > 2 * modes || a >= b) {
            throw majq::ConfigError(path + ": need 1 <= a < b <= " + std::to_string(2 * modes));
        }
        const int lin = majq::pair_linear(modes, a - 1, b - 1);
        if (seen[static_cast<std::size_t>(lin)]) {
            throw majq::ConfigError(path + ": duplicate entry (" + std::to_string(a) + ", " + std::to_string(b) + ")");
        }
        seen[static_cast<std::size_t>(lin)] = true;
        v[lin] = e[2].get<double>();
    }
    return {modes, v};
}

void write_trajectory_csv(std::ostream& os, const majq::Trajectory& traj, int modes)
{
    const auto pairs = majq::pair_enumerate(modes);
    os << "time";
    for (const auto& p : pairs) {
        os << ",x_" << p.alpha + 1 << "_" << p.beta + 1;
    }
    os << ",margin\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << fmt(traj.times[k]);
        const Eigen::VectorXd& v = traj.points[k].packed();
        for (int c = 0; c < v.size(); ++c) {
            os << ',' << fmt(v[c]);
        }
        os << ',' << fmt(traj.margins[k]) << '\n';
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Majorana Q-function phase-space toolkit"};
    app.require_subcommand(1);

    const std::map<std::string, majq::DriftForm> forms{{"eq36", majq::DriftForm::divergence_corrected},
                                                       {"eq50", majq::DriftForm::surface_closed_form}};
    const std::map<std::string, majq::Integrator> methods{{"euler", majq::Integrator::euler},
                                                          {"rk4", majq::Integrator::rk4}};

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    majq::DriftForm form = majq::DriftForm::divergence_corrected;

    auto* verify = app.add_subcommand("verify", "Run seeded verification sweeps");
    std::string suite = "all";
    verify->add_option("--config", config_path, "Model config (JSON)")->required()->check(CLI::ExistingFile);
    verify->add_option("--suite", suite, "identities | fpe | traceless | tangency | moment-m1 | all")
        ->check(CLI::IsMember({"identities", "fpe", "traceless", "tangency", "moment-m1", "all"}));
    verify->add_option("--seed", seed, "Override the config seed");
    verify->add_option("--out", out_path, "Write the JSON report here");
    verify->add_option("--drift-form", form, "Drift used for the extra comparison run (eq36 | eq50)")
        ->transform(CLI::CheckedTransformer(forms));

    auto* flow = app.add_subcommand("flow", "Integrate the drift flow and write a CSV trajectory");
    double dt = 1e-3;
    long steps = 1000;
    majq::Integrator method = majq::Integrator::rk4;
    std::string x0_path;
    bool project = false;
    flow->add_option("--config", config_path, "Model config (JSON)")->required()->check(CLI::ExistingFile);
    flow->add_option("--seed", seed, "Seed of the random boundary start point (default: config seed)");
    flow->add_option("--x0", x0_path, "Start point file {\"x_entries\": [[a, b, v], ...]} instead of a seed")
        ->check(CLI::ExistingFile);
    flow->add_option("--dt", dt, "Step size")->check(CLI::PositiveNumber);
    flow->add_option("--steps", steps, "Number of steps")->check(CLI::Range(1L, 100000000L));
    flow->add_option("--method", method, "euler | rk4")->transform(CLI::CheckedTransformer(methods));
    flow->add_option("--drift-form", form, "eq36 | eq50")->transform(CLI::CheckedTransformer(forms));
    flow->add_flag("--project", project, "Retract onto x^2 = -I after each step");
    flow->add_option("--out", out_path, "CSV output path (default: stdout)");

    auto* preset = app.add_subcommand("preset", "Expand a model preset into explicit couplings");
    int sites = 1;
    double hop = 1.0;
    double onsite = 4.0;
    std::string geometry = "chain";
    std::string preset_name = "hubbard";
    preset->add_option("name", preset_name, "Preset name")->check(CLI::IsMember({"hubbard"}));
    preset->add_option("--sites", sites, "Number of sites")->check(CLI::Range(1, 6));
    preset->add_option("--J", hop, "Hopping amplitude");
    preset->add_option("--U", onsite, "On-site interaction");
    preset->add_option("--geometry", geometry, "Lattice geometry (chain)");
    preset->add_option("--seed", seed, "Seed stored in the emitted config");
    preset->add_option("--out", out_path, "Write the config here (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (verify->parsed()) {
            majq::ModelConfig cfg = majq::load_config(config_path);
            if (seed) {
                cfg.seed = *seed;
            }
            const majq::VerificationReport rep =
                majq::run_verification(cfg, {*majq::parse_suite(suite), form});
            std::cout << rep.to_text();
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                if (!out) {
                    std::cerr << "error: cannot write report to '" << out_path << "'\n";
                    return kExitRuntime;
                }
                out << rep.to_json().dump(2) << '\n';
            }
            return rep.overall_pass() ? kExitPass : kExitFail;
        }

        if (flow->parsed()) {
            const majq::ModelConfig cfg = majq::load_config(config_path);
            const majq::HubbardModel model = majq::model_from_config(cfg);
            const majq::PhasePoint x0 = x0_path.empty()
                                            ? majq::random_boundary_point(cfg.modes, seed.value_or(cfg.seed))
                                            : load_phase_point(x0_path, cfg.modes);
            const majq::Trajectory traj = majq::flow(x0, model.spec, dt, steps, {method, form, project});
            if (out_path.empty()) {
                write_trajectory_csv(std::cout, traj, cfg.modes);
                std::cerr << "final margin " << fmt(traj.margins.back()) << "\n";
            } else {
                std::ofstream out(out_path, std::ios::binary);
                if (!out) {
                    std::cerr << "error: cannot write trajectory to '" << out_path << "'\n";
                    return kExitRuntime;
                }
                write_trajectory_csv(out, traj, cfg.modes);
                std::cout << "final margin " << fmt(traj.margins.back()) << "\n";
                std::cout << "max |margin| " << fmt(traj.max_abs_margin()) << "\n";
            }
            return kExitPass;
        }

        if (preset->parsed()) {
            const majq::HubbardModel model = majq::preset_hubbard(sites, hop, onsite, geometry);
            majq::ModelConfig cfg;
            cfg.modes = model.spec.modes();
            cfg.seed = seed.value_or(0);
            for (const auto& p : majq::pair_enumerate(cfg.modes)) {
                const double v = model.spec.t.packed()[p.linear];
                if (v != 0.0) {
                    cfg.t_entries.push_back({p.alpha + 1, p.beta + 1, v});
                }
            }
            for (const auto& e : model.spec.g.entries()) {
                cfg.g_entries.push_back({{e.idx[0] + 1, e.idx[1] + 1, e.idx[2] + 1, e.idx[3] + 1}, e.value});
            }
            const std::string text = majq::to_json(cfg).dump(2) + "\n";
            const std::string summary = "dropped identity constant " + fmt(model.identity_shift) + "\n";
            if (out_path.empty()) {
                std::cout << text;
                std::cerr << summary;
            } else {
                std::ofstream out(out_path);
                if (!out) {
                    std::cerr << "error: cannot write config to '" << out_path << "'\n";
                    return kExitRuntime;
                }
                out << text;
                std::cout << summary;
            }
            return kExitPass;
        }
    } catch (const majq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const majq::PreconditionError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const majq::DimensionError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
