// Copyright 2026 The majq Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file verify.hpp
 * @brief Seeded verification sweeps and the report they produce.
 *
 * Every check draws its instances from a seed derived from (config seed, check,
 * instance), so a report can be reproduced exactly from the seed it embeds.
 * When the config carries no couplings, each instance draws its own:
 * t ~ U(-1/2, 1/2) and two quartic terms g ~ U(-1/4, 1/4) (traceless sweeps use
 * every quartic term with g ~ U(-1, 1)).
 */

#pragma once

#include "majq/config.hpp"
#include "majq/dynamics.hpp"
#include "majq/errors.hpp"
#include "majq/fock_oracle.hpp"
#include "majq/fpe_kernel.hpp"
#include "majq/tensor_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace majq {

enum class Suite { identities, fpe, traceless, tangency, moment_m1, all };

inline std::optional<Suite> parse_suite(const std::string& name)
{
    if (name == "identities") return Suite::identities;
    if (name == "fpe") return Suite::fpe;
    if (name == "traceless") return Suite::traceless;
    if (name == "tangency") return Suite::tangency;
    if (name == "moment-m1") return Suite::moment_m1;
    if (name == "all") return Suite::all;
    return std::nullopt;
}

inline std::string suite_name(Suite s)
{
    switch (s) {
    case Suite::identities: return "identities";
    case Suite::fpe: return "fpe";
    case Suite::traceless: return "traceless";
    case Suite::tangency: return "tangency";
    case Suite::moment_m1: return "moment-m1";
    case Suite::all: return "all";
    }
    return "?";
}

inline std::string drift_form_name(DriftForm f)
{
    return f == DriftForm::divergence_corrected ? "eq36" : "eq50";
}

// ============================================================================
// Report
// ============================================================================

struct CheckRecord {
    std::string name;
    long instances = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    bool informational = false;  ///< recorded but excluded from the overall verdict
    std::string note;
};

struct VerificationReport {
    std::string suite;
    int modes = 0;
    std::uint64_t seed = 0;
    std::string drift_form = "eq36";
    std::vector<CheckRecord> checks;
    std::vector<std::string> notes;
    std::vector<std::pair<std::string, double>> timings;  ///< seconds per suite

    bool overall_pass() const
    {
        return std::all_of(checks.begin(), checks.end(),
                           [](const CheckRecord& c) { return c.informational || c.pass; });
    }

    nlohmann::json to_json() const
    {
        nlohmann::json doc;
        doc["suite"] = suite;
        doc["M"] = modes;
        doc["seed"] = seed;
        doc["drift_form"] = drift_form;
        doc["overall_pass"] = overall_pass();
        doc["checks"] = nlohmann::json::array();
        for (const auto& c : checks) {
            nlohmann::json j{{"name", c.name},
                             {"instances", c.instances},
                             {"max_residual", std::isfinite(c.max_residual) ? nlohmann::json(c.max_residual)
                                                                           : nlohmann::json(nullptr)},
                             {"tolerance", c.tolerance},
                             {"pass", c.pass},
                             {"informational", c.informational}};
            if (!c.note.empty()) {
                j["note"] = c.note;
            }
            doc["checks"].push_back(j);
        }
        doc["notes"] = notes;
        doc["timings_s"] = nlohmann::json::object();
        for (const auto& [k, v] : timings) {
            doc["timings_s"][k] = v;
        }
        return doc;
    }

    std::string to_text() const
    {
        std::ostringstream os;
        os.imbue(std::locale::classic());
        os << "suite " << suite << "  M=" << modes << "  seed=" << seed << "  drift-form=" << drift_form << "\n";
        for (const auto& c : checks) {
            const char* tag = c.informational ? "INFO" : (c.pass ? "PASS" : "FAIL");
            os << "  " << tag << "  " << std::left << std::setw(22) << c.name << std::right
               << " n=" << std::setw(4) << c.instances << "  max=" << std::scientific << std::setprecision(3)
               << c.max_residual << "  tol=" << c.tolerance << std::defaultfloat;
            if (!c.note.empty()) {
                os << "  (" << c.note << ")";
            }
            os << "\n";
        }
        for (const auto& n : notes) {
            os << "  note: " << n << "\n";
        }
        for (const auto& [k, v] : timings) {
            os << "  time " << k << ": " << std::fixed << std::setprecision(2) << v << " s" << std::defaultfloat << "\n";
        }
        os << "overall: " << (overall_pass() ? "PASS" : "FAIL") << "\n";
        return os.str();
    }
};

// ============================================================================
// Sweep plumbing
// ============================================================================

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent seed for (check, instance, attempt).
inline std::uint64_t derive_seed(std::uint64_t base, const std::string& check, long instance, int attempt = 0)
{
    std::uint64_t h = splitmix64(base);
    for (char c : check) {
        h = splitmix64(h ^ static_cast<unsigned char>(c));
    }
    h = splitmix64(h ^ static_cast<std::uint64_t>(instance));
    return splitmix64(h ^ (static_cast<std::uint64_t>(attempt) << 32));
}

inline double uniform01(std::uint64_t seed)
{
    return static_cast<double>(splitmix64(seed) >> 11) * 0x1.0p-53;
}

class CheckAccumulator {
public:
    CheckAccumulator(std::string name, double tolerance, bool informational = false)
    {
        rec_.name = std::move(name);
        rec_.tolerance = tolerance;
        rec_.informational = informational;
    }

    void add(double residual)
    {
        ++rec_.instances;
        if (!std::isfinite(residual)) {
            rec_.max_residual = std::numeric_limits<double>::infinity();
        } else {
            rec_.max_residual = std::max(rec_.max_residual, residual);
        }
    }

    void note(std::string n) { rec_.note = std::move(n); }

    CheckRecord finish() const
    {
        CheckRecord r = rec_;
        r.pass = r.instances > 0 && r.max_residual <= r.tolerance;
        return r;
    }

private:
    CheckRecord rec_;
};

/**
 * Runs `body(seed)` for each instance, resampling (new seed) when the oracle
 * hits a singular or degenerate point. Returns the number of resamples.
 */
inline int run_instances(std::uint64_t base, const std::string& check, long count,
                         const std::function<void(std::uint64_t, long)>& body)
{
    constexpr int max_attempts = 16;
    int resamples = 0;
    for (long k = 0; k < count; ++k) {
        for (int attempt = 0;; ++attempt) {
            try {
                body(derive_seed(base, check, k, attempt), k);
                break;
            } catch (const SingularityError&) {
            } catch (const StencilError&) {
            } catch (const DegenerateBasisError&) {
            }
            ++resamples;
            if (attempt + 1 == max_attempts) {
                throw DivergenceError(check + ": no regular sample after " + std::to_string(max_attempts)
                                          + " attempts",
                                      k);
            }
        }
    }
    return resamples;
}

inline HamiltonianSpec random_model(int modes, std::uint64_t seed, int quartic_terms, double g_scale)
{
    HamiltonianSpec spec(modes);
    spec.t = random_coupling_matrix(modes, splitmix64(seed ^ 0x7411ULL), 0.5);
    if (modes >= 2 && quartic_terms != 0) {
        spec.g = random_quartic(modes, splitmix64(seed ^ 0x6011ULL), quartic_terms, g_scale);
    }
    return spec;
}

/// Interior point with spectral norm in [0.1, 0.8].
inline PhasePoint sample_interior(int modes, std::uint64_t seed)
{
    return random_interior_point(modes, seed, 0.1 + 0.7 * uniform01(seed ^ 0x5eedULL));
}

}  // namespace detail

// ============================================================================
// Suites
// ============================================================================

struct VerifyOptions {
    Suite suite = Suite::all;
    DriftForm form = DriftForm::divergence_corrected;
};

class Verifier {
public:
    explicit Verifier(const ModelConfig& cfg) : cfg_(cfg), model_(model_from_config(cfg)) {}

    /// Couplings for one instance: the configured model, or a seeded random one.
    HamiltonianSpec couplings(std::uint64_t seed, int quartic_terms = 2, double g_scale = 0.25) const
    {
        if (cfg_.has_couplings()) {
            return model_.spec;
        }
        return detail::random_model(cfg_.modes, seed, quartic_terms, g_scale);
    }

    void identities(VerificationReport& rep) const
    {
        const int m = cfg_.modes;
        const MajoranaSet maj(m);
        const int n = maj.count();
        const std::uint64_t base = cfg_.seed;

        {
            detail::CheckAccumulator acc("anticommutation", cfg_.tolerance("anticommutation", 1e-13));
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    FockOperator ac = maj.gamma(i) * maj.gamma(j) + maj.gamma(j) * maj.gamma(i);
                    if (i == j) {
                        ac -= 2.0 * FockOperator::Identity(maj.dim(), maj.dim());
                    }
                    acc.add(ac.cwiseAbs().maxCoeff());
                }
            }
            rep.checks.push_back(acc.finish());
        }
        {
            detail::CheckAccumulator acc("basis_origin", cfg_.tolerance("basis_origin", 1e-14));
            const FockOperator lam = gaussian_basis(PhasePoint(m), maj);
            acc.add((lam - FockOperator::Identity(maj.dim(), maj.dim()) / maj.dim()).cwiseAbs().maxCoeff());
            rep.checks.push_back(acc.finish());
        }
        if (m == 1) {
            detail::CheckAccumulator acc("basis_single_mode", cfg_.tolerance("basis_single_mode", 1e-12));
            for (double s : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
                Eigen::VectorXd p(1);
                p[0] = s;
                FockOperator expect = FockOperator::Zero(2, 2);
                expect(0, 0) = (1.0 - s) / 2.0;
                expect(1, 1) = (1.0 + s) / 2.0;
                acc.add((gaussian_basis(PhasePoint(1, p), maj) - expect).cwiseAbs().maxCoeff());
            }
            rep.checks.push_back(acc.finish());
        }
        {
            detail::CheckAccumulator acc("boundary_purity", cfg_.tolerance("boundary_purity", 1e-10));
            const int r = detail::run_instances(base, "boundary_purity", 10, [&](std::uint64_t seed, long) {
                const FockOperator lam = gaussian_basis(random_boundary_point(m, seed), maj);
                acc.add((lam * lam - lam).cwiseAbs().maxCoeff());
            });
            note_resamples(rep, "boundary_purity", r);
            rep.checks.push_back(acc.finish());
        }
        {
            // Tr[Lambda X] = x is established for one mode only; larger M is reported.
            detail::CheckAccumulator acc("covariance", cfg_.tolerance("covariance", 1e-12), m > 1);
            const int r = detail::run_instances(base, "covariance", 10, [&](std::uint64_t seed, long) {
                const PhasePoint x = detail::sample_interior(m, seed);
                acc.add((covariance_of_basis(x, maj) - x.dense()).cwiseAbs().maxCoeff());
            });
            note_resamples(rep, "covariance", r);
            rep.checks.push_back(acc.finish());
        }
        {
            detail::CheckAccumulator acc("quadratic_identities", cfg_.tolerance("quadratic_identities", 1e-6));
            const int r = detail::run_instances(base, "quadratic_identities", 20, [&](std::uint64_t seed, long) {
                acc.add(verify_quadratic_identities(detail::sample_interior(m, seed), maj, 1e-4).max());
            });
            note_resamples(rep, "quadratic_identities", r);
            rep.checks.push_back(acc.finish());
        }
        if (m >= 2) {
            detail::CheckAccumulator acc("four_gamma", cfg_.tolerance("four_gamma", 1e-4));
            const auto tuples = distinct_tuples4(n);
            const int r = detail::run_instances(base, "four_gamma", 5, [&](std::uint64_t seed, long) {
                const auto fg = verify_four_gamma(detail::sample_interior(m, seed), maj, tuples, 1e-3);
                acc.add(std::max(fg.max_left(), fg.max_right()));
            });
            acc.note(std::to_string(tuples.size()) + " ordered tuples per point");
            note_resamples(rep, "four_gamma", r);
            rep.checks.push_back(acc.finish());
        }
        if (cfg_.preset) {
            detail::CheckAccumulator acc("hubbard_preset", cfg_.tolerance("hubbard_preset", 1e-12));
            const FockOperator h = build_hamiltonian(model_.spec, maj);
            const FockOperator direct =
                build_fermi_hubbard(cfg_.preset->sites, cfg_.preset->hop, cfg_.preset->onsite, maj);
            acc.add((h + model_.identity_shift * FockOperator::Identity(maj.dim(), maj.dim()) - direct)
                        .cwiseAbs()
                        .maxCoeff());
            acc.note("identity shift " + std::to_string(model_.identity_shift));
            rep.checks.push_back(acc.finish());
        }
    }

    void fpe(VerificationReport& rep, DriftForm form) const
    {
        const int m = cfg_.modes;
        const MajoranaSet maj(m);
        const long count = m >= 3 ? 5 : 20;
        const std::uint64_t base = cfg_.seed;

        detail::CheckAccumulator acc("fpe", cfg_.tolerance("fpe", 1e-5));
        detail::CheckAccumulator alt("fpe_eq50", 0.0, true);
        const int r = detail::run_instances(base, "fpe", count, [&](std::uint64_t seed, long) {
            const HamiltonianSpec spec = couplings(seed);
            const DensityMatrix rho = random_density_matrix(maj.dim(), detail::splitmix64(seed ^ 0x3140ULL));
            const PhasePoint x = detail::sample_interior(m, seed);
            const double res = verify_fpe(rho, spec, x, maj, 1e-3).residual;
            double res_alt = 0.0;
            if (form == DriftForm::surface_closed_form) {
                res_alt = verify_fpe(rho, spec, x, maj, 1e-3, DriftForm::surface_closed_form).residual;
            }
            acc.add(res);
            if (form == DriftForm::surface_closed_form) {
                alt.add(res_alt);
            }
        });
        note_resamples(rep, "fpe", r);
        rep.checks.push_back(acc.finish());
        if (form == DriftForm::surface_closed_form) {
            alt.note("alternative drift, recorded for comparison only");
            rep.checks.push_back(alt.finish());
        }

        detail::CheckAccumulator div_d("div_diffusion", cfg_.tolerance("div_diffusion", 1e-6));
        detail::CheckAccumulator div_a("drift_divergence", cfg_.tolerance("drift_divergence", 1e-6));
        detail::CheckAccumulator ddd("double_divergence", cfg_.tolerance("double_divergence", 1e-5));
        detail::CheckAccumulator forms("rhs_forms", cfg_.tolerance("rhs_forms", 1e-12));
        detail::run_instances(base, "divergence", 50, [&](std::uint64_t seed, long) {
            const HamiltonianSpec spec = couplings(seed);
            const PhasePoint x = detail::sample_interior(m, seed);
            div_d.add((div_diffusion(x, spec.g) - fd_div_diffusion(x, spec.g, 1e-4)).cwiseAbs().maxCoeff());
            div_a.add(std::abs(fd_drift_divergence(x, spec.t, spec.g, DriftForm::divergence_corrected, 1e-4)));
            ddd.add(std::abs(fd_diffusion_double_divergence(x, spec.g, 1e-3)));

            std::mt19937_64 rng(detail::splitmix64(seed ^ 0xf0f0ULL));
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            const int np = x.size();
            Eigen::VectorXd grad(np);
            Eigen::MatrixXd hess(np, np);
            for (int a = 0; a < np; ++a) {
                grad[a] = u(rng);
                for (int b = 0; b <= a; ++b) {
                    hess(a, b) = hess(b, a) = u(rng);
                }
            }
            const double q = u(rng);
            const double lhs = fpe_rhs(x, spec.t, spec.g, grad, hess);
            const double rhs = conservative_rhs(x, spec.t, spec.g, q, grad, hess);
            const double scale = std::max({std::abs(lhs), std::abs(rhs),
                                           drift_bar(x, spec.t, spec.g).cwiseAbs().dot(grad.cwiseAbs()), 1e-300});
            forms.add(std::abs(lhs - rhs) / scale);
        });
        rep.checks.push_back(div_d.finish());
        rep.checks.push_back(div_a.finish());
        rep.checks.push_back(ddd.finish());
        rep.checks.push_back(forms.finish());
    }

    void traceless(VerificationReport& rep) const
    {
        const int m = cfg_.modes;
        const std::uint64_t base = cfg_.seed;
        detail::CheckAccumulator diag("traceless", cfg_.tolerance("traceless", 1e-12));
        detail::CheckAccumulator sum("trace_sum", cfg_.tolerance("trace_sum", 1e-10));
        detail::CheckAccumulator dec("decomposition", cfg_.tolerance("decomposition", 1e-12));
        detail::CheckAccumulator psd("forward_psd", cfg_.tolerance("forward_psd", 1e-12));
        long forward = 0;
        long backward = 0;
        detail::run_instances(base, "traceless", 100, [&](std::uint64_t seed, long k) {
            const QuarticCoupling g = couplings(seed, -1, 1.0).g;
            const PhasePoint x = k % 2 == 0 ? random_boundary_point(m, seed) : detail::sample_interior(m, seed);
            const DiffusionMatrix d = diffusion(x, g);
            diag.add(d.diagonal().cwiseAbs().maxCoeff());
            const ChannelSpectrum spec = channel_spectrum(x, g);
            sum.add(std::abs(spec.eigenvalue_sum()));
            forward += spec.forward_count;
            backward += spec.backward_count;
            const ChannelDecomposition ch = diffusion_channels(x, g);
            // Relative to the largest summand: D itself cancels to zero at M = 2.
            double scale = d.cwiseAbs().maxCoeff();
            double worst = 0.0;
            for (const auto& c : ch.channels) {
                scale = std::max(scale, std::abs(c.weight) * (c.b_minus.squaredNorm() + c.b_plus.squaredNorm()));
                if (c.weight > 0.0) {
                    const Eigen::MatrixXd fwd = c.weight * c.b_minus * c.b_minus.transpose();
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fwd, Eigen::EigenvaluesOnly);
                    worst = std::max(worst, -es.eigenvalues().minCoeff());
                }
            }
            psd.add(worst);
            dec.add((ch.reconstruct() - d).cwiseAbs().maxCoeff() / std::max(scale, 1e-300));
        });
        sum.note("forward/backward eigenvalues in total: " + std::to_string(forward) + "/" + std::to_string(backward));
        rep.checks.push_back(diag.finish());
        rep.checks.push_back(sum.finish());
        rep.checks.push_back(dec.finish());
        rep.checks.push_back(psd.finish());
    }

    void tangency(VerificationReport& rep, DriftForm form) const
    {
        const int m = cfg_.modes;
        const std::uint64_t base = cfg_.seed;
        detail::CheckAccumulator tan("tangency", cfg_.tolerance("tangency", 1e-9), form != DriftForm::divergence_corrected);
        detail::run_instances(base, "tangency", 50, [&](std::uint64_t seed, long) {
            const HamiltonianSpec spec = couplings(seed);
            const PhasePoint x = random_boundary_point(m, seed);
            acc_max(tan, tangency_residual(x, spec.t, spec.g, form));
        });
        rep.checks.push_back(tan.finish());

        detail::CheckAccumulator margin("flow_margin", cfg_.tolerance("flow_margin", 1e-7),
                                        form != DriftForm::divergence_corrected);
        detail::run_instances(base, "flow_margin", 5, [&](std::uint64_t seed, long) {
            const HamiltonianSpec spec = couplings(seed);
            const Trajectory traj = flow(random_boundary_point(m, seed), spec, 1e-3, 1000, {Integrator::rk4, form});
            margin.add(traj.max_abs_margin());
        });
        margin.note("rk4, dt = 1e-3, unit time");
        rep.checks.push_back(margin.finish());
    }

    void moment(VerificationReport& rep) const
    {
        detail::CheckAccumulator acc("moment", cfg_.tolerance("moment", 1e-6));
        detail::CheckAccumulator vac("moment_vacuum", cfg_.tolerance("moment_vacuum", 1e-6));
        std::vector<DensityMatrix> states{basis_projector(2, 0), basis_projector(2, 1),
                                          DensityMatrix::Identity(2, 2) / 2.0};
        for (long k = 0; k < 2; ++k) {
            states.push_back(random_density_matrix(2, detail::derive_seed(cfg_.seed, "moment", k)));
        }
        for (std::size_t k = 0; k < states.size(); ++k) {
            const MomentCheck mc = verify_moment_identity_m1(states[k]);
            acc.add(std::abs(mc.lhs - mc.rhs));
            if (k == 0) {
                vac.add(std::max(std::abs(mc.lhs + 1.0), std::abs(mc.rhs + 1.0)));
            }
        }
        rep.checks.push_back(acc.finish());
        rep.checks.push_back(vac.finish());
    }

    /// Runs a suite. Throws ConfigError when M is outside the suite's range.
    VerificationReport run(const VerifyOptions& opts) const
    {
        const int m = cfg_.modes;
        VerificationReport rep;
        rep.suite = suite_name(opts.suite);
        rep.modes = m;
        rep.seed = cfg_.seed;
        rep.drift_form = drift_form_name(opts.form);
        if (!cfg_.has_couplings()) {
            rep.notes.push_back("no couplings in config: each instance draws seeded random couplings");
        }
        if (cfg_.preset) {
            rep.notes.push_back("Hubbard preset drops the identity constant " + std::to_string(model_.identity_shift));
        }

        auto cap = [&](Suite s, int max_modes) {
            if (m > max_modes) {
                throw ConfigError("suite " + suite_name(s) + " supports M <= " + std::to_string(max_modes)
                                  + " (config has M = " + std::to_string(m) + ")");
            }
        };
        auto timed = [&](const std::string& name, const std::function<void()>& f) {
            const auto t0 = std::chrono::steady_clock::now();
            f();
            rep.timings.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        };

        switch (opts.suite) {
        case Suite::identities:
            cap(opts.suite, 3);
            timed("identities", [&] { identities(rep); });
            break;
        case Suite::fpe:
            cap(opts.suite, 3);
            timed("fpe", [&] { fpe(rep, opts.form); });
            break;
        case Suite::traceless:
            cap(opts.suite, 4);
            timed("traceless", [&] { traceless(rep); });
            break;
        case Suite::tangency:
            cap(opts.suite, 4);
            timed("tangency", [&] { tangency(rep, DriftForm::divergence_corrected); });
            break;
        case Suite::moment_m1:
            if (m != 1) {
                throw ConfigError("suite moment-m1 needs M = 1 (config has M = " + std::to_string(m) + ")");
            }
            timed("moment-m1", [&] { moment(rep); });
            break;
        case Suite::all:
            cap(opts.suite, 4);
            if (m <= 3) {
                timed("identities", [&] { identities(rep); });
                timed("fpe", [&] { fpe(rep, opts.form); });
            } else {
                rep.notes.push_back("identities and fpe skipped: exact oracle limited to M <= 3");
            }
            timed("traceless", [&] { traceless(rep); });
            timed("tangency", [&] { tangency(rep, DriftForm::divergence_corrected); });
            if (m == 1) {
                timed("moment-m1", [&] { moment(rep); });
            }
            break;
        }
        return rep;
    }

private:
    static void acc_max(detail::CheckAccumulator& acc, const Eigen::MatrixXd& m) { acc.add(m.cwiseAbs().maxCoeff()); }

    static void note_resamples(VerificationReport& rep, const std::string& check, int resamples)
    {
        if (resamples > 0) {
            rep.notes.push_back(check + ": resampled " + std::to_string(resamples)
                                + " singular point(s) of the Gaussian basis");
        }
    }

    ModelConfig cfg_;
    HubbardModel model_;
};

inline VerificationReport run_verification(const ModelConfig& cfg, const VerifyOptions& opts)
{
    return Verifier(cfg).run(opts);
}

}  // namespace majq
