// Copyright 2026 The majq Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file dynamics.hpp
 * @brief Deterministic drift flow on the phase space and spectral analysis of
 *        the diffusion matrix.
 *
 * The integrator is fixed-step and, unless asked, never projects back onto the
 * boundary x^2 = -I, so the recorded margin measures how well the drift stays
 * tangent to it.
 */

#pragma once

#include "majq/errors.hpp"
#include "majq/fock_oracle.hpp"
#include "majq/fpe_kernel.hpp"
#include "majq/tensor_core.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace majq {

// ============================================================================
// Drift flow
// ============================================================================

enum class Integrator { euler, rk4 };

struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> points;
    std::vector<double> margins;  ///< domain_margin at each recorded point

    std::size_t size() const noexcept { return times.size(); }
    const PhasePoint& final_point() const { return points.back(); }

    double max_abs_margin() const
    {
        double m = 0.0;
        for (double v : margins) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }
};

struct FlowOptions {
    Integrator method = Integrator::rk4;
    DriftForm form = DriftForm::divergence_corrected;
    bool project = false;  ///< polar retraction onto x^2 = -I after every step
};

/// Nearest point of x^2 = -I: the orthogonal polar factor of x, re-antisymmetrized.
inline PhasePoint retract_to_boundary(const PhasePoint& x)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x.dense(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd q = svd.matrixU() * svd.matrixV().transpose();
    q = 0.5 * (q - q.transpose()).eval();
    return PhasePoint::from_dense(q, 1e-10);
}

/**
 * Integrates dx/dt = A(x) for `steps` steps of size dt. The trajectory holds
 * steps + 1 points, starting with x0 at time 0.
 */
inline Trajectory flow(const PhasePoint& x0, const HamiltonianSpec& spec, double dt, long steps,
                       const FlowOptions& opts = {})
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw PreconditionError("flow needs a finite dt > 0", dt);
    }
    if (steps < 1) {
        throw PreconditionError("flow needs steps >= 1", static_cast<double>(steps));
    }
    if (x0.modes() != spec.modes()) {
        throw DimensionError("initial point and Hamiltonian disagree on M");
    }
    const int m = x0.modes();
    auto rate = [&](const Eigen::VectorXd& v) { return drift(PhasePoint(m, v), spec.t, spec.g, opts.form); };

    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(steps) + 1);
    traj.points.reserve(static_cast<std::size_t>(steps) + 1);
    traj.margins.reserve(static_cast<std::size_t>(steps) + 1);
    traj.times.push_back(0.0);
    traj.points.push_back(x0);
    traj.margins.push_back(domain_margin(x0));

    Eigen::VectorXd v = x0.packed();
    for (long s = 1; s <= steps; ++s) {
        if (opts.method == Integrator::euler) {
            v += dt * rate(v);
        } else {
            const Eigen::VectorXd k1 = rate(v);
            const Eigen::VectorXd k2 = rate(v + 0.5 * dt * k1);
            const Eigen::VectorXd k3 = rate(v + 0.5 * dt * k2);
            const Eigen::VectorXd k4 = rate(v + dt * k3);
            v += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!v.allFinite()) {
            throw DivergenceError("drift flow produced a non-finite state at step " + std::to_string(s), s);
        }
        PhasePoint x(m, v);
        if (opts.project) {
            x = retract_to_boundary(x);
            v = x.packed();
        }
        traj.times.push_back(static_cast<double>(s) * dt);
        traj.margins.push_back(domain_margin(x));
        traj.points.push_back(std::move(x));
    }
    return traj;
}

// ============================================================================
// Channel spectrum
// ============================================================================

struct ChannelSpectrum {
    Eigen::VectorXd eigenvalues;  ///< ascending
    int forward_count = 0;        ///< > tol
    int backward_count = 0;       ///< < -tol
    int null_count = 0;

    double eigenvalue_sum() const { return eigenvalues.sum(); }
};

/// Eigenvalues of D(x) classified by sign at tolerance `tol`.
inline ChannelSpectrum channel_spectrum(const PhasePoint& x, const QuarticCoupling& g, double tol = 1e-10)
{
    const DiffusionMatrix d = diffusion(x, g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (d + d.transpose()), Eigen::EigenvaluesOnly);
    ChannelSpectrum out;
    out.eigenvalues = es.eigenvalues();
    for (int k = 0; k < out.eigenvalues.size(); ++k) {
        const double v = out.eigenvalues[k];
        if (v > tol) {
            ++out.forward_count;
        } else if (v < -tol) {
            ++out.backward_count;
        } else {
            ++out.null_count;
        }
    }
    return out;
}

// ============================================================================
// Quadratic sector against exact evolution
// ============================================================================

struct CovarianceComparison {
    std::optional<double> rate;  ///< fitted c; empty when the flow is trivial ([T, Gamma0] = 0)
    double max_deviation = 0.0;
    std::vector<double> times;
    std::vector<double> deviations;
};

/**
 * Evolves the pure Gaussian Lambda(x0) exactly under H = i sum t_ij g_i g_j and
 * compares its covariance with exp(c tau T) Gamma0 exp(-c tau T). The rate c is
 * fitted at the first sample and then held fixed for the remaining samples.
 */
inline CovarianceComparison gaussian_covariance_comparison(const PhasePoint& x0, const CouplingMatrix& t,
                                                           double horizon, double dt)
{
    if (x0.modes() != t.modes()) {
        throw DimensionError("phase point and coupling matrix disagree on M");
    }
    if (x0.modes() > 3) {
        throw DimensionError("exact covariance comparison is limited to M <= 3");
    }
    if (!(dt > 0.0) || !(horizon >= dt)) {
        throw PreconditionError("need 0 < dt <= horizon", dt);
    }
    const MajoranaSet maj(x0.modes());
    HamiltonianSpec spec(x0.modes());
    spec.t = t;
    const FockOperator h = build_hamiltonian(spec, maj);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eh(h);
    const FockOperator rho0 = gaussian_basis(x0, maj);

    const int n = maj.count();
    auto exact_cov = [&](double tau) {
        const Eigen::VectorXcd phases =
            (eh.eigenvalues().cast<cplx>() * cplx(0.0, -tau)).array().exp().matrix();
        const FockOperator u = eh.eigenvectors() * phases.asDiagonal() * eh.eigenvectors().adjoint();
        const FockOperator rho = u * rho0 * u.adjoint();
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                cov(a, b) = trace_product(rho, maj.pair_operator(a, b)).real();
                cov(b, a) = -cov(a, b);
            }
        }
        return cov;
    };
    const Eigen::MatrixXd tm = t.dense();
    const Eigen::MatrixXd gamma0 = exact_cov(0.0);
    auto transported = [&](double c, double tau) {
        const Eigen::MatrixXd e = (c * tau * tm).exp();
        return Eigen::MatrixXd(e * gamma0 * e.transpose());
    };

    CovarianceComparison out;
    const long samples = std::lround(horizon / dt);
    const double tau1 = dt;
    const Eigen::MatrixXd first = exact_cov(tau1);
    const Eigen::MatrixXd generator = tm * gamma0 - gamma0 * tm;
    double c = 0.0;
    if (generator.norm() > 1e-12) {
        const double c0 = (generator.cwiseProduct(first - gamma0)).sum() / (tau1 * generator.squaredNorm());
        auto misfit = [&](double cc) { return (transported(cc, tau1) - first).squaredNorm(); };
        const double width = 0.5 * std::abs(c0) + 1.0;
        c = boost::math::tools::brent_find_minima(misfit, c0 - width, c0 + width, 52).first;
        out.rate = c;
    }
    for (long s = 1; s <= samples; ++s) {
        const double tau = static_cast<double>(s) * dt;
        const double dev = (exact_cov(tau) - transported(c, tau)).cwiseAbs().maxCoeff();
        out.times.push_back(tau);
        out.deviations.push_back(dev);
        out.max_deviation = std::max(out.max_deviation, dev);
    }
    return out;
}

}  // namespace majq
