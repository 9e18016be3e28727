// Copyright 2026 The majq Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file fpe_kernel.hpp
 * @brief Closed-form coefficients of the Q-function Fokker-Planck equation.
 *
 * Notation. For a phase point x we use x^{+-} = x +- iI and the four-index
 * products X_ij^{ab} = x^+_{ia} x^-_{bj}. Their real and imaginary parts are
 *
 *     Im X_ij^{ab} = -(x_ia d_bj + d_ia x_jb),
 *     Re X_ij^{ab} = -(x_ia x_jb - d_ia d_bj).
 *
 * Vectors over pairs are indexed by PairIndex::linear, i.e. by a < b only.
 * Writing G_ij = sum_kl g_ijkl x_kl, every first-order coefficient here is a
 * contraction sum_ij c_ij Im X_ij^{ab} with an antisymmetric c built from t and G.
 *
 * With these conventions
 *
 *     dQ/dt = -Abar^a d_a Q + (1/2) D^{am} d_a d_m Q,
 *     Abar  = 4 Im X_ij (3 G_ij - t_ij),
 *     D     = -8 g_ijkl Im(X_ij X_kl),
 *     d_m D^{am} = -8 (3 - 2M) G_ij Im X_ij^a,
 *     A     = Abar + d_m D^{am} = 4 Im X_ij ((4M - 3) G_ij - t_ij).
 */

#pragma once

#include "majq/errors.hpp"
#include "majq/tensor_core.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace majq {

using DriftVector = Eigen::VectorXd;
using DiffusionMatrix = Eigen::MatrixXd;

/// Which first-order coefficient is used as the drift A.
enum class DriftForm {
    /// A = Abar + div D, the definition that makes the equation probability conserving.
    divergence_corrected,
    /// A = -4 Im X_ij ((30 - 16M) G_ij - t_ij); alternative closed form kept for diagnostics.
    surface_closed_form,
};

struct PlusMinus {
    Eigen::MatrixXcd plus;
    Eigen::MatrixXcd minus;
};

inline PlusMinus x_plus_minus(const PhasePoint& x)
{
    const Eigen::MatrixXcd xd = x.dense().cast<std::complex<double>>();
    const Eigen::MatrixXcd ii = std::complex<double>(0.0, 1.0)
                                * Eigen::MatrixXcd::Identity(x.dim(), x.dim());
    return {xd + ii, xd - ii};
}

namespace detail {

inline double kron(int a, int b) { return a == b ? 1.0 : 0.0; }

inline void check_indices(const PhasePoint& x, std::initializer_list<int> idx)
{
    for (int v : idx) {
        if (v < 0 || v >= x.dim()) {
            throw IndexError("index " + std::to_string(v) + " outside [0, " + std::to_string(x.dim()) + ")");
        }
    }
}

/// sum_ij c_ij Im X_ij^{ab} for every pair a < b; equals (x c - c x)_ab for antisymmetric c.
inline DriftVector contract_im_x(const PhasePoint& x, const Eigen::MatrixXd& c)
{
    const int n = x.dim();
    DriftVector out(x.size());
    for (const auto& p : pair_enumerate(x.modes())) {
        double s = 0.0;
        // Im X_ij^{ab} is non-zero only for j = b or i = a.
        for (int i = 0; i < n; ++i) {
            s -= c(i, p.beta) * x(i, p.alpha);
        }
        for (int j = 0; j < n; ++j) {
            s -= c(p.alpha, j) * x(j, p.beta);
        }
        out[p.linear] = s;
    }
    return out;
}

/// Column (i*2M + j) holds X_ij^{ab} over all pairs a < b.
inline Eigen::MatrixXcd x_table(const PhasePoint& x)
{
    const int n = x.dim();
    const auto pm = x_plus_minus(x);
    const auto pairs = pair_enumerate(x.modes());
    Eigen::MatrixXcd table(x.size(), n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (const auto& p : pairs) {
                table(p.linear, i * n + j) = pm.plus(i, p.alpha) * pm.minus(p.beta, j);
            }
        }
    }
    return table;
}

/**
 * sum_{a<b} d_{ab} [ sum_ij c_ij(x) Im X_ij^{ab} ] where c = slope * G(x) + const part.
 *
 * Uses d_{ab} G_ij = 2 g_ijab and d_{ab} Im X_ij^{ab} = d_ib d_bj - d_ia d_ja.
 */
inline double divergence_of_contraction(const PhasePoint& x, const QuarticCoupling& g, double slope,
                                        const Eigen::MatrixXd& c)
{
    const int n = x.dim();
    double total = 0.0;
    for (const auto& p : pair_enumerate(x.modes())) {
        const int a = p.alpha;
        const int b = p.beta;
        if (slope != 0.0 && !g.empty()) {
            for (int i = 0; i < n; ++i) {
                total += 2.0 * slope * g(i, b, a, b) * (-x(i, a));
            }
            for (int j = 0; j < n; ++j) {
                total += 2.0 * slope * g(a, j, a, b) * (-x(j, b));
            }
        }
        total += c(b, b) - c(a, a);
    }
    return total;
}

inline void check_same_modes(const PhasePoint& x, int modes, const char* what)
{
    if (x.modes() != modes) {
        throw DimensionError(std::string(what) + " has M = " + std::to_string(modes)
                             + " but the phase point has M = " + std::to_string(x.modes()));
    }
}

}  // namespace detail

/// Im X_ij^{ab}.
inline double im_X(const PhasePoint& x, int i, int j, int a, int b)
{
    detail::check_indices(x, {i, j, a, b});
    return -(x(i, a) * detail::kron(b, j) + detail::kron(i, a) * x(j, b));
}

/// Re X_ij^{ab}.
inline double re_X(const PhasePoint& x, int i, int j, int a, int b)
{
    detail::check_indices(x, {i, j, a, b});
    return -(x(i, a) * x(j, b) - detail::kron(i, a) * detail::kron(b, j));
}

/// First-order coefficient Abar of the non-conservative form.
inline DriftVector drift_bar(const PhasePoint& x, const CouplingMatrix& t, const QuarticCoupling& g)
{
    detail::check_same_modes(x, t.modes(), "t");
    detail::check_same_modes(x, g.modes(), "g");
    // The i*delta_kl part of x^+_kl drops out against the antisymmetric g.
    const Eigen::MatrixXd c = 12.0 * g.contract(x) - 4.0 * t.dense();
    return detail::contract_im_x(x, c);
}

/// Closed-form divergence d_m D^{am}.
inline DriftVector div_diffusion(const PhasePoint& x, const QuarticCoupling& g)
{
    detail::check_same_modes(x, g.modes(), "g");
    const double factor = -8.0 * (3.0 - 2.0 * x.modes());
    return detail::contract_im_x(x, factor * g.contract(x));
}

/// Drift A of the conservative Fokker-Planck form.
inline DriftVector drift(const PhasePoint& x, const CouplingMatrix& t, const QuarticCoupling& g,
                         DriftForm form = DriftForm::divergence_corrected)
{
    if (form == DriftForm::divergence_corrected) {
        return drift_bar(x, t, g) + div_diffusion(x, g);
    }
    detail::check_same_modes(x, t.modes(), "t");
    detail::check_same_modes(x, g.modes(), "g");
    const double m = x.modes();
    const Eigen::MatrixXd c = -4.0 * ((30.0 - 16.0 * m) * g.contract(x) - t.dense());
    return detail::contract_im_x(x, c);
}

/// Diffusion D^{am} = -8 sum_ijkl g_ijkl Im(X_ij^a X_kl^m) over independent pairs.
inline DiffusionMatrix diffusion(const PhasePoint& x, const QuarticCoupling& g)
{
    detail::check_same_modes(x, g.modes(), "g");
    const int n = x.dim();
    const int np = x.size();
    DiffusionMatrix d = DiffusionMatrix::Zero(np, np);
    if (g.empty()) {
        return d;
    }
    const Eigen::MatrixXcd table = detail::x_table(x);
    // Y_ij = sum_kl g_ijkl X_kl, so D = -8 sum_ij Im(X_ij Y_ij^T).
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(np, n * n);
    for (const auto& e : g.entries()) {
        for (const auto& p : permutations4()) {
            const int i = e.idx[p.order[0]];
            const int j = e.idx[p.order[1]];
            const int k = e.idx[p.order[2]];
            const int l = e.idx[p.order[3]];
            y.col(i * n + j) += (p.sign * e.value) * table.col(k * n + l);
        }
    }
    for (int col = 0; col < n * n; ++col) {
        if (y.col(col).squaredNorm() == 0.0) {
            continue;
        }
        d.noalias() -= 8.0 * (table.col(col).real() * y.col(col).imag().transpose()
                              + table.col(col).imag() * y.col(col).real().transpose());
    }
    return d;
}

inline Eigen::VectorXd diagonal_diffusion(const PhasePoint& x, const QuarticCoupling& g)
{
    return diffusion(x, g).diagonal();
}

inline double trace_diffusion(const PhasePoint& x, const QuarticCoupling& g)
{
    return diffusion(x, g).trace();
}

// ============================================================================
// Forward/backward channel decomposition
// ============================================================================

/// One rank-one pair: weight * (b_minus b_minus^T - b_plus b_plus^T).
struct Channel {
    std::array<int, 4> idx;  ///< ordered quadruple (i, j, k, l)
    double weight;           ///< 4 g_ijkl
    Eigen::VectorXd b_minus;  ///< Re X_ij - Im X_kl
    Eigen::VectorXd b_plus;   ///< Re X_ij + Im X_kl
};

struct ChannelDecomposition {
    int size = 0;  ///< number of independent pairs
    std::vector<Channel> channels;

    DiffusionMatrix reconstruct() const
    {
        DiffusionMatrix d = DiffusionMatrix::Zero(size, size);
        for (const auto& c : channels) {
            d.noalias() += c.weight * (c.b_minus * c.b_minus.transpose() - c.b_plus * c.b_plus.transpose());
        }
        return d;
    }
};

/// Splits D into rank-one forward (b_minus) and backward (b_plus) terms, one per ordered quadruple.
inline ChannelDecomposition diffusion_channels(const PhasePoint& x, const QuarticCoupling& g)
{
    detail::check_same_modes(x, g.modes(), "g");
    ChannelDecomposition out;
    out.size = x.size();
    if (g.empty()) {
        return out;
    }
    const int n = x.dim();
    const Eigen::MatrixXcd table = detail::x_table(x);
    for (const auto& e : g.entries()) {
        for (const auto& p : permutations4()) {
            const int i = e.idx[p.order[0]];
            const int j = e.idx[p.order[1]];
            const int k = e.idx[p.order[2]];
            const int l = e.idx[p.order[3]];
            const Eigen::VectorXd re_ij = table.col(i * n + j).real();
            const Eigen::VectorXd im_kl = table.col(k * n + l).imag();
            out.channels.push_back({{i, j, k, l}, 4.0 * p.sign * e.value, re_ij - im_kl, re_ij + im_kl});
        }
    }
    return out;
}

// ============================================================================
// Divergence identities
// ============================================================================

/// sum_a d_a A^a evaluated from the analytic derivative of the drift contraction.
inline double drift_divergence(const PhasePoint& x, const CouplingMatrix& t, const QuarticCoupling& g,
                               DriftForm form = DriftForm::divergence_corrected)
{
    detail::check_same_modes(x, t.modes(), "t");
    detail::check_same_modes(x, g.modes(), "g");
    const double m = x.modes();
    const double slope = form == DriftForm::divergence_corrected ? 4.0 * (4.0 * m - 3.0)
                                                                 : -4.0 * (30.0 - 16.0 * m);
    const double t_factor = form == DriftForm::divergence_corrected ? -4.0 : 4.0;
    const Eigen::MatrixXd c = slope * g.contract(x) + t_factor * t.dense();
    return detail::divergence_of_contraction(x, g, slope, c);
}

/// sum_am d_a d_m D^{am} evaluated from the closed-form divergence of D.
inline double diffusion_double_divergence(const PhasePoint& x, const QuarticCoupling& g)
{
    detail::check_same_modes(x, g.modes(), "g");
    const double slope = -8.0 * (3.0 - 2.0 * x.modes());
    return detail::divergence_of_contraction(x, g, slope, slope * g.contract(x));
}

/// Central-difference d_m D^{am}, perturbing each independent x_m.
inline DriftVector fd_div_diffusion(const PhasePoint& x, const QuarticCoupling& g, double h = 1e-4)
{
    DriftVector out = DriftVector::Zero(x.size());
    for (int m = 0; m < x.size(); ++m) {
        out += (diffusion(x.perturbed(m, h), g).col(m) - diffusion(x.perturbed(m, -h), g).col(m)) / (2.0 * h);
    }
    return out;
}

/// Central-difference sum_a d_a A^a.
inline double fd_drift_divergence(const PhasePoint& x, const CouplingMatrix& t, const QuarticCoupling& g,
                                  DriftForm form = DriftForm::divergence_corrected, double h = 1e-4)
{
    double sum = 0.0;
    for (int a = 0; a < x.size(); ++a) {
        sum += (drift(x.perturbed(a, h), t, g, form)[a] - drift(x.perturbed(a, -h), t, g, form)[a]) / (2.0 * h);
    }
    return sum;
}

/// Second-order central-difference sum_am d_a d_m D^{am} (3-point diagonal, 4-point mixed stencils).
inline double fd_diffusion_double_divergence(const PhasePoint& x, const QuarticCoupling& g, double h = 1e-3)
{
    const int np = x.size();
    const DiffusionMatrix centre = diffusion(x, g);
    double sum = 0.0;
    for (int a = 0; a < np; ++a) {
        const PhasePoint xp = x.perturbed(a, h);
        const PhasePoint xm = x.perturbed(a, -h);
        sum += (diffusion(xp, g)(a, a) - 2.0 * centre(a, a) + diffusion(xm, g)(a, a)) / (h * h);
        for (int m = a + 1; m < np; ++m) {
            const double mixed = (diffusion(xp.perturbed(m, h), g)(a, m) - diffusion(xp.perturbed(m, -h), g)(a, m)
                                  - diffusion(xm.perturbed(m, h), g)(a, m) + diffusion(xm.perturbed(m, -h), g)(a, m))
                                 / (4.0 * h * h);
            sum += 2.0 * mixed;
        }
    }
    return sum;
}

// ============================================================================
// Right-hand sides
// ============================================================================

namespace detail {

inline void check_derivatives(const PhasePoint& x, const Eigen::VectorXd& grad, const Eigen::MatrixXd& hess)
{
    const int np = x.size();
    if (grad.size() != np || hess.rows() != np || hess.cols() != np) {
        throw DimensionError("gradient/hessian must have M(2M-1) = " + std::to_string(np) + " components");
    }
}

}  // namespace detail

/// -Abar . grad + (1/2) D : hess.
inline double fpe_rhs(const PhasePoint& x, const CouplingMatrix& t, const QuarticCoupling& g,
                      const Eigen::VectorXd& grad, const Eigen::MatrixXd& hess)
{
    detail::check_derivatives(x, grad, hess);
    return -drift_bar(x, t, g).dot(grad) + 0.5 * diffusion(x, g).cwiseProduct(hess).sum();
}

/**
 * d_a [ -A^a + (1/2) d_m D^{am} ] Q expanded by the product rule:
 *
 *   -(div A) Q - A.grad + (1/2)(div div D) Q + (div D).grad + (1/2) D : hess.
 */
inline double conservative_rhs(const PhasePoint& x, const CouplingMatrix& t, const QuarticCoupling& g,
                               double q, const Eigen::VectorXd& grad, const Eigen::MatrixXd& hess,
                               DriftForm form = DriftForm::divergence_corrected)
{
    detail::check_derivatives(x, grad, hess);
    const DriftVector a = drift(x, t, g, form);
    const DriftVector div_d = div_diffusion(x, g);
    return -drift_divergence(x, t, g, form) * q - a.dot(grad)
           + 0.5 * diffusion_double_divergence(x, g) * q + div_d.dot(grad)
           + 0.5 * diffusion(x, g).cwiseProduct(hess).sum();
}

// ============================================================================
// Boundary tangency
// ============================================================================

/// Dense antisymmetric matrix with packed components `v`.
inline Eigen::MatrixXd unpack_antisymmetric(int modes, const Eigen::VectorXd& v)
{
    return PhasePoint(modes, v).dense();
}

/**
 * x A + A x for a boundary point, A the antisymmetric matrix of drift(x, t, g).
 *
 * Throws PreconditionError if |domain_margin(x)| exceeds `boundary_tol`.
 */
inline Eigen::MatrixXd tangency_residual(const PhasePoint& x, const CouplingMatrix& t, const QuarticCoupling& g,
                                         DriftForm form = DriftForm::divergence_corrected,
                                         double boundary_tol = 1e-8)
{
    const double margin = domain_margin(x);
    if (std::abs(margin) > boundary_tol) {
        throw PreconditionError("tangency_residual needs a boundary point; domain margin is "
                                    + std::to_string(margin),
                                margin);
    }
    const Eigen::MatrixXd a = unpack_antisymmetric(x.modes(), drift(x, t, g, form));
    const Eigen::MatrixXd xd = x.dense();
    return xd * a + a * xd;
}

}  // namespace majq
