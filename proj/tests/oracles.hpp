// Copyright 2026 The majq Authors
// SPDX-License-Identifier: Apache-2.0

// Reference implementations used only by the tests. They share no code paths
// with the library beyond the packed containers: Majoranas come from Pauli
// tensor products, coefficient fields from direct index sums in complex
// arithmetic, and flows from Hermitian eigendecompositions.

#pragma once

#include "majq/tensor_core.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Mat kron(const Mat& a, const Mat& b)
{
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline Mat pauli(char which)
{
    Mat p = Mat::Zero(2, 2);
    switch (which) {
    case 'x': p << 0, 1, 1, 0; break;
    case 'y': p << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'z': p << 1, 0, 0, -1; break;
    case 'm': p << 0, 1, 0, 0; break;  // |0><1|, lowers the occupation of one mode
    default: p = Mat::Identity(2, 2);
    }
    return p;
}

/// String operator with `site` acting on mode k, Z on lower modes, identity above.
/// Mode 0 is the last tensor factor, so bit k of the basis index is mode k.
inline Mat jw_string(int modes, int k, const Mat& site)
{
    Mat out = Mat::Identity(1, 1);
    for (int q = modes - 1; q >= 0; --q) {
        const Mat f = q == k ? site : (q < k ? pauli('z') : pauli('i'));
        out = kron(out, f);
    }
    return out;
}

inline std::vector<Mat> majoranas(int modes)
{
    std::vector<Mat> g(static_cast<std::size_t>(2 * modes));
    for (int k = 0; k < modes; ++k) {
        g[static_cast<std::size_t>(k)] = jw_string(modes, k, pauli('x'));
        g[static_cast<std::size_t>(modes + k)] = jw_string(modes, k, pauli('y'));
    }
    return g;
}

inline Mat annihilator(int modes, int k) { return jw_string(modes, k, pauli('m')); }

/// H = i sum_ij t_ij g_i g_j + (1/2) sum_ijkl g_ijkl g_i g_j g_k g_l, over every ordered index tuple.
inline Mat hamiltonian(const majq::HamiltonianSpec& spec)
{
    const int m = spec.modes();
    const int n = 2 * m;
    const auto g = majoranas(m);
    const int d = 1 << m;
    Mat h = Mat::Zero(d, d);
    const Eigen::MatrixXd t = spec.t.dense();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            h += cplx(0.0, t(i, j)) * g[i] * g[j];
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                for (int l = 0; l < n; ++l) {
                    const double v = spec.g(i, j, k, l);
                    if (v != 0.0) {
                        h += 0.5 * v * g[i] * g[j] * g[k] * g[l];
                    }
                }
            }
        }
    }
    return h;
}

/// Open-chain Fermi-Hubbard matrix from Pauli-string ladder operators; mode 2s + sigma.
inline Mat fermi_hubbard(int sites, double hop, double onsite)
{
    const int m = 2 * sites;
    const int d = 1 << m;
    Mat h = Mat::Zero(d, d);
    std::vector<Mat> a;
    for (int k = 0; k < m; ++k) {
        a.push_back(annihilator(m, k));
    }
    for (int s = 0; s + 1 < sites; ++s) {
        for (int sigma = 0; sigma < 2; ++sigma) {
            const Mat hopping = a[2 * s + sigma].adjoint() * a[2 * (s + 1) + sigma];
            h -= hop * (hopping + hopping.adjoint());
        }
    }
    for (int s = 0; s < sites; ++s) {
        h += onsite * (a[2 * s].adjoint() * a[2 * s]) * (a[2 * s + 1].adjoint() * a[2 * s + 1]);
    }
    return h;
}

/// Traceless part of a square matrix.
inline Mat traceless(const Mat& m)
{
    return m - (m.trace() / static_cast<double>(m.rows())) * Mat::Identity(m.rows(), m.cols());
}

// ---------------------------------------------------------------------------
// Coefficient fields by direct summation
// ---------------------------------------------------------------------------

/// X_ij^{ab} = x+_{ia} x-_{bj}, x+- = x +- i I.
inline cplx big_x(const Eigen::MatrixXd& x, int i, int j, int a, int b)
{
    const cplx xp = x(i, a) + (i == a ? cplx(0, 1) : cplx(0, 0));
    const cplx xm = x(b, j) - (b == j ? cplx(0, 1) : cplx(0, 0));
    return xp * xm;
}

/// D over independent pairs from the four-fold sum of -8 g Im(X_ij X_kl), symmetrized.
inline Eigen::MatrixXd diffusion(const majq::PhasePoint& xp, const majq::QuarticCoupling& g)
{
    const int m = xp.modes();
    const int n = 2 * m;
    const auto pairs = majq::pair_enumerate(m);
    const Eigen::MatrixXd x = xp.dense();
    const int np = static_cast<int>(pairs.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(np, np);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                for (int l = 0; l < n; ++l) {
                    const double v = g(i, j, k, l);
                    if (v == 0.0) {
                        continue;
                    }
                    for (const auto& p : pairs) {
                        for (const auto& q : pairs) {
                            d(p.linear, q.linear) -= 8.0 * v
                                                     * (big_x(x, i, j, p.alpha, p.beta)
                                                        * big_x(x, k, l, q.alpha, q.beta))
                                                           .imag();
                        }
                    }
                }
            }
        }
    }
    return 0.5 * (d + d.transpose());
}

/// Abar^{ab} = 4 sum_ij Im X_ij^{ab} (3 G_ij - t_ij), G_ij = sum_kl g_ijkl x_kl.
inline Eigen::VectorXd drift_bar(const majq::PhasePoint& xp, const majq::HamiltonianSpec& spec)
{
    const int m = xp.modes();
    const int n = 2 * m;
    const Eigen::MatrixXd x = xp.dense();
    const Eigen::MatrixXd t = spec.t.dense();
    Eigen::VectorXd a = Eigen::VectorXd::Zero(xp.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double gij = 0.0;
            for (int k = 0; k < n; ++k) {
                for (int l = 0; l < n; ++l) {
                    gij += spec.g(i, j, k, l) * x(k, l);
                }
            }
            for (const auto& p : majq::pair_enumerate(m)) {
                a[p.linear] += 4.0 * big_x(x, i, j, p.alpha, p.beta).imag() * (3.0 * gij - t(i, j));
            }
        }
    }
    return a;
}

/// Central-difference d_m D^{am} of the oracle diffusion.
inline Eigen::VectorXd fd_div_diffusion(const majq::PhasePoint& x, const majq::QuarticCoupling& g, double h)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
    for (int m = 0; m < x.size(); ++m) {
        out += (oracle::diffusion(x.perturbed(m, h), g).col(m) - oracle::diffusion(x.perturbed(m, -h), g).col(m)) / (2.0 * h);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exponentials
// ---------------------------------------------------------------------------

/// exp(s A) for real antisymmetric A via the Hermitian matrix iA.
inline Eigen::MatrixXd exp_antisymmetric(const Eigen::MatrixXd& a, double s)
{
    const Mat herm = cplx(0.0, 1.0) * a.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<Mat> es(herm);
    const Eigen::VectorXcd ph = (es.eigenvalues().cast<cplx>() * cplx(0.0, -s)).array().exp().matrix();
    return (es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint()).real();
}

/// exp(-i H tau) for Hermitian H.
inline Mat propagator(const Mat& h, double tau)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const Eigen::VectorXcd ph = (es.eigenvalues().cast<cplx>() * cplx(0.0, -tau)).array().exp().matrix();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

/// x(t) = exp(4 t T) x0 exp(-4 t T).
inline Eigen::MatrixXd commutator_flow(const Eigen::MatrixXd& t, const Eigen::MatrixXd& x0, double time)
{
    const Eigen::MatrixXd e = exp_antisymmetric(t, 4.0 * time);
    return e * x0 * e.transpose();
}

}  // namespace oracle
