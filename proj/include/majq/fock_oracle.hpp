// Copyright 2026 The majq Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file fock_oracle.hpp
 * @brief Exact finite-dimensional reference for the Majorana Q-function.
 *
 * Fock space. Basis state s (0 <= s < 2^M) has mode k occupied iff bit k of s
 * is set. Ladder operators use the Jordan-Wigner string of all lower modes,
 *
 *     a_k |s> = (-1)^{popcount(s & (2^k - 1))} |s - 2^k>   (bit k set),
 *
 * and the Majoranas are gamma_k = a_k + a_k^dag, gamma_{M+k} = i (a_k^dag - a_k).
 * For M = 1 this gives gamma_0 = sigma_x and gamma_1 = sigma_y.
 *
 * Gaussian basis. Lambda(x) is the normal-ordered exponential of
 * gamma^T C gamma with C = -(i/2) [u + (u + u x u)^{-1}], u = [[0, I], [-I, 0]],
 * rescaled to unit trace. Normal ordering is done symbolically on ladder
 * monomials (creators left, annihilators right, permutation sign, no
 * contractions), so the series stops after M quadratic factors.
 */

#pragma once

#include "majq/errors.hpp"
#include "majq/fpe_kernel.hpp"
#include "majq/tensor_core.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include <bit>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace majq {

using cplx = std::complex<double>;
using FockOperator = Eigen::MatrixXcd;
using DensityMatrix = Eigen::MatrixXcd;

// ============================================================================
// Ladder operators and Majoranas
// ============================================================================

struct LadderOp {
    int mode;
    bool creation;
};

namespace detail {

/// Applies a single ladder operator to a basis state; nullopt if it annihilates it.
inline std::optional<std::pair<int, std::uint32_t>> apply_ladder(LadderOp op, std::uint32_t state)
{
    const std::uint32_t bit = 1u << op.mode;
    const bool occupied = (state & bit) != 0;
    if (occupied == op.creation) {
        return std::nullopt;
    }
    const int sign = (std::popcount(state & (bit - 1u)) % 2 == 0) ? 1 : -1;
    return std::make_pair(sign, state ^ bit);
}

}  // namespace detail

/// The 2M Majorana matrices of an M-mode Fock space and their ladder operators.
class MajoranaSet {
public:
    explicit MajoranaSet(int modes) : modes_(modes)
    {
        if (modes < 1 || modes > 12) {
            throw DimensionError("MajoranaSet supports 1 <= M <= 12");
        }
        const int d = dim();
        for (int k = 0; k < modes; ++k) {
            FockOperator a = FockOperator::Zero(d, d);
            for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(d); ++s) {
                if (auto r = detail::apply_ladder({k, false}, s)) {
                    a(static_cast<int>(r->second), static_cast<int>(s)) = static_cast<double>(r->first);
                }
            }
            annihilators_.push_back(a);
        }
        gammas_.resize(static_cast<std::size_t>(2 * modes));
        for (int k = 0; k < modes; ++k) {
            const FockOperator& a = annihilators_[static_cast<std::size_t>(k)];
            const FockOperator ad = a.adjoint();
            gammas_[static_cast<std::size_t>(k)] = a + ad;
            gammas_[static_cast<std::size_t>(modes + k)] = cplx(0.0, 1.0) * (ad - a);
        }
    }

    int modes() const noexcept { return modes_; }
    int dim() const noexcept { return 1 << modes_; }
    int count() const noexcept { return 2 * modes_; }

    const FockOperator& gamma(int i) const { return gammas_.at(static_cast<std::size_t>(i)); }
    const std::vector<FockOperator>& gammas() const noexcept { return gammas_; }
    const FockOperator& annihilator(int k) const { return annihilators_.at(static_cast<std::size_t>(k)); }
    FockOperator creator(int k) const { return annihilator(k).adjoint(); }

    /// X_mn = (i/2)[gamma_m, gamma_n].
    FockOperator pair_operator(int m, int n) const
    {
        return cplx(0.0, 0.5) * (gamma(m) * gamma(n) - gamma(n) * gamma(m));
    }

private:
    int modes_;
    std::vector<FockOperator> annihilators_;
    std::vector<FockOperator> gammas_;
};

inline MajoranaSet build_majoranas(int modes) { return MajoranaSet(modes); }

// ============================================================================
// Normal-ordered polynomials
// ============================================================================

/// a^dag_{c1} ... a^dag_{cp} a_{d1} ... a_{dq} with increasing labels, stored as bit masks.
struct Monomial {
    std::uint32_t create = 0;
    std::uint32_t annihilate = 0;

    auto operator<=>(const Monomial&) const = default;

    int degree() const { return std::popcount(create) + std::popcount(annihilate); }
};

namespace detail {

/// Number of pairs (a in lhs, b in rhs) with a > b.
inline int cross_inversions(std::uint32_t lhs, std::uint32_t rhs)
{
    int count = 0;
    while (rhs != 0) {
        const int b = std::countr_zero(rhs);
        rhs &= rhs - 1u;
        count += std::popcount(b >= 31 ? 0u : (lhs >> (b + 1)));
    }
    return count;
}

}  // namespace detail

class NormalOrderedPolynomial {
public:
    using Terms = std::map<Monomial, cplx>;

    static NormalOrderedPolynomial identity()
    {
        NormalOrderedPolynomial p;
        p.terms_[Monomial{}] = 1.0;
        return p;
    }

    /// Normal-ordered form of c * op_1 op_2 ... op_n (sign of the reordering, no contractions).
    static NormalOrderedPolynomial from_product(std::span<const LadderOp> ops, cplx coefficient)
    {
        // Creators (key = mode) sort before annihilators (key = 32 + mode).
        std::vector<int> keys;
        keys.reserve(ops.size());
        for (const auto& op : ops) {
            keys.push_back(op.creation ? op.mode : 32 + op.mode);
        }
        int sign = 1;
        for (std::size_t a = 0; a < keys.size(); ++a) {
            for (std::size_t b = 0; b + 1 < keys.size() - a; ++b) {
                if (keys[b] > keys[b + 1]) {
                    std::swap(keys[b], keys[b + 1]);
                    sign = -sign;
                }
            }
        }
        NormalOrderedPolynomial p;
        Monomial m;
        for (std::size_t a = 0; a < keys.size(); ++a) {
            if (a > 0 && keys[a] == keys[a - 1]) {
                return p;
            }
            if (keys[a] < 32) {
                m.create |= 1u << keys[a];
            } else {
                m.annihilate |= 1u << (keys[a] - 32);
            }
        }
        p.terms_[m] = static_cast<double>(sign) * coefficient;
        return p;
    }

    const Terms& terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }

    NormalOrderedPolynomial& operator+=(const NormalOrderedPolynomial& other)
    {
        for (const auto& [m, c] : other.terms_) {
            add(m, c);
        }
        return *this;
    }

    NormalOrderedPolynomial scaled(cplx factor) const
    {
        NormalOrderedPolynomial p = *this;
        for (auto& [m, c] : p.terms_) {
            c *= factor;
        }
        return p;
    }

    /// :A B:, the normal-ordered product (anticommuting labels, no contractions).
    friend NormalOrderedPolynomial normal_product(const NormalOrderedPolynomial& lhs,
                                                  const NormalOrderedPolynomial& rhs)
    {
        NormalOrderedPolynomial out;
        for (const auto& [m1, c1] : lhs.terms_) {
            for (const auto& [m2, c2] : rhs.terms_) {
                if ((m1.create & m2.create) != 0 || (m1.annihilate & m2.annihilate) != 0) {
                    continue;
                }
                // C1 A1 C2 A2 -> C1 C2 A1 A2, then merge the sorted label sets.
                int swaps = std::popcount(m1.annihilate) * std::popcount(m2.create);
                swaps += detail::cross_inversions(m1.create, m2.create);
                swaps += detail::cross_inversions(m1.annihilate, m2.annihilate);
                const double sign = swaps % 2 == 0 ? 1.0 : -1.0;
                out.add({m1.create | m2.create, m1.annihilate | m2.annihilate}, sign * c1 * c2);
            }
        }
        return out;
    }

private:
    void add(const Monomial& m, cplx c)
    {
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (!inserted) {
            it->second += c;
        }
    }

    Terms terms_;
};

/// :exp(q): = sum_n :q^n:/n!, stopping once the normal-ordered power vanishes.
inline NormalOrderedPolynomial normal_ordered_exp(const NormalOrderedPolynomial& q)
{
    NormalOrderedPolynomial total = NormalOrderedPolynomial::identity();
    NormalOrderedPolynomial power = NormalOrderedPolynomial::identity();
    for (int n = 1; n <= 64; ++n) {
        power = normal_product(power, q).scaled(1.0 / n);
        if (power.empty()) {
            break;
        }
        total += power;
    }
    return total;
}

/// Matrix of a normal-ordered polynomial on the Fock space of `maj`.
inline FockOperator to_matrix(const NormalOrderedPolynomial& p, const MajoranaSet& maj)
{
    const int d = maj.dim();
    const int m = maj.modes();
    FockOperator out = FockOperator::Zero(d, d);
    std::vector<LadderOp> ops;
    for (const auto& [mono, c] : p.terms()) {
        if (c == cplx(0.0, 0.0)) {
            continue;
        }
        ops.clear();
        for (int k = 0; k < m; ++k) {
            if (mono.create & (1u << k)) {
                ops.push_back({k, true});
            }
        }
        for (int k = 0; k < m; ++k) {
            if (mono.annihilate & (1u << k)) {
                ops.push_back({k, false});
            }
        }
        for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(d); ++s) {
            std::uint32_t state = s;
            int sign = 1;
            bool alive = true;
            for (auto it = ops.rbegin(); it != ops.rend() && alive; ++it) {
                if (auto r = detail::apply_ladder(*it, state)) {
                    sign *= r->first;
                    state = r->second;
                } else {
                    alive = false;
                }
            }
            if (alive) {
                out(static_cast<int>(state), static_cast<int>(s)) += static_cast<double>(sign) * c;
            }
        }
    }
    return out;
}

// ============================================================================
// Hamiltonians
// ============================================================================

/// H = i sum t_ij g_i g_j + (1/2) sum g_ijkl g_i g_j g_k g_l.
inline FockOperator build_hamiltonian(const HamiltonianSpec& spec, const MajoranaSet& maj)
{
    if (spec.modes() != maj.modes()) {
        throw DimensionError("Hamiltonian has M = " + std::to_string(spec.modes())
                             + " but the Majorana set has M = " + std::to_string(maj.modes()));
    }
    const int d = maj.dim();
    FockOperator h = FockOperator::Zero(d, d);
    // Antisymmetry folds the ordered sums: 2i sum_{a<b} t_ab g_a g_b, and each
    // sorted quadruple appears 24 times with matching signs.
    for (const auto& p : pair_enumerate(spec.modes())) {
        const double v = spec.t.packed()[p.linear];
        if (v != 0.0) {
            h += cplx(0.0, 2.0 * v) * (maj.gamma(p.alpha) * maj.gamma(p.beta));
        }
    }
    for (const auto& e : spec.g.entries()) {
        h += (12.0 * e.value)
             * (maj.gamma(e.idx[0]) * maj.gamma(e.idx[1]) * maj.gamma(e.idx[2]) * maj.gamma(e.idx[3]));
    }
    return h;
}

/**
 * -J sum_{s,sigma} (a^dag_{s,sigma} a_{s+1,sigma} + h.c.) + U sum_s n_{s,up} n_{s,down}
 * on an open chain, built directly from ladder operators. Mode k = 2 s + sigma.
 */
inline FockOperator build_fermi_hubbard(int sites, double hop, double onsite, const MajoranaSet& maj)
{
    if (maj.modes() != 2 * sites) {
        throw DimensionError("Hubbard chain with " + std::to_string(sites) + " sites needs M = "
                             + std::to_string(2 * sites));
    }
    const int d = maj.dim();
    FockOperator h = FockOperator::Zero(d, d);
    for (int s = 0; s + 1 < sites; ++s) {
        for (int sigma = 0; sigma < 2; ++sigma) {
            const int p = 2 * s + sigma;
            const int q = 2 * (s + 1) + sigma;
            const FockOperator hopping = maj.creator(p) * maj.annihilator(q);
            h -= hop * (hopping + hopping.adjoint());
        }
    }
    for (int s = 0; s < sites; ++s) {
        const FockOperator n_up = maj.creator(2 * s) * maj.annihilator(2 * s);
        const FockOperator n_dn = maj.creator(2 * s + 1) * maj.annihilator(2 * s + 1);
        h += onsite * (n_up * n_dn);
    }
    return h;
}

// ============================================================================
// Gaussian basis and Q-function
// ============================================================================

/// C(x) = -(i/2)[u + (u + u x u)^{-1}]; throws SingularityError when u + u x u is singular.
inline Eigen::MatrixXcd gaussian_quadratic_form(const PhasePoint& x, double singular_tol = 1e-10)
{
    const int m = x.modes();
    const Eigen::MatrixXd u = symplectic_unit(m);
    const Eigen::MatrixXd s = u + u * x.dense() * u;
    Eigen::EigenSolver<Eigen::MatrixXd> es(s, false);
    const Eigen::VectorXcd ev = es.eigenvalues();
    int worst = 0;
    for (int k = 1; k < ev.size(); ++k) {
        if (std::abs(ev[k]) < std::abs(ev[worst])) {
            worst = k;
        }
    }
    if (std::abs(ev[worst]) < singular_tol) {
        throw SingularityError("u + u x u is singular at this phase point (eigenvalue "
                                   + std::to_string(ev[worst].real()) + (ev[worst].imag() < 0 ? "" : "+")
                                   + std::to_string(ev[worst].imag()) + "i)",
                               std::abs(ev[worst]));
    }
    const Eigen::MatrixXd bracket = u + s.inverse();
    return cplx(0.0, -0.5) * bracket.cast<cplx>();
}

/// gamma^T C gamma rewritten as sum_ab K_ab :ahat_a ahat_b:, ahat = (a_1..a_M, a^dag_1..a^dag_M).
inline NormalOrderedPolynomial gaussian_exponent(const PhasePoint& x)
{
    const int m = x.modes();
    const Eigen::MatrixXcd c = gaussian_quadratic_form(x);
    Eigen::MatrixXcd u0(2 * m, 2 * m);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(m, m);
    u0 << id, id, cplx(0.0, -1.0) * id, cplx(0.0, 1.0) * id;
    const Eigen::MatrixXcd k = u0.transpose() * c * u0;
    NormalOrderedPolynomial q;
    for (int a = 0; a < 2 * m; ++a) {
        for (int b = 0; b < 2 * m; ++b) {
            if (k(a, b) == cplx(0.0, 0.0)) {
                continue;
            }
            const std::array<LadderOp, 2> ops{LadderOp{a % m, a >= m}, LadderOp{b % m, b >= m}};
            q += NormalOrderedPolynomial::from_product(ops, k(a, b));
        }
    }
    return q;
}

/// Unit-trace Gaussian basis operator Lambda(x).
inline FockOperator gaussian_basis(const PhasePoint& x, const MajoranaSet& maj)
{
    if (x.modes() != maj.modes()) {
        throw DimensionError("phase point and Majorana set disagree on M");
    }
    const FockOperator raw = to_matrix(normal_ordered_exp(gaussian_exponent(x)), maj);
    const cplx tr = raw.trace();
    if (std::abs(tr) <= 1e-13 * std::max(1.0, raw.norm())) {
        throw DegenerateBasisError("normal-ordered exponential has vanishing trace");
    }
    return raw / tr;
}

/// Tr[A B] without forming the product.
inline cplx trace_product(const FockOperator& a, const FockOperator& b)
{
    return a.cwiseProduct(b.transpose()).sum();
}

/// Q(x) = Tr[rho Lambda(x)] (the constant resolution-of-identity factor is left out).
inline double qfunction(const DensityMatrix& rho, const PhasePoint& x, const MajoranaSet& maj)
{
    return trace_product(rho, gaussian_basis(x, maj)).real();
}

/// Tr[Lambda(x) X_mn] with X_mn = (i/2)[gamma_m, gamma_n].
inline Eigen::MatrixXd covariance_of_basis(const PhasePoint& x, const MajoranaSet& maj)
{
    const FockOperator lam = gaussian_basis(x, maj);
    const int n = maj.count();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (a != b) {
                out(a, b) = trace_product(lam, maj.pair_operator(a, b)).real();
            }
        }
    }
    return out;
}

/// Exact dQ/dt = (1/i) Tr[[H, rho] Lambda(x)].
inline double exact_dqdt(const DensityMatrix& rho, const FockOperator& h, const PhasePoint& x,
                         const MajoranaSet& maj)
{
    const FockOperator comm = h * rho - rho * h;
    return (trace_product(comm, gaussian_basis(x, maj)) / cplx(0.0, 1.0)).real();
}

inline double exact_dqdt(const DensityMatrix& rho, const HamiltonianSpec& spec, const PhasePoint& x,
                         const MajoranaSet& maj)
{
    return exact_dqdt(rho, build_hamiltonian(spec, maj), x, maj);
}

// ============================================================================
// Density matrices
// ============================================================================

/// Throws PreconditionError unless rho is Hermitian, unit trace and positive semidefinite.
inline void check_density_matrix(const DensityMatrix& rho)
{
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-12) {
        throw PreconditionError("density matrix is not Hermitian", herm);
    }
    const double tr_err = std::abs(rho.trace() - cplx(1.0, 0.0));
    if (tr_err > 1e-12) {
        throw PreconditionError("density matrix trace differs from 1", tr_err);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw PreconditionError("density matrix has a negative eigenvalue", es.eigenvalues().minCoeff());
    }
}

/// Mixed state G G^dag / Tr from a seeded complex Ginibre matrix.
inline DensityMatrix random_density_matrix(int dim, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXcd g(dim, dim);
    for (int c = 0; c < dim; ++c) {
        for (int r = 0; r < dim; ++r) {
            g(r, c) = cplx(normal(rng), normal(rng));
        }
    }
    DensityMatrix rho = g * g.adjoint();
    rho /= rho.trace();
    return 0.5 * (rho + rho.adjoint());
}

/// |s><s| for a Fock basis state.
inline DensityMatrix basis_projector(int dim, int state)
{
    DensityMatrix rho = DensityMatrix::Zero(dim, dim);
    rho(state, state) = 1.0;
    return rho;
}

// ============================================================================
// Finite-difference derivatives of the Q-function and the basis
// ============================================================================

namespace detail {

inline FockOperator basis_for_stencil(const PhasePoint& x, const MajoranaSet& maj, double h)
{
    try {
        return gaussian_basis(x, maj);
    } catch (const SingularityError& e) {
        throw StencilError(std::string("stencil point hit the singular set (") + e.what()
                           + "); try a smaller step than h = " + std::to_string(h));
    }
}

}  // namespace detail

/// Central differences of the basis over packed components: result[p] = d Lambda / d x_p.
inline std::vector<FockOperator> fd_basis_gradient(const PhasePoint& x, const MajoranaSet& maj, double h)
{
    std::vector<FockOperator> out;
    out.reserve(static_cast<std::size_t>(x.size()));
    for (int p = 0; p < x.size(); ++p) {
        out.push_back((detail::basis_for_stencil(x.perturbed(p, h), maj, h)
                       - detail::basis_for_stencil(x.perturbed(p, -h), maj, h))
                      / (2.0 * h));
    }
    return out;
}

/// Second differences of the basis; result[p][q] = d^2 Lambda / d x_p d x_q.
inline std::vector<std::vector<FockOperator>> fd_basis_hessian(const PhasePoint& x, const MajoranaSet& maj,
                                                               double h)
{
    const int np = x.size();
    const FockOperator centre = detail::basis_for_stencil(x, maj, h);
    std::vector<std::vector<FockOperator>> out(static_cast<std::size_t>(np),
                                               std::vector<FockOperator>(static_cast<std::size_t>(np)));
    for (int p = 0; p < np; ++p) {
        const PhasePoint xp = x.perturbed(p, h);
        const PhasePoint xm = x.perturbed(p, -h);
        out[p][p] = (detail::basis_for_stencil(xp, maj, h) - 2.0 * centre + detail::basis_for_stencil(xm, maj, h))
                    / (h * h);
        for (int q = p + 1; q < np; ++q) {
            const FockOperator v = (detail::basis_for_stencil(xp.perturbed(q, h), maj, h)
                                    - detail::basis_for_stencil(xp.perturbed(q, -h), maj, h)
                                    - detail::basis_for_stencil(xm.perturbed(q, h), maj, h)
                                    + detail::basis_for_stencil(xm.perturbed(q, -h), maj, h))
                                   / (4.0 * h * h);
            out[p][q] = v;
            out[q][p] = v;
        }
    }
    return out;
}

/// dQ/dx_p over packed components by central differences.
inline Eigen::VectorXd fd_gradient(const DensityMatrix& rho, const PhasePoint& x, const MajoranaSet& maj,
                                   double h = 1e-4)
{
    Eigen::VectorXd g(x.size());
    for (int p = 0; p < x.size(); ++p) {
        g[p] = (trace_product(rho, detail::basis_for_stencil(x.perturbed(p, h), maj, h))
                - trace_product(rho, detail::basis_for_stencil(x.perturbed(p, -h), maj, h)))
                   .real()
               / (2.0 * h);
    }
    return g;
}

/// d^2Q/dx_p dx_q over packed components (symmetric by construction).
inline Eigen::MatrixXd fd_hessian(const DensityMatrix& rho, const PhasePoint& x, const MajoranaSet& maj,
                                  double h = 1e-4)
{
    const int np = x.size();
    auto q = [&](const PhasePoint& y) { return trace_product(rho, detail::basis_for_stencil(y, maj, h)).real(); };
    const double centre = q(x);
    Eigen::MatrixXd out(np, np);
    for (int p = 0; p < np; ++p) {
        const PhasePoint xp = x.perturbed(p, h);
        const PhasePoint xm = x.perturbed(p, -h);
        out(p, p) = (q(xp) - 2.0 * centre + q(xm)) / (h * h);
        for (int r = p + 1; r < np; ++r) {
            const double v = (q(xp.perturbed(r, h)) - q(xp.perturbed(r, -h)) - q(xm.perturbed(r, h))
                              + q(xm.perturbed(r, -h)))
                             / (4.0 * h * h);
            out(p, r) = v;
            out(r, p) = v;
        }
    }
    return out;
}

// ============================================================================
// Differential identities
// ============================================================================

namespace detail {

/// Full-index view d_{ab} Lambda with d_{ba} = -d_{ab} and d_{aa} = 0.
class BasisDerivatives {
public:
    BasisDerivatives(int modes, std::vector<FockOperator> first) : modes_(modes), first_(std::move(first))
    {
        const int d = first_.empty() ? 1 : static_cast<int>(first_.front().rows());
        zero_ = FockOperator::Zero(d, d);
    }

    void set_second(std::vector<std::vector<FockOperator>> second) { second_ = std::move(second); }

    const FockOperator& d1(int a, int b, int& sign) const
    {
        if (a == b) {
            sign = 0;
            return zero_;
        }
        sign = a < b ? 1 : -1;
        return first_[static_cast<std::size_t>(a < b ? pair_linear(modes_, a, b) : pair_linear(modes_, b, a))];
    }

    const FockOperator& d2(int a, int b, int c, int d, int& sign) const
    {
        if (a == b || c == d) {
            sign = 0;
            return zero_;
        }
        sign = (a < b ? 1 : -1) * (c < d ? 1 : -1);
        const int p = a < b ? pair_linear(modes_, a, b) : pair_linear(modes_, b, a);
        const int q = c < d ? pair_linear(modes_, c, d) : pair_linear(modes_, d, c);
        return second_[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
    }

private:
    int modes_;
    std::vector<FockOperator> first_;
    std::vector<std::vector<FockOperator>> second_;
    FockOperator zero_;
};

/// d x_ab / d x_cd = d_ac d_bd - d_ad d_bc.
inline double dx(int a, int b, int c, int d) { return kron(a, c) * kron(b, d) - kron(a, d) * kron(b, c); }

}  // namespace detail

struct QuadraticIdentityReport {
    double left = 0.0;        ///< gamma gamma^T Lambda
    double right = 0.0;       ///< Lambda gamma gamma^T
    double mixed = 0.0;       ///< gamma Lambda gamma^T
    double commutator = 0.0;  ///< [g_i g_j - g_j g_i, Lambda]

    double max() const { return std::max(std::max(left, right), std::max(mixed, commutator)); }
};

/**
 * Checks the four quadratic operator identities at x with finite-difference
 * basis derivatives; residuals are max elementwise differences over all (i, j).
 *
 * Matrix derivative convention: (dLambda/dx)_ab = d_{ba} Lambda.
 */
inline QuadraticIdentityReport verify_quadratic_identities(const PhasePoint& x, const MajoranaSet& maj,
                                                           double h = 1e-4)
{
    const int n = maj.count();
    const FockOperator lam = detail::basis_for_stencil(x, maj, h);
    const detail::BasisDerivatives der(x.modes(), fd_basis_gradient(x, maj, h));
    const auto pm = x_plus_minus(x);
    const Eigen::MatrixXcd& xp = pm.plus;
    const Eigen::MatrixXcd& xm = pm.minus;
    const Eigen::MatrixXd xd = x.dense();
    const int d = maj.dim();
    const cplx ii(0.0, 1.0);

    QuadraticIdentityReport rep;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            FockOperator sum_left = FockOperator::Zero(d, d);
            FockOperator sum_right = FockOperator::Zero(d, d);
            FockOperator sum_mixed = FockOperator::Zero(d, d);
            for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                    int sign = 0;
                    const FockOperator& dl = der.d1(b, a, sign);
                    if (sign == 0) {
                        continue;
                    }
                    sum_left += (static_cast<double>(sign) * xm(i, a) * xp(b, j)) * dl;
                    sum_right += (static_cast<double>(sign) * xp(i, a) * xm(b, j)) * dl;
                    sum_mixed += (static_cast<double>(sign) * xm(i, a) * xm(b, j)) * dl;
                }
            }
            const FockOperator gg = maj.gamma(i) * maj.gamma(j);
            rep.left = std::max(rep.left, (gg * lam - ii * (sum_left - lam * xp(i, j))).cwiseAbs().maxCoeff());
            rep.right = std::max(rep.right, (lam * gg - ii * (sum_right - lam * xp(i, j))).cwiseAbs().maxCoeff());
            rep.mixed = std::max(rep.mixed, (maj.gamma(i) * lam * maj.gamma(j)
                                             - ii * (-sum_mixed + lam * xm(i, j)))
                                                .cwiseAbs()
                                                .maxCoeff());

            const FockOperator anti = gg - maj.gamma(j) * maj.gamma(i);
            FockOperator rhs = FockOperator::Zero(d, d);
            for (int k = 0; k < n; ++k) {
                int s1 = 0;
                int s2 = 0;
                const FockOperator& d_ki = der.d1(k, i, s1);
                const FockOperator& d_jk = der.d1(j, k, s2);
                rhs += (4.0 * xd(k, j) * s1) * d_ki - (4.0 * xd(i, k) * s2) * d_jk;
            }
            rep.commutator = std::max(rep.commutator, (anti * lam - lam * anti - rhs).cwiseAbs().maxCoeff());
        }
    }
    return rep;
}

struct FourGammaResidual {
    std::array<int, 4> idx;
    double left;   ///< g_i g_j g_k g_l Lambda
    double right;  ///< Lambda g_i g_j g_k g_l
};

struct FourGammaReport {
    std::vector<FourGammaResidual> tuples;

    double max_left() const
    {
        double m = 0.0;
        for (const auto& t : tuples) {
            m = std::max(m, t.left);
        }
        return m;
    }
    double max_right() const
    {
        double m = 0.0;
        for (const auto& t : tuples) {
            m = std::max(m, t.right);
        }
        return m;
    }
};

/**
 * Four-operator identities for g_i g_j g_k g_l Lambda and Lambda g_i g_j g_k g_l
 * (distinct indices) in terms of first and second basis derivatives:
 *
 *   left  = (-X*_ij^{mn} d_ab d_mn L + d_mn L d_ba X*_ij^{mn}) X*_kl^{ab}
 *           + (-d_ab L x+_ij - L d_ab x+_ij) X*_kl^{ab} - X*_ij^{mn} x+_kl d_mn L + L X_ik^{jl}
 *   right = X_ij^{ab} (-X_kl^{mn} d_ab d_mn L - d_mn L d_ab X_kl^{mn})
 *           + X_ij^{ab} (-d_ab L x+_kl - L d_ab x+_kl) - x+_ij X_kl^{mn} d_mn L + L X_ik^{jl}
 */
inline FourGammaReport verify_four_gamma(const PhasePoint& x, const MajoranaSet& maj,
                                         std::span<const std::array<int, 4>> tuples, double h = 1e-3)
{
    const int n = maj.count();
    for (const auto& t : tuples) {
        std::array<int, 4> s = t;
        for (int v : s) {
            if (v < 0 || v >= n) {
                throw IndexError("Majorana index out of range in four-gamma tuple");
            }
        }
        if (canonicalize4(s) == 0) {
            throw PreconditionError("four-gamma identities need distinct indices", 0.0);
        }
    }
    const FockOperator lam = detail::basis_for_stencil(x, maj, h);
    detail::BasisDerivatives der(x.modes(), fd_basis_gradient(x, maj, h));
    der.set_second(fd_basis_hessian(x, maj, h));
    const auto pm = x_plus_minus(x);
    const Eigen::MatrixXcd& xp = pm.plus;
    const Eigen::MatrixXcd& xm = pm.minus;
    auto big_x = [&](int i, int j, int a, int b) { return xp(i, a) * xm(b, j); };
    auto big_xs = [&](int i, int j, int a, int b) { return xm(i, a) * xp(b, j); };
    // d_{ab} of X*_ij^{mn} and X_ij^{mn}
    auto d_xs = [&](int i, int j, int m, int v, int a, int b) {
        return detail::dx(i, m, a, b) * xp(v, j) + xm(i, m) * detail::dx(v, j, a, b);
    };
    auto d_x = [&](int i, int j, int m, int v, int a, int b) {
        return detail::dx(i, m, a, b) * xm(v, j) + xp(i, m) * detail::dx(v, j, a, b);
    };

    FourGammaReport rep;
    for (const auto& t : tuples) {
        const int i = t[0];
        const int j = t[1];
        const int k = t[2];
        const int l = t[3];
        FockOperator left = lam * big_x(i, k, j, l);
        FockOperator right = lam * big_x(i, k, j, l);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                int s_ab = 0;
                const FockOperator& d_ab = der.d1(a, b, s_ab);
                const cplx cl = big_xs(k, l, a, b);
                const cplx cr = big_x(i, j, a, b);
                for (int m = 0; m < n; ++m) {
                    for (int v = 0; v < n; ++v) {
                        int s2 = 0;
                        const FockOperator& d2 = der.d2(a, b, m, v, s2);
                        int s_mn = 0;
                        const FockOperator& d_mn = der.d1(m, v, s_mn);
                        if (s2 != 0) {
                            left -= (cl * big_xs(i, j, m, v) * static_cast<double>(s2)) * d2;
                            right -= (cr * big_x(k, l, m, v) * static_cast<double>(s2)) * d2;
                        }
                        if (s_mn != 0) {
                            // d_ba X* = -d_ab X*
                            left -= (cl * d_xs(i, j, m, v, a, b) * static_cast<double>(s_mn)) * d_mn;
                            right -= (cr * d_x(k, l, m, v, a, b) * static_cast<double>(s_mn)) * d_mn;
                        }
                    }
                }
                if (s_ab != 0) {
                    left -= (cl * xp(i, j) * static_cast<double>(s_ab)) * d_ab;
                    right -= (cr * xp(k, l) * static_cast<double>(s_ab)) * d_ab;
                }
                left -= (cl * detail::dx(i, j, a, b)) * lam;
                right -= (cr * detail::dx(k, l, a, b)) * lam;
            }
        }
        for (int m = 0; m < n; ++m) {
            for (int v = 0; v < n; ++v) {
                int s_mn = 0;
                const FockOperator& d_mn = der.d1(m, v, s_mn);
                if (s_mn == 0) {
                    continue;
                }
                left -= (big_xs(i, j, m, v) * xp(k, l) * static_cast<double>(s_mn)) * d_mn;
                right -= (xp(i, j) * big_x(k, l, m, v) * static_cast<double>(s_mn)) * d_mn;
            }
        }
        const FockOperator prod = maj.gamma(i) * maj.gamma(j) * maj.gamma(k) * maj.gamma(l);
        rep.tuples.push_back({t, (prod * lam - left).cwiseAbs().maxCoeff(),
                              (lam * prod - right).cwiseAbs().maxCoeff()});
    }
    return rep;
}

/// All ordered 4-tuples of distinct Majorana indices.
inline std::vector<std::array<int, 4>> distinct_tuples4(int count)
{
    std::vector<std::array<int, 4>> out;
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < count; ++j) {
            for (int k = 0; k < count; ++k) {
                for (int l = 0; l < count; ++l) {
                    if (i != j && i != k && i != l && j != k && j != l && k != l) {
                        out.push_back({i, j, k, l});
                    }
                }
            }
        }
    }
    return out;
}

inline FourGammaReport verify_four_gamma(const PhasePoint& x, const MajoranaSet& maj, double h = 1e-3)
{
    const auto tuples = distinct_tuples4(maj.count());
    return verify_four_gamma(x, maj, std::span<const std::array<int, 4>>(tuples), h);
}

// ============================================================================
// Fokker-Planck equivalence and moments
// ============================================================================

struct FpeCheck {
    double lhs = 0.0;           ///< exact dQ/dt
    double rhs = 0.0;           ///< phase-space right-hand side
    double first_order = 0.0;   ///< drift contribution
    double second_order = 0.0;  ///< diffusion contribution
    double residual = 0.0;      ///< |lhs - rhs| / max(|lhs|, |first|, |second|, 1e-12)
};

/**
 * Compares exact Liouville evolution of Q with the phase-space equation at x,
 * using finite-difference derivatives of the exact Q.
 *
 * With the default drift the right-hand side is -Abar.grad + D:hess/2; other
 * drift forms go through the conservative expansion.
 */
inline FpeCheck verify_fpe(const DensityMatrix& rho, const HamiltonianSpec& spec, const PhasePoint& x,
                           const MajoranaSet& maj, double h = 1e-3,
                           DriftForm form = DriftForm::divergence_corrected)
{
    FpeCheck out;
    out.lhs = exact_dqdt(rho, spec, x, maj);
    const Eigen::VectorXd grad = fd_gradient(rho, x, maj, h);
    const Eigen::MatrixXd hess = fd_hessian(rho, x, maj, h);
    out.second_order = 0.5 * diffusion(x, spec.g).cwiseProduct(hess).sum();
    if (form == DriftForm::divergence_corrected) {
        out.first_order = -drift_bar(x, spec.t, spec.g).dot(grad);
        out.rhs = fpe_rhs(x, spec.t, spec.g, grad, hess);
    } else {
        const double q = qfunction(rho, x, maj);
        out.rhs = conservative_rhs(x, spec.t, spec.g, q, grad, hess, form);
        out.first_order = out.rhs - out.second_order;
    }
    const double scale = std::max({std::abs(out.lhs), std::abs(out.first_order), std::abs(out.second_order), 1e-12});
    out.residual = std::abs(out.lhs - out.rhs) / scale;
    return out;
}

struct MomentCheck {
    double lhs = 0.0;            ///< Tr[rho X_12]
    double rhs = 0.0;            ///< 3 * integral of s Q(s) ds / N
    double normalization = 0.0;  ///< N with integral Lambda(s) ds = N I
    double identity_residual = 0.0;
};

/// Single-mode second-moment identity <X_12> = 3 * integral_{-1}^{1} s Q(s) ds / N.
inline MomentCheck verify_moment_identity_m1(const DensityMatrix& rho)
{
    if (rho.rows() != 2 || rho.cols() != 2) {
        throw DimensionError("moment identity check is defined for M = 1 (2 x 2 density matrix)");
    }
    const MajoranaSet maj(1);
    auto basis = [&](double s) {
        Eigen::VectorXd p(1);
        p[0] = s;
        return gaussian_basis(PhasePoint(1, p), maj);
    };
    using quad = boost::math::quadrature::gauss<double, 64>;
    FockOperator integral = FockOperator::Zero(2, 2);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            integral(r, c) = cplx(quad::integrate([&](double s) { return basis(s)(r, c).real(); }, -1.0, 1.0),
                                  quad::integrate([&](double s) { return basis(s)(r, c).imag(); }, -1.0, 1.0));
        }
    }
    MomentCheck out;
    out.normalization = integral.trace().real() / 2.0;
    out.identity_residual =
        (integral / out.normalization - FockOperator::Identity(2, 2)).cwiseAbs().maxCoeff();
    const double first_moment =
        quad::integrate([&](double s) { return s * trace_product(rho, basis(s)).real(); }, -1.0, 1.0);
    out.rhs = 3.0 * first_moment / out.normalization;
    out.lhs = trace_product(rho, maj.pair_operator(0, 1)).real();
    return out;
}

}  // namespace majq
