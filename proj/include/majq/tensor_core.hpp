// Copyright 2026 The majq Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file tensor_core.hpp
 * @brief Antisymmetric tensors, pair-index enumeration and the geometry of the
 *        Majorana phase space.
 *
 * A phase point is a real antisymmetric 2M x 2M matrix x. Only the M(2M-1)
 * independent components x_ab with a < b are stored; the lower triangle is
 * reconstructed on access with a sign flip. The same packing is used for the
 * quadratic coupling t_ij, and the quartic coupling g_ijkl stores one value per
 * sorted quadruple i < j < k < l.
 *
 * All indices in this header are 0-based. File formats and the CLI use 1-based
 * labels and convert at the boundary.
 */

#pragma once

#include "majq/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace majq {

// ============================================================================
// Pair indices
// ============================================================================

/// Independent component (alpha, beta), alpha < beta, with its packed position.
struct PairIndex {
    int alpha;
    int beta;
    int linear;

    constexpr bool operator==(const PairIndex&) const = default;
};

/// Number of independent components of a 2M x 2M antisymmetric matrix.
constexpr int pair_count(int modes) { return modes * (2 * modes - 1); }

/// Lexicographic position of (a, b), a < b, among the pairs of a 2M-dim index set.
constexpr int pair_linear(int modes, int a, int b)
{
    const int n = 2 * modes;
    return a * n - a * (a + 1) / 2 + (b - a - 1);
}

inline PairIndex pair_from_linear(int modes, int linear)
{
    const int n = 2 * modes;
    if (linear < 0 || linear >= pair_count(modes)) {
        throw IndexError("pair position " + std::to_string(linear) + " out of range");
    }
    int a = 0;
    int row_start = 0;
    while (row_start + (n - a - 1) <= linear) {
        row_start += n - a - 1;
        ++a;
    }
    return {a, a + 1 + (linear - row_start), linear};
}

/// All pairs (a, b) with a < b in lexicographic order.
inline std::vector<PairIndex> pair_enumerate(int modes)
{
    std::vector<PairIndex> out;
    out.reserve(static_cast<std::size_t>(pair_count(modes)));
    const int n = 2 * modes;
    int linear = 0;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            out.push_back({a, b, linear++});
        }
    }
    return out;
}

// ============================================================================
// Packed antisymmetric matrices
// ============================================================================

/**
 * Real antisymmetric matrix stored by its strict upper triangle.
 *
 * The tag parameter keeps phase points and coupling matrices apart as types
 * even though they share the representation.
 */
template <typename Tag>
class PackedAntisymmetric {
public:
    PackedAntisymmetric() : PackedAntisymmetric(1) {}

    explicit PackedAntisymmetric(int modes)
        : modes_(modes), packed_(Eigen::VectorXd::Zero(pair_count(check_modes(modes)))) {}

    PackedAntisymmetric(int modes, Eigen::VectorXd packed)
        : modes_(check_modes(modes)), packed_(std::move(packed))
    {
        if (packed_.size() != pair_count(modes_)) {
            throw DimensionError("packed length " + std::to_string(packed_.size())
                                 + " does not match M(2M-1) = "
                                 + std::to_string(pair_count(modes_)));
        }
    }

    /// Builds from a dense matrix; rejects inputs that are not antisymmetric to `tol`.
    static PackedAntisymmetric from_dense(const Eigen::MatrixXd& dense, double tol = 1e-12)
    {
        if (dense.rows() != dense.cols() || dense.rows() % 2 != 0 || dense.rows() == 0) {
            throw DimensionError("expected a non-empty even square matrix");
        }
        const double asym = (dense + dense.transpose()).cwiseAbs().maxCoeff();
        if (asym > tol) {
            throw PreconditionError("matrix is not antisymmetric", asym);
        }
        const int modes = static_cast<int>(dense.rows() / 2);
        Eigen::VectorXd packed(pair_count(modes));
        for (const auto& p : pair_enumerate(modes)) {
            packed[p.linear] = 0.5 * (dense(p.alpha, p.beta) - dense(p.beta, p.alpha));
        }
        return {modes, std::move(packed)};
    }

    int modes() const noexcept { return modes_; }
    int dim() const noexcept { return 2 * modes_; }
    int size() const noexcept { return static_cast<int>(packed_.size()); }

    const Eigen::VectorXd& packed() const noexcept { return packed_; }

    /// x_ab with the sign convention x_ba = -x_ab and x_aa = 0.
    double operator()(int a, int b) const
    {
        if (a == b) {
            return 0.0;
        }
        return a < b ? packed_[pair_linear(modes_, a, b)] : -packed_[pair_linear(modes_, b, a)];
    }

    Eigen::MatrixXd dense() const
    {
        const int n = dim();
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
        for (const auto& p : pair_enumerate(modes_)) {
            out(p.alpha, p.beta) = packed_[p.linear];
            out(p.beta, p.alpha) = -packed_[p.linear];
        }
        return out;
    }

    /// Copy with one packed component shifted; moves x_ab and x_ba together.
    PackedAntisymmetric perturbed(int linear, double delta) const
    {
        Eigen::VectorXd p = packed_;
        p[linear] += delta;
        return {modes_, std::move(p)};
    }

private:
    static int check_modes(int modes)
    {
        if (modes < 1) {
            throw DimensionError("mode count must be positive");
        }
        return modes;
    }

    int modes_;
    Eigen::VectorXd packed_;
};

struct PhaseTag {};
struct CouplingTag {};

/// Argument of the Q-function.
using PhasePoint = PackedAntisymmetric<PhaseTag>;
/// Quadratic coupling t_ij (rate units, hbar = 1).
using CouplingMatrix = PackedAntisymmetric<CouplingTag>;

// ============================================================================
// Quartic coupling
// ============================================================================

/// One of the 24 orderings of four slots together with its parity.
struct Permutation4 {
    std::array<int, 4> order;
    int sign;
};

/// Table of all permutations of {0,1,2,3} with signs, identity first.
inline const std::array<Permutation4, 24>& permutations4()
{
    static const std::array<Permutation4, 24> table = [] {
        std::array<Permutation4, 24> t{};
        std::array<int, 4> p{0, 1, 2, 3};
        int k = 0;
        do {
            int inversions = 0;
            for (int a = 0; a < 4; ++a) {
                for (int b = a + 1; b < 4; ++b) {
                    inversions += p[a] > p[b] ? 1 : 0;
                }
            }
            t[k++] = {p, inversions % 2 == 0 ? 1 : -1};
        } while (std::next_permutation(p.begin(), p.end()));
        return t;
    }();
    return table;
}

/// Sorts four indices in place; returns the permutation sign, or 0 on a repeat.
inline int canonicalize4(std::array<int, 4>& idx)
{
    int sign = 1;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 3 - a; ++b) {
            if (idx[b] > idx[b + 1]) {
                std::swap(idx[b], idx[b + 1]);
                sign = -sign;
            }
        }
    }
    for (int a = 0; a < 3; ++a) {
        if (idx[a] == idx[a + 1]) {
            return 0;
        }
    }
    return sign;
}

/**
 * Fully antisymmetric rank-4 real tensor g_ijkl.
 *
 * Stores one value per sorted quadruple; any ordering is reached through the
 * permutation sign and repeated indices read as zero.
 */
class QuarticCoupling {
public:
    struct Entry {
        std::array<int, 4> idx;  ///< strictly increasing
        double value;
    };

    explicit QuarticCoupling(int modes = 1) : modes_(modes)
    {
        if (modes < 1) {
            throw DimensionError("mode count must be positive");
        }
    }

    /// Entries may come in any order; they are canonicalized and summed.
    QuarticCoupling(int modes, std::span<const Entry> entries) : QuarticCoupling(modes)
    {
        for (const auto& e : entries) {
            add(e.idx, e.value);
        }
    }

    int modes() const noexcept { return modes_; }
    bool empty() const noexcept { return entries_.empty(); }
    const std::vector<Entry>& entries() const noexcept { return entries_; }

    double operator()(int i, int j, int k, int l) const
    {
        std::array<int, 4> idx{i, j, k, l};
        check_range(idx);
        const int sign = canonicalize4(idx);
        if (sign == 0) {
            return 0.0;
        }
        const auto it = find(idx);
        return it == entries_.end() ? 0.0 : sign * it->value;
    }

    /// G_ij = sum_kl g_ijkl x_kl, an antisymmetric 2M x 2M matrix.
    Eigen::MatrixXd contract(const PhasePoint& x) const
    {
        const int n = 2 * modes_;
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
        for (const auto& e : entries_) {
            for (const auto& p : permutations4()) {
                const int i = e.idx[p.order[0]];
                const int j = e.idx[p.order[1]];
                const int k = e.idx[p.order[2]];
                const int l = e.idx[p.order[3]];
                out(i, j) += p.sign * e.value * x(k, l);
            }
        }
        return out;
    }

    /// Row-major (2M)^4 array; intended for small-M tests.
    std::vector<double> to_dense() const
    {
        const int n = 2 * modes_;
        std::vector<double> out(static_cast<std::size_t>(n) * n * n * n, 0.0);
        for (const auto& e : entries_) {
            for (const auto& p : permutations4()) {
                const int i = e.idx[p.order[0]];
                const int j = e.idx[p.order[1]];
                const int k = e.idx[p.order[2]];
                const int l = e.idx[p.order[3]];
                out[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l] = p.sign * e.value;
            }
        }
        return out;
    }

private:
    void check_range(const std::array<int, 4>& idx) const
    {
        for (int v : idx) {
            if (v < 0 || v >= 2 * modes_) {
                throw IndexError("quartic index " + std::to_string(v) + " outside [0, "
                                 + std::to_string(2 * modes_) + ")");
            }
        }
    }

    std::vector<Entry>::const_iterator find(const std::array<int, 4>& sorted) const
    {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), sorted,
                                   [](const Entry& e, const std::array<int, 4>& k) { return e.idx < k; });
        return (it != entries_.end() && it->idx == sorted) ? it : entries_.end();
    }

    void add(std::array<int, 4> idx, double value)
    {
        check_range(idx);
        const int sign = canonicalize4(idx);
        if (sign == 0 || value == 0.0) {
            return;
        }
        auto it = std::lower_bound(entries_.begin(), entries_.end(), idx,
                                   [](const Entry& e, const std::array<int, 4>& k) { return e.idx < k; });
        if (it != entries_.end() && it->idx == idx) {
            it->value += sign * value;
            if (it->value == 0.0) {
                entries_.erase(it);
            }
        } else {
            entries_.insert(it, Entry{idx, sign * value});
        }
    }

    int modes_;
    std::vector<Entry> entries_;
};

/**
 * Projects a dense rank-4 array onto its fully antisymmetric part,
 * (1/4!) sum_sigma sign(sigma) dense[sigma(i,j,k,l)].
 *
 * `dense` is row-major with extent 2M in every dimension.
 */
inline QuarticCoupling antisymmetrize_quartic(std::span<const double> dense, int modes)
{
    const std::size_t n = static_cast<std::size_t>(2 * modes);
    if (modes < 1 || dense.size() != n * n * n * n) {
        throw DimensionError("dense quartic array must have (2M)^4 = " + std::to_string(n * n * n * n)
                             + " entries, got " + std::to_string(dense.size()));
    }
    auto at = [&](int i, int j, int k, int l) {
        return dense[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l];
    };
    std::vector<QuarticCoupling::Entry> entries;
    const int m = static_cast<int>(n);
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            for (int k = j + 1; k < m; ++k) {
                for (int l = k + 1; l < m; ++l) {
                    const std::array<int, 4> q{i, j, k, l};
                    double sum = 0.0;
                    for (const auto& p : permutations4()) {
                        sum += p.sign * at(q[p.order[0]], q[p.order[1]], q[p.order[2]], q[p.order[3]]);
                    }
                    if (sum != 0.0) {
                        entries.push_back({q, sum / 24.0});
                    }
                }
            }
        }
    }
    return {modes, entries};
}

// ============================================================================
// Hamiltonian parameters
// ============================================================================

/// H = i sum t_ij g_i g_j + (1/2) sum g_ijkl g_i g_j g_k g_l with hbar = 1.
struct HamiltonianSpec {
    CouplingMatrix t;
    QuarticCoupling g;

    HamiltonianSpec(CouplingMatrix t_in, QuarticCoupling g_in) : t(std::move(t_in)), g(std::move(g_in))
    {
        if (t.modes() != g.modes()) {
            throw DimensionError("t has M = " + std::to_string(t.modes()) + " but g has M = "
                                 + std::to_string(g.modes()));
        }
    }

    explicit HamiltonianSpec(int modes) : t(modes), g(modes) {}

    int modes() const noexcept { return t.modes(); }
};

// ============================================================================
// Phase-space geometry
// ============================================================================

/// Smallest eigenvalue of I + x^2: >= 0 inside the domain, 0 on the pure-state boundary.
inline double domain_margin(const PhasePoint& x)
{
    const Eigen::MatrixXd xd = x.dense();
    const Eigen::MatrixXd s = Eigen::MatrixXd::Identity(xd.rows(), xd.cols()) + xd * xd;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Block-diagonal complex structure with M copies of [[0,1],[-1,0]].
inline Eigen::MatrixXd block_complex_structure(int modes)
{
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
    for (int k = 0; k < modes; ++k) {
        j(2 * k, 2 * k + 1) = 1.0;
        j(2 * k + 1, 2 * k) = -1.0;
    }
    return j;
}

/// The matrix [[0, I], [-I, 0]] used in the Gaussian basis.
inline Eigen::MatrixXd symplectic_unit(int modes)
{
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
    u.topRightCorner(modes, modes).setIdentity();
    u.bottomLeftCorner(modes, modes) = -Eigen::MatrixXd::Identity(modes, modes);
    return u;
}

namespace detail {

inline Eigen::MatrixXd gaussian_matrix(int rows, int cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) {
            m(r, c) = normal(rng);
        }
    }
    return m;
}

}  // namespace detail

/// Haar-like orthogonal matrix from the QR factorization of a seeded Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd a = detail::gaussian_matrix(n, n, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < n; ++k) {
        if (r(k, k) < 0.0) {
            q.col(k) = -q.col(k);
        }
    }
    return q;
}

/**
 * Pure-state point x = R J R^T on the boundary x^2 = -I.
 *
 * The boundary has two components, told apart by Pf(x) = det(R) Pf(J). The
 * sign of det R is fixed so that x shares the component of the vacuum
 * x = -[[0, I], [-I, 0]]; the other component is where the Gaussian basis is singular.
 */
inline PhasePoint random_boundary_point(int modes, std::uint64_t seed)
{
    Eigen::MatrixXd r = random_orthogonal(2 * modes, seed);
    const double target = ((modes * (modes + 1) / 2) % 2 == 0) ? 1.0 : -1.0;
    if (r.determinant() * target < 0.0) {
        r.col(0) = -r.col(0);
    }
    Eigen::MatrixXd x = r * block_complex_structure(modes) * r.transpose();
    x = 0.5 * (x - x.transpose()).eval();
    return PhasePoint::from_dense(x, 1e-12);
}

/// Interior point with prescribed spectral norm (< 1 keeps it away from the boundary).
inline PhasePoint random_interior_point(int modes, std::uint64_t seed, double spectral_norm)
{
    std::mt19937_64 rng(seed);
    const int n = 2 * modes;
    Eigen::MatrixXd a = detail::gaussian_matrix(n, n, rng);
    a = (a - a.transpose()).eval();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const double top = svd.singularValues()[0];
    if (top > 0.0) {
        a *= spectral_norm / top;
    }
    return PhasePoint::from_dense(a, 1e-12);
}

/// Antisymmetric t with entries uniform in [-scale, scale].
inline CouplingMatrix random_coupling_matrix(int modes, std::uint64_t seed, double scale)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    Eigen::VectorXd p(pair_count(modes));
    for (int k = 0; k < p.size(); ++k) {
        p[k] = u(rng);
    }
    return {modes, std::move(p)};
}

/**
 * Quartic coupling on `count` distinct sorted quadruples (all of them when
 * count < 0) with values uniform in [-scale, scale].
 */
inline QuarticCoupling random_quartic(int modes, std::uint64_t seed, int count, double scale)
{
    std::vector<std::array<int, 4>> quads;
    const int n = 2 * modes;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) {
                for (int l = k + 1; l < n; ++l) {
                    quads.push_back({i, j, k, l});
                }
            }
        }
    }
    std::mt19937_64 rng(seed);
    std::shuffle(quads.begin(), quads.end(), rng);
    if (count >= 0 && static_cast<std::size_t>(count) < quads.size()) {
        quads.resize(static_cast<std::size_t>(count));
    }
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<QuarticCoupling::Entry> entries;
    for (const auto& q : quads) {
        double v = 0.0;
        while (v == 0.0) {
            v = u(rng);
        }
        entries.push_back({q, v});
    }
    return {modes, entries};
}

}  // namespace majq
