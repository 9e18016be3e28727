// Copyright 2026 The majq Authors
// SPDX-License-Identifier: Apache-2.0

#include "majq/fpe_kernel.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace majq;

namespace {

HamiltonianSpec model(int m, std::uint64_t seed, int quartic = -1)
{
    HamiltonianSpec s(m);
    s.t = random_coupling_matrix(m, seed, 0.5);
    if (m >= 2) {
        s.g = random_quartic(m, seed + 100, quartic, 0.5);
    }
    return s;
}

}  // namespace

TEST(XValue, MatchesComplexProduct)
{
    const PhasePoint x = random_interior_point(2, 1, 0.7);
    const Eigen::MatrixXd xd = x.dense();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) {
                    const auto ref = oracle::big_x(xd, i, j, a, b);
                    EXPECT_NEAR(re_X(x, i, j, a, b), ref.real(), 1e-15);
                    EXPECT_NEAR(im_X(x, i, j, a, b), ref.imag(), 1e-15);
                }
            }
        }
    }
    EXPECT_THROW(im_X(x, 0, 4, 0, 1), IndexError);
}

TEST(XValue, PlusMinus)
{
    const PhasePoint x = random_interior_point(1, 2, 0.5);
    const auto pm = x_plus_minus(x);
    EXPECT_EQ(pm.plus(0, 0), std::complex<double>(0.0, 1.0));
    EXPECT_EQ(pm.minus(1, 1), std::complex<double>(0.0, -1.0));
    EXPECT_EQ(pm.plus(0, 1).real(), x(0, 1));
}

TEST(Diffusion, MatchesDirectFourFoldSum)
{
    for (int m = 2; m <= 3; ++m) {
        for (std::uint64_t s = 0; s < 4; ++s) {
            const HamiltonianSpec h = model(m, s);
            const PhasePoint x = s % 2 ? random_boundary_point(m, s) : random_interior_point(m, s, 0.8);
            const DiffusionMatrix d = diffusion(x, h.g);
            EXPECT_LT((d - oracle::diffusion(x, h.g)).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_LT((d - d.transpose()).cwiseAbs().maxCoeff(), 1e-13);
        }
    }
}

TEST(Diffusion, VanishesWithoutQuarticAndAtTwoModes)
{
    const PhasePoint x = random_interior_point(2, 4, 0.7);
    EXPECT_EQ(diffusion(x, QuarticCoupling(2)).cwiseAbs().maxCoeff(), 0.0);
    // With four Majoranas the single quartic term is a parity-like operator: D cancels.
    const std::vector<QuarticCoupling::Entry> e{{{0, 1, 2, 3}, 1.0}};
    EXPECT_LT(diffusion(x, QuarticCoupling(2, e)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Diffusion, TracelessEverywhere)
{
    for (int m = 2; m <= 4; ++m) {
        for (std::uint64_t s = 0; s < 5; ++s) {
            const QuarticCoupling g = random_quartic(m, s, -1, 1.0);
            const PhasePoint x = random_interior_point(m, s + 50, 0.9);
            EXPECT_LT(diagonal_diffusion(x, g).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_LT(std::abs(trace_diffusion(x, g)), 1e-12);
        }
    }
}

TEST(Diffusion, ModeMismatch)
{
    EXPECT_THROW(diffusion(PhasePoint(2), QuarticCoupling(3)), DimensionError);
}

TEST(Channels, ReconstructAndSplitBySign)
{
    const PhasePoint x = random_boundary_point(3, 8);
    const QuarticCoupling g = random_quartic(3, 9, 3, 1.0);
    const ChannelDecomposition ch = diffusion_channels(x, g);
    EXPECT_EQ(ch.channels.size(), 3u * 24u);
    EXPECT_LT((ch.reconstruct() - diffusion(x, g)).cwiseAbs().maxCoeff(), 1e-12);
    for (const auto& c : ch.channels) {
        EXPECT_NEAR(std::abs(c.weight), 4.0 * std::abs(g(c.idx[0], c.idx[1], c.idx[2], c.idx[3])), 1e-15);
    }
    EXPECT_TRUE(diffusion_channels(x, QuarticCoupling(3)).channels.empty());
}

TEST(Drift, BarMatchesDirectSum)
{
    for (int m = 1; m <= 3; ++m) {
        const HamiltonianSpec h = model(m, 20 + m);
        const PhasePoint x = random_interior_point(m, 30 + m, 0.6);
        EXPECT_LT((drift_bar(x, h.t, h.g) - oracle::drift_bar(x, h)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Drift, SingleModeQuadraticIsZero)
{
    CouplingMatrix t(1, Eigen::VectorXd::Constant(1, 0.7));
    Eigen::VectorXd p(1);
    p[0] = 0.4;
    EXPECT_NEAR(drift(PhasePoint(1, p), t, QuarticCoupling(1))[0], 0.0, 1e-15);
}

TEST(Drift, QuadraticDriftIsCommutator)
{
    for (int m = 1; m <= 3; ++m) {
        const CouplingMatrix t = random_coupling_matrix(m, 40 + m, 0.5);
        const PhasePoint x = random_interior_point(m, 41 + m, 0.5);
        const Eigen::MatrixXd a = unpack_antisymmetric(m, drift(x, t, QuarticCoupling(m)));
        const Eigen::MatrixXd ref = 4.0 * (t.dense() * x.dense() - x.dense() * t.dense());
        EXPECT_LT((a - ref).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Drift, ZeroCouplingsGiveZeroDrift)
{
    const PhasePoint x = random_interior_point(2, 5, 0.5);
    EXPECT_EQ(drift(x, CouplingMatrix(2), QuarticCoupling(2)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Divergence, ClosedFormMatchesFiniteDifferences)
{
    for (int m = 2; m <= 3; ++m) {
        const HamiltonianSpec h = model(m, 60 + m, 2);
        const PhasePoint x = random_interior_point(m, 61 + m, 0.7);
        EXPECT_LT((div_diffusion(x, h.g) - oracle::fd_div_diffusion(x, h.g, 1e-4)).cwiseAbs().maxCoeff(), 1e-7);
        EXPECT_LT((div_diffusion(x, h.g) - fd_div_diffusion(x, h.g)).cwiseAbs().maxCoeff(), 1e-7);
        for (DriftForm f : {DriftForm::divergence_corrected, DriftForm::surface_closed_form}) {
            EXPECT_NEAR(drift_divergence(x, h.t, h.g, f), fd_drift_divergence(x, h.t, h.g, f), 1e-6);
        }
        EXPECT_NEAR(diffusion_double_divergence(x, h.g), fd_diffusion_double_divergence(x, h.g), 1e-5);
    }
}

TEST(Divergence, DriftIsDivergenceFree)
{
    for (int m = 1; m <= 4; ++m) {
        const HamiltonianSpec h = model(m, 70 + m);
        const PhasePoint x = random_interior_point(m, 71 + m, 0.7);
        EXPECT_NEAR(drift_divergence(x, h.t, h.g), 0.0, 1e-10);
        EXPECT_NEAR(diffusion_double_divergence(x, h.g), 0.0, 1e-10);
    }
}

TEST(Rhs, DriftFormsAgree)
{
    const HamiltonianSpec h = model(3, 80);
    const PhasePoint x = random_interior_point(3, 81, 0.6);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd grad(x.size());
    Eigen::MatrixXd hess(x.size(), x.size());
    for (int a = 0; a < x.size(); ++a) {
        grad[a] = n(rng);
        for (int b = 0; b <= a; ++b) {
            hess(a, b) = hess(b, a) = n(rng);
        }
    }
    const double a = fpe_rhs(x, h.t, h.g, grad, hess);
    const double b = conservative_rhs(x, h.t, h.g, 0.37, grad, hess);
    EXPECT_NEAR(a, b, 1e-11 * std::max(1.0, std::abs(a)));
    EXPECT_THROW(fpe_rhs(x, h.t, h.g, Eigen::VectorXd::Zero(3), hess), DimensionError);
}

TEST(Tangency, ResidualVanishesOnBoundary)
{
    for (int m = 1; m <= 4; ++m) {
        const HamiltonianSpec h = model(m, 90 + m);
        const PhasePoint x = random_boundary_point(m, 91 + m);
        EXPECT_LT(tangency_residual(x, h.t, h.g).cwiseAbs().maxCoeff(), 1e-11);
    }
}

TEST(Tangency, RejectsInteriorPoint)
{
    const HamiltonianSpec h = model(2, 3);
    EXPECT_THROW(tangency_residual(random_interior_point(2, 1, 0.5), h.t, h.g), PreconditionError);
}
