#include <gtest/gtest.h>

#include <random>

#include "magflow/bulk.hpp"
#include "magflow/fiber.hpp"

using namespace magflow;

namespace {

SwitchProfile wall(double lo, double hi) { return {lo, hi, -1.0, 1.0, SwitchShape::smooth_bump}; }
SwitchProfile flat(double v) { return SwitchProfile::constant(v); }

std::vector<double> spectrum(const FiberMatrix& f) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f.dense(), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

}  // namespace

TEST(AssembleFiber, HermitianBitExact) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    for (auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::periodic}) {
        for (int t = 0; t < 10; ++t) {
            ProfileSet ps{wall(u(rng) + 3.5, -u(rng) - 3.5), wall(u(rng), u(rng)), wall(u(rng), u(rng))};
            Grid1D g{7.0 + t, 64 + 8 * t, bc};
            const auto H = assemble_fiber(g, ps, u(rng)).dense();
            const Eigen::MatrixXcd Ht = H.adjoint();
            ASSERT_TRUE((H.array() == Ht.array()).all());
        }
    }
}

TEST(AssembleFiber, HandComputedPeriodicTwoSite) {
    // h = 1, x = (-1, 0), A2 = 2x = (-2, 0).
    ProfileSet ps{flat(2.0), flat(0.0), flat(0.0)};
    Grid1D g{1.0, 2, BoundaryCondition::periodic};
    const auto H = assemble_fiber(g, ps, 0.0).dense();
    const cplx I(0, 1);
    Eigen::Matrix4cd want;
    want << 0, -I, 0, -I,  //
        I, 0, I, 0,        //
        0, -I, 0, I,       //
        I, 0, -I, 0;
    EXPECT_TRUE((H.array() == want.array()).all()) << H;
}

TEST(AssembleFiber, ChiralSymmetry) {
    ProfileSet ps{wall(-2, 2), flat(0.0), flat(0.0)};
    for (double z : {-3.0, 0.0, 1.7}) {
        for (auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::periodic}) {
            auto ev = spectrum(assemble_fiber({10.0, 120, bc}, ps, z));
            for (size_t k = 0; k < ev.size(); ++k) ASSERT_NEAR(ev[k], -ev[ev.size() - 1 - k], 1e-10);
        }
    }
}

TEST(AssembleFiber, PotentialShiftExact) {
    ProfileSet ps{wall(-2, 2), wall(-2, 2), wall(-0.1, 0.1)};
    ProfileSet shifted = ps;
    const double c = 0.75;
    shifted.V.lower += c;
    shifted.V.upper += c;
    Grid1D g{10.0, 150, BoundaryCondition::dirichlet};
    auto a = eig_window(assemble_fiber(g, ps, 1.0), {-3, 3});
    auto b = eig_window(assemble_fiber(g, shifted, 1.0), {-3 + c, 3 + c});
    ASSERT_EQ(a.size(), b.size());
    for (size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k].mu + c, b[k].mu, 1e-12);
}

TEST(AssembleFiber, WeylBound) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2, 2);
    Grid1D g{8.0, 100, BoundaryCondition::dirichlet};
    for (int t = 0; t < 10; ++t) {
        ProfileSet p1{wall(-2, 2), wall(u(rng), u(rng)), wall(u(rng), u(rng))};
        ProfileSet p2{p1.B, wall(u(rng), u(rng)), wall(u(rng), u(rng))};
        double bound = 0.0;
        for (int i = 0; i < g.N; ++i) {
            const double x = g.x(i);
            bound = std::max(bound, std::abs(p1.m(x) - p2.m(x)) + std::abs(p1.V(x) - p2.V(x)));
        }
        auto e1 = spectrum(assemble_fiber(g, p1, 0.5));
        auto e2 = spectrum(assemble_fiber(g, p2, 0.5));
        for (size_t k = 0; k < e1.size(); ++k) ASSERT_LE(std::abs(e1[k] - e2[k]), bound + 1e-10);
    }
}

TEST(EigWindow, DiagonalMatrix) {
    auto f = FiberMatrix::diagonal({-3.0, 5.0, 0.5, -1.0, 7.0, 2.0});
    auto pairs = eig_window(f, {-1.5, 2.5});
    ASSERT_EQ(pairs.size(), 3u);
    EXPECT_EQ(pairs[0].mu, -1.0);
    EXPECT_EQ(pairs[1].mu, 0.5);
    EXPECT_EQ(pairs[2].mu, 2.0);
    EXPECT_THROW(eig_window(f, {1.0, 1.0}), ConfigError);
}

TEST(EigWindow, ClosedWindowIncludesEdges) {
    auto f = FiberMatrix::diagonal({-1.0, 0.0, 1.0, 2.0});
    EXPECT_EQ(eig_window(f, {-1.0, 1.0}).size(), 3u);
}

TEST(EigWindow, TridiagonalMatchesDenseSolve) {
    ProfileSet ps{wall(-2, 2), wall(-2, 2), wall(-0.1, 0.1)};
    Grid1D g{12.0, 200, BoundaryCondition::dirichlet};
    for (double z : {-6.0, -0.3, 0.0, 2.2, 7.5}) {
        auto f = assemble_fiber(g, ps, z);
        auto pairs = eig_window(f, {-3, 3});
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f.dense());
        std::vector<double> ref;
        for (int k = 0; k < es.eigenvalues().size(); ++k)
            if (es.eigenvalues()[k] >= -3 && es.eigenvalues()[k] <= 3) ref.push_back(es.eigenvalues()[k]);
        ASSERT_EQ(ref.size(), pairs.size());
        for (size_t k = 0; k < ref.size(); ++k) {
            EXPECT_NEAR(pairs[k].mu, ref[k], 1e-10);
            EXPECT_NEAR(pairs[k].psi.norm(), 1.0, 1e-12);
            EXPECT_LE(pairs[k].residual, 1e-8 * (1 + std::abs(pairs[k].mu)));
            // Hellmann-Feynman against a finite difference of the eigenvalue.
            const double dz = 1e-6;
            auto up = eig_window(assemble_fiber(g, ps, z + dz), {pairs[k].mu - 1e-3, pairs[k].mu + 1e-3});
            auto dn = eig_window(assemble_fiber(g, ps, z - dz), {pairs[k].mu - 1e-3, pairs[k].mu + 1e-3});
            if (up.size() == 1 && dn.size() == 1) EXPECT_NEAR((up[0].mu - dn[0].mu) / (2 * dz), pairs[k].velocity, 1e-5);
        }
        for (size_t a = 0; a < pairs.size(); ++a)
            for (size_t b = a + 1; b < pairs.size(); ++b)
                ASSERT_LE(std::abs(pairs[a].psi.dot(pairs[b].psi)), 1e-8);
    }
}

TEST(EigWindow, PeriodicDenseFallback) {
    ProfileSet ps{wall(-2, 2), wall(-2, 2), flat(0.0)};
    Grid1D g{10.0, 100, BoundaryCondition::periodic};
    auto f = assemble_fiber(g, ps, 1.0);
    auto pairs = eig_window(f, {-2.5, 2.5});
    auto ref = spectrum(f);
    std::vector<double> in;
    for (double e : ref)
        if (e >= -2.5 && e <= 2.5) in.push_back(e);
    ASSERT_EQ(in.size(), pairs.size());
    for (size_t k = 0; k < in.size(); ++k) EXPECT_NEAR(in[k], pairs[k].mu, 1e-10);
}

TEST(EigWindow, LandauLevelsOfConstantFiber) {
    ProfileSet ps{flat(2.0), flat(2.0), flat(0.0)};
    Grid1D g{20.0, 800, BoundaryCondition::dirichlet};
    auto pairs = filter_spurious(eig_window(assemble_fiber(g, ps, 0.0), {-4, 4}), g, SpuriousFilter::defaults(g));
    const std::vector<double> want{-std::sqrt(12.0), -std::sqrt(8.0), 2.0, std::sqrt(8.0), std::sqrt(12.0)};
    for (double w : want) {
        double best = 1e9;
        for (const auto& p : pairs) best = std::min(best, std::abs(p.mu - w));
        EXPECT_LE(best, 1e-2) << w;
    }
    // The k = 3 pair sits at |mu| = 4, on the window edge; the discrete values fall just inside.
    const auto levels = landau_levels({2, 2, 0}, 4).levels;
    for (const auto& p : pairs) {
        double best = 1e9;
        for (double l : levels) best = std::min(best, std::abs(p.mu - l));
        EXPECT_LE(best, 1e-2) << p.mu;
    }
    EXPECT_EQ(pairs.size(), want.size() + 2);
}

TEST(EigWindow, EmptyInsideGap) {
    ProfileSet ps{wall(-2, 2), flat(3.0), flat(0.0)};
    Grid1D g{20.0, 800, BoundaryCondition::dirichlet};
    const double delta = std::sqrt(9.0 - sup_A2_prime(ps, g.L));
    for (double z = -8; z <= 8; z += 2) EXPECT_TRUE(eig_window(assemble_fiber(g, ps, z), {-delta + 0.05, delta - 0.05}).empty());
}

TEST(SpuriousFilter, SyntheticVectors) {
    Grid1D g{8.0, 64, BoundaryCondition::dirichlet};
    EigenPair inner, edge;
    inner.psi = Eigen::VectorXcd::Zero(g.dim());
    edge.psi = Eigen::VectorXcd::Zero(g.dim());
    for (int i = 0; i < g.N; ++i) {
        if (std::abs(g.x(i)) < g.L / 2) inner.psi[2 * i] = 1.0;
        if (g.x(i) > g.L - 1.0) edge.psi[2 * i + 1] = 1.0;
    }
    edge.psi[g.dim() / 2] = 0.5;  // a little interior weight
    inner.psi.normalize();
    edge.psi.normalize();
    EXPECT_EQ(filter_spurious({inner}, g, {g.L / 4, 0.3}).size(), 1u);
    EXPECT_GT(boundary_mass(edge.psi, g, 2.0), 0.85);
    EXPECT_TRUE(filter_spurious({edge}, g, {2.0, 0.5}).empty());
    EXPECT_THROW(filter_spurious({inner}, g, {g.L, 0.3}), ConfigError);
    EXPECT_THROW(filter_spurious({inner}, g, {1.0, 1.0}), ConfigError);
}

TEST(SpuriousFilter, InterfaceStatesAreInterior) {
    ProfileSet ps{wall(-2, 2), flat(0.0), flat(0.0)};
    Grid1D g{20.0, 800, BoundaryCondition::dirichlet};
    auto kept = solve_fiber(g, ps, 6.0, {-4, 4}, SpuriousFilter::defaults(g));
    ASSERT_FALSE(kept.empty());
    for (const auto& p : kept) EXPECT_LT(p.boundary_mass, 0.05) << p.mu;
}

TEST(Grid1D, Diagnostics) {
    ProfileSet ps{wall(-2, 2), flat(0.0), flat(0.0)};
    Grid1D g{20.0, 800, BoundaryCondition::dirichlet};
    auto d = g.diagnostics(ps, 8.0);
    EXPECT_TRUE(d.doubler_free);
    EXPECT_TRUE(d.momentum_resolved);
    ProfileSet same{flat(2.0), flat(0.0), flat(0.0)};
    EXPECT_FALSE(g.diagnostics(same, 8.0).doubler_free);
    EXPECT_THROW((Grid1D{20.0, 8, BoundaryCondition::dirichlet}.validate()), ConfigError);
}
