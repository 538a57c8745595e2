#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "magflow/branches.hpp"
#include "magflow/presets.hpp"

using namespace magflow;
using fixtures::branches_of;

TEST(SweepBranches, ConstantBulkIsFlat) {
    const auto s = find_preset("fig1_top_left");
    const auto& br = branches_of("fig1_top_left");
    ASSERT_FALSE(br.empty());
    for (const auto& b : br) {
        ASSERT_EQ(b.start, BranchEnd::sweep_end);
        ASSERT_EQ(b.end, BranchEnd::sweep_end);
        EXPECT_LE(std::abs(b.mus.back() - b.mus.front()), 2e-2);
        auto c = classify_asymptotics(b, minus_side(s.profiles), plus_side(s.profiles), 5e-2);
        EXPECT_EQ(c.asymptote_lo->kind, AsymptoteKind::bulk_level);
        EXPECT_EQ(c.asymptote_hi->kind, AsymptoteKind::bulk_level);
        EXPECT_EQ(c.asymptote_lo->value, c.asymptote_hi->value);
        EXPECT_NEAR(c.asymptote_lo->value, b.mus.front(), 5e-2);
    }
}

TEST(SweepBranches, MassWallHasOneMonotoneZeroCrossing) {
    const auto& br = branches_of("fig1_top_right");
    int crossing = 0;
    for (const auto& b : br) {
        for (std::size_t k = 0; k + 1 < b.size(); ++k) {
            if ((b.mus[k] < 0) != (b.mus[k + 1] < 0)) {
                ++crossing;
                // Monotone through the crossing region |mu| < 0.5.
                for (std::size_t q = 0; q + 1 < b.size(); ++q)
                    if (std::abs(b.mus[q]) < 0.5) EXPECT_GT(b.mus[q + 1], b.mus[q]) << "zeta=" << b.zetas[q];
            }
        }
    }
    EXPECT_EQ(crossing, 1);
}

TEST(SweepBranches, ConstantMassOpensGap) {
    for (const auto& b : branches_of("fig1_bottom_right"))
        for (double mu : b.mus) ASSERT_GE(std::abs(mu), 0.5);
}

TEST(ClassifyAsymptotics, FieldWallConvergesOnTheRight) {
    const auto s = find_preset("fig1_bottom_left");
    const auto minus = minus_side(s.profiles), plus = plus_side(s.profiles);
    for (const auto& b : branches_of("fig1_bottom_left")) {
        auto c = classify_asymptotics(b, minus, plus, 5e-2);
        if (b.end == BranchEnd::sweep_end) {
            ASSERT_EQ(c.asymptote_hi->kind, AsymptoteKind::bulk_level);
            EXPECT_TRUE(in_bulk_spectrum(minus, c.asymptote_hi->value) || in_bulk_spectrum(plus, c.asymptote_hi->value));
        }
        // B- < 0 < B+: nothing is bound as zeta -> -inf, every branch leaves through the window edge.
        ASSERT_EQ(c.asymptote_lo->kind, AsymptoteKind::diverging) << b.id;
        EXPECT_NE(b.start, BranchEnd::sweep_end);
        const int n = static_cast<int>(b.size());
        if (n >= 2) EXPECT_GT(std::abs(b.mus[0]), std::abs(b.mus[1]));
    }
}

TEST(ClassifyAsymptotics, UnclassifiableEndpoint) {
    Branch b;
    b.window = {-4, 4};
    b.zetas = {-8, -7.9, -7.8};
    b.mus = {0.33, 0.34, 0.33};
    b.velocities = {0, 0, 0};
    EXPECT_THROW(classify_asymptotics(b, {2, 2, 0}, {2, 2, 0}, 5e-2), ClassificationError);
}

TEST(ValidateWindow, Examples) {
    const auto& br = branches_of("fig2_top_right");
    EXPECT_TRUE(validate_window(br, 0.0, 0.1));
    // m- sgn(B-) + V- = 1.9 is a bulk level of the left half space.
    EXPECT_FALSE(validate_window(br, 1.9, 0.1));
    EXPECT_TRUE(validate_window({}, 0.3, 0.1));
}

TEST(SweepBranches, LipschitzInZeta) {
    for (const char* name : {"fig2_top_right", "fig1_bottom_left", "fig1_top_right"}) {
        for (const auto& b : branches_of(name)) {
            for (std::size_t k = 0; k + 1 < b.size(); ++k)
                ASSERT_LE(std::abs(b.mus[k + 1] - b.mus[k]), b.zetas[k + 1] - b.zetas[k] + 1e-10);
            ASSERT_GE(b.min_overlap, 0.8);
        }
    }
}

TEST(SweepBranches, DistinctBranchesStayApart) {
    for (const char* name : {"fig2_top_right", "fig1_top_right"}) {
        const auto& br = branches_of(name);
        for (std::size_t i = 0; i < br.size(); ++i)
            for (std::size_t j = i + 1; j < br.size(); ++j)
                for (std::size_t p = 0; p < br[i].size(); ++p)
                    for (std::size_t q = 0; q < br[j].size(); ++q)
                        if (br[i].zetas[p] == br[j].zetas[q] && std::abs(br[i].zetas[p]) <= 6.0)
                            ASSERT_GT(std::abs(br[i].mus[p] - br[j].mus[q]), 1e-9);
    }
}

TEST(SweepBranches, NearDegeneratePairsAreSeparated) {
    // Bottom panels: the two half spaces share their limits, so large-zeta branches nearly coincide.
    const auto& br = branches_of("fig1_bottom_right");
    int pairs = 0;
    for (std::size_t i = 0; i < br.size(); ++i)
        for (std::size_t j = i + 1; j < br.size(); ++j)
            if (br[i].end == BranchEnd::sweep_end && br[j].end == BranchEnd::sweep_end &&
                std::abs(br[i].mus.back() - br[j].mus.back()) < 1e-6)
                ++pairs;
    EXPECT_GT(pairs, 0);
}

TEST(SweepBranches, CountInGapStableUnderStepHalving) {
    auto s = find_preset("fig2_top_right");
    auto count_in = [](const std::vector<Branch>& br, double e1, double e2) {
        int n = 0;
        for (const auto& b : br)
            for (double mu : b.mus)
                if (mu >= e1 && mu <= e2) {
                    ++n;
                    break;
                }
        return n;
    };
    const auto& coarse = branches_of("fig2_top_right");
    s.sweep.samples = 2 * (s.sweep.samples - 1) + 1;
    const auto fine = sweep_branches(s.grid, s.profiles, s.sweep, SpuriousFilter::defaults(s.grid));
    EXPECT_EQ(count_in(coarse, -0.5, 0.5), count_in(fine, -0.5, 0.5));
    EXPECT_EQ(count_in(coarse, 2.2, 2.6), count_in(fine, 2.2, 2.6));
    EXPECT_EQ(coarse.size(), fine.size());
}

TEST(SweepBranches, AmbiguityIsReported) {
    auto s = find_preset("fig2_top_right");
    s.sweep.samples = 5;
    s.sweep.min_step = 1.0;
    s.sweep.overlap_threshold = 0.999999;
    try {
        sweep_branches(s.grid, s.profiles, s.sweep, SpuriousFilter::defaults(s.grid));
        FAIL() << "expected a tracking error";
    } catch (const TrackingError& e) {
        EXPECT_NE(std::string(e.what()).find("tracking ambiguity"), std::string::npos);
        EXPECT_EQ(e.code(), ExitCode::tracking);
    }
}

TEST(SweepBranches, WorkerCountDoesNotChangeResult) {
    auto s = find_preset("fig2_top_right");
    s.sweep.samples = 41;
    s.sweep.workers = 1;
    const auto one = sweep_branches(s.grid, s.profiles, s.sweep, SpuriousFilter::defaults(s.grid));
    s.sweep.workers = 3;
    s.sweep.chunk = 7;
    const auto three = sweep_branches(s.grid, s.profiles, s.sweep, SpuriousFilter::defaults(s.grid));
    ASSERT_EQ(one.size(), three.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].zetas, three[i].zetas);
        EXPECT_EQ(one[i].mus, three[i].mus);
    }
}

TEST(SweepConfig, Validation) {
    SweepConfig c;
    c.samples = 1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = SweepConfig{};
    c.zeta_max = c.zeta_min;
    EXPECT_THROW(c.validate(), ConfigError);
}
