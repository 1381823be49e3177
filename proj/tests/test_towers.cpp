#include <gtest/gtest.h>

#include "rrlab/towers.hpp"
#include "support.hpp"

using namespace rrlab;
using namespace rrlab::testing;

namespace {

Truth truth_and(Truth a, Truth b) {
    if (a == Truth::False || b == Truth::False) return Truth::False;
    if (a == Truth::Unknown || b == Truth::Unknown) return Truth::Unknown;
    return Truth::True;
}

// Membership of T^i x in a set, from the point orbit.
Truth orbit_in(const BuiltSystem& sys, const Rational& x, long i, const IntervalSet& s) {
    auto y = sys.apply_power(x, i);
    if (!y) return Truth::Unknown;
    return s.contains(*y) ? Truth::True : Truth::False;
}

// Hat/tilde membership of a resolution level from the orbit of its midpoint.
Truth tower_oracle(const TowerContext& ctx, std::size_t j, int reach) {
    const auto& anc = ctx.ancestry();
    if (anc[j] < 0) return Truth::False;
    const TowerStage& rs = ctx.resolution_stage();
    const BuiltSystem& sys = ctx.system();
    const Rational x = rs.lefts[j] + rs.width / 2;
    auto b = sys.apply_power(x, -anc[j]);
    if (!b) return Truth::Unknown;
    const IntervalSet base = ctx.tower_stage().base();
    const long n = static_cast<long>(ctx.height());
    Truth t = Truth::True;
    for (int m = -reach; m <= reach; ++m) t = truth_and(t, orbit_in(sys, *b, m * n, base));
    return t;
}

}  // namespace

TEST(Towers, ConditionsOnShippedSystems) {
    for (const char* name : {"odometer", "rigid-spacered", "chacon"}) {
        BuiltSystem sys = build(ConstructionDescriptor::builtin(name, 6), 6);
        for (const auto& r : verify_conditions(sys, 1, 4)) {
            EXPECT_TRUE(r.cond2_ok) << name;
            EXPECT_EQ(r.cond1_mass, r.width * static_cast<long>(r.height));
            EXPECT_EQ(r.max_level_diameter, r.width);
            EXPECT_LE(r.cond3_ratio.lo, r.cond3_ratio.hi);
            EXPECT_LE(r.mass_rk_tilde.lo, r.mass_rk_hat.hi);
            EXPECT_LE(r.mass_rk_hat.lo, r.mass_rk.hi);
        }
    }
    EXPECT_THROW(verify_conditions(build(ConstructionDescriptor::chacon(3), 3), 2, 1), InvalidInput);
}

TEST(Towers, ReturnRatiosOfRigidSystems) {
    BuiltSystem odo = build(ConstructionDescriptor::odometer(8), 8);
    for (const auto& r : verify_conditions(odo, 1, 6)) EXPECT_EQ(r.cond3_ratio, Bounds::exact(1));
    // λ(A ∩ T^{-n}A) / λ(A) = (r_k - 1) / r_k with r_k = k + 2.
    BuiltSystem sp = build(ConstructionDescriptor::rigid_spacered(7), 7);
    for (const auto& r : verify_conditions(sp, 1, 5)) {
        EXPECT_EQ(r.cond3_ratio, Bounds::exact(make_rational(r.stage + 1, r.stage + 2))) << r.stage;
    }
}

TEST(Towers, SweepAgreesWithPairwiseDisjointness) {
    std::mt19937 rng(kSeed);
    for (int trial = 0; trial < 50; ++trial) {
        TowerStage st;
        st.width = make_rational(1, 16);
        st.ambient_length = 1;
        for (int i = 0; i < 6; ++i) st.lefts.push_back(random_dyadic(rng, 4) * make_rational(15, 16));
        st.finalize();
        bool pairwise = true;
        for (std::size_t i = 0; i < st.height(); ++i) {
            for (std::size_t j = i + 1; j < st.height(); ++j) {
                if (st.lefts[i] < st.lefts[j] + st.width && st.lefts[j] < st.lefts[i] + st.width) pairwise = false;
            }
        }
        EXPECT_EQ(levels_disjoint(st), pairwise);
    }
}

TEST(Towers, MasksMatchPointOrbits) {
    for (const char* name : {"odometer", "rigid-spacered", "chacon"}) {
        BuiltSystem sys = build(ConstructionDescriptor::builtin(name, 5), 5);
        for (int k = 1; k <= 3; ++k) {
            TowerContext ctx(sys, k);
            for (std::size_t j = 0; j < ctx.resolution_stage().height(); ++j) {
                ASSERT_EQ(ctx.hat()[j], tower_oracle(ctx, j, 1)) << name << " k=" << k << " level " << j;
                ASSERT_EQ(ctx.tilde()[j], tower_oracle(ctx, j, 2)) << name << " k=" << k << " level " << j;
            }
        }
    }
}

TEST(Towers, ChainOfTowerSets) {
    for (const char* name : {"odometer", "rigid-spacered", "chacon"}) {
        BuiltSystem sys = build(ConstructionDescriptor::builtin(name, 6), 6);
        for (int k = 1; k <= 4; ++k) {
            TowerTriple t = tower_triple(sys, k);
            EXPECT_TRUE(t.rk_tilde.subtract(t.rk_hat).empty());
            EXPECT_TRUE(t.rk_hat.subtract(t.rk).empty());
            EXPECT_EQ(t.mass_rk, Bounds::exact(sys.stage(k).ambient_length));
        }
    }
}

TEST(Towers, ClosedWindowInclusionsHold) {
    for (const char* name : {"odometer", "rigid-spacered", "chacon"}) {
        BuiltSystem sys = build(ConstructionDescriptor::builtin(name, 7), 7);
        for (int k = 1; k <= 5; ++k) {
            InclusionAudit a = check_inclusions(sys, k);
            EXPECT_NE(a.hat.verdict, Verdict::Fail) << name << " " << k;
            EXPECT_NE(a.tilde.verdict, Verdict::Fail) << name << " " << k;
        }
    }
    BuiltSystem odo = build(ConstructionDescriptor::odometer(6), 6);
    EXPECT_EQ(check_inclusions(odo, 2).hat.verdict, Verdict::Pass);
    EXPECT_EQ(check_inclusions(odo, 2).hat_open.verdict, Verdict::Pass);
}

TEST(Towers, OpenWindowInclusionHasCounterexample) {
    // On the spacered system a point at the top of a stage-1 copy whose base
    // is preceded by a later spacer keeps |i| < n_1 inside R_1, yet its base
    // misses A_1 after n_1 steps back.
    BuiltSystem sys = build(ConstructionDescriptor::rigid_spacered(4), 4);
    TowerContext ctx(sys, 1);
    InclusionAudit a = check_inclusions(ctx);
    EXPECT_EQ(a.hat_open.verdict, Verdict::Fail);
    const long n = static_cast<long>(ctx.height());
    const LevelMask window = ctx.tower().all_within(-(n - 1), n - 1);
    const IntervalSet r1 = ctx.tower_stage().union_of_levels();
    bool found = false;
    for (std::size_t j = 0; j < window.size() && !found; ++j) {
        if (window[j] != Truth::True || ctx.hat()[j] != Truth::False) continue;
        const Rational x = ctx.resolution_stage().lefts[j] + ctx.resolution_stage().width / 2;
        for (long i = -(n - 1); i <= n - 1; ++i) EXPECT_EQ(orbit_in(sys, x, i, r1), Truth::True);
        EXPECT_EQ(tower_oracle(ctx, j, 1), Truth::False);
        found = true;
    }
    EXPECT_TRUE(found);
}

TEST(Towers, GridPointsAndCells) {
    const Interval lvl{make_rational(1, 4), make_rational(1, 2)};
    EXPECT_EQ(grid_point(lvl, 0, 8), make_rational(1, 4) + make_rational(1, 64));
    EXPECT_EQ(grid_cell(lvl, 7, 8).hi, make_rational(1, 2));
    for (int t = 0; t < 8; ++t) EXPECT_TRUE(grid_cell(lvl, t, 8).contains(grid_point(lvl, t, 8)));
}

TEST(GoodLevels, DiagonalIsEverywhereGood) {
    BuiltSystem sys = build(ConstructionDescriptor::odometer(7), 7);
    LevelDiagnostics d = good_levels(sys, 3, Joining::off_diagonal(0), make_rational(1, 8));
    EXPECT_EQ(d.levels.size(), 8U);
    // Fibers δ_x: points of one level lie within width of each other.
    EXPECT_EQ(d.good_fraction, 1);
    for (const auto& r : d.levels) EXPECT_TRUE(r.good);
}

TEST(GoodLevels, ProductFibersAreAllEqual) {
    BuiltSystem sys = build(ConstructionDescriptor::chacon(5), 5);
    LevelDiagnostics d = good_levels(sys, 2, builtin_joining("product"), make_rational(1, 16));
    EXPECT_EQ(d.good_fraction, 1);
    for (const auto& r : d.levels) EXPECT_EQ(r.close_fraction, 1);
}

TEST(GoodLevels, Validation) {
    BuiltSystem sys = build(ConstructionDescriptor::odometer(4), 4);
    EXPECT_THROW(good_levels(sys, 2, Joining::off_diagonal(0), Rational(0)), InvalidInput);
    EXPECT_THROW(good_levels(sys, 2, Joining::off_diagonal(0), make_rational(1, 4), 0), InvalidInput);
    EXPECT_THROW(TowerContext(sys, 9), DepthExceeded);
    EXPECT_EQ(default_epsilon_grid().front(), make_rational(1, 2));
    EXPECT_EQ(default_epsilon_grid().back(), make_rational(1, 256));
}
