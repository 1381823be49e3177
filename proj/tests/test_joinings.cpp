#include <gtest/gtest.h>

#include "rrlab/joinings.hpp"
#include "support.hpp"

using namespace rrlab;
using namespace rrlab::testing;

namespace {

// Low 2-adic digit of a rational with odd denominator, and the rest.
int low_digit(const Rational& g) { return mpz_odd_p(g.get_num_mpz_t()) ? 1 : 0; }

// First `count` binary digits of x + γ computed digit by digit with carries.
// x in [0,1) is read through its binary expansion.
std::vector<int> added_digits(Rational x, Rational gamma, int count) {
    std::vector<int> out;
    int carry = 0;
    for (int i = 0; i < count; ++i) {
        x *= 2;
        const int xd = x >= 1 ? 1 : 0;
        if (xd) x -= 1;
        const int gd = low_digit(gamma);
        gamma = (gamma - gd) / 2;
        const int s = xd + gd + carry;
        out.push_back(s & 1);
        carry = s >> 1;
    }
    return out;
}

Rational from_digits(const std::vector<int>& d) {
    Rational v(0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i]) v += pow2(-static_cast<long>(i) - 1);
    }
    return v;
}

// Left end of the level whose first r digits encode J little-endian.
Rational level_left(unsigned long J, int r) {
    Rational v(0);
    for (int i = 0; i < r; ++i) {
        if ((J >> i) & 1UL) v += pow2(-i - 1);
    }
    return v;
}

Integer brute_inverse_shift(const Rational& gamma, unsigned k) {
    const Integer mod = Integer(1) << k;
    for (Integer m = 0; m < mod; ++m) {
        Integer lhs = gamma.get_den() * m - gamma.get_num();
        if (mpz_divisible_2exp_p(lhs.get_mpz_t(), k)) return m;
    }
    return Integer(-1);
}

}  // namespace

TEST(TwoAdic, ShiftModMatchesBruteForce) {
    const std::vector<long> expected{1, 1, 5, 5, 21, 21, 85};
    const Rational gamma = make_rational(-1, 3);
    for (unsigned k = 1; k <= 7; ++k) {
        EXPECT_EQ(two_adic_shift_mod(gamma, k), expected[k - 1]) << k;
        EXPECT_EQ(two_adic_shift_mod(gamma, k), brute_inverse_shift(gamma, k));
    }
    std::mt19937 rng(kSeed);
    for (int trial = 0; trial < 40; ++trial) {
        const long den = 2 * static_cast<long>(rng() % 10) + 1;
        const long num = static_cast<long>(rng() % 41) - 20;
        const Rational g = make_rational(num, den);
        for (unsigned k = 1; k <= 9; ++k) EXPECT_EQ(two_adic_shift_mod(g, k), brute_inverse_shift(g, k));
    }
}

TEST(TwoAdic, TranslateKnownValues) {
    EXPECT_EQ(two_adic_translate(Rational(0), make_rational(-1, 3)), make_rational(2, 3));
    EXPECT_EQ(two_adic_translate(Rational(0), Rational(1)), make_rational(1, 2));
    EXPECT_EQ(two_adic_translate(make_rational(1, 2), Rational(1)), make_rational(1, 4));
    EXPECT_THROW(two_adic_translate(Rational(0), make_rational(1, 2)), EvenDenominator);
}

TEST(TwoAdicProperty, TranslateMatchesDigitArithmetic) {
    std::mt19937 rng(kSeed + 1);
    constexpr int kDigits = 40;
    for (int trial = 0; trial < 200; ++trial) {
        const long xden = static_cast<long>(rng() % 30) + 1;
        const Rational x = make_rational(static_cast<long>(rng() % static_cast<unsigned long>(xden)), xden);
        const long gden = 2 * static_cast<long>(rng() % 8) + 1;
        const Rational g = make_rational(static_cast<long>(rng() % 31) - 15, gden);
        const Rational y = two_adic_translate(x, g);
        const Rational truncated = from_digits(added_digits(x, g, kDigits));
        ASSERT_LE(truncated, y);
        ASSERT_LE(y, truncated + pow2(-kDigits)) << x.get_str() << " + " << g.get_str();
    }
}

TEST(TwoAdicProperty, TranslationsCompose) {
    std::mt19937 rng(kSeed + 2);
    for (int trial = 0; trial < 100; ++trial) {
        // Odd-denominator points stay off the dyadic null set.
        const long q = 2 * static_cast<long>(rng() % 10) + 3;
        const Rational x = make_rational(static_cast<long>(rng() % static_cast<unsigned long>(q - 1)) + 1, q);
        const Rational a = make_rational(static_cast<long>(rng() % 21) - 10, 3);
        const Rational b = make_rational(static_cast<long>(rng() % 21) - 10, 5);
        const Rational mid = two_adic_translate(x, a);
        // A dyadic intermediate point has two expansions; skip that null set.
        if (mpz_popcount(mid.get_den_mpz_t()) == 1) continue;
        EXPECT_EQ(two_adic_translate(mid, b), two_adic_translate(x, a + b));
    }
}

TEST(TwoAdic, CrossMomentKnownValues) {
    EXPECT_EQ(two_adic_cross_moment(Rational(0)), make_rational(1, 3));
    // |u ⊕ g - u| is not identically 0, so the moment drops below ∫u² = 1/3.
    EXPECT_LT(two_adic_cross_moment(Rational(1)), make_rational(1, 3));
    EXPECT_EQ(two_adic_cross_moment(Rational(1)), two_adic_cross_moment(Rational(-1)));
}

TEST(TwoAdicProperty, CrossMomentWithinLevelBounds) {
    // u ⊕ g maps level J of depth r onto level J + (g mod 2^r), so the
    // integral over level J lies between width·lo·lo' and width·hi·hi'.
    constexpr int r = 10;
    const unsigned long levels = 1UL << r;
    const Rational width = pow2(-r);
    for (const Rational& g : {Rational(1), Rational(3), make_rational(-1, 3), make_rational(2, 5), make_rational(-7, 9)}) {
        const unsigned long m = two_adic_shift_mod(g, r).get_ui();
        Rational lo(0), hi(0);
        for (unsigned long J = 0; J < levels; ++J) {
            const Rational a = level_left(J, r), b = level_left((J + m) % levels, r);
            lo += width * a * b;
            hi += width * (a + width) * (b + width);
        }
        const Rational M = two_adic_cross_moment(g);
        EXPECT_LE(lo, M) << g.get_str();
        EXPECT_LE(M, hi) << g.get_str();
        EXPECT_LE(M, make_rational(1, 3));
    }
}

TEST(Joining, Validation) {
    EXPECT_THROW(Joining(OffDiagonalCombo{{{0, make_rational(1, 2)}}}), InvalidInput);
    EXPECT_THROW(Joining(OffDiagonalCombo{{{0, Rational(2)}, {1, Rational(-1)}}}), InvalidInput);
    EXPECT_THROW(Joining(ProductMix{Rational(2), OffDiagonalCombo{{{0, Rational(1)}}}}), InvalidInput);
    EXPECT_THROW(Joining(TwoAdicGraph{make_rational(1, 4)}), EvenDenominator);
    EXPECT_NO_THROW(Joining(TwoAdicGraph{make_rational(-1, 3)}));
    EXPECT_THROW(builtin_joining("nope"), InvalidInput);
    EXPECT_EQ(builtin_joining_names().size(), 5U);
}

TEST(Joining, Applicability) {
    BuiltSystem odo = build(ConstructionDescriptor::odometer(4), 4);
    BuiltSystem ch = build(ConstructionDescriptor::chacon(3), 3);
    EXPECT_TRUE(applicable(builtin_joining("twoadic"), odo));
    EXPECT_FALSE(applicable(builtin_joining("twoadic"), ch));
    EXPECT_TRUE(applicable(builtin_joining("mix03"), ch));
}

TEST(Joining, FibersOfShippedJoinings) {
    BuiltSystem sys = build(ConstructionDescriptor::rigid_spacered(4), 4);
    const TowerStage& top = sys.top();
    const Rational x = top.lefts[2] + top.width / 3;
    FiberMeasure f = disintegrate(builtin_joining("shift1"), sys, x);
    ASSERT_EQ(f.measure.atoms().size(), 1U);
    EXPECT_EQ(f.measure.atoms()[0].location, *sys.apply_power(x, 1));
    EXPECT_EQ(f.unresolved, 0);

    FiberMeasure pm = disintegrate(builtin_joining("productmix"), sys, x);
    EXPECT_EQ(pm.measure.total_mass() + pm.unresolved, 1);
    EXPECT_EQ(pm.measure.density()(make_rational(1, 2)), make_rational(1, 3));

    FiberMeasure pr = disintegrate(builtin_joining("product"), sys, x);
    EXPECT_TRUE(pr.measure.canonical().equals(LineMeasure::lebesgue()));

    // The last level has no successor in the built system.
    FiberMeasure edge = disintegrate(builtin_joining("shift1"), sys, top.lefts.back());
    EXPECT_EQ(edge.unresolved, 1);

    BuiltSystem odo = build(ConstructionDescriptor::odometer(5), 5);
    FiberMeasure ta = disintegrate(builtin_joining("twoadic"), odo, Rational(0));
    ASSERT_EQ(ta.measure.atoms().size(), 1U);
    EXPECT_EQ(ta.measure.atoms()[0].location, make_rational(2, 3));
    EXPECT_THROW(disintegrate(builtin_joining("twoadic"), sys, x), InvalidInput);
}

TEST(OperatorForm, MergesEqualMaps) {
    OperatorForm f{Rational(0), {}};
    f.terms.push_back({OperatorTerm::Kind::Shift, 2, Rational(0), make_rational(1, 2)});
    f.terms.push_back({OperatorTerm::Kind::Shift, 2, Rational(0), make_rational(1, 4)});
    f.terms.push_back({OperatorTerm::Kind::Shift, 1, Rational(0), Rational(0)});
    OperatorForm m = f.merged();
    ASSERT_EQ(m.terms.size(), 1U);
    EXPECT_EQ(m.terms[0].weight, make_rational(3, 4));
    OperatorForm d = (m - m).merged();
    EXPECT_TRUE(d.terms.empty());
    EXPECT_EQ(d.constant, 0);
}

TEST(OperatorProperty, MarkovContractsOnOdometer) {
    BuiltSystem sys = build(ConstructionDescriptor::odometer(6), 6);
    std::mt19937 rng(kSeed + 3);
    for (const auto& name : builtin_joining_names()) {
        const Joining j = builtin_joining(name);
        OperatorImage one = apply_operator(j, sys, StepFunction::constant(1));
        EXPECT_TRUE(one.value.equals(StepFunction::constant(1))) << name;
        for (int trial = 0; trial < 10; ++trial) {
            StepFunction f = random_step(rng, 6, 16);
            OperatorImage a = apply_operator(j, sys, f);
            EXPECT_EQ(a.value.integral(), f.integral()) << name;
            EXPECT_LE(l2_distance(a.value, StepFunction()), l2_distance(f, StepFunction())) << name;
        }
    }
}

TEST(OperatorProperty, MarkovContractsWithUnresolvedLevels) {
    // On systems with spacers the last levels have no built successor; their
    // value is the mean over the levels nothing else reaches.
    std::mt19937 rng(kSeed + 6);
    for (const char* sys_name : {"rigid-spacered", "chacon"}) {
        BuiltSystem sys = build(ConstructionDescriptor::builtin(sys_name, 4), 4);
        for (const char* name : {"shift1", "mix03", "productmix"}) {
            const Joining j = builtin_joining(name);
            OperatorImage one = apply_operator(j, sys, StepFunction::constant(1));
            EXPECT_TRUE(one.value.equals(StepFunction::constant(1)));
            EXPECT_GT(one.defect_mass, 0);
            for (int trial = 0; trial < 10; ++trial) {
                StepFunction f = random_step(rng, 6, 16);
                OperatorImage a = apply_operator(j, sys, f);
                EXPECT_EQ(a.value.integral(), f.integral()) << sys_name << " " << name;
                EXPECT_LE(l2_distance(a.value, StepFunction()), l2_distance(f, StepFunction()));
            }
        }
    }
}

TEST(OperatorProperty, ShiftOperatorIsComposition) {
    BuiltSystem sys = build(ConstructionDescriptor::chacon(4), 4);
    std::mt19937 rng(kSeed + 4);
    const Joining j = builtin_joining("shift1");
    for (int trial = 0; trial < 10; ++trial) {
        StepFunction f = random_step(rng, 4, 9);
        OperatorImage a = apply_operator(j, sys, f);
        const TowerStage& top = sys.top();
        for (std::size_t lvl = 0; lvl + 1 < top.height(); ++lvl) {
            const Rational x = top.lefts[lvl] + top.width / 7;
            EXPECT_EQ(a.value(x), f(*sys.apply_power(x, 1)));
        }
    }
}

TEST(Marginal, ShippedJoiningsHaveLebesgueMarginal) {
    std::mt19937 rng(kSeed + 5);
    for (const char* sys_name : {"odometer", "rigid-spacered", "chacon"}) {
        BuiltSystem sys = build(ConstructionDescriptor::builtin(sys_name, 4), 4);
        std::vector<IntervalSet> probes;
        for (int i = 0; i < 5; ++i) probes.push_back(random_set(rng));
        for (const auto& name : builtin_joining_names()) {
            const Joining j = builtin_joining(name);
            if (!applicable(j, sys)) continue;
            for (const auto& m : marginal_audit(j, sys, probes)) {
                EXPECT_TRUE(m.pass) << sys_name << " " << name;
                EXPECT_LE(m.lhs.lo, m.rhs);
                EXPECT_LE(m.rhs, m.lhs.hi);
            }
        }
    }
}
