#include <gtest/gtest.h>

#include "rrlab/functions.hpp"
#include "support.hpp"

using namespace rrlab;
using namespace rrlab::testing;

namespace {

// Simpson's rule; exact for polynomials of degree <= 3.
template <class F>
Rational simpson(const Rational& a, const Rational& b, F f) {
    const Rational fa = f(a), fm = f((a + b) / 2), fb = f(b);
    return (b - a) / 6 * (fa + 4 * fm + fb);
}

Rational lerp(const Rational& a, const Rational& b, const Rational& p, const Rational& q, const Rational& x) {
    return p + (q - p) * (x - a) / (b - a);
}

// Integral over all pieces, by piece midpoints and lengths.
Rational piecewise_integral(const StepFunction& f) {
    Rational total(0);
    const auto& b = f.breakpoints();
    for (std::size_t i = 0; i < b.size(); ++i) {
        const Rational hi = i + 1 < b.size() ? b[i + 1] : Rational(1);
        total += f((b[i] + hi) / 2) * (hi - b[i]);
    }
    return total;
}

std::vector<Rational> union_breaks(const StepFunction& f, const StepFunction& g) {
    std::vector<Rational> b = f.breakpoints();
    b.insert(b.end(), g.breakpoints().begin(), g.breakpoints().end());
    b.push_back(Rational(1));
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

}  // namespace

TEST(StepFunction, EvaluatesRightContinuously) {
    StepFunction f({Rational(0), make_rational(1, 2)}, {Rational(3), Rational(-1)});
    EXPECT_EQ(f(Rational(0)), 3);
    EXPECT_EQ(f(make_rational(1, 2)), -1);
    EXPECT_EQ(f.left_limit(make_rational(1, 2)), 3);
    EXPECT_EQ(f.integral(), 1);
    EXPECT_EQ(f.integral_over({make_rational(1, 4), make_rational(3, 4)}), make_rational(1, 2));
    EXPECT_EQ(f.sup_norm(), 3);
}

TEST(StepFunction, IndicatorOfSet) {
    IntervalSet s({{make_rational(1, 8), make_rational(3, 8)}, {make_rational(1, 2), Rational(1)}});
    StepFunction f = StepFunction::indicator(s);
    EXPECT_EQ(f.integral(), s.measure());
    EXPECT_EQ(f(make_rational(1, 4)), 1);
    EXPECT_EQ(f(make_rational(3, 8)), 0);
    EXPECT_EQ(f(make_rational(7, 8)), 1);
}

TEST(StepFunctionProperty, ArithmeticMatchesPointwise) {
    std::mt19937 rng(kSeed);
    for (int trial = 0; trial < 50; ++trial) {
        StepFunction f = random_step(rng), g = random_step(rng);
        const Rational c = random_value(rng);
        StepFunction sum = f + g, diff = f - g, sc = f.scaled(c), simp = (f + g).simplified();
        const auto b = union_breaks(f, g);
        for (std::size_t i = 0; i + 1 < b.size(); ++i) {
            const Rational x = (b[i] + b[i + 1]) / 2;
            ASSERT_EQ(sum(x), f(x) + g(x));
            ASSERT_EQ(diff(x), f(x) - g(x));
            ASSERT_EQ(sc(x), c * f(x));
            ASSERT_EQ(simp(x), sum(x));
            ASSERT_EQ(sum(b[i]), f(b[i]) + g(b[i]));
        }
        EXPECT_TRUE(simp.equals(sum));
        for (std::size_t i = 1; i < simp.values().size(); ++i) EXPECT_NE(simp.values()[i - 1], simp.values()[i]);
        EXPECT_EQ(f.integral(), piecewise_integral(f));
        EXPECT_EQ(sum.integral(), f.integral() + g.integral());
    }
}

TEST(StepFunctionProperty, IntegralOverSplitsAdditively) {
    std::mt19937 rng(kSeed + 1);
    for (int trial = 0; trial < 50; ++trial) {
        StepFunction f = random_step(rng);
        Rational a = random_fraction(rng), b = random_fraction(rng);
        if (b < a) std::swap(a, b);
        const Rational m = (a + b) / 2;
        EXPECT_EQ(f.integral_over({a, b}), f.integral_over({a, m}) + f.integral_over({m, b}));
        EXPECT_EQ(f.integral_over({Rational(0), Rational(1)}), f.integral());
        const Interval iv{a, b};
        if (a < b) {
            for (const auto& x : f.breaks_inside(a, b)) {
                EXPECT_LT(a, x);
                EXPECT_LT(x, b);
            }
            EXPECT_LE(f.min_on(iv), f(a));
            EXPECT_GE(f.max_on(iv), f(a));
        }
    }
}

TEST(StepFunction, L2Distance) {
    StepFunction f = StepFunction::constant(1);
    StepFunction g({Rational(0), make_rational(1, 4)}, {Rational(3), Rational(1)});
    EXPECT_EQ(l2_distance(f, g), make_rational(1));  // (3-1)^2 * 1/4
}

TEST(PiecewiseLinear, IdentityAndLipschitz) {
    PiecewiseLinear id = PiecewiseLinear::identity();
    EXPECT_EQ(id(make_rational(2, 7)), make_rational(2, 7));
    EXPECT_EQ(id.integral(), make_rational(1, 2));
    EXPECT_EQ(id.lipschitz_constant(), 1);
    PiecewiseLinear hat({Rational(0), make_rational(1, 4), Rational(1)}, {Rational(0), make_rational(1, 2), Rational(0)});
    EXPECT_EQ(hat.lipschitz_constant(), 2);
    EXPECT_EQ(hat.sup_norm(), make_rational(1, 2));
    EXPECT_EQ(hat.integral(), make_rational(1, 4));
    EXPECT_EQ(hat.max_on({Rational(0), make_rational(1, 2)}), make_rational(1, 2));
    EXPECT_EQ(hat.min_on({make_rational(1, 8), make_rational(1, 2)}), make_rational(1, 4));
}

TEST(SegmentProperty, ClosedFormsMatchSimpson) {
    std::mt19937 rng(kSeed + 2);
    for (int trial = 0; trial < 200; ++trial) {
        Rational a = random_fraction(rng), b = random_fraction(rng);
        if (a == b) continue;
        if (b < a) std::swap(a, b);
        const Rational p = random_value(rng), q = random_value(rng);
        const Rational p2 = random_value(rng), q2 = random_value(rng);
        auto s = [&](const Rational& x) -> Rational { return lerp(a, b, p, q, x); };
        auto s2 = [&](const Rational& x) -> Rational { return lerp(a, b, p2, q2, x); };
        EXPECT_EQ(segment::integral(a, b, p, q), simpson(a, b, s));
        EXPECT_EQ(segment::integral_of_square(a, b, p, q),
                  simpson(a, b, [&](const Rational& x) -> Rational { return s(x) * s(x); }));
        EXPECT_EQ(segment::integral_of_product(a, b, p, q, p2, q2),
                  simpson(a, b, [&](const Rational& x) -> Rational { return s(x) * s2(x); }));
        // |s| is linear on each side of its zero.
        Rational abs_oracle;
        if ((p >= 0) == (q >= 0) || p == 0 || q == 0) {
            abs_oracle = abs_value(simpson(a, b, s));
        } else {
            const Rational z = a + (b - a) * p / (p - q);
            abs_oracle = abs_value(simpson(a, z, s)) + abs_value(simpson(z, b, s));
        }
        EXPECT_EQ(segment::integral_of_abs(a, b, p, q), abs_oracle);
        const Rational h(0);
        EXPECT_EQ(segment::integral_of_excess_square(a, b, p, q, h), segment::integral_of_square(a, b, p, q));
    }
}

TEST(Segment, ExcessSquareOnConstantAndRamp) {
    // s = 2 on [0,1), h = 1: (2-1)^2 = 1.
    EXPECT_EQ(segment::integral_of_excess_square(Rational(0), Rational(1), Rational(2), Rational(2), Rational(1)), 1);
    // s from 0 to 2 on [0,1), h = 1: ∫_{1/2}^1 (2x-1)^2 dx = 1/6.
    EXPECT_EQ(segment::integral_of_excess_square(Rational(0), Rational(1), Rational(0), Rational(2), Rational(1)),
              make_rational(1, 6));
    // Entirely below the threshold.
    EXPECT_EQ(segment::integral_of_excess_square(Rational(0), Rational(1), make_rational(-1, 2), make_rational(1, 2),
                                                 Rational(1)),
              0);
}
