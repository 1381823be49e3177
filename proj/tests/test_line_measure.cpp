#include <gtest/gtest.h>

#include "rrlab/line_measure.hpp"
#include "support.hpp"

using namespace rrlab;
using namespace rrlab::testing;

TEST(LineMeasure, LebesgueAndDirac) {
    const LineMeasure leb = LineMeasure::lebesgue();
    EXPECT_EQ(leb.total_mass(), 1);
    EXPECT_EQ(leb.measure_of(Interval{make_rational(1, 3), make_rational(1, 2)}), make_rational(1, 6));
    const LineMeasure d = LineMeasure::dirac(make_rational(1, 2));
    EXPECT_EQ(d.measure_of(Interval{make_rational(1, 2), Rational(1)}), 1);
    EXPECT_EQ(d.measure_of(Interval{Rational(0), make_rational(1, 2)}), 0);
    EXPECT_EQ(integrate(PiecewiseLinear::identity(), leb), make_rational(1, 2));
    EXPECT_EQ(integrate(PiecewiseLinear::identity(), d), make_rational(1, 2));
}

TEST(LineMeasure, CanonicalMergesAtoms) {
    LineMeasure m({{make_rational(1, 2), make_rational(1, 4)},
                   {make_rational(1, 8), make_rational(1, 4)},
                   {make_rational(1, 2), make_rational(1, 4)},
                   {make_rational(3, 4), Rational(0)}},
                  StepFunction::constant(make_rational(1, 4)));
    const LineMeasure c = m.canonical();
    ASSERT_EQ(c.atoms().size(), 2U);
    EXPECT_EQ(c.atoms()[0].location, make_rational(1, 8));
    EXPECT_EQ(c.atoms()[1].weight, make_rational(1, 2));
    EXPECT_EQ(c.total_mass(), 1);
    EXPECT_TRUE(c.equals(m));
}

TEST(LineMeasureProperty, IntegrateIsLinearAndMatchesAtoms) {
    std::mt19937 rng(kSeed);
    for (int trial = 0; trial < 50; ++trial) {
        LineMeasure m = random_atoms(rng, 5);
        StepFunction f = random_step(rng), g = random_step(rng);
        Rational oracle(0);
        for (const auto& a : m.atoms()) oracle += a.weight * f(a.location);
        EXPECT_EQ(integrate(f, m), oracle);
        EXPECT_EQ(integrate(f + g, m), integrate(f, m) + integrate(g, m));
        EXPECT_EQ(integrate(StepFunction::constant(1), m), m.total_mass());
        IntervalSet s = random_set(rng);
        EXPECT_EQ(m.measure_of(s), integrate(StepFunction::indicator(s), m));
        // Against a density the integral is ∫ f·d.
        LineMeasure cont({}, StepFunction::constant(make_rational(1, 2)));
        EXPECT_EQ(integrate(f, cont), f.integral() / 2);
    }
}
