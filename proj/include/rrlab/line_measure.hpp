#pragma once

#include <vector>

#include "rrlab/functions.hpp"

namespace rrlab {

struct Atom {
    Rational location;  // in [0,1]
    Rational weight;    // >= 0
};

// Finite atoms plus an absolutely continuous part with a non-negative step
// density on [0,1).
class LineMeasure {
public:
    LineMeasure() = default;  // zero measure
    LineMeasure(std::vector<Atom> atoms, StepFunction density);

    static LineMeasure lebesgue() { return LineMeasure({}, StepFunction::constant(1)); }
    static LineMeasure dirac(const Rational& x) { return LineMeasure({{x, Rational(1)}}, StepFunction()); }

    const std::vector<Atom>& atoms() const { return atoms_; }
    const StepFunction& density() const { return density_; }

    Rational total_mass() const;
    Rational measure_of(const IntervalSet& s) const;
    Rational measure_of(const Interval& iv) const;

    // Atoms merged by location and sorted; zero-weight atoms dropped.
    LineMeasure canonical() const;
    bool equals(const LineMeasure& rhs) const;

private:
    std::vector<Atom> atoms_;
    StepFunction density_;
};

Rational integrate(const StepFunction& f, const LineMeasure& m);
Rational integrate(const PiecewiseLinear& f, const LineMeasure& m);
Rational integrate(const TestFunction& f, const LineMeasure& m);

}  // namespace rrlab
