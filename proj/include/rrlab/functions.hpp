#pragma once

#include <variant>
#include <vector>

#include "rrlab/interval_set.hpp"

namespace rrlab {

// Right-continuous step function on [0,1): value i holds on
// [breakpoints[i], breakpoints[i+1]) with an implicit final breakpoint 1.
class StepFunction {
public:
    StepFunction();  // zero function
    StepFunction(std::vector<Rational> breakpoints, std::vector<Rational> values);

    static StepFunction constant(const Rational& c);
    static StepFunction indicator(const IntervalSet& s);

    const std::vector<Rational>& breakpoints() const { return breaks_; }
    const std::vector<Rational>& values() const { return values_; }

    Rational operator()(const Rational& x) const;
    // Value of the piece ending at x, i.e. lim_{t -> x-} f(t).
    Rational left_limit(const Rational& x) const;
    Rational integral() const;
    Rational integral_over(const Interval& iv) const;
    // Breakpoints strictly inside (lo, hi).
    std::vector<Rational> breaks_inside(const Rational& lo, const Rational& hi) const;
    Rational min_on(const Interval& iv) const;
    Rational max_on(const Interval& iv) const;
    Rational sup_norm() const;

    StepFunction operator+(const StepFunction& rhs) const;
    StepFunction operator-(const StepFunction& rhs) const;
    StepFunction scaled(const Rational& c) const;
    // Merges equal neighbouring pieces.
    StepFunction simplified() const;
    bool equals(const StepFunction& rhs) const;

private:
    std::vector<Rational> breaks_;
    std::vector<Rational> values_;
};

// Continuous piecewise-linear function on [0,1] given by its nodes. The first
// node sits at 0 and the last at 1.
class PiecewiseLinear {
public:
    PiecewiseLinear(std::vector<Rational> nodes, std::vector<Rational> values);

    static PiecewiseLinear identity();

    const std::vector<Rational>& nodes() const { return nodes_; }
    const std::vector<Rational>& values() const { return values_; }

    Rational operator()(const Rational& x) const;
    Rational left_limit(const Rational& x) const { return (*this)(x); }
    Rational lipschitz_constant() const;
    Rational sup_norm() const;
    Rational integral() const;
    std::vector<Rational> breaks_inside(const Rational& lo, const Rational& hi) const;
    Rational min_on(const Interval& iv) const;
    Rational max_on(const Interval& iv) const;

private:
    std::vector<Rational> nodes_;
    std::vector<Rational> values_;
};

using TestFunction = std::variant<StepFunction, PiecewiseLinear>;

Rational l2_distance(const StepFunction& f, const StepFunction& g);

// Exact integrals of a function that is linear on [a,b) and runs from p (at a)
// to q (at b-).
namespace segment {
Rational integral(const Rational& a, const Rational& b, const Rational& p, const Rational& q);
Rational integral_of_square(const Rational& a, const Rational& b, const Rational& p, const Rational& q);
Rational integral_of_abs(const Rational& a, const Rational& b, const Rational& p, const Rational& q);
Rational integral_of_product(const Rational& a, const Rational& b, const Rational& p1, const Rational& q1,
                             const Rational& p2, const Rational& q2);
// ∫ max(0, |s| - h)^2 for s linear from p to q, h >= 0.
Rational integral_of_excess_square(const Rational& a, const Rational& b, const Rational& p, const Rational& q,
                                   const Rational& h);
}  // namespace segment

}  // namespace rrlab
