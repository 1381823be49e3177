#pragma once

#include <initializer_list>
#include <vector>

#include "rrlab/rational.hpp"

namespace rrlab {

// Half-open interval [lo, hi).
struct Interval {
    Rational lo;
    Rational hi;

    Rational length() const { return hi - lo; }
    bool contains(const Rational& x) const { return lo <= x && x < hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

// Finite union of half-open intervals inside [0,1), kept sorted, disjoint and
// maximally merged so that equal sets have equal representations.
class IntervalSet {
public:
    IntervalSet() = default;
    IntervalSet(std::initializer_list<Interval> parts);
    explicit IntervalSet(std::vector<Interval> parts);

    static IntervalSet unit() { return IntervalSet({{Rational(0), Rational(1)}}); }

    const std::vector<Interval>& intervals() const { return parts_; }
    bool empty() const { return parts_.empty(); }
    Rational measure() const;
    bool contains(const Rational& x) const;

    IntervalSet unite(const IntervalSet& other) const;
    IntervalSet intersect(const IntervalSet& other) const;
    IntervalSet subtract(const IntervalSet& other) const;
    // Complement inside [0,1).
    IntervalSet complement() const;
    // Shift every interval by t. Throws OutOfRange if the image leaves [0,1).
    IntervalSet translate(const Rational& t) const;

    friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

private:
    std::vector<Interval> parts_;
};

enum class SetOp { Union, Intersect, Subtract, Complement };

// Complement ignores rhs.
IntervalSet set_algebra(const IntervalSet& lhs, const IntervalSet& rhs, SetOp op);

// Rebuilds the canonical form from an arbitrary list; empty pieces are dropped.
std::vector<Interval> canonicalize(std::vector<Interval> parts);

}  // namespace rrlab
