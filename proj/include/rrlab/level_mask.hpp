#pragma once

#include <cstdint>
#include <vector>

#include "rrlab/rank_one.hpp"

namespace rrlab {

enum class Truth : std::uint8_t { False, True, Unknown };

// Exact lower/upper pair for a quantity that depends on orbit data beyond the
// resolution stage. lo == hi means the value is exact.
struct Bounds {
    Rational lo;
    Rational hi;

    static Bounds exact(const Rational& v) { return {v, v}; }
    bool is_exact() const { return lo == hi; }
    Rational gap() const { return hi - lo; }
    Bounds operator+(const Bounds& o) const { return {lo + o.lo, hi + o.hi}; }
    friend bool operator==(const Bounds&, const Bounds&) = default;
    Bounds scaled(const Rational& c) const { return c >= 0 ? Bounds{lo * c, hi * c} : Bounds{hi * c, lo * c}; }
};

enum class Verdict { Pass, Fail, Undecided };

// lhs <= rhs: certified when every admissible value satisfies it.
Verdict verdict_le(const Bounds& lhs, const Bounds& rhs);
const char* to_string(Verdict v);

// A set that is a union of levels of one resolution stage, with three-valued
// membership per level. inner() collects the certain levels, outer() adds the
// undetermined ones.
class LevelMask {
public:
    LevelMask(const BuiltSystem& sys, int resolution, Truth fill);

    const BuiltSystem& system() const { return *sys_; }
    int resolution() const { return resolution_; }
    std::size_t size() const { return bits_.size(); }
    Truth operator[](std::size_t j) const { return bits_[j]; }
    void set(std::size_t j, Truth t) { bits_[j] = t; }

    LevelMask operator&(const LevelMask& o) const;
    LevelMask operator|(const LevelMask& o) const;
    LevelMask operator!() const;

    // {x : T^n x in this set}.
    LevelMask preimage(long n) const;
    // {x : T^i x in this set for every lo <= i <= hi}.
    LevelMask all_within(long lo, long hi) const;

    std::size_t count(Truth t) const;
    Bounds measure() const;
    IntervalSet inner() const;
    IntervalSet outer() const;

private:
    IntervalSet collect(bool include_unknown) const;

    const BuiltSystem* sys_;
    int resolution_;
    std::vector<Truth> bits_;
};

}  // namespace rrlab
