#include "rrlab/level_mask.hpp"

namespace rrlab {

Verdict verdict_le(const Bounds& lhs, const Bounds& rhs) {
    if (lhs.hi <= rhs.lo) return Verdict::Pass;
    if (lhs.lo > rhs.hi) return Verdict::Fail;
    return Verdict::Undecided;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Undecided: return "undecided";
    }
    return "?";
}

namespace {

Truth and3(Truth a, Truth b) {
    if (a == Truth::False || b == Truth::False) return Truth::False;
    if (a == Truth::Unknown || b == Truth::Unknown) return Truth::Unknown;
    return Truth::True;
}

Truth or3(Truth a, Truth b) {
    if (a == Truth::True || b == Truth::True) return Truth::True;
    if (a == Truth::Unknown || b == Truth::Unknown) return Truth::Unknown;
    return Truth::False;
}

Truth not3(Truth a) {
    if (a == Truth::Unknown) return a;
    return a == Truth::True ? Truth::False : Truth::True;
}

}  // namespace

LevelMask::LevelMask(const BuiltSystem& sys, int resolution, Truth fill)
    : sys_(&sys), resolution_(resolution), bits_(sys.stage(resolution).height(), fill) {}

LevelMask LevelMask::operator&(const LevelMask& o) const {
    LevelMask out = *this;
    for (std::size_t j = 0; j < bits_.size(); ++j) out.bits_[j] = and3(bits_[j], o.bits_[j]);
    return out;
}

LevelMask LevelMask::operator|(const LevelMask& o) const {
    LevelMask out = *this;
    for (std::size_t j = 0; j < bits_.size(); ++j) out.bits_[j] = or3(bits_[j], o.bits_[j]);
    return out;
}

LevelMask LevelMask::operator!() const {
    LevelMask out = *this;
    for (auto& b : out.bits_) b = not3(b);
    return out;
}

LevelMask LevelMask::preimage(long n) const {
    LevelMask out(*sys_, resolution_, Truth::Unknown);
    const long h = static_cast<long>(bits_.size());
    const bool closed = sys_->closed_at(resolution_);
    for (long j = 0; j < h; ++j) {
        long t = j + n;
        if (t >= 0 && t < h) {
            out.bits_[static_cast<std::size_t>(j)] = bits_[static_cast<std::size_t>(t)];
        } else if (closed) {
            out.bits_[static_cast<std::size_t>(j)] = bits_[static_cast<std::size_t>(((t % h) + h) % h)];
        }
    }
    return out;
}

LevelMask LevelMask::all_within(long lo, long hi) const {
    // Sliding window over the orbit index j+i with prefix counts of False and
    // Unknown entries; out-of-range indices wrap when closed, else are Unknown.
    const long h = static_cast<long>(bits_.size());
    const bool closed = sys_->closed_at(resolution_);
    const long first = lo, last = h - 1 + hi;
    const std::size_t span = static_cast<std::size_t>(last - first + 1);
    std::vector<std::uint32_t> falses(span + 1, 0), unknowns(span + 1, 0);
    for (long t = first; t <= last; ++t) {
        Truth v;
        if (t >= 0 && t < h) {
            v = bits_[static_cast<std::size_t>(t)];
        } else if (closed) {
            v = bits_[static_cast<std::size_t>(((t % h) + h) % h)];
        } else {
            v = Truth::Unknown;
        }
        std::size_t p = static_cast<std::size_t>(t - first);
        falses[p + 1] = falses[p] + (v == Truth::False);
        unknowns[p + 1] = unknowns[p] + (v == Truth::Unknown);
    }
    LevelMask out(*sys_, resolution_, Truth::True);
    for (long j = 0; j < h; ++j) {
        std::size_t a = static_cast<std::size_t>(j + lo - first);
        std::size_t b = static_cast<std::size_t>(j + hi - first + 1);
        if (falses[b] - falses[a] > 0) {
            out.bits_[static_cast<std::size_t>(j)] = Truth::False;
        } else if (unknowns[b] - unknowns[a] > 0) {
            out.bits_[static_cast<std::size_t>(j)] = Truth::Unknown;
        }
    }
    return out;
}

std::size_t LevelMask::count(Truth t) const {
    std::size_t n = 0;
    for (auto b : bits_) n += (b == t);
    return n;
}

Bounds LevelMask::measure() const {
    const Rational& w = sys_->stage(resolution_).width;
    Rational inner_mass = w * static_cast<unsigned long>(count(Truth::True));
    Rational outer_mass = inner_mass + w * static_cast<unsigned long>(count(Truth::Unknown));
    return {inner_mass, outer_mass};
}

IntervalSet LevelMask::collect(bool include_unknown) const {
    const TowerStage& st = sys_->stage(resolution_);
    std::vector<Interval> parts;
    for (std::uint32_t j : st.order()) {
        Truth b = bits_[j];
        if (b == Truth::True || (include_unknown && b == Truth::Unknown)) {
            Interval lvl = st.level(j);
            if (!parts.empty() && parts.back().hi == lvl.lo) {
                parts.back().hi = lvl.hi;
            } else {
                parts.push_back(std::move(lvl));
            }
        }
    }
    return IntervalSet(std::move(parts));
}

IntervalSet LevelMask::inner() const { return collect(false); }
IntervalSet LevelMask::outer() const { return collect(true); }

}  // namespace rrlab
