#include "rrlab/interval_set.hpp"

#include <algorithm>
#include <cctype>

namespace rrlab {

std::string to_string(const Rational& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string to_decimal(const Rational& q) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", q.get_d());
    return buf;
}

Rational parse_rational(std::string_view text) {
    auto valid_int = [](std::string_view s) {
        if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
        return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
    };
    auto to_int = [](std::string_view s) {
        if (!s.empty() && s.front() == '+') s.remove_prefix(1);
        return Integer(std::string(s));
    };
    const auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
    if (!valid_int(num) || !valid_int(den)) throw InvalidInput("malformed rational: " + std::string(text));
    return make_rational(to_int(num), to_int(den));
}

std::vector<Interval> canonicalize(std::vector<Interval> parts) {
    std::erase_if(parts, [](const Interval& iv) { return !(iv.lo < iv.hi); });
    std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    out.reserve(parts.size());
    for (auto& iv : parts) {
        if (!out.empty() && iv.lo <= out.back().hi) {
            if (out.back().hi < iv.hi) out.back().hi = iv.hi;
        } else {
            out.push_back(std::move(iv));
        }
    }
    return out;
}

IntervalSet::IntervalSet(std::initializer_list<Interval> parts)
    : IntervalSet(std::vector<Interval>(parts)) {}

IntervalSet::IntervalSet(std::vector<Interval> parts) : parts_(canonicalize(std::move(parts))) {
    if (!parts_.empty() && (parts_.front().lo < 0 || parts_.back().hi > 1)) {
        throw OutOfRange("interval set must lie in [0,1)");
    }
}

Rational IntervalSet::measure() const {
    Rational total(0);
    for (const auto& iv : parts_) total += iv.hi - iv.lo;
    return total;
}

bool IntervalSet::contains(const Rational& x) const {
    auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                               [](const Rational& v, const Interval& iv) { return v < iv.lo; });
    return it != parts_.begin() && std::prev(it)->contains(x);
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
    std::vector<Interval> all = parts_;
    all.insert(all.end(), other.parts_.begin(), other.parts_.end());
    return IntervalSet(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    while (i < parts_.size() && j < other.parts_.size()) {
        const auto& a = parts_[i];
        const auto& b = other.parts_[j];
        const Rational& lo = max_of(a.lo, b.lo);
        const Rational& hi = min_of(a.hi, b.hi);
        if (lo < hi) out.push_back({lo, hi});
        if (a.hi < b.hi) ++i; else ++j;
    }
    IntervalSet r;
    r.parts_ = std::move(out);
    return r;
}

IntervalSet IntervalSet::complement() const {
    std::vector<Interval> out;
    Rational cursor(0);
    for (const auto& iv : parts_) {
        if (cursor < iv.lo) out.push_back({cursor, iv.lo});
        cursor = iv.hi;
    }
    if (cursor < 1) out.push_back({cursor, Rational(1)});
    IntervalSet r;
    r.parts_ = std::move(out);
    return r;
}

IntervalSet IntervalSet::subtract(const IntervalSet& other) const {
    return intersect(other.complement());
}

IntervalSet IntervalSet::translate(const Rational& t) const {
    std::vector<Interval> out;
    out.reserve(parts_.size());
    for (const auto& iv : parts_) {
        Interval moved{iv.lo + t, iv.hi + t};
        if (moved.lo < 0 || moved.hi > 1) throw OutOfRange("translated set leaves [0,1)");
        out.push_back(std::move(moved));
    }
    IntervalSet r;
    r.parts_ = std::move(out);
    return r;
}

IntervalSet set_algebra(const IntervalSet& lhs, const IntervalSet& rhs, SetOp op) {
    switch (op) {
        case SetOp::Union: return lhs.unite(rhs);
        case SetOp::Intersect: return lhs.intersect(rhs);
        case SetOp::Subtract: return lhs.subtract(rhs);
        case SetOp::Complement: return lhs.complement();
    }
    return {};
}

}  // namespace rrlab
