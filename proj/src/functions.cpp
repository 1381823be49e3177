#include "rrlab/functions.hpp"

#include <algorithm>

namespace rrlab {

namespace {

std::size_t piece_of(const std::vector<Rational>& breaks, const Rational& x) {
    auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
    return it == breaks.begin() ? 0 : static_cast<std::size_t>(it - breaks.begin()) - 1;
}

std::vector<Rational> merged_breaks(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    std::vector<Rational> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Rational> inside(const std::vector<Rational>& pts, const Rational& lo, const Rational& hi) {
    auto first = std::upper_bound(pts.begin(), pts.end(), lo);
    auto last = std::lower_bound(pts.begin(), pts.end(), hi);
    return first < last ? std::vector<Rational>(first, last) : std::vector<Rational>{};
}

}  // namespace

StepFunction::StepFunction() : breaks_{Rational(0)}, values_{Rational(0)} {}

StepFunction::StepFunction(std::vector<Rational> breakpoints, std::vector<Rational> values)
    : breaks_(std::move(breakpoints)), values_(std::move(values)) {
    if (breaks_.empty() || breaks_.front() != 0) throw InvalidInput("step function must start at 0");
    if (breaks_.size() != values_.size()) throw InvalidInput("step function piece/value count mismatch");
    for (std::size_t i = 1; i < breaks_.size(); ++i) {
        if (!(breaks_[i - 1] < breaks_[i])) throw InvalidInput("step breakpoints must increase");
    }
    if (!(breaks_.back() < 1)) throw InvalidInput("step breakpoints must lie in [0,1)");
}

StepFunction StepFunction::constant(const Rational& c) { return StepFunction({Rational(0)}, {c}); }

StepFunction StepFunction::indicator(const IntervalSet& s) {
    std::vector<Rational> b{Rational(0)}, v{Rational(0)};
    for (const auto& iv : s.intervals()) {
        if (iv.lo == 0) {
            v.back() = 1;
        } else {
            b.push_back(iv.lo);
            v.push_back(1);
        }
        if (iv.hi < 1) {
            b.push_back(iv.hi);
            v.push_back(0);
        }
    }
    return StepFunction(std::move(b), std::move(v));
}

Rational StepFunction::operator()(const Rational& x) const { return values_[piece_of(breaks_, x)]; }

Rational StepFunction::left_limit(const Rational& x) const {
    auto it = std::lower_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t idx = it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
    return values_[idx];
}

Rational StepFunction::integral() const { return integral_over({Rational(0), Rational(1)}); }

Rational StepFunction::integral_over(const Interval& iv) const {
    Rational total(0);
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
        const Rational& hi_i = i + 1 < breaks_.size() ? breaks_[i + 1] : Rational(1);
        const Rational& lo = max_of(breaks_[i], iv.lo);
        const Rational& hi = min_of(hi_i, iv.hi);
        if (lo < hi) total += values_[i] * (hi - lo);
    }
    return total;
}

std::vector<Rational> StepFunction::breaks_inside(const Rational& lo, const Rational& hi) const {
    return inside(breaks_, lo, hi);
}

Rational StepFunction::min_on(const Interval& iv) const {
    Rational m = (*this)(iv.lo);
    for (const auto& b : breaks_inside(iv.lo, iv.hi)) m = min_of(m, (*this)(b));
    return m;
}

Rational StepFunction::max_on(const Interval& iv) const {
    Rational m = (*this)(iv.lo);
    for (const auto& b : breaks_inside(iv.lo, iv.hi)) m = max_of(m, (*this)(b));
    return m;
}

Rational StepFunction::sup_norm() const {
    Rational m(0);
    for (const auto& v : values_) m = max_of(m, abs_value(v));
    return m;
}

StepFunction StepFunction::operator+(const StepFunction& rhs) const {
    auto b = merged_breaks(breaks_, rhs.breaks_);
    std::vector<Rational> v;
    v.reserve(b.size());
    for (const auto& x : b) v.push_back((*this)(x) + rhs(x));
    return StepFunction(std::move(b), std::move(v)).simplified();
}

StepFunction StepFunction::operator-(const StepFunction& rhs) const { return *this + rhs.scaled(-1); }

StepFunction StepFunction::scaled(const Rational& c) const {
    std::vector<Rational> v;
    v.reserve(values_.size());
    for (const auto& x : values_) v.push_back(x * c);
    return StepFunction(breaks_, std::move(v)).simplified();
}

StepFunction StepFunction::simplified() const {
    std::vector<Rational> b{breaks_.front()}, v{values_.front()};
    for (std::size_t i = 1; i < breaks_.size(); ++i) {
        if (values_[i] != v.back()) {
            b.push_back(breaks_[i]);
            v.push_back(values_[i]);
        }
    }
    StepFunction out;
    out.breaks_ = std::move(b);
    out.values_ = std::move(v);
    return out;
}

bool StepFunction::equals(const StepFunction& rhs) const {
    auto a = simplified();
    auto b = rhs.simplified();
    return a.breaks_ == b.breaks_ && a.values_ == b.values_;
}

PiecewiseLinear::PiecewiseLinear(std::vector<Rational> nodes, std::vector<Rational> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
    if (nodes_.size() < 2 || nodes_.size() != values_.size()) throw InvalidInput("piecewise-linear needs >= 2 nodes");
    if (nodes_.front() != 0 || nodes_.back() != 1) throw InvalidInput("piecewise-linear nodes must span [0,1]");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i - 1] < nodes_[i])) throw InvalidInput("piecewise-linear nodes must increase");
    }
}

PiecewiseLinear PiecewiseLinear::identity() { return PiecewiseLinear({Rational(0), Rational(1)}, {Rational(0), Rational(1)}); }

Rational PiecewiseLinear::operator()(const Rational& x) const {
    if (x <= nodes_.front()) return values_.front();
    if (x >= nodes_.back()) return values_.back();
    std::size_t i = piece_of(nodes_, x);
    if (x == nodes_[i]) return values_[i];
    Rational t = (x - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
    return values_[i] + t * (values_[i + 1] - values_[i]);
}

Rational PiecewiseLinear::lipschitz_constant() const {
    Rational m(0);
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        m = max_of(m, abs_value((values_[i] - values_[i - 1]) / (nodes_[i] - nodes_[i - 1])));
    }
    return m;
}

Rational PiecewiseLinear::sup_norm() const {
    Rational m(0);
    for (const auto& v : values_) m = max_of(m, abs_value(v));
    return m;
}

Rational PiecewiseLinear::integral() const {
    Rational total(0);
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        total += segment::integral(nodes_[i - 1], nodes_[i], values_[i - 1], values_[i]);
    }
    return total;
}

std::vector<Rational> PiecewiseLinear::breaks_inside(const Rational& lo, const Rational& hi) const {
    return inside(nodes_, lo, hi);
}

Rational PiecewiseLinear::min_on(const Interval& iv) const {
    Rational m = min_of((*this)(iv.lo), (*this)(iv.hi));
    for (const auto& b : breaks_inside(iv.lo, iv.hi)) m = min_of(m, (*this)(b));
    return m;
}

Rational PiecewiseLinear::max_on(const Interval& iv) const {
    Rational m = max_of((*this)(iv.lo), (*this)(iv.hi));
    for (const auto& b : breaks_inside(iv.lo, iv.hi)) m = max_of(m, (*this)(b));
    return m;
}

Rational l2_distance(const StepFunction& f, const StepFunction& g) {
    StepFunction d = f - g;
    Rational total(0);
    const auto& b = d.breakpoints();
    for (std::size_t i = 0; i < b.size(); ++i) {
        const Rational& hi = i + 1 < b.size() ? b[i + 1] : Rational(1);
        total += d.values()[i] * d.values()[i] * (hi - b[i]);
    }
    return total;
}

namespace segment {

Rational integral(const Rational& a, const Rational& b, const Rational& p, const Rational& q) {
    return (b - a) * (p + q) / 2;
}

Rational integral_of_square(const Rational& a, const Rational& b, const Rational& p, const Rational& q) {
    return (b - a) * (p * p + p * q + q * q) / 3;
}

Rational integral_of_abs(const Rational& a, const Rational& b, const Rational& p, const Rational& q) {
    if ((p >= 0 && q >= 0) || (p <= 0 && q <= 0)) return abs_value(integral(a, b, p, q));
    // Sign change: two triangles meeting at the zero crossing.
    return (b - a) * (p * p + q * q) / (2 * (abs_value(p) + abs_value(q)));
}

Rational integral_of_product(const Rational& a, const Rational& b, const Rational& p1, const Rational& q1,
                             const Rational& p2, const Rational& q2) {
    return (b - a) * (2 * p1 * p2 + p1 * q2 + q1 * p2 + 2 * q1 * q2) / 6;
}

Rational integral_of_excess_square(const Rational& a, const Rational& b, const Rational& p, const Rational& q,
                                   const Rational& h) {
    // Split [a,b) where s crosses +h or -h; on each piece the integrand is a
    // single square of a linear function or zero.
    std::vector<Rational> cuts{Rational(0), Rational(1)};
    if (p != q) {
        for (const Rational& level : {h, Rational(-h)}) {
            Rational t = (level - p) / (q - p);
            if (t > 0 && t < 1) cuts.push_back(t);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    Rational total(0);
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        Rational s0 = p + cuts[i - 1] * (q - p);
        Rational s1 = p + cuts[i] * (q - p);
        Rational mid = (s0 + s1) / 2;
        Rational x0 = a + cuts[i - 1] * (b - a);
        Rational x1 = a + cuts[i] * (b - a);
        if (mid > h) {
            total += integral_of_square(x0, x1, s0 - h, s1 - h);
        } else if (mid < -h) {
            total += integral_of_square(x0, x1, s0 + h, s1 + h);
        }
    }
    return total;
}

}  // namespace segment

}  // namespace rrlab
