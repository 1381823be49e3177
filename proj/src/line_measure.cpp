#include "rrlab/line_measure.hpp"

#include <algorithm>
#include <map>

namespace rrlab {

LineMeasure::LineMeasure(std::vector<Atom> atoms, StepFunction density)
    : atoms_(std::move(atoms)), density_(std::move(density)) {
    for (const auto& a : atoms_) {
        if (a.weight < 0) throw InvalidInput("negative atom weight");
        if (a.location < 0 || a.location > 1) throw InvalidInput("atom outside [0,1]");
    }
    for (const auto& v : density_.values()) {
        if (v < 0) throw InvalidInput("negative density");
    }
}

Rational LineMeasure::total_mass() const {
    Rational total = density_.integral();
    for (const auto& a : atoms_) total += a.weight;
    return total;
}

Rational LineMeasure::measure_of(const Interval& iv) const {
    Rational total = density_.integral_over(iv);
    for (const auto& a : atoms_) {
        if (iv.contains(a.location)) total += a.weight;
    }
    return total;
}

Rational LineMeasure::measure_of(const IntervalSet& s) const {
    Rational total(0);
    for (const auto& iv : s.intervals()) total += density_.integral_over(iv);
    for (const auto& a : atoms_) {
        if (s.contains(a.location)) total += a.weight;
    }
    return total;
}

LineMeasure LineMeasure::canonical() const {
    std::map<Rational, Rational> merged;
    for (const auto& a : atoms_) {
        if (a.weight != 0) merged[a.location] += a.weight;
    }
    std::vector<Atom> out;
    out.reserve(merged.size());
    for (auto& [loc, w] : merged) out.push_back({loc, w});
    return LineMeasure(std::move(out), density_.simplified());
}

bool LineMeasure::equals(const LineMeasure& rhs) const {
    auto a = canonical();
    auto b = rhs.canonical();
    if (a.atoms_.size() != b.atoms_.size()) return false;
    for (std::size_t i = 0; i < a.atoms_.size(); ++i) {
        if (a.atoms_[i].location != b.atoms_[i].location || a.atoms_[i].weight != b.atoms_[i].weight) return false;
    }
    return a.density_.equals(b.density_);
}

Rational integrate(const StepFunction& f, const LineMeasure& m) {
    Rational total(0);
    for (const auto& a : m.atoms()) {
        // f lives on [0,1); an atom at 1 sees the last piece.
        total += a.weight * (a.location < 1 ? f(a.location) : f.left_limit(a.location));
    }
    const auto& d = m.density();
    std::vector<Rational> cuts;
    std::merge(f.breakpoints().begin(), f.breakpoints().end(), d.breakpoints().begin(), d.breakpoints().end(),
               std::back_inserter(cuts));
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const Rational& hi = i + 1 < cuts.size() ? cuts[i + 1] : Rational(1);
        total += f(cuts[i]) * d(cuts[i]) * (hi - cuts[i]);
    }
    return total;
}

Rational integrate(const PiecewiseLinear& f, const LineMeasure& m) {
    Rational total(0);
    for (const auto& a : m.atoms()) total += a.weight * f(a.location);
    const auto& d = m.density();
    std::vector<Rational> cuts;
    std::merge(f.nodes().begin(), f.nodes().end() - 1, d.breakpoints().begin(), d.breakpoints().end(),
               std::back_inserter(cuts));
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const Rational& hi = i + 1 < cuts.size() ? cuts[i + 1] : Rational(1);
        total += d(cuts[i]) * segment::integral(cuts[i], hi, f(cuts[i]), f(hi));
    }
    return total;
}

Rational integrate(const TestFunction& f, const LineMeasure& m) {
    return std::visit([&](const auto& g) { return integrate(g, m); }, f);
}

}  // namespace rrlab
