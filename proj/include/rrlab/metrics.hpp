#pragma once

#include <vector>

#include "rrlab/joinings.hpp"

namespace rrlab {

struct PlaneAtom {
    Rational x;
    Rational y;
    Rational weight;
};

struct PlaneAtomicMeasure {
    std::vector<PlaneAtom> atoms;

    Rational total_mass() const;
    // Merged by location, zero weights dropped, sorted by (x, y).
    PlaneAtomicMeasure canonical() const;
};

// W1 on [0,1] as ∫|F_mu - F_nu|.
Rational kr_line(const LineMeasure& mu, const LineMeasure& nu);

inline constexpr std::size_t kDefaultAtomCap = 512;
inline constexpr std::size_t kExhaustiveAtomLimit = 8;

// W1 on the square under the taxicab metric. Small inputs go to the
// exhaustive solver, larger ones to successive shortest paths.
Rational kr_square(const PlaneAtomicMeasure& mu, const PlaneAtomicMeasure& nu,
                   std::size_t atom_cap = kDefaultAtomCap);

// Exact transportation problem with cost[i][j]; supplies and demands must have
// equal totals.
using CostMatrix = std::vector<std::vector<Rational>>;
Rational transport_ssp(const std::vector<Rational>& supply, const std::vector<Rational>& demand,
                       const CostMatrix& cost);
// Minimum over all basic feasible solutions. Only for tiny instances.
Rational transport_exhaustive(const std::vector<Rational>& supply, const std::vector<Rational>& demand,
                              const CostMatrix& cost);

Rational taxicab(const PlaneAtom& a, const PlaneAtom& b);

std::vector<PiecewiseLinear> lipschitz_family(int n);

struct DiscretizedJoining {
    PlaneAtomicMeasure measure;  // atom at each cell center
    Rational cell_diameter;      // d1 diameter of a cell
};

// Cell masses on level x level of a stage that tiles [0,1).
DiscretizedJoining discretize_joining(const Joining& j, const BuiltSystem& sys, int stage);

}  // namespace rrlab
