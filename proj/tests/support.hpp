#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "rrlab/functions.hpp"
#include "rrlab/line_measure.hpp"

namespace rrlab::testing {

constexpr unsigned kSeed = 20240611;

// Dyadic rational in [0,1) with denominator 2^bits.
inline Rational random_dyadic(std::mt19937& rng, int bits) {
    std::uniform_int_distribution<long> d(0, (1L << bits) - 1);
    return make_rational(d(rng), 1L << bits);
}

inline Rational random_fraction(std::mt19937& rng, long max_den = 24) {
    std::uniform_int_distribution<long> den(1, max_den);
    const long q = den(rng);
    std::uniform_int_distribution<long> num(0, q - 1);
    return make_rational(num(rng), q);
}

inline Rational random_value(std::mt19937& rng) {
    std::uniform_int_distribution<long> num(-12, 12);
    std::uniform_int_distribution<long> den(1, 6);
    return make_rational(num(rng), den(rng));
}

inline std::vector<Rational> random_breaks(std::mt19937& rng, int count, long max_den = 24) {
    std::vector<Rational> b{Rational(0)};
    for (int i = 0; i < count; ++i) b.push_back(random_fraction(rng, max_den));
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

inline StepFunction random_step(std::mt19937& rng, int pieces = 5, long max_den = 24) {
    std::vector<Rational> b = random_breaks(rng, pieces - 1, max_den);
    std::vector<Rational> v;
    for (std::size_t i = 0; i < b.size(); ++i) v.push_back(random_value(rng));
    return StepFunction(std::move(b), std::move(v));
}

inline IntervalSet random_set(std::mt19937& rng, int pieces = 4, long max_den = 24) {
    std::vector<Interval> parts;
    for (int i = 0; i < pieces; ++i) {
        Rational a = random_fraction(rng, max_den), b = random_fraction(rng, max_den);
        if (b < a) std::swap(a, b);
        parts.push_back({a, b});
    }
    return IntervalSet(std::move(parts));
}

// Probability measure with the given number of atoms at random locations.
inline LineMeasure random_atoms(std::mt19937& rng, int count, long max_den = 16) {
    std::uniform_int_distribution<long> w(1, 9);
    std::vector<Atom> atoms;
    Rational total(0);
    for (int i = 0; i < count; ++i) {
        atoms.push_back({random_fraction(rng, max_den), Rational(w(rng))});
        total += atoms.back().weight;
    }
    for (auto& a : atoms) a.weight /= total;
    return LineMeasure(std::move(atoms), StepFunction());
}

}  // namespace rrlab::testing
