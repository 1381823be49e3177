#pragma once

#include <string>
#include <variant>
#include <vector>

#include "rrlab/level_mask.hpp"
#include "rrlab/line_measure.hpp"

namespace rrlab {

struct OffDiagonalTerm {
    long shift;
    Rational weight;
};

// Σ p_m J(n_m): the fiber over x is Σ p_m δ_{T^{n_m} x}.
struct OffDiagonalCombo {
    std::vector<OffDiagonalTerm> terms;
};

// α (λ×λ) + (1-α) combo.
struct ProductMix {
    Rational alpha;
    OffDiagonalCombo combo;
};

// Graph of the 2-adic translation x -> x + γ on the dyadic odometer.
struct TwoAdicGraph {
    Rational gamma;
};

class Joining {
public:
    using Variant = std::variant<OffDiagonalCombo, ProductMix, TwoAdicGraph>;

    explicit Joining(Variant v);

    static Joining off_diagonal(long n) { return Joining(OffDiagonalCombo{{{n, Rational(1)}}}); }
    static Joining product() { return Joining(ProductMix{Rational(1), OffDiagonalCombo{{{0, Rational(1)}}}}); }

    const Variant& variant() const { return v_; }
    std::string describe() const;

private:
    Variant v_;
};

// Shipped joinings: "shift1" J(1), "mix03" ½J(0)+½J(3),
// "productmix" ⅓(λ×λ)+⅔(½J(0)+½J(2)), "product" λ×λ, "twoadic" γ = -1/3.
Joining builtin_joining(const std::string& name);
std::vector<std::string> builtin_joining_names();
bool applicable(const Joining& j, const BuiltSystem& sys);

struct FiberMeasure {
    LineMeasure measure;
    Rational unresolved;  // mass of atoms whose location needs deeper stages
};

FiberMeasure disintegrate(const Joining& j, const BuiltSystem& sys, const Rational& x,
                          std::size_t digit_cap = 4096);

// m in [0, 2^k) with den * m ≡ num (mod 2^k).
Integer two_adic_shift_mod(const Rational& gamma, unsigned k);

// x + γ in the 2-adic digit group, x read through its binary expansion.
// Exact: the digit stream is eventually periodic and is summed in closed form.
// Throws Unresolvable if no period shows up within digit_cap digits.
Rational two_adic_translate(const Rational& x, const Rational& gamma, std::size_t digit_cap = 4096);

// ∫_0^1 u · (u + g) du with + the 2-adic digit addition on binary expansions.
// Exact: solved from the first-digit recursion over the finitely many tails.
Rational two_adic_cross_moment(const Rational& g);

// Linear form A = constant·∫f dλ + Σ weight·(f ∘ M_t) where each M_t permutes
// levels of a resolution stage. Used for A_σ and for Koopman combinations.
struct OperatorTerm {
    enum class Kind { Shift, TwoAdic };
    Kind kind = Kind::Shift;
    long shift = 0;
    Rational gamma;
    Rational weight;
};

struct OperatorForm {
    Rational constant;
    std::vector<OperatorTerm> terms;

    // Merges terms with the same map and drops zero weights.
    OperatorForm merged() const;
    OperatorForm operator-(const OperatorForm& rhs) const;
};

OperatorForm operator_form(const Joining& j);
LevelStep term_step(const BuiltSystem& sys, int resolution, const OperatorTerm& t, std::size_t level);

struct OperatorImage {
    StepFunction value;
    // Mass of levels where a term is only known as a set map, or not at all.
    // The value there is the conditional mean of f over the target level, or
    // over the levels no resolved level reaches.
    Rational defect_mass;
};

OperatorImage apply_operator(const Joining& j, const BuiltSystem& sys, const StepFunction& f);
OperatorImage apply_form(const OperatorForm& form, const BuiltSystem& sys, int resolution, const StepFunction& f);

struct MarginalCheck {
    IntervalSet probe;
    Bounds lhs;  // ∫ σ_x(B) dλ(x)
    Rational rhs;  // λ(B)
    bool pass;
};

std::vector<MarginalCheck> marginal_audit(const Joining& j, const BuiltSystem& sys,
                                          const std::vector<IntervalSet>& probes);

}  // namespace rrlab
