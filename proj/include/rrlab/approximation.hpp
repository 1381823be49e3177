#pragma once

#include <vector>

#include "rrlab/metrics.hpp"
#include "rrlab/towers.hpp"

namespace rrlab {

// Mass a fiber puts on each stage-k level.
struct LevelWeights {
    std::vector<Rational> per_level;
    Rational outside;     // σ_x(R_k^c)
    Rational unresolved;  // atoms whose location was not computed
};

LevelWeights level_weights(const TowerStage& st, const FiberMeasure& fiber);

struct CoefficientProfile {
    int stage = 0;
    Rational x;
    std::size_t level = 0;
    std::vector<Rational> c;  // c_i = σ_x(level (i + level) mod n_k)
    Rational residual;
    Rational unresolved;

    Rational sum() const;
};

CoefficientProfile coefficients_at(const Joining& j, const BuiltSystem& sys, int k, const Rational& x,
                                   std::size_t digit_cap = 4096);
CoefficientProfile profile_from_weights(int k, const Rational& x, std::size_t level, const LevelWeights& w);

struct GoodnessStats {
    Bounds f;    // σ_x(complement of the tilde tower)
    Rational g;  // mass outside the level balls; zero with level-interval balls
    Bounds h;    // Σ σ_x(level i) over i with T^i x off level (i + j) mod n_k
};

GoodnessStats goodness_stats(const TowerContext& ctx, const Rational& x, const FiberMeasure& fiber);
// All three statistics certainly below eps.
bool in_v(const GoodnessStats& s, const Rational& eps);

struct DefectCheck {
    Bounds lhs;
    Bounds rhs;
    Verdict verdict = Verdict::Undecided;
};

// Σ_j |c_j(x) - c_j(T^i x)| against 2 σ_x(complement of the tilde tower).
DefectCheck invariance_defect(const Joining& j, const TowerContext& ctx, const Rational& x, long i,
                              std::size_t digit_cap = 4096);

struct EscapeRow {
    std::size_t level = 0;
    Bounds lhs;  // n_k ∫_{level} σ_x(R_k^c)
    Bounds rhs;  // λ(complement of the hat tower)
    Verdict verdict = Verdict::Undecided;
};

std::vector<EscapeRow> fiber_escape_check(const Joining& j, const TowerContext& ctx);

struct PointwiseCheck {
    Bounds lhs;  // |A_σ f(x) - Σ c_i f(T^i x)|
    Bounds rhs;  // w_k + ‖f‖ σ_x(R_k^c) + ‖f‖ g + ‖f‖ h
    Verdict verdict = Verdict::Undecided;
};

PointwiseCheck pointwise_bound_check(const Joining& j, const TowerContext& ctx, const Rational& x,
                                     const PiecewiseLinear& f, std::size_t digit_cap = 4096);

struct BasePointSelection {
    int stage = 0;
    Rational point;
    std::size_t level = 0;
    int grid_index = 0;
    Rational score;
    bool threshold_met = false;  // score > 1 - 13√ε
    bool found = false;          // some grid point lies in V
};

BasePointSelection select_base_point(const LevelDiagnostics& diag, const TowerContext& ctx);
BasePointSelection select_base_point(const Joining& j, const BuiltSystem& sys, int k, const Rational& eps,
                                     int grid = kDefaultGrid);

// Σ c_i U_T^i.
struct KoopmanCombination {
    int stage = 0;
    std::vector<Rational> coefficients;
    Rational base_point;

    Rational sum() const;
    OperatorForm as_form() const;
};

KoopmanCombination build_combination(const Joining& j, const BuiltSystem& sys, int k, const Rational& eps,
                                     int grid = kDefaultGrid);
KoopmanCombination combination_from_profile(const CoefficientProfile& p);

// Squared L2 distance between A_σ f and Σ c_i f∘T^i, bracketed where the
// resolution stage only knows the maps as level permutations.
Bounds sot_error(const KoopmanCombination& c, const Joining& j, const BuiltSystem& sys, const TestFunction& f,
                 std::optional<int> resolution = std::nullopt);

// Product test F(x,y) = a(x) b(y) on the square.
struct ProductTest {
    TestFunction a;
    TestFunction b;
};

std::vector<ProductTest> product_tests(int n);

// max over tests of |∫F dσ - Σ c_i ∫F dJ(i)|.
Bounds weak_star_error(const KoopmanCombination& c, const Joining& j, const BuiltSystem& sys,
                       const std::vector<ProductTest>& tests, std::optional<int> resolution = std::nullopt);

}  // namespace rrlab
