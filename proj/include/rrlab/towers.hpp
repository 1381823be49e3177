#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rrlab/joinings.hpp"

namespace rrlab {

// Stage-k tower sets expressed on a finer resolution stage (the top stage by
// default). Masks are three-valued: a level whose membership depends on orbit
// data past the resolution stage is Unknown.
class TowerContext {
public:
    TowerContext(const BuiltSystem& sys, int k, std::optional<int> resolution = std::nullopt);

    const BuiltSystem& system() const { return *sys_; }
    int stage() const { return k_; }
    int resolution() const { return resolution_; }
    const TowerStage& tower_stage() const { return sys_->stage(k_); }
    const TowerStage& resolution_stage() const { return sys_->stage(resolution_); }
    std::size_t height() const { return tower_stage().height(); }
    const Rational& width() const { return tower_stage().width; }

    // Stage-k level of each resolution level, -1 outside the stage-k tower.
    const std::vector<std::int64_t>& ancestry() const { return anc_; }
    // Resolution levels making up stage-k level i, in increasing index order.
    const std::vector<std::uint32_t>& pieces(std::size_t i) const { return pieces_[i]; }
    // Number of resolution levels t in [lo, hi) inside the tower with
    // ancestry()[t] - t == offset.
    std::size_t count_aligned(std::int64_t offset, std::size_t lo, std::size_t hi) const;

    const LevelMask& base() const { return base_; }    // A_k
    const LevelMask& tower() const { return tower_; }  // R_k
    const LevelMask& hat() const { return hat_; }      // tower over A ∩ T^-n A ∩ T^n A
    const LevelMask& tilde() const { return tilde_; }  // tower over ⋂_{|m|<=2} T^{mn} A
    const Bounds& hat_measure() const { return hat_mass_; }
    const Bounds& tilde_measure() const { return tilde_mass_; }

    // Resolution level holding x; a point at 1 is assigned to the last level.
    std::optional<std::size_t> resolution_level(const Rational& x) const;

private:
    LevelMask spread(const LevelMask& floor) const;

    const BuiltSystem* sys_;
    int k_;
    int resolution_;
    std::vector<std::int64_t> anc_;
    std::vector<std::vector<std::uint32_t>> pieces_;
    std::vector<std::pair<std::int64_t, std::uint32_t>> by_offset_;  // (anc - t, t), sorted
    LevelMask base_;
    LevelMask tower_;
    LevelMask hat_;
    LevelMask tilde_;
    Bounds hat_mass_;
    Bounds tilde_mass_;
};

// Stage-k level holding x (a point at 1 goes to the level ending at 1).
std::optional<std::size_t> stage_level_of(const TowerStage& st, const Rational& x);

struct TowerTriple {
    int stage = 0;
    IntervalSet rk;        // certain part of R_k
    IntervalSet rk_hat;
    IntervalSet rk_tilde;
    Bounds mass_rk;
    Bounds mass_rk_hat;
    Bounds mass_rk_tilde;
    Rational unresolved_mass;  // largest gap among the three masses
};

TowerTriple tower_triple(const BuiltSystem& sys, int k);
TowerTriple tower_triple(const TowerContext& ctx);

struct ConditionReport {
    int stage = 0;
    std::size_t height = 0;
    Rational width;
    Rational cond1_mass;
    bool cond2_ok = false;
    Bounds cond3_ratio;
    Rational cond4_defect;
    Rational max_level_diameter;
    Bounds mass_rk;
    Bounds mass_rk_hat;
    Bounds mass_rk_tilde;
};

// Levels of a stage, checked disjoint by a sweep in left order.
bool levels_disjoint(const TowerStage& st);

std::vector<ConditionReport> verify_conditions(const BuiltSystem& sys, int k_min, int k_max);

struct InclusionSide {
    Bounds lhs_mass;  // the tower set
    Bounds rhs_mass;  // points whose orbit window stays in R_k
    Verdict verdict = Verdict::Undecided;
    Rational undecided_mass;
};

// The tower sets contain every point whose orbit window stays in R_k. With
// the open windows |i| < n_k and |i| < 2 n_k this fails at the top and bottom
// levels of a copy whose neighbour is a later spacer; the closed windows
// |i| <= n_k and |i| <= 2 n_k are what the towers actually contain.
struct InclusionAudit {
    int stage = 0;
    InclusionSide hat;            // |i| <= n_k
    InclusionSide tilde;          // |i| <= 2 n_k
    InclusionSide hat_open;       // |i| < n_k
    InclusionSide tilde_open;     // |i| < 2 n_k
};

InclusionAudit check_inclusions(const BuiltSystem& sys, int k);
InclusionAudit check_inclusions(const TowerContext& ctx);

inline constexpr int kDefaultGrid = 8;

// Grid point t of a level: left + (2t+1) w / (2G).
Rational grid_point(const Interval& level, int t, int grid);
// Grid cell t of a level: [left + t w / G, left + (t+1) w / G).
Interval grid_cell(const Interval& level, int t, int grid);

struct LevelReport {
    bool good = false;
    Rational witness;
    Rational close_fraction;  // grid fraction of the level close to the witness
    std::vector<bool> in_v;   // per grid cell
    std::vector<bool> in_g;   // per grid cell, all false when not good
    IntervalSet v_members;
    IntervalSet g_members;
};

struct LevelDiagnostics {
    int stage = 0;
    Rational epsilon;
    int grid = kDefaultGrid;
    std::vector<LevelReport> levels;
    Rational good_fraction;
};

LevelDiagnostics good_levels(const BuiltSystem& sys, int k, const Joining& j, const Rational& eps,
                             int grid = kDefaultGrid);
LevelDiagnostics good_levels(const TowerContext& ctx, const Joining& j, const Rational& eps, int grid = kDefaultGrid);

// Dyadic diagnostic thresholds 1/2, ..., 1/256.
std::vector<Rational> default_epsilon_grid();

}  // namespace rrlab
