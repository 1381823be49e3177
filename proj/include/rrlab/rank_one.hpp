#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rrlab/interval_set.hpp"

namespace rrlab {

// Recipe for a cutting-and-stacking construction: at stage k the base is cut
// into cuts(k) equal columns and spacers(k, c) fresh levels go atop column c.
struct ConstructionDescriptor {
    std::string name;
    std::function<long(int)> cuts;
    std::function<long(int, long)> spacers;
    int max_stage = 0;
    // If set, spacers(k, c) == 0 for every k >= *spacer_free_from.
    std::optional<int> spacer_free_from;

    static ConstructionDescriptor odometer(int max_stage);
    static ConstructionDescriptor rigid_spacered(int max_stage);
    static ConstructionDescriptor chacon(int max_stage);
    static ConstructionDescriptor builtin(const std::string& name, int max_stage);
};

struct BuildLimits {
    Integer denominator_cap{Integer(1) << 256};
    std::size_t max_levels = 4'000'000;
};

// Stage-k Rokhlin tower. Coordinates are normalized by the final ambient
// length, so the fully built space is [0,1). Every level is a single interval
// of the common width; levels[i+1] is levels[i] translated.
class TowerStage {
public:
    int stage = 0;
    Rational width;           // λ(A_k)
    Rational ambient_length;  // L_k / L_K
    std::vector<Rational> lefts;
    // Stage-(k-1) level each level was cut from, -1 for spacers (empty at k = 0).
    std::vector<std::int64_t> parent;

    std::size_t height() const { return lefts.size(); }
    Interval level(std::size_t i) const { return {lefts[i], lefts[i] + width}; }
    IntervalSet base() const { return IntervalSet({level(0)}); }
    std::vector<IntervalSet> levels() const;
    IntervalSet union_of_levels() const;
    // Translation realizing T on levels[i] for i < height-1.
    Rational offset(std::size_t i) const { return lefts[i + 1] - lefts[i]; }
    std::vector<std::pair<Interval, Rational>> partial_map() const;

    std::optional<std::size_t> level_index(const Rational& x) const;

    // Level indices sorted by left endpoint.
    const std::vector<std::uint32_t>& order() const { return order_; }
    void finalize();

private:
    std::vector<std::uint32_t> order_;
};

// How a power of T (or another level-permuting map) acts on one level of the
// resolution stage.
struct LevelStep {
    enum class Kind { Exact, SetOnly, Unknown };
    Kind kind = Kind::Unknown;
    std::size_t target = 0;  // valid unless Unknown
    Rational offset;         // valid for Exact: x -> x + offset
};

struct ImageResult {
    IntervalSet image;
    Rational unresolved_mass;
};

class BuiltSystem {
public:
    ConstructionDescriptor descriptor;
    std::vector<TowerStage> stages;
    Rational normalization;  // L_K in raw units

    int max_stage() const { return static_cast<int>(stages.size()) - 1; }
    const TowerStage& stage(int k) const { return stages.at(static_cast<std::size_t>(k)); }
    const TowerStage& top() const { return stages.back(); }

    // True when no spacers are ever added after stage r, so T permutes the
    // stage-r levels cyclically as sets (the top level returns onto the base).
    bool closed_at(int r) const;
    // Whether the system is the dyadic odometer on every stage.
    bool is_dyadic_odometer() const;

    // Action of T^n on level j of stage r.
    LevelStep step(int r, std::size_t j, long n) const;

    // For each level of stage r, the stage-k level containing it, or -1 for
    // levels lying in spacers added after stage k. Requires k <= r.
    std::vector<std::int64_t> ancestry(int k, int r) const;

    // T^i(x) computed on the top stage; nullopt when the orbit leaves it.
    std::optional<Rational> apply_power(const Rational& x, long i) const;
    ImageResult image_set(const IntervalSet& s, long i) const;

private:
    friend BuiltSystem build(const ConstructionDescriptor&, int, const BuildLimits&);
    bool dyadic_ = false;
};

BuiltSystem build(const ConstructionDescriptor& descriptor, int max_stage, const BuildLimits& limits = {});

std::optional<std::size_t> level_index(const TowerStage& stage, const Rational& x);

}  // namespace rrlab
