#include "rrlab/towers.hpp"

#include <algorithm>

#include "rrlab/approximation.hpp"
#include "rrlab/metrics.hpp"

namespace rrlab {

namespace {

int pick_resolution(const BuiltSystem& sys, int k, std::optional<int> resolution) {
    if (k < 0 || k > sys.max_stage()) throw DepthExceeded("stage exceeds the built depth");
    const int r = resolution.value_or(sys.max_stage());
    if (r < k || r > sys.max_stage()) throw DepthExceeded("resolution stage out of range");
    if (sys.stage(r).ambient_length != 1) throw InvalidInput("resolution stage must tile [0,1)");
    return r;
}

LevelMask base_mask(const BuiltSystem& sys, int r, const std::vector<std::int64_t>& anc, bool tower) {
    LevelMask m(sys, r, Truth::False);
    for (std::size_t j = 0; j < anc.size(); ++j) {
        if (tower ? anc[j] >= 0 : anc[j] == 0) m.set(j, Truth::True);
    }
    return m;
}

}  // namespace

TowerContext::TowerContext(const BuiltSystem& sys, int k, std::optional<int> resolution)
    : sys_(&sys),
      k_(k),
      resolution_(pick_resolution(sys, k, resolution)),
      anc_(sys.ancestry(k, resolution_)),
      pieces_(sys.stage(k).height()),
      base_(base_mask(sys, resolution_, anc_, false)),
      tower_(base_mask(sys, resolution_, anc_, true)),
      hat_(sys, resolution_, Truth::False),
      tilde_(sys, resolution_, Truth::False) {
    for (std::size_t j = 0; j < anc_.size(); ++j) {
        if (anc_[j] >= 0) {
            pieces_[static_cast<std::size_t>(anc_[j])].push_back(static_cast<std::uint32_t>(j));
            by_offset_.emplace_back(anc_[j] - static_cast<std::int64_t>(j), static_cast<std::uint32_t>(j));
        }
    }
    std::sort(by_offset_.begin(), by_offset_.end());
    const long n = static_cast<long>(height());
    LevelMask hat_floor = base_ & base_.preimage(n) & base_.preimage(-n);
    LevelMask tilde_floor = hat_floor & base_.preimage(2 * n) & base_.preimage(-2 * n);
    hat_ = spread(hat_floor);
    tilde_ = spread(tilde_floor);
    hat_mass_ = hat_.measure();
    tilde_mass_ = tilde_.measure();
}

std::size_t TowerContext::count_aligned(std::int64_t offset, std::size_t lo, std::size_t hi) const {
    if (lo >= hi) return 0;
    auto first = std::lower_bound(by_offset_.begin(), by_offset_.end(),
                                  std::make_pair(offset, static_cast<std::uint32_t>(lo)));
    auto last = std::lower_bound(by_offset_.begin(), by_offset_.end(),
                                 std::make_pair(offset, static_cast<std::uint32_t>(hi)));
    return static_cast<std::size_t>(last - first);
}

// A resolution level at height i of the stage-k tower is T^i of the level i
// below it, which lies in the floor.
LevelMask TowerContext::spread(const LevelMask& floor) const {
    LevelMask out(*sys_, resolution_, Truth::False);
    for (std::size_t j = 0; j < anc_.size(); ++j) {
        if (anc_[j] >= 0) out.set(j, floor[j - static_cast<std::size_t>(anc_[j])]);
    }
    return out;
}

std::optional<std::size_t> stage_level_of(const TowerStage& st, const Rational& x) {
    if (x < 1) return st.level_index(x);
    if (x == 1 && !st.order().empty()) {
        const std::size_t last = st.order().back();
        if (st.level(last).hi == 1) return last;
    }
    return std::nullopt;
}

std::optional<std::size_t> TowerContext::resolution_level(const Rational& x) const {
    return stage_level_of(resolution_stage(), x);
}

TowerTriple tower_triple(const TowerContext& ctx) {
    TowerTriple t;
    t.stage = ctx.stage();
    t.rk = ctx.tower().inner();
    t.rk_hat = ctx.hat().inner();
    t.rk_tilde = ctx.tilde().inner();
    t.mass_rk = ctx.tower().measure();
    t.mass_rk_hat = ctx.hat_measure();
    t.mass_rk_tilde = ctx.tilde_measure();
    t.unresolved_mass = max_of(t.mass_rk.gap(), max_of(t.mass_rk_hat.gap(), t.mass_rk_tilde.gap()));
    return t;
}

TowerTriple tower_triple(const BuiltSystem& sys, int k) { return tower_triple(TowerContext(sys, k)); }

bool levels_disjoint(const TowerStage& st) {
    const auto& ord = st.order();
    for (std::size_t i = 0; i + 1 < ord.size(); ++i) {
        if (st.lefts[ord[i]] + st.width > st.lefts[ord[i + 1]]) return false;
    }
    return true;
}

std::vector<ConditionReport> verify_conditions(const BuiltSystem& sys, int k_min, int k_max) {
    if (k_min < 0 || k_max > sys.max_stage() || k_min > k_max) throw InvalidInput("stage range out of bounds");
    std::vector<ConditionReport> out;
    for (int k = k_min; k <= k_max; ++k) {
        TowerContext ctx(sys, k);
        const TowerStage& st = ctx.tower_stage();
        ConditionReport r;
        r.stage = k;
        r.height = st.height();
        r.width = st.width;
        r.cond1_mass = st.ambient_length;
        r.cond2_ok = levels_disjoint(st);
        // λ(T^n A ∩ A) = λ(A ∩ T^{-n} A) by invariance.
        r.cond3_ratio = (ctx.base() & ctx.base().preimage(static_cast<long>(st.height()))).measure().scaled(1 / st.width);
        r.cond4_defect = 0;
        r.max_level_diameter = st.width;
        r.mass_rk = ctx.tower().measure();
        r.mass_rk_hat = ctx.hat_measure();
        r.mass_rk_tilde = ctx.tilde_measure();
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

InclusionSide inclusion(const LevelMask& lhs, const LevelMask& rhs) {
    InclusionSide side;
    side.lhs_mass = lhs.measure();
    side.rhs_mass = rhs.measure();
    const Rational& w = lhs.system().stage(lhs.resolution()).width;
    bool failed = false;
    std::size_t open = 0;
    for (std::size_t j = 0; j < lhs.size(); ++j) {
        if (rhs[j] == Truth::False || lhs[j] == Truth::True) continue;
        if (rhs[j] == Truth::True && lhs[j] == Truth::False) {
            failed = true;
        } else {
            ++open;
        }
    }
    side.undecided_mass = w * Rational(static_cast<long>(open));
    side.verdict = failed ? Verdict::Fail : (open == 0 ? Verdict::Pass : Verdict::Undecided);
    return side;
}

}  // namespace

InclusionAudit check_inclusions(const TowerContext& ctx) {
    const long n = static_cast<long>(ctx.height());
    InclusionAudit a;
    a.stage = ctx.stage();
    a.hat = inclusion(ctx.hat(), ctx.tower().all_within(-n, n));
    a.tilde = inclusion(ctx.tilde(), ctx.tower().all_within(-2 * n, 2 * n));
    a.hat_open = inclusion(ctx.hat(), ctx.tower().all_within(-(n - 1), n - 1));
    a.tilde_open = inclusion(ctx.tilde(), ctx.tower().all_within(-(2 * n - 1), 2 * n - 1));
    return a;
}

InclusionAudit check_inclusions(const BuiltSystem& sys, int k) { return check_inclusions(TowerContext(sys, k)); }

Rational grid_point(const Interval& level, int t, int grid) {
    return level.lo + level.length() * make_rational(2 * t + 1, 2L * grid);
}

Interval grid_cell(const Interval& level, int t, int grid) {
    const Rational w = level.length();
    return {level.lo + w * make_rational(t, grid), level.lo + w * make_rational(t + 1, grid)};
}

LevelDiagnostics good_levels(const TowerContext& ctx, const Joining& j, const Rational& eps, int grid) {
    if (grid < 1) throw InvalidInput("grid must be positive");
    if (eps <= 0) throw InvalidInput("epsilon must be positive");
    const TowerStage& st = ctx.tower_stage();
    const std::size_t g = static_cast<std::size_t>(grid);
    const Rational two_eps = 2 * eps;
    LevelDiagnostics diag;
    diag.stage = ctx.stage();
    diag.epsilon = eps;
    diag.grid = grid;
    std::size_t good_count = 0;
    for (std::size_t lvl = 0; lvl < st.height(); ++lvl) {
        const Interval level = st.level(lvl);
        std::vector<Rational> points;
        std::vector<FiberMeasure> fibers;
        for (int t = 0; t < grid; ++t) {
            points.push_back(grid_point(level, t, grid));
            fibers.push_back(disintegrate(j, ctx.system(), points.back()));
        }
        // Distances; nullopt when either fiber has unresolved mass.
        std::vector<std::vector<std::optional<Rational>>> dist(g, std::vector<std::optional<Rational>>(g));
        for (std::size_t s = 0; s < g; ++s) {
            for (std::size_t t = s; t < g; ++t) {
                if (fibers[s].unresolved != 0 || fibers[t].unresolved != 0) continue;
                Rational d = s == t ? Rational(0) : kr_line(fibers[s].measure, fibers[t].measure);
                dist[s][t] = d;
                dist[t][s] = std::move(d);
            }
        }
        auto count_within = [&](std::size_t centre, const Rational& bound) {
            long c = 0;
            for (std::size_t s = 0; s < g; ++s) {
                if (dist[centre][s] && *dist[centre][s] < bound) ++c;
            }
            return c;
        };
        LevelReport rep;
        long best = -1;
        std::size_t witness = 0;
        for (std::size_t t = 0; t < g; ++t) {
            long c = count_within(t, eps);
            if (c > best) {
                best = c;
                witness = t;
            }
        }
        rep.witness = points[witness];
        rep.close_fraction = make_rational(best, grid);
        rep.good = rep.close_fraction >= 1 - eps;
        if (rep.good) ++good_count;
        std::vector<Interval> v_cells, g_cells;
        for (std::size_t s = 0; s < g; ++s) {
            const bool v = in_v(goodness_stats(ctx, points[s], fibers[s]), eps);
            const bool gm = rep.good && make_rational(count_within(s, two_eps), grid) > 1 - two_eps;
            rep.in_v.push_back(v);
            rep.in_g.push_back(gm);
            if (v) v_cells.push_back(grid_cell(level, static_cast<int>(s), grid));
            if (gm) g_cells.push_back(grid_cell(level, static_cast<int>(s), grid));
        }
        rep.v_members = IntervalSet(std::move(v_cells));
        rep.g_members = IntervalSet(std::move(g_cells));
        diag.levels.push_back(std::move(rep));
    }
    diag.good_fraction = make_rational(static_cast<long>(good_count), static_cast<long>(st.height()));
    return diag;
}

LevelDiagnostics good_levels(const BuiltSystem& sys, int k, const Joining& j, const Rational& eps, int grid) {
    return good_levels(TowerContext(sys, k), j, eps, grid);
}

std::vector<Rational> default_epsilon_grid() {
    std::vector<Rational> out;
    for (int e = 1; e <= 8; ++e) out.push_back(make_rational(1, 1L << e));
    return out;
}

}  // namespace rrlab
