#include "rrlab/approximation.hpp"

#include <algorithm>
#include <cmath>

namespace rrlab {

namespace {

// Level of stage r reached by T^i from level j, by index arithmetic only.
std::optional<std::size_t> shifted_level(const BuiltSystem& sys, int r, std::size_t j, long i) {
    const long h = static_cast<long>(sys.stage(r).height());
    const long t = static_cast<long>(j) + i;
    if (t >= 0 && t < h) return static_cast<std::size_t>(t);
    if (sys.closed_at(r)) return static_cast<std::size_t>(((t % h) + h) % h);
    return std::nullopt;
}

// Constant value of a step density, if it has one piece.
std::optional<Rational> constant_density(const StepFunction& d) {
    if (d.values().size() == 1) return d.values().front();
    return std::nullopt;
}

Bounds absolute(const Bounds& b) {
    if (b.lo >= 0) return b;
    if (b.hi <= 0) return {-b.hi, -b.lo};
    return {Rational(0), max_of(Rational(-b.lo), b.hi)};
}

Bounds complement_mass(const Bounds& m) { return {1 - m.hi, 1 - m.lo}; }

std::size_t level_or_throw(const TowerStage& st, const Rational& x) {
    if (x < 0 || x >= 1) throw OutsideTower("point lies outside [0,1)");
    auto lvl = st.level_index(x);
    if (!lvl) throw OutsideTower("point lies outside the stage tower");
    return *lvl;
}

}  // namespace

LevelWeights level_weights(const TowerStage& st, const FiberMeasure& fiber) {
    LevelWeights out{std::vector<Rational>(st.height(), Rational(0)), Rational(0), fiber.unresolved};
    for (const auto& a : fiber.measure.atoms()) {
        if (auto lvl = stage_level_of(st, a.location)) {
            out.per_level[*lvl] += a.weight;
        } else {
            out.outside += a.weight;
        }
    }
    const StepFunction& d = fiber.measure.density();
    if (auto c = constant_density(d)) {
        if (*c != 0) {
            Rational per = *c * st.width;
            for (auto& v : out.per_level) v += per;
            out.outside += *c * (1 - st.ambient_length);
        }
    } else {
        Rational inside(0);
        for (std::size_t i = 0; i < st.height(); ++i) {
            Rational m = d.integral_over(st.level(i));
            inside += m;
            out.per_level[i] += m;
        }
        out.outside += d.integral() - inside;
    }
    return out;
}

Rational CoefficientProfile::sum() const {
    Rational s(0);
    for (const auto& v : c) s += v;
    return s;
}

CoefficientProfile profile_from_weights(int k, const Rational& x, std::size_t level, const LevelWeights& w) {
    const std::size_t n = w.per_level.size();
    CoefficientProfile p{k, x, level, std::vector<Rational>(n), w.outside, w.unresolved};
    for (std::size_t i = 0; i < n; ++i) p.c[i] = w.per_level[(i + level) % n];
    return p;
}

CoefficientProfile coefficients_at(const Joining& j, const BuiltSystem& sys, int k, const Rational& x,
                                   std::size_t digit_cap) {
    const TowerStage& st = sys.stage(k);
    const std::size_t lvl = level_or_throw(st, x);
    FiberMeasure fiber = disintegrate(j, sys, x, digit_cap);
    return profile_from_weights(k, x, lvl, level_weights(st, fiber));
}

namespace {

Bounds tilde_escape(const TowerContext& ctx, const FiberMeasure& fiber) {
    const LevelMask& tilde = ctx.tilde();
    Bounds out{Rational(0), fiber.unresolved};
    for (const auto& a : fiber.measure.atoms()) {
        auto lvl = ctx.resolution_level(a.location);
        Truth t = lvl ? tilde[*lvl] : Truth::False;
        if (t == Truth::False) {
            out.lo += a.weight;
            out.hi += a.weight;
        } else if (t == Truth::Unknown) {
            out.hi += a.weight;
        }
    }
    const StepFunction& d = fiber.measure.density();
    if (auto c = constant_density(d)) {
        if (*c != 0) out = out + complement_mass(ctx.tilde_measure()).scaled(*c);
    } else {
        const TowerStage& rs = ctx.resolution_stage();
        for (std::size_t lvl = 0; lvl < rs.height(); ++lvl) {
            if (tilde[lvl] == Truth::True) continue;
            Rational m = d.integral_over(rs.level(lvl));
            out.hi += m;
            if (tilde[lvl] == Truth::False) out.lo += m;
        }
    }
    return out;
}

Bounds wrap_defect(const TowerContext& ctx, const Rational& x, const LevelWeights& w) {
    const TowerStage& st = ctx.tower_stage();
    const std::size_t n = st.height();
    const std::size_t j = level_or_throw(st, x);
    auto res = ctx.resolution_level(x);
    if (!res) throw OutsideTower("point lies outside the resolution stage");
    const auto& anc = ctx.ancestry();
    Bounds out{Rational(0), Rational(0)};
    for (std::size_t i = n - j; i < n; ++i) {
        if (w.per_level[i] == 0) continue;
        auto t = shifted_level(ctx.system(), ctx.resolution(), *res, static_cast<long>(i));
        if (!t) {
            out.hi += w.per_level[i];
        } else if (anc[*t] != static_cast<std::int64_t>(i + j - n)) {
            out.lo += w.per_level[i];
            out.hi += w.per_level[i];
        }
    }
    return out;
}

}  // namespace

namespace {

// wrap_defect without materializing per-level weights, for fibers whose
// density is constant.
Bounds wrap_defect_sparse(const TowerContext& ctx, const Rational& x, const FiberMeasure& fiber,
                          const Rational& density) {
    const TowerStage& st = ctx.tower_stage();
    const std::size_t n = st.height();
    const std::size_t j = level_or_throw(st, x);
    auto res = ctx.resolution_level(x);
    if (!res) throw OutsideTower("point lies outside the resolution stage");
    const auto& anc = ctx.ancestry();
    // 0: aligned, 1: misaligned, 2: unresolved.
    auto status = [&](std::size_t i) {
        auto t = shifted_level(ctx.system(), ctx.resolution(), *res, static_cast<long>(i));
        if (!t) return 2;
        return anc[*t] != static_cast<std::int64_t>(i + j - n) ? 1 : 0;
    };
    Bounds out{Rational(0), Rational(0)};
    for (const auto& a : fiber.measure.atoms()) {
        auto lvl = stage_level_of(st, a.location);
        if (!lvl || *lvl < n - j) continue;
        const int s = status(*lvl);
        if (s == 2) {
            out.hi += a.weight;
        } else if (s == 1) {
            out.lo += a.weight;
            out.hi += a.weight;
        }
    }
    if (density != 0) {
        // Level i sits at resolution level res + i; it is aligned when its
        // ancestor is i + j - n, i.e. ancestry - t == j - n - res.
        const std::size_t h = ctx.resolution_stage().height();
        const std::int64_t base = static_cast<std::int64_t>(j) - static_cast<std::int64_t>(n) -
                                  static_cast<std::int64_t>(*res);
        const std::size_t lo = *res + n - j, hi = *res + n;
        long aligned = 0, unknown = 0;
        aligned += static_cast<long>(ctx.count_aligned(base, std::min(lo, h), std::min(hi, h)));
        if (hi > h) {
            const std::size_t over_lo = std::max(lo, h) - h, over_hi = hi - h;
            if (ctx.system().closed_at(ctx.resolution())) {
                aligned += static_cast<long>(
                    ctx.count_aligned(base + static_cast<std::int64_t>(h), over_lo, over_hi));
            } else {
                unknown = static_cast<long>(over_hi - over_lo);
            }
        }
        const long mis = static_cast<long>(j) - aligned - unknown;
        const Rational per = density * st.width;
        out.lo += per * mis;
        out.hi += per * (mis + unknown);
    }
    return out;
}

}  // namespace

GoodnessStats goodness_stats(const TowerContext& ctx, const Rational& x, const FiberMeasure& fiber) {
    Bounds h;
    if (auto c = constant_density(fiber.measure.density())) {
        h = wrap_defect_sparse(ctx, x, fiber, *c);
    } else {
        h = wrap_defect(ctx, x, level_weights(ctx.tower_stage(), fiber));
    }
    h.hi += fiber.unresolved;
    return {tilde_escape(ctx, fiber), Rational(0), h};
}

bool in_v(const GoodnessStats& s, const Rational& eps) { return s.f.hi < eps && s.g < eps && s.h.hi < eps; }

DefectCheck invariance_defect(const Joining& j, const TowerContext& ctx, const Rational& x, long i,
                              std::size_t digit_cap) {
    const TowerStage& st = ctx.tower_stage();
    const long n = static_cast<long>(st.height());
    const long ell = static_cast<long>(level_or_throw(st, x));
    if (i < -ell || i >= n - ell) throw RangeViolation("shift leaves the stage tower");
    const Rational y = x + st.lefts[static_cast<std::size_t>(ell + i)] - st.lefts[static_cast<std::size_t>(ell)];
    const BuiltSystem& sys = ctx.system();
    FiberMeasure fx = disintegrate(j, sys, x, digit_cap);
    FiberMeasure fy = disintegrate(j, sys, y, digit_cap);
    CoefficientProfile px = profile_from_weights(ctx.stage(), x, static_cast<std::size_t>(ell), level_weights(st, fx));
    CoefficientProfile py =
        profile_from_weights(ctx.stage(), y, static_cast<std::size_t>(ell + i), level_weights(st, fy));
    Rational total(0);
    for (std::size_t m = 0; m < px.c.size(); ++m) {
        Rational d = px.c[m] - py.c[m];
        total += abs_value(d);
    }
    const Rational slack = fx.unresolved + fy.unresolved;
    DefectCheck out;
    out.lhs = {max_of(Rational(total - slack), Rational(0)), total + slack};
    out.rhs = tilde_escape(ctx, fx).scaled(Rational(2));
    out.verdict = verdict_le(out.lhs, out.rhs);
    return out;
}

std::vector<EscapeRow> fiber_escape_check(const Joining& j, const TowerContext& ctx) {
    const BuiltSystem& sys = ctx.system();
    const OperatorForm form = operator_form(j);
    const TowerStage& st = ctx.tower_stage();
    const TowerStage& rs = ctx.resolution_stage();
    const auto& anc = ctx.ancestry();
    const Rational n(static_cast<long>(st.height()));
    const Rational outside_tower = 1 - st.ambient_length;
    const Bounds rhs = complement_mass(ctx.hat_measure());
    std::vector<EscapeRow> rows;
    rows.reserve(st.height());
    for (std::size_t lvl = 0; lvl < st.height(); ++lvl) {
        Bounds mass = Bounds::exact(form.constant * st.width * outside_tower);
        for (const auto& term : form.terms) {
            Bounds part{Rational(0), Rational(0)};
            for (std::uint32_t piece : ctx.pieces(lvl)) {
                std::optional<std::size_t> target;
                if (term.kind == OperatorTerm::Kind::Shift) {
                    target = shifted_level(sys, ctx.resolution(), piece, term.shift);
                } else {
                    LevelStep s = term_step(sys, ctx.resolution(), term, piece);
                    if (s.kind != LevelStep::Kind::Unknown) target = s.target;
                }
                if (!target) {
                    part.hi += rs.width;
                } else if (anc[*target] < 0) {
                    part.lo += rs.width;
                    part.hi += rs.width;
                }
            }
            mass = mass + part.scaled(term.weight);
        }
        EscapeRow row{lvl, mass.scaled(n), rhs, Verdict::Undecided};
        row.verdict = verdict_le(row.lhs, row.rhs);
        rows.push_back(std::move(row));
    }
    return rows;
}

PointwiseCheck pointwise_bound_check(const Joining& j, const TowerContext& ctx, const Rational& x,
                                     const PiecewiseLinear& f, std::size_t digit_cap) {
    const TowerStage& st = ctx.tower_stage();
    const std::size_t ell = level_or_throw(st, x);
    auto res = ctx.resolution_level(x);
    if (!res || ctx.hat()[*res] != Truth::True) throw OutsideTower("point is not certainly in the hat tower");
    const BuiltSystem& sys = ctx.system();
    FiberMeasure fiber = disintegrate(j, sys, x, digit_cap);
    LevelWeights w = level_weights(st, fiber);
    CoefficientProfile p = profile_from_weights(ctx.stage(), x, ell, w);
    const Rational sup = f.sup_norm();

    Bounds diff = Bounds::exact(integrate(f, fiber.measure));
    diff.lo -= sup * fiber.unresolved;
    diff.hi += sup * fiber.unresolved;
    const std::size_t n = st.height();
    for (std::size_t i = 0; i < n; ++i) {
        if (p.c[i] == 0) continue;
        std::optional<Rational> image;
        if (i < n - ell) {
            image = x + st.lefts[ell + i] - st.lefts[ell];
        } else {
            image = sys.apply_power(x, static_cast<long>(i));
        }
        if (image) {
            Rational v = p.c[i] * f(*image);
            diff.lo -= v;
            diff.hi -= v;
        } else {
            diff.lo -= p.c[i] * sup;
            diff.hi += p.c[i] * sup;
        }
    }
    GoodnessStats stats = goodness_stats(ctx, x, fiber);
    PointwiseCheck out;
    out.lhs = absolute(diff);
    const Rational base = st.width + sup * (w.outside + stats.g);
    out.rhs = {base + sup * stats.h.lo, base + sup * (stats.h.hi + fiber.unresolved)};
    out.verdict = verdict_le(out.lhs, out.rhs);
    return out;
}

BasePointSelection select_base_point(const LevelDiagnostics& diag, const TowerContext& ctx) {
    const TowerStage& st = ctx.tower_stage();
    const std::size_t n = st.height();
    const int grid = diag.grid;
    // T^j moves a point of level ℓ to the same grid cell of level ℓ + j, so
    // a candidate's score depends only on its grid column.
    std::vector<long> column(static_cast<std::size_t>(grid), 0);
    for (const auto& lvl : diag.levels) {
        if (!lvl.good) continue;
        for (int t = 0; t < grid; ++t) {
            if (lvl.in_g[static_cast<std::size_t>(t)] && lvl.in_v[static_cast<std::size_t>(t)]) {
                ++column[static_cast<std::size_t>(t)];
            }
        }
    }
    BasePointSelection best;
    best.stage = ctx.stage();
    best.point = grid_point(st.level(0), 0, grid);
    best.score = make_rational(column[0], static_cast<long>(n));
    for (std::size_t ell = 0; ell < n; ++ell) {
        for (int t = 0; t < grid; ++t) {
            if (!diag.levels[ell].in_v[static_cast<std::size_t>(t)]) continue;
            Rational score = make_rational(column[static_cast<std::size_t>(t)], static_cast<long>(n));
            if (!best.found || score > best.score) {
                best.found = true;
                best.level = ell;
                best.grid_index = t;
                best.point = grid_point(st.level(ell), t, grid);
                best.score = score;
            }
        }
    }
    // score > 1 - 13√ε, squared: (1 - score)^2 < 169 ε, with score <= 1.
    Rational miss = 1 - best.score;
    best.threshold_met = miss * miss < 169 * diag.epsilon;
    return best;
}

BasePointSelection select_base_point(const Joining& j, const BuiltSystem& sys, int k, const Rational& eps, int grid) {
    TowerContext ctx(sys, k);
    return select_base_point(good_levels(ctx, j, eps, grid), ctx);
}

Rational KoopmanCombination::sum() const {
    Rational s(0);
    for (const auto& v : coefficients) s += v;
    return s;
}

OperatorForm KoopmanCombination::as_form() const {
    OperatorForm form{Rational(0), {}};
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
        if (coefficients[i] != 0) {
            form.terms.push_back({OperatorTerm::Kind::Shift, static_cast<long>(i), Rational(0), coefficients[i]});
        }
    }
    return form.merged();
}

KoopmanCombination combination_from_profile(const CoefficientProfile& p) { return {p.stage, p.c, p.x}; }

KoopmanCombination build_combination(const Joining& j, const BuiltSystem& sys, int k, const Rational& eps, int grid) {
    BasePointSelection sel = select_base_point(j, sys, k, eps, grid);
    return combination_from_profile(coefficients_at(j, sys, k, sel.point));
}

namespace {

Rational tf_at(const TestFunction& f, const Rational& x) {
    return std::visit([&](const auto& g) { return g(x); }, f);
}
Rational tf_left(const TestFunction& f, const Rational& x) {
    return std::visit([&](const auto& g) { return g.left_limit(x); }, f);
}
std::vector<Rational> tf_breaks(const TestFunction& f, const Rational& lo, const Rational& hi) {
    return std::visit([&](const auto& g) { return g.breaks_inside(lo, hi); }, f);
}
Rational tf_min(const TestFunction& f, const Interval& iv) {
    return std::visit([&](const auto& g) { return g.min_on(iv); }, f);
}
Rational tf_max(const TestFunction& f, const Interval& iv) {
    return std::visit([&](const auto& g) { return g.max_on(iv); }, f);
}
Rational tf_integral(const TestFunction& f) {
    return std::visit([&](const auto& g) { return g.integral(); }, f);
}

// How each term of a form acts on one resolution level.
struct LevelPlan {
    Interval level;
    std::vector<std::pair<Rational, Rational>> exact;         // weight, offset
    std::vector<std::pair<Rational, std::size_t>> set_only;  // weight, target level
    std::vector<Rational> unknown;                            // weights
};

template <class Fn>
void for_each_level(const OperatorForm& form, const BuiltSystem& sys, int r, Fn&& fn) {
    const TowerStage& st = sys.stage(r);
    if (st.ambient_length != 1) throw InvalidInput("resolution stage must tile [0,1)");
    LevelPlan plan;
    for (std::uint32_t lvl : st.order()) {
        plan.level = st.level(lvl);
        plan.exact.clear();
        plan.set_only.clear();
        plan.unknown.clear();
        for (const auto& term : form.terms) {
            LevelStep s = term_step(sys, r, term, lvl);
            switch (s.kind) {
                case LevelStep::Kind::Exact: plan.exact.emplace_back(term.weight, s.offset); break;
                case LevelStep::Kind::SetOnly: plan.set_only.emplace_back(term.weight, s.target); break;
                case LevelStep::Kind::Unknown: plan.unknown.push_back(term.weight); break;
            }
        }
        fn(plan);
    }
}

// Range of the non-translation part of (form f) on a level, as [lo, hi].
Bounds loose_part(const LevelPlan& plan, const TowerStage& st, const TestFunction& f, const Rational& constant_value,
                  const Rational& global_min, const Rational& global_max) {
    Bounds out = Bounds::exact(constant_value);
    auto add = [&](const Rational& w, const Rational& lo, const Rational& hi) {
        out = out + Bounds{lo, hi}.scaled(w);
    };
    for (const auto& [w, target] : plan.set_only) {
        Interval tl = st.level(target);
        add(w, tf_min(f, tl), tf_max(f, tl));
    }
    for (const auto& w : plan.unknown) add(w, global_min, global_max);
    return out;
}

// Cut points of the level where every translated term and the extra function
// are linear.
std::vector<Rational> level_cuts(const LevelPlan& plan, const TestFunction& f, const TestFunction* extra) {
    std::vector<Rational> cuts{plan.level.lo, plan.level.hi};
    for (const auto& [w, off] : plan.exact) {
        for (const auto& b : tf_breaks(f, plan.level.lo + off, plan.level.hi + off)) cuts.push_back(b - off);
    }
    if (extra) {
        for (const auto& b : tf_breaks(*extra, plan.level.lo, plan.level.hi)) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

Rational translated_sum(const LevelPlan& plan, const TestFunction& f, const Rational& u, bool left) {
    Rational s(0);
    for (const auto& [w, off] : plan.exact) s += w * (left ? tf_left(f, u + off) : tf_at(f, u + off));
    return s;
}

OperatorForm difference_form(const KoopmanCombination& c, const Joining& j) {
    return operator_form(j) - c.as_form();
}

// Exact evaluation on the dyadic odometer. Each term adds a 2-adic number g:
// level J goes to level (J + m) mod 2^r, m = g mod 2^r, and the digits below
// the level are shifted by the tail (g - m) / 2^r plus the carry. With f
// linear on every level, all integrals reduce to ∫ s (s + tail) ds.
struct OdometerTerm {
    Rational weight;
    std::size_t low;
    Rational tail;
    Rational carried_tail;
};

std::vector<OdometerTerm> odometer_terms(const OperatorForm& form, int r) {
    std::vector<OdometerTerm> out;
    for (const auto& t : form.terms) {
        Rational g = t.kind == OperatorTerm::Kind::Shift ? Rational(t.shift) : t.gamma;
        Integer m = two_adic_shift_mod(g, static_cast<unsigned>(r));
        Rational tail = (g - Rational(m)) / pow2(r);
        out.push_back({t.weight, static_cast<std::size_t>(m.get_ui()), tail, tail + 1});
    }
    return out;
}

// Value at the left end and increment across each level; nullopt if f bends
// inside some level.
std::optional<std::vector<std::pair<Rational, Rational>>> linear_pieces(const TestFunction& f, const TowerStage& st) {
    std::vector<std::pair<Rational, Rational>> out;
    out.reserve(st.height());
    for (std::size_t j = 0; j < st.height(); ++j) {
        const Interval lvl = st.level(j);
        if (!tf_breaks(f, lvl.lo, lvl.hi).empty()) return std::nullopt;
        Rational v0 = tf_at(f, lvl.lo);
        Rational v1 = tf_left(f, lvl.hi) - v0;
        out.emplace_back(std::move(v0), std::move(v1));
    }
    return out;
}

// For one level: constant part alpha and slope weight per tail.
struct LevelLinear {
    Rational alpha;
    std::vector<std::pair<Rational, Rational>> beta;  // tail, weight

    void add_slope(const Rational& tail, const Rational& w) {
        if (w == 0) return;
        for (auto& [t, b] : beta) {
            if (t == tail) {
                b += w;
                return;
            }
        }
        beta.emplace_back(tail, w);
    }
    Rational slope_sum() const {
        Rational s(0);
        for (const auto& tb : beta) s += tb.second;
        return s;
    }
};

template <class Fn>
void for_each_odometer_level(const std::vector<OdometerTerm>& terms, const TowerStage& st, const Rational& constant,
                             const std::vector<std::pair<Rational, Rational>>& lin, Fn&& fn) {
    const std::size_t n = st.height();
    LevelLinear ll;
    for (std::size_t j = 0; j < n; ++j) {
        ll.alpha = constant;
        ll.beta.clear();
        for (const auto& t : terms) {
            std::size_t target = j + t.low;
            const bool carry = target >= n;
            if (carry) target -= n;
            ll.alpha += t.weight * lin[target].first;
            ll.add_slope(carry ? t.carried_tail : t.tail, t.weight * lin[target].second);
        }
        fn(j, ll);
    }
}

std::optional<Rational> odometer_sot(const OperatorForm& form, const BuiltSystem& sys, int r, const TestFunction& f) {
    const TowerStage& st = sys.stage(r);
    auto lin = linear_pieces(f, st);
    if (!lin) return std::nullopt;
    const auto terms = odometer_terms(form, r);
    Rational total(0);
    for_each_odometer_level(terms, st, form.constant * tf_integral(f), *lin, [&](std::size_t, const LevelLinear& ll) {
        Rational quad(0);
        for (const auto& [g, b] : ll.beta) {
            for (const auto& [h, c] : ll.beta) quad += b * c * two_adic_cross_moment(h - g);
        }
        total += ll.alpha * ll.alpha + ll.alpha * ll.slope_sum() + quad;
    });
    return total * st.width;
}

std::optional<Rational> odometer_pairing(const OperatorForm& form, const BuiltSystem& sys, int r,
                                         const ProductTest& test) {
    const TowerStage& st = sys.stage(r);
    auto lin_a = linear_pieces(test.a, st);
    auto lin_b = linear_pieces(test.b, st);
    if (!lin_a || !lin_b) return std::nullopt;
    const auto terms = odometer_terms(form, r);
    Rational total(0);
    const Rational half = make_rational(1, 2);
    for_each_odometer_level(terms, st, form.constant * tf_integral(test.b), *lin_b,
                            [&](std::size_t j, const LevelLinear& ll) {
                                const auto& [a0, a1] = (*lin_a)[j];
                                Rational moment(0);
                                for (const auto& [g, b] : ll.beta) moment += b * two_adic_cross_moment(g);
                                total += a0 * (ll.alpha + half * ll.slope_sum()) + a1 * (half * ll.alpha + moment);
                            });
    return total * st.width;
}

}  // namespace

Bounds sot_error(const KoopmanCombination& c, const Joining& j, const BuiltSystem& sys, const TestFunction& f,
                 std::optional<int> resolution) {
    const OperatorForm form = difference_form(c, j);
    const int r = resolution.value_or(sys.max_stage());
    if (sys.is_dyadic_odometer()) {
        if (auto v = odometer_sot(form, sys, r, f)) return Bounds::exact(*v);
    }
    const TowerStage& st = sys.stage(r);
    const Interval whole{Rational(0), Rational(1)};
    const Rational gmin = tf_min(f, whole), gmax = tf_max(f, whole);
    const Rational constant_value = form.constant * tf_integral(f);
    Bounds total{Rational(0), Rational(0)};
    for_each_level(form, sys, r, [&](const LevelPlan& plan) {
        const Bounds loose = loose_part(plan, st, f, constant_value, gmin, gmax);
        const Rational mid = (loose.lo + loose.hi) / 2;
        const Rational half = (loose.hi - loose.lo) / 2;
        const std::vector<Rational> cuts = level_cuts(plan, f, nullptr);
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
            const Rational& u = cuts[s];
            const Rational& v = cuts[s + 1];
            const Rational p = translated_sum(plan, f, u, false) + mid;
            const Rational q = translated_sum(plan, f, v, true) + mid;
            total.lo += segment::integral_of_excess_square(u, v, p, q, half);
            total.hi += segment::integral_of_square(u, v, p, q);
            if (half != 0) {
                total.hi += 2 * half * segment::integral_of_abs(u, v, p, q) + half * half * (v - u);
            }
        }
    });
    return total;
}

std::vector<ProductTest> product_tests(int n) {
    std::vector<TestFunction> family{PiecewiseLinear({Rational(0), Rational(1)}, {Rational(1), Rational(1)})};
    for (auto& g : lipschitz_family(n)) family.emplace_back(std::move(g));
    std::vector<ProductTest> tests;
    for (const auto& a : family) {
        for (const auto& b : family) tests.push_back({a, b});
    }
    return tests;
}

Bounds weak_star_error(const KoopmanCombination& c, const Joining& j, const BuiltSystem& sys,
                       const std::vector<ProductTest>& tests, std::optional<int> resolution) {
    const OperatorForm form = difference_form(c, j);
    const int r = resolution.value_or(sys.max_stage());
    if (sys.is_dyadic_odometer()) {
        std::optional<Rational> worst = Rational(0);
        for (const auto& t : tests) {
            auto v = odometer_pairing(form, sys, r, t);
            if (!v) {
                worst.reset();
                break;
            }
            worst = max_of(*worst, abs_value(*v));
        }
        if (worst) return Bounds::exact(*worst);
    }
    const TowerStage& st = sys.stage(r);
    const Interval whole{Rational(0), Rational(1)};
    struct TestState {
        Rational gmin, gmax, constant_value, centre, slack;
    };
    std::vector<TestState> state;
    for (const auto& t : tests) {
        state.push_back({tf_min(t.b, whole), tf_max(t.b, whole), form.constant * tf_integral(t.b), Rational(0),
                         Rational(0)});
    }
    for_each_level(form, sys, r, [&](const LevelPlan& plan) {
        for (std::size_t ti = 0; ti < tests.size(); ++ti) {
            const ProductTest& t = tests[ti];
            TestState& s = state[ti];
            const Bounds loose = loose_part(plan, st, t.b, s.constant_value, s.gmin, s.gmax);
            const Rational mid = (loose.lo + loose.hi) / 2;
            const Rational half = (loose.hi - loose.lo) / 2;
            const std::vector<Rational> cuts = level_cuts(plan, t.b, &t.a);
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
                const Rational& u = cuts[k];
                const Rational& v = cuts[k + 1];
                const Rational au = tf_at(t.a, u), av = tf_left(t.a, v);
                const Rational p = translated_sum(plan, t.b, u, false) + mid;
                const Rational q = translated_sum(plan, t.b, v, true) + mid;
                s.centre += segment::integral_of_product(u, v, au, av, p, q);
                if (half != 0) s.slack += half * segment::integral_of_abs(u, v, au, av);
            }
        }
    });
    Bounds worst{Rational(0), Rational(0)};
    for (const auto& s : state) {
        Bounds e = absolute({s.centre - s.slack, s.centre + s.slack});
        worst.lo = max_of(worst.lo, e.lo);
        worst.hi = max_of(worst.hi, e.hi);
    }
    return worst;
}

}  // namespace rrlab
