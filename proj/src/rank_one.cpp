#include "rrlab/rank_one.hpp"

#include "rrlab/joinings.hpp"

#include <algorithm>
#include <numeric>

namespace rrlab {

ConstructionDescriptor ConstructionDescriptor::odometer(int max_stage) {
    return {"odometer", [](int) { return 2L; }, [](int, long) { return 0L; }, max_stage, 0};
}

ConstructionDescriptor ConstructionDescriptor::rigid_spacered(int max_stage) {
    return {"rigid-spacered", [](int k) { return static_cast<long>(k) + 2; },
            [](int k, long c) { return c == static_cast<long>(k) + 1 ? 1L : 0L; }, max_stage, std::nullopt};
}

ConstructionDescriptor ConstructionDescriptor::chacon(int max_stage) {
    return {"chacon", [](int) { return 3L; }, [](int, long c) { return c == 1 ? 1L : 0L; }, max_stage,
            std::nullopt};
}

ConstructionDescriptor ConstructionDescriptor::builtin(const std::string& name, int max_stage) {
    if (name == "odometer") return odometer(max_stage);
    if (name == "rigid-spacered") return rigid_spacered(max_stage);
    if (name == "chacon") return chacon(max_stage);
    throw InvalidInput("unknown builtin system: " + name);
}

std::vector<IntervalSet> TowerStage::levels() const {
    std::vector<IntervalSet> out;
    out.reserve(height());
    for (std::size_t i = 0; i < height(); ++i) out.push_back(IntervalSet({level(i)}));
    return out;
}

IntervalSet TowerStage::union_of_levels() const {
    std::vector<Interval> parts;
    parts.reserve(height());
    for (std::size_t i = 0; i < height(); ++i) parts.push_back(level(i));
    return IntervalSet(std::move(parts));
}

std::vector<std::pair<Interval, Rational>> TowerStage::partial_map() const {
    std::vector<std::pair<Interval, Rational>> out;
    for (std::size_t i = 0; i + 1 < height(); ++i) out.emplace_back(level(i), offset(i));
    return out;
}

void TowerStage::finalize() {
    order_.resize(lefts.size());
    std::iota(order_.begin(), order_.end(), 0U);
    std::sort(order_.begin(), order_.end(), [&](std::uint32_t a, std::uint32_t b) { return lefts[a] < lefts[b]; });
}

std::optional<std::size_t> TowerStage::level_index(const Rational& x) const {
    if (x < 0 || !(x < ambient_length)) return std::nullopt;
    auto it = std::upper_bound(order_.begin(), order_.end(), x,
                               [&](const Rational& v, std::uint32_t idx) { return v < lefts[idx]; });
    if (it == order_.begin()) return std::nullopt;
    std::size_t idx = *std::prev(it);
    if (x < lefts[idx] + width) return idx;
    return std::nullopt;
}

std::optional<std::size_t> level_index(const TowerStage& stage, const Rational& x) { return stage.level_index(x); }

BuiltSystem build(const ConstructionDescriptor& descriptor, int max_stage, const BuildLimits& limits) {
    if (max_stage < 0) throw InvalidInput("max stage must be non-negative");
    BuiltSystem sys;
    sys.descriptor = descriptor;
    sys.descriptor.max_stage = max_stage;

    // Raw construction: stage 0 is [0,1), spacers extend the space to the right.
    std::vector<TowerStage> raw(1);
    raw[0].stage = 0;
    raw[0].width = 1;
    raw[0].ambient_length = 1;
    raw[0].lefts = {Rational(0)};
    for (int k = 0; k < max_stage; ++k) {
        const TowerStage& cur = raw.back();
        const long r = descriptor.cuts(k);
        if (r < 2) throw InvalidInput("cut count must be >= 2 at stage " + std::to_string(k));
        TowerStage next;
        next.stage = k + 1;
        next.width = cur.width / r;
        Rational length = cur.ambient_length;
        std::size_t expected = cur.height() * static_cast<std::size_t>(r);
        for (long c = 0; c < r; ++c) {
            long s = descriptor.spacers(k, c);
            if (s < 0) throw InvalidInput("negative spacer count at stage " + std::to_string(k));
            expected += static_cast<std::size_t>(s);
        }
        if (expected > limits.max_levels) {
            throw DepthExceeded("stage " + std::to_string(k + 1) + " would have " + std::to_string(expected) +
                                " levels");
        }
        if (next.width.get_den() > limits.denominator_cap) {
            throw DepthExceeded("denominator cap exceeded at stage " + std::to_string(k + 1));
        }
        next.lefts.reserve(expected);
        next.parent.reserve(expected);
        for (long c = 0; c < r; ++c) {
            Rational shift = next.width * c;
            for (std::size_t i = 0; i < cur.height(); ++i) {
                next.lefts.push_back(cur.lefts[i] + shift);
                next.parent.push_back(static_cast<std::int64_t>(i));
            }
            for (long s = descriptor.spacers(k, c); s > 0; --s) {
                next.lefts.push_back(length);
                next.parent.push_back(-1);
                length += next.width;
            }
        }
        next.ambient_length = length;
        raw.push_back(std::move(next));
    }

    sys.normalization = raw.back().ambient_length;
    for (auto& st : raw) {
        st.width /= sys.normalization;
        st.ambient_length /= sys.normalization;
        for (auto& l : st.lefts) l /= sys.normalization;
        if (st.width.get_den() > limits.denominator_cap) {
            throw DepthExceeded("denominator cap exceeded at stage " + std::to_string(st.stage));
        }
        st.finalize();
    }
    sys.stages = std::move(raw);
    sys.dyadic_ = sys.closed_at(0);
    for (int k = 0; sys.dyadic_ && k < max_stage + 64; ++k) sys.dyadic_ = descriptor.cuts(k) == 2;
    return sys;
}

bool BuiltSystem::closed_at(int r) const {
    return descriptor.spacer_free_from.has_value() && *descriptor.spacer_free_from <= r;
}

bool BuiltSystem::is_dyadic_odometer() const { return dyadic_; }

LevelStep BuiltSystem::step(int r, std::size_t j, long n) const {
    const TowerStage& st = stage(r);
    const long h = static_cast<long>(st.height());
    const long t = static_cast<long>(j) + n;
    LevelStep out;
    if (t >= 0 && t < h) {
        out.kind = LevelStep::Kind::Exact;
        out.target = static_cast<std::size_t>(t);
        out.offset = st.lefts[out.target] - st.lefts[j];
    } else if (closed_at(r)) {
        out.kind = LevelStep::Kind::SetOnly;
        out.target = static_cast<std::size_t>(((t % h) + h) % h);
    }
    return out;
}

std::vector<std::int64_t> BuiltSystem::ancestry(int k, int r) const {
    if (k > r) throw InvalidInput("ancestry needs k <= r");
    const TowerStage& st = stage(r);
    std::vector<std::int64_t> anc(st.height());
    std::iota(anc.begin(), anc.end(), 0);
    for (int s = r; s > k; --s) {
        const auto& par = stage(s).parent;
        for (auto& a : anc) {
            if (a >= 0) a = par[static_cast<std::size_t>(a)];
        }
    }
    return anc;
}

std::optional<Rational> BuiltSystem::apply_power(const Rational& x, long i) const {
    if (i == 0) return x;
    auto j = top().level_index(x);
    if (!j) return std::nullopt;
    LevelStep st = step(max_stage(), *j, i);
    if (st.kind == LevelStep::Kind::Exact) return Rational(x + st.offset);
    // On the odometer T is adding 1 in the digit group.
    if (is_dyadic_odometer()) return two_adic_translate(x, Rational(i));
    return std::nullopt;
}

ImageResult BuiltSystem::image_set(const IntervalSet& s, long i) const {
    if (i == 0) return {s, Rational(0)};
    const TowerStage& st = top();
    const auto& ord = st.order();
    std::vector<Interval> pieces;
    Rational unresolved(0);
    for (const auto& iv : s.intervals()) {
        auto it = std::upper_bound(ord.begin(), ord.end(), iv.lo,
                                   [&](const Rational& v, std::uint32_t idx) { return v < st.lefts[idx]; });
        if (it != ord.begin()) --it;
        for (; it != ord.end() && st.lefts[*it] < iv.hi; ++it) {
            const std::size_t j = *it;
            Interval lvl = st.level(j);
            Interval piece{max_of(lvl.lo, iv.lo), min_of(lvl.hi, iv.hi)};
            if (!(piece.lo < piece.hi)) continue;
            LevelStep stp = step(max_stage(), j, i);
            if (stp.kind == LevelStep::Kind::Exact) {
                pieces.push_back({piece.lo + stp.offset, piece.hi + stp.offset});
            } else if (stp.kind == LevelStep::Kind::SetOnly && piece == lvl) {
                pieces.push_back(st.level(stp.target));
            } else {
                unresolved += piece.length();
            }
        }
    }
    return {IntervalSet(std::move(pieces)), unresolved};
}

}  // namespace rrlab
