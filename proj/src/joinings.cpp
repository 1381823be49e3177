#include "rrlab/joinings.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <tuple>

namespace rrlab {

namespace {

void validate_combo(const OffDiagonalCombo& c) {
    if (c.terms.empty()) throw InvalidInput("off-diagonal combination needs at least one term");
    Rational total(0);
    for (const auto& t : c.terms) {
        if (t.weight < 0) throw InvalidInput("negative joining weight");
        total += t.weight;
    }
    if (total != 1) throw InvalidInput("joining weights must sum to 1");
}

bool is_integer(const Rational& q) { return q.get_den() == 1; }

}  // namespace

Joining::Joining(Variant v) : v_(std::move(v)) {
    std::visit(
        [](const auto& j) {
            using T = std::decay_t<decltype(j)>;
            if constexpr (std::is_same_v<T, OffDiagonalCombo>) {
                validate_combo(j);
            } else if constexpr (std::is_same_v<T, ProductMix>) {
                if (j.alpha < 0 || j.alpha > 1) throw InvalidInput("product mix alpha must lie in [0,1]");
                validate_combo(j.combo);
            } else {
                if (mpz_even_p(j.gamma.get_den_mpz_t())) throw EvenDenominator("2-adic gamma needs an odd denominator");
            }
        },
        v_);
}

std::string Joining::describe() const {
    auto combo_text = [](const OffDiagonalCombo& c) {
        std::string s;
        for (const auto& t : c.terms) {
            if (!s.empty()) s += "+";
            s += to_string(t.weight) + "*J(" + std::to_string(t.shift) + ")";
        }
        return s;
    };
    return std::visit(
        [&](const auto& j) -> std::string {
            using T = std::decay_t<decltype(j)>;
            if constexpr (std::is_same_v<T, OffDiagonalCombo>) {
                return "offdiag[" + combo_text(j) + "]";
            } else if constexpr (std::is_same_v<T, ProductMix>) {
                return "productmix[alpha=" + to_string(j.alpha) + ";" + combo_text(j.combo) + "]";
            } else {
                return "twoadic[gamma=" + to_string(j.gamma) + "]";
            }
        },
        v_);
}

Joining builtin_joining(const std::string& name) {
    const Rational half = make_rational(1, 2);
    if (name == "shift1") return Joining::off_diagonal(1);
    if (name == "mix03") return Joining(OffDiagonalCombo{{{0, half}, {3, half}}});
    if (name == "productmix") {
        return Joining(ProductMix{make_rational(1, 3), OffDiagonalCombo{{{0, half}, {2, half}}}});
    }
    if (name == "product") return Joining::product();
    if (name == "twoadic") return Joining(TwoAdicGraph{make_rational(-1, 3)});
    throw InvalidInput("unknown builtin joining: " + name);
}

std::vector<std::string> builtin_joining_names() { return {"shift1", "mix03", "productmix", "product", "twoadic"}; }

bool applicable(const Joining& j, const BuiltSystem& sys) {
    return !std::holds_alternative<TwoAdicGraph>(j.variant()) || sys.is_dyadic_odometer();
}

Integer two_adic_shift_mod(const Rational& gamma, unsigned k) {
    if (mpz_even_p(gamma.get_den_mpz_t())) throw EvenDenominator("2-adic gamma needs an odd denominator");
    Integer modulus = Integer(1) << k;
    if (k == 0) return 0;
    Integer inv;
    mpz_invert(inv.get_mpz_t(), gamma.get_den_mpz_t(), modulus.get_mpz_t());
    Integer m = gamma.get_num() * inv;
    mpz_fdiv_r(m.get_mpz_t(), m.get_mpz_t(), modulus.get_mpz_t());
    return m;
}

Rational two_adic_translate(const Rational& x, const Rational& gamma, std::size_t digit_cap) {
    if (x < 0 || x >= 1) throw OutOfRange("two_adic_translate needs x in [0,1)");
    if (mpz_even_p(gamma.get_den_mpz_t())) throw EvenDenominator("2-adic gamma needs an odd denominator");
    // State (binary remainder of x, 2-adic numerator of γ, carry) determines
    // every later digit, so the first repeated state closes the period.
    Integer p = x.get_num(), q = x.get_den();
    Integer a = gamma.get_num();
    const Integer b = gamma.get_den();
    int carry = 0;
    std::map<std::tuple<Integer, Integer, int>, std::size_t> seen;
    std::vector<int> digits;
    std::size_t start = 0;
    for (;;) {
        auto key = std::make_tuple(p, a, carry);
        if (auto it = seen.find(key); it != seen.end()) {
            start = it->second;
            break;
        }
        if (digits.size() >= digit_cap) throw Unresolvable("2-adic digit period exceeds the digit cap");
        seen.emplace(std::move(key), digits.size());
        int dx = 0;
        p *= 2;
        if (p >= q) {
            dx = 1;
            p -= q;
        }
        int dg = mpz_odd_p(a.get_mpz_t()) ? 1 : 0;
        if (dg) a -= b;
        mpz_divexact_ui(a.get_mpz_t(), a.get_mpz_t(), 2);
        int s = dx + dg + carry;
        digits.push_back(s & 1);
        carry = s >> 1;
    }
    Integer head = 0, cycle = 0;
    for (std::size_t i = 0; i < start; ++i) head = head * 2 + digits[i];
    const std::size_t len = digits.size() - start;
    for (std::size_t i = start; i < digits.size(); ++i) cycle = cycle * 2 + digits[i];
    Rational tail = make_rational(cycle, (Integer(1) << len) - 1);
    return (Rational(head) + tail) / pow2(static_cast<long>(start));
}

FiberMeasure disintegrate(const Joining& j, const BuiltSystem& sys, const Rational& x, std::size_t digit_cap) {
    auto combo_atoms = [&](const OffDiagonalCombo& c, const Rational& scale, FiberMeasure& out,
                           std::vector<Atom>& atoms) {
        for (const auto& t : c.terms) {
            Rational w = t.weight * scale;
            if (w == 0) continue;
            if (auto y = sys.apply_power(x, t.shift)) {
                atoms.push_back({*y, w});
            } else {
                out.unresolved += w;
            }
        }
    };
    FiberMeasure out{LineMeasure(), Rational(0)};
    std::vector<Atom> atoms;
    StepFunction density;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, OffDiagonalCombo>) {
                combo_atoms(v, Rational(1), out, atoms);
            } else if constexpr (std::is_same_v<T, ProductMix>) {
                density = StepFunction::constant(v.alpha);
                combo_atoms(v.combo, 1 - v.alpha, out, atoms);
            } else {
                if (!sys.is_dyadic_odometer()) throw InvalidInput("2-adic graph joining needs the dyadic odometer");
                atoms.push_back({two_adic_translate(x, v.gamma, digit_cap), Rational(1)});
            }
        },
        j.variant());
    out.measure = LineMeasure(std::move(atoms), std::move(density));
    return out;
}

OperatorForm OperatorForm::merged() const {
    std::map<std::tuple<int, long, Rational>, Rational> acc;
    for (const auto& t : terms) {
        acc[{static_cast<int>(t.kind), t.shift, t.kind == OperatorTerm::Kind::TwoAdic ? t.gamma : Rational(0)}] +=
            t.weight;
    }
    OperatorForm out{constant, {}};
    for (const auto& [key, w] : acc) {
        if (w == 0) continue;
        OperatorTerm t;
        t.kind = static_cast<OperatorTerm::Kind>(std::get<0>(key));
        t.shift = std::get<1>(key);
        t.gamma = std::get<2>(key);
        t.weight = w;
        out.terms.push_back(std::move(t));
    }
    return out;
}

OperatorForm OperatorForm::operator-(const OperatorForm& rhs) const {
    OperatorForm out{constant - rhs.constant, terms};
    for (auto t : rhs.terms) {
        t.weight = -t.weight;
        out.terms.push_back(std::move(t));
    }
    return out.merged();
}

OperatorForm operator_form(const Joining& j) {
    OperatorForm form{Rational(0), {}};
    auto add_combo = [&](const OffDiagonalCombo& c, const Rational& scale) {
        for (const auto& t : c.terms) form.terms.push_back({OperatorTerm::Kind::Shift, t.shift, Rational(0), t.weight * scale});
    };
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, OffDiagonalCombo>) {
                add_combo(v, Rational(1));
            } else if constexpr (std::is_same_v<T, ProductMix>) {
                form.constant = v.alpha;
                add_combo(v.combo, 1 - v.alpha);
            } else if (is_integer(v.gamma)) {
                // Adding an integer in the digit group is a power of T.
                form.terms.push_back({OperatorTerm::Kind::Shift, v.gamma.get_num().get_si(), Rational(0), Rational(1)});
            } else {
                form.terms.push_back({OperatorTerm::Kind::TwoAdic, 0, v.gamma, Rational(1)});
            }
        },
        j.variant());
    return form.merged();
}

LevelStep term_step(const BuiltSystem& sys, int resolution, const OperatorTerm& t, std::size_t level) {
    if (t.kind == OperatorTerm::Kind::Shift) return sys.step(resolution, level, t.shift);
    if (!sys.is_dyadic_odometer()) throw InvalidInput("2-adic term needs the dyadic odometer");
    // Stage-r odometer level j holds the points whose first r binary digits,
    // read as a 2-adic integer, equal j; adding γ adds m_r to that index.
    const std::size_t h = sys.stage(resolution).height();
    Integer m = two_adic_shift_mod(t.gamma, static_cast<unsigned>(resolution));
    LevelStep out;
    out.kind = LevelStep::Kind::SetOnly;
    Integer target = Integer(static_cast<unsigned long>(level)) + m;
    out.target = static_cast<std::size_t>(target.get_ui() % h);
    return out;
}

OperatorImage apply_form(const OperatorForm& form, const BuiltSystem& sys, int resolution, const StepFunction& f) {
    const TowerStage& st = sys.stage(resolution);
    if (st.ambient_length != 1) throw InvalidInput("resolution stage must tile [0,1)");
    const Rational mean = f.integral();
    // Levels a term cannot follow are carried, as a union, onto the levels no
    // resolved level reaches; f∘M averages there to the mean of f over those.
    std::vector<Rational> unresolved_mean(form.terms.size(), mean);
    for (std::size_t t = 0; t < form.terms.size(); ++t) {
        std::vector<bool> reached(st.height(), false);
        std::size_t unknown = 0;
        for (std::size_t j = 0; j < st.height(); ++j) {
            LevelStep s = term_step(sys, resolution, form.terms[t], j);
            if (s.kind == LevelStep::Kind::Unknown) {
                ++unknown;
            } else {
                reached[s.target] = true;
            }
        }
        if (unknown == 0) continue;
        Rational mass(0);
        std::size_t free = 0;
        for (std::size_t j = 0; j < st.height(); ++j) {
            if (reached[j]) continue;
            mass += f.integral_over(st.level(j));
            ++free;
        }
        if (free == unknown) unresolved_mean[t] = mass / (st.width * static_cast<long>(free));
    }
    std::vector<Rational> breaks, values;
    Rational defect(0);
    std::vector<LevelStep> steps(form.terms.size());
    for (std::uint32_t j : st.order()) {
        const Interval lvl = st.level(j);
        Rational base = form.constant * mean;
        bool inexact = false;
        std::vector<Rational> cuts{lvl.lo};
        for (std::size_t t = 0; t < form.terms.size(); ++t) {
            steps[t] = term_step(sys, resolution, form.terms[t], j);
            const LevelStep& s = steps[t];
            const Rational& w = form.terms[t].weight;
            if (s.kind == LevelStep::Kind::Exact) {
                for (const auto& b : f.breaks_inside(lvl.lo + s.offset, lvl.hi + s.offset)) cuts.push_back(b - s.offset);
            } else if (s.kind == LevelStep::Kind::SetOnly) {
                Interval target = st.level(s.target);
                if (f.min_on(target) == f.max_on(target)) {
                    base += w * f(target.lo);
                } else {
                    base += w * f.integral_over(target) / st.width;
                    inexact = true;
                }
            } else {
                base += w * unresolved_mean[t];
                inexact = true;
            }
        }
        if (inexact) defect += st.width;
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (const auto& u : cuts) {
            Rational v = base;
            for (std::size_t t = 0; t < form.terms.size(); ++t) {
                if (steps[t].kind == LevelStep::Kind::Exact) v += form.terms[t].weight * f(u + steps[t].offset);
            }
            breaks.push_back(u);
            values.push_back(std::move(v));
        }
    }
    return {StepFunction(std::move(breaks), std::move(values)).simplified(), defect};
}

OperatorImage apply_operator(const Joining& j, const BuiltSystem& sys, const StepFunction& f) {
    return apply_form(operator_form(j), sys, sys.max_stage(), f);
}

std::vector<MarginalCheck> marginal_audit(const Joining& j, const BuiltSystem& sys,
                                          const std::vector<IntervalSet>& probes) {
    const OperatorForm form = operator_form(j);
    const int r = sys.max_stage();
    const TowerStage& st = sys.stage(r);
    std::vector<MarginalCheck> out;
    for (const auto& probe : probes) {
        Bounds lhs = Bounds::exact(form.constant * probe.measure());
        for (const auto& term : form.terms) {
            // The map carries each resolved level onto its target level
            // measure-preservingly, whatever it does pointwise. Sum the probe
            // mass over targets with multiplicity; only targets hit other than
            // once differ from probe.measure().
            std::vector<std::uint32_t> hits(st.height(), 0);
            long unknown = 0;
            for (std::size_t lvl = 0; lvl < st.height(); ++lvl) {
                LevelStep s = term_step(sys, r, term, lvl);
                if (s.kind == LevelStep::Kind::Unknown) {
                    ++unknown;
                } else {
                    ++hits[s.target];
                }
            }
            Rational hit_mass = probe.measure();
            for (std::size_t t = 0; t < st.height(); ++t) {
                if (hits[t] == 1) continue;
                Rational m = probe.intersect(IntervalSet({st.level(t)})).measure();
                hit_mass += (static_cast<long>(hits[t]) - 1) * m;
            }
            Bounds part{hit_mass, hit_mass + st.width * unknown};
            lhs = lhs + part.scaled(term.weight);
        }
        const Rational rhs = probe.measure();
        out.push_back({probe, lhs, rhs, lhs.lo <= rhs && rhs <= lhs.hi});
    }
    return out;
}

}  // namespace rrlab

namespace rrlab {

namespace {

// g = g0 + 2 g' in the 2-adic integers; g' for the given low digit.
Rational two_adic_tail(const Rational& g, int low) { return (g - low) / 2; }

int low_digit(const Rational& g) { return mpz_odd_p(g.get_num_mpz_t()) ? 1 : 0; }

}  // namespace

Rational two_adic_cross_moment(const Rational& g) {
    if (mpz_even_p(g.get_den_mpz_t())) throw EvenDenominator("2-adic shift needs an odd denominator");
    static std::mutex guard;
    static std::map<Rational, Rational> cache;
    std::lock_guard<std::mutex> lock(guard);
    if (auto it = cache.find(g); it != cache.end()) return it->second;

    // Writing u = (j + s)/2 by its first digit j gives
    //   M(g) = 1/8 Σ_j [j t_j + (j + t_j)/2 + M(g_j)],
    // t_j the first digit of the sum and g_j the tail plus carry.
    std::vector<Rational> states{g};
    std::map<Rational, std::size_t> index{{g, 0}};
    std::vector<std::array<std::size_t, 2>> next;
    std::vector<Rational> rhs;
    for (std::size_t q = 0; q < states.size(); ++q) {
        const Rational cur = states[q];
        const int g0 = low_digit(cur);
        const Rational tail = two_adic_tail(cur, g0);
        std::array<std::size_t, 2> succ{};
        Rational b(0);
        for (int j = 0; j < 2; ++j) {
            const int t = (j + g0) % 2;
            const int carry = (j + g0) / 2;
            Rational target = tail + carry;
            auto [it, fresh] = index.emplace(target, states.size());
            if (fresh) states.push_back(target);
            succ[static_cast<std::size_t>(j)] = it->second;
            b += Rational(j * t) + make_rational(j + t, 2);
        }
        next.push_back(succ);
        rhs.push_back(b / 8);
    }
    // (I - P/8) M = rhs, strictly diagonally dominant.
    const std::size_t n = states.size();
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1, Rational(0)));
    for (std::size_t q = 0; q < n; ++q) {
        a[q][q] += 1;
        for (std::size_t s : next[q]) a[q][s] -= make_rational(1, 8);
        a[q][n] = rhs[q];
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (a[piv][col] == 0) ++piv;
        std::swap(a[piv], a[col]);
        const Rational inv = 1 / a[col][col];
        for (std::size_t c = col; c <= n; ++c) a[col][c] *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0) continue;
            const Rational f = a[r][col];
            for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    for (std::size_t q = 0; q < n; ++q) cache.emplace(states[q], a[q][n]);
    return a[0][n];
}

}  // namespace rrlab
