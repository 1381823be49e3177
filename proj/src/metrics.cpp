#include "rrlab/metrics.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>

namespace rrlab {

Rational PlaneAtomicMeasure::total_mass() const {
    Rational s(0);
    for (const auto& a : atoms) s += a.weight;
    return s;
}

PlaneAtomicMeasure PlaneAtomicMeasure::canonical() const {
    std::map<std::pair<Rational, Rational>, Rational> acc;
    for (const auto& a : atoms) acc[{a.x, a.y}] += a.weight;
    PlaneAtomicMeasure out;
    for (const auto& [loc, w] : acc) {
        if (w != 0) out.atoms.push_back({loc.first, loc.second, w});
    }
    return out;
}

Rational taxicab(const PlaneAtom& a, const PlaneAtom& b) {
    Rational dx = a.x - b.x, dy = a.y - b.y;
    return abs_value(dx) + abs_value(dy);
}

Rational kr_line(const LineMeasure& mu, const LineMeasure& nu) {
    if (mu.total_mass() != nu.total_mass()) throw MassMismatch("kr_line needs equal total masses");
    const LineMeasure a = mu.canonical(), b = nu.canonical();
    std::set<Rational> pts{Rational(0), Rational(1)};
    for (const LineMeasure* m : {&a, &b}) {
        for (const auto& at : m->atoms()) pts.insert(at.location);
        for (const auto& br : m->density().breakpoints()) pts.insert(br);
    }
    const std::vector<Rational> grid(pts.begin(), pts.end());
    std::size_t ia = 0, ib = 0;
    Rational fa(0), fb(0), total(0);
    for (std::size_t s = 0; s + 1 < grid.size(); ++s) {
        const Rational& lo = grid[s];
        const Rational& hi = grid[s + 1];
        while (ia < a.atoms().size() && a.atoms()[ia].location <= lo) fa += a.atoms()[ia++].weight;
        while (ib < b.atoms().size() && b.atoms()[ib].location <= lo) fb += b.atoms()[ib++].weight;
        const Rational da = a.density()(lo), db = b.density()(lo);
        const Rational len = hi - lo;
        const Rational p = fa - fb;
        const Rational q = p + (da - db) * len;
        total += segment::integral_of_abs(lo, hi, p, q);
        fa += da * len;
        fb += db * len;
    }
    return total;
}

namespace {

void check_balance(const std::vector<Rational>& supply, const std::vector<Rational>& demand,
                   const CostMatrix& cost) {
    Rational s(0), d(0);
    for (const auto& v : supply) {
        if (v < 0) throw InvalidInput("negative supply");
        s += v;
    }
    for (const auto& v : demand) {
        if (v < 0) throw InvalidInput("negative demand");
        d += v;
    }
    if (s != d) throw MassMismatch("supply and demand totals differ");
    if (cost.size() != supply.size()) throw InvalidInput("cost matrix row count mismatch");
    for (const auto& row : cost) {
        if (row.size() != demand.size()) throw InvalidInput("cost matrix column count mismatch");
    }
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[static_cast<std::size_t>(a)] = b;
        return true;
    }
};

// Flows on a spanning tree of the bipartite graph, peeled leaf by leaf.
std::optional<Rational> tree_cost(const std::vector<std::pair<int, int>>& edges, const std::vector<Rational>& supply,
                                  const std::vector<Rational>& demand, const CostMatrix& cost) {
    const int m = static_cast<int>(supply.size());
    std::vector<Rational> residual(supply);
    residual.insert(residual.end(), demand.begin(), demand.end());
    std::vector<int> degree(residual.size(), 0);
    for (const auto& [i, j] : edges) {
        ++degree[static_cast<std::size_t>(i)];
        ++degree[static_cast<std::size_t>(m + j)];
    }
    std::vector<bool> used(edges.size(), false);
    Rational total(0);
    for (std::size_t round = 0; round < edges.size(); ++round) {
        std::size_t pick = edges.size();
        int leaf = -1;
        for (std::size_t e = 0; e < edges.size() && pick == edges.size(); ++e) {
            if (used[e]) continue;
            const int u = edges[e].first, v = m + edges[e].second;
            if (degree[static_cast<std::size_t>(u)] == 1) {
                pick = e;
                leaf = u;
            } else if (degree[static_cast<std::size_t>(v)] == 1) {
                pick = e;
                leaf = v;
            }
        }
        const int u = edges[pick].first, v = m + edges[pick].second;
        const int other = leaf == u ? v : u;
        Rational flow = residual[static_cast<std::size_t>(leaf)];
        if (flow < 0) return std::nullopt;
        residual[static_cast<std::size_t>(leaf)] = 0;
        residual[static_cast<std::size_t>(other)] -= flow;
        --degree[static_cast<std::size_t>(u)];
        --degree[static_cast<std::size_t>(v)];
        used[pick] = true;
        total += flow * cost[static_cast<std::size_t>(edges[pick].first)][static_cast<std::size_t>(edges[pick].second)];
    }
    return total;
}

}  // namespace

Rational transport_exhaustive(const std::vector<Rational>& supply, const std::vector<Rational>& demand,
                              const CostMatrix& cost) {
    check_balance(supply, demand, cost);
    const int m = static_cast<int>(supply.size()), n = static_cast<int>(demand.size());
    if (m == 0 || n == 0) return 0;
    const int cells = m * n, pick = m + n - 1;
    if (cells > 24) throw SizeExceeded("exhaustive transport is limited to tiny instances");
    std::optional<Rational> best;
    std::vector<int> choice(static_cast<std::size_t>(pick));
    std::function<void(int, int)> recurse = [&](int start, int depth) {
        if (depth == pick) {
            UnionFind uf(m + n);
            std::vector<std::pair<int, int>> edges;
            for (int c : choice) {
                if (!uf.unite(c / n, m + c % n)) return;
                edges.emplace_back(c / n, c % n);
            }
            if (auto cst = tree_cost(edges, supply, demand, cost); cst && (!best || *cst < *best)) best = cst;
            return;
        }
        for (int c = start; c <= cells - (pick - depth); ++c) {
            choice[static_cast<std::size_t>(depth)] = c;
            recurse(c + 1, depth + 1);
        }
    };
    recurse(0, 0);
    return *best;
}

Rational transport_ssp(const std::vector<Rational>& supply, const std::vector<Rational>& demand,
                       const CostMatrix& cost) {
    check_balance(supply, demand, cost);
    const std::size_t m = supply.size(), n = demand.size(), nodes = m + n;
    std::vector<std::vector<Rational>> flow(m, std::vector<Rational>(n, Rational(0)));
    std::vector<Rational> rs(supply), rd(demand), pot(nodes, Rational(0));
    auto pending = [&] { return std::any_of(rs.begin(), rs.end(), [](const Rational& v) { return v > 0; }); };
    while (pending()) {
        std::vector<std::optional<Rational>> dist(nodes);
        std::vector<std::ptrdiff_t> prev(nodes, -1);
        std::vector<bool> done(nodes, false);
        for (std::size_t i = 0; i < m; ++i) {
            if (rs[i] > 0) dist[i] = Rational(0);
        }
        auto relax = [&](std::size_t u, std::size_t v, const Rational& reduced) {
            Rational cand = *dist[u] + reduced;
            if (!dist[v] || cand < *dist[v]) {
                dist[v] = std::move(cand);
                prev[v] = static_cast<std::ptrdiff_t>(u);
            }
        };
        for (;;) {
            std::optional<std::size_t> u;
            for (std::size_t v = 0; v < nodes; ++v) {
                if (!done[v] && dist[v] && (!u || *dist[v] < *dist[*u])) u = v;
            }
            if (!u) break;
            done[*u] = true;
            if (*u < m) {
                for (std::size_t j = 0; j < n; ++j) relax(*u, m + j, cost[*u][j] + pot[*u] - pot[m + j]);
            } else {
                const std::size_t j = *u - m;
                for (std::size_t i = 0; i < m; ++i) {
                    if (flow[i][j] > 0) relax(*u, i, -cost[i][j] + pot[*u] - pot[i]);
                }
            }
        }
        std::optional<std::size_t> t;
        for (std::size_t j = 0; j < n; ++j) {
            if (rd[j] > 0 && dist[m + j] && (!t || *dist[m + j] < *dist[*t])) t = m + j;
        }
        if (!t) throw InvalidInput("transport residual graph disconnected");
        const Rational reach = *dist[*t];
        for (std::size_t v = 0; v < nodes; ++v) pot[v] += dist[v] ? min_of(*dist[v], reach) : reach;

        Rational push = rd[*t - m];
        std::size_t v = *t;
        while (prev[v] >= 0) {
            const std::size_t u = static_cast<std::size_t>(prev[v]);
            if (u >= m) push = min_of(push, flow[v][u - m]);
            v = u;
        }
        push = min_of(push, rs[v]);
        rs[v] -= push;
        rd[*t - m] -= push;
        v = *t;
        while (prev[v] >= 0) {
            const std::size_t u = static_cast<std::size_t>(prev[v]);
            if (u < m) {
                flow[u][v - m] += push;
            } else {
                flow[v][u - m] -= push;
            }
            v = u;
        }
    }
    Rational total(0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) total += flow[i][j] * cost[i][j];
    }
    return total;
}

Rational kr_square(const PlaneAtomicMeasure& mu, const PlaneAtomicMeasure& nu, std::size_t atom_cap) {
    const PlaneAtomicMeasure a = mu.canonical(), b = nu.canonical();
    if (a.total_mass() != b.total_mass()) throw MassMismatch("kr_square needs equal total masses");
    if (a.atoms.size() > atom_cap || b.atoms.size() > atom_cap) throw SizeExceeded("plane measure exceeds the atom cap");
    if (a.atoms.empty()) return 0;
    std::vector<Rational> supply, demand;
    for (const auto& x : a.atoms) supply.push_back(x.weight);
    for (const auto& y : b.atoms) demand.push_back(y.weight);
    CostMatrix cost(a.atoms.size());
    for (std::size_t i = 0; i < a.atoms.size(); ++i) {
        for (const auto& y : b.atoms) cost[i].push_back(taxicab(a.atoms[i], y));
    }
    if (a.atoms.size() + b.atoms.size() <= kExhaustiveAtomLimit) return transport_exhaustive(supply, demand, cost);
    return transport_ssp(supply, demand, cost);
}

namespace {

PiecewiseLinear sample(const std::function<Rational(const Rational&)>& f, std::vector<Rational> nodes) {
    nodes.push_back(0);
    nodes.push_back(1);
    std::erase_if(nodes, [](const Rational& x) { return x < 0 || x > 1; });
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    std::vector<Rational> values;
    for (const auto& x : nodes) values.push_back(f(x));
    return PiecewiseLinear(std::move(nodes), std::move(values));
}

}  // namespace

std::vector<PiecewiseLinear> lipschitz_family(int n) {
    if (n < 1) throw InvalidInput("lipschitz_family needs n >= 1");
    const Rational half = make_rational(1, 2), step = make_rational(1, n);
    std::vector<PiecewiseLinear> out;
    out.push_back(sample([&](const Rational& x) -> Rational { return x - half; }, {}));
    for (int i = 0; i <= n; ++i) {
        const Rational c = make_rational(i, n);
        out.push_back(sample(
            [&](const Rational& x) -> Rational {
                Rational v = step - abs_value(Rational(x - c));
                return v > 0 ? v : Rational(0);
            },
            {c - step, c, c + step}));
    }
    for (int i = 0; i <= n; ++i) {
        const Rational c = make_rational(i, n);
        out.push_back(sample(
            [&](const Rational& x) -> Rational {
                Rational d = abs_value(Rational(x - c));
                return min_of(d, half);
            },
            {c - half, c, c + half}));
    }
    return out;
}

DiscretizedJoining discretize_joining(const Joining& j, const BuiltSystem& sys, int stage) {
    const TowerStage& st = sys.stage(stage);
    if (st.ambient_length != 1) throw InvalidInput("discretization stage must tile [0,1)");
    const OperatorForm form = operator_form(j);
    const std::size_t h = st.height();
    const Rational cell_mass = st.width * st.width;
    std::map<std::pair<std::size_t, std::size_t>, Rational> cells;
    for (std::size_t row = 0; row < h; ++row) {
        if (form.constant != 0) {
            for (std::size_t col = 0; col < h; ++col) cells[{row, col}] += form.constant * cell_mass;
        }
        for (const auto& term : form.terms) {
            LevelStep s = term_step(sys, stage, term, row);
            if (s.kind == LevelStep::Kind::Unknown) throw Unresolvable("joining is not resolved at this stage");
            cells[{row, s.target}] += term.weight * st.width;
        }
    }
    DiscretizedJoining out;
    const Rational half_width = st.width / 2;
    for (const auto& [rc, w] : cells) {
        out.measure.atoms.push_back({st.level(rc.first).lo + half_width, st.level(rc.second).lo + half_width, w});
    }
    out.cell_diameter = 2 * st.width;
    return out;
}

}  // namespace rrlab
