#pragma once

// Cycle basis and period matrix of the metric graph, the tropical bilinear
// form, the Abel-Jacobi pairing vectors, translation vectors of the three
// commuting shifts, and the fundamental-cycle bound F' = lcm(F'', d).

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "tropbbs/curve.hpp"
#include "tropbbs/errors.hpp"
#include "tropbbs/rational.hpp"

namespace tropbbs {

// Full-edge traversal: dir = +1 follows the stored u -> v orientation.
struct CycleStep {
    int edge = 0;
    int dir = 1;
};
using Cycle = std::vector<CycleStep>;

// Partial-edge traversal with the lattice length actually covered.
struct PathStep {
    int edge = 0;
    int dir = 1;
    Rat sub_len; // > 0, at most the edge's lattice length
};
using Path = std::vector<PathStep>;

struct CycleBasis {
    std::vector<Cycle> cycles;
    std::vector<char> in_tree;   // per edge id
    std::vector<int> parent_node; // rooted spanning forest
    std::vector<int> parent_edge; // edge id into parent, -1 at roots
};

struct PeriodData {
    std::vector<std::vector<Rat>> B;
    CycleBasis basis;
    const MetricGraph* graph = nullptr;
};

// Signed shared lattice length; cycles traverse full edges.
inline Rat pairing(const MetricGraph& g, const Path& a, const Cycle& b) {
    Rat r = 0;
    for (const auto& pa : a)
        for (const auto& cb : b)
            if (pa.edge == cb.edge) r += Rat(pa.dir * cb.dir) * pa.sub_len;
    (void)g;
    return r;
}

inline Rat pairing(const MetricGraph& g, const Cycle& a, const Cycle& b) {
    Rat r = 0;
    for (const auto& ca : a)
        for (const auto& cb : b)
            if (ca.edge == cb.edge) r += Rat(ca.dir * cb.dir) * g.edges[ca.edge].len;
    return r;
}

// Deterministic spanning forest (edges taken in their canonical order) and
// the fundamental cycle of every chord: chord forward, then the tree path
// back from its head to its tail.
inline CycleBasis spanning_tree_basis(const MetricGraph& g) {
    const int V = static_cast<int>(g.nodes.size());
    CycleBasis basis;
    basis.in_tree.assign(g.edges.size(), 0);
    std::vector<int> par(V);
    std::iota(par.begin(), par.end(), 0);
    std::function<int(int)> find = [&](int x) { return par[x] == x ? x : par[x] = find(par[x]); };
    std::vector<std::vector<std::pair<int, int>>> adj(V); // (edge, other)
    for (size_t e = 0; e < g.edges.size(); ++e) {
        int a = find(g.edges[e].u), b = find(g.edges[e].v);
        if (a != b) {
            par[a] = b;
            basis.in_tree[e] = 1;
            adj[g.edges[e].u].push_back({static_cast<int>(e), g.edges[e].v});
            adj[g.edges[e].v].push_back({static_cast<int>(e), g.edges[e].u});
        }
    }
    basis.parent_node.assign(V, -1);
    basis.parent_edge.assign(V, -1);
    std::vector<char> seen(V, 0);
    for (int root = 0; root < V; ++root) {
        if (seen[root]) continue;
        seen[root] = 1;
        basis.parent_node[root] = root;
        std::vector<int> stack{root};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (auto [e, w] : adj[v]) {
                if (seen[w]) continue;
                seen[w] = 1;
                basis.parent_node[w] = v;
                basis.parent_edge[w] = e;
                stack.push_back(w);
            }
        }
    }
    auto tree_path = [&](int from, int to) {
        // returns steps from `from` to `to` within the forest
        std::vector<int> ua{from}, ub{to};
        while (basis.parent_node[ua.back()] != ua.back()) ua.push_back(basis.parent_node[ua.back()]);
        while (basis.parent_node[ub.back()] != ub.back()) ub.push_back(basis.parent_node[ub.back()]);
        if (ua.back() != ub.back())
            throw Error(err::DisconnectedPoints, "points lie in different components");
        // strip the common tail
        while (ua.size() > 1 && ub.size() > 1 && ua[ua.size() - 2] == ub[ub.size() - 2]) {
            ua.pop_back();
            ub.pop_back();
        }
        Cycle steps;
        for (size_t i = 0; i + 1 < ua.size(); ++i) {
            int e = basis.parent_edge[ua[i]];
            steps.push_back({e, g.edges[e].u == ua[i + 1] ? -1 : 1});
        }
        std::vector<CycleStep> down;
        for (size_t i = 0; i + 1 < ub.size(); ++i) {
            int e = basis.parent_edge[ub[i]];
            down.push_back({e, g.edges[e].u == ub[i] ? -1 : 1});
        }
        for (auto it = down.rbegin(); it != down.rend(); ++it) steps.push_back(*it);
        return steps;
    };
    for (size_t e = 0; e < g.edges.size(); ++e) {
        if (basis.in_tree[e]) continue;
        Cycle c{{static_cast<int>(e), 1}};
        Cycle back = tree_path(g.edges[e].v, g.edges[e].u);
        c.insert(c.end(), back.begin(), back.end());
        basis.cycles.push_back(std::move(c));
    }
    return basis;
}

namespace detail {

inline std::vector<std::vector<Rat>> pairing_matrix(const MetricGraph& g,
                                                    const std::vector<Cycle>& cycles) {
    const size_t n = cycles.size();
    std::vector<std::vector<Rat>> B(n, std::vector<Rat>(n, Rat(0)));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) B[i][j] = pairing(g, cycles[i], cycles[j]);
    return B;
}

} // namespace detail

inline PeriodData period_matrix(const MetricGraph& g) {
    PeriodData pd;
    pd.graph = &g;
    pd.basis = spanning_tree_basis(g);
    pd.B = detail::pairing_matrix(g, pd.basis.cycles);
    return pd;
}

// Same routing tree, caller-supplied homology basis (used by fixtures that
// reproduce a documented basis exactly).
inline PeriodData period_matrix(const MetricGraph& g, std::vector<Cycle> basis_cycles) {
    PeriodData pd;
    pd.graph = &g;
    pd.basis = spanning_tree_basis(g);
    if (basis_cycles.size() != pd.basis.cycles.size())
        throw Error(err::SizeMismatch, "basis size does not match the genus");
    pd.basis.cycles = std::move(basis_cycles);
    pd.B = detail::pairing_matrix(g, pd.basis.cycles);
    return pd;
}

// Edge-path from one point to another: partial edges at the ends, spanning
// forest in between; unbounded stub portions contribute nothing.
inline Path route(const PeriodData& pd, const PointOnGraph& from, const PointOnGraph& to) {
    const MetricGraph& g = *pd.graph;
    auto anchor = [&](const PointOnGraph& p, bool outgoing) -> std::pair<int, Path> {
        switch (p.kind) {
            case PointOnGraph::Kind::Vertex:
                return {p.index, {}};
            case PointOnGraph::Kind::StubRay:
                return {g.stubs[p.index].node, {}};
            case PointOnGraph::Kind::EdgeInterior: {
                const auto& e = g.edges[p.index];
                // route through the edge tail u; the covered portion is
                // [0, t] of the u->v parameterization
                Path part;
                Rat sub = p.t * e.len;
                if (sub != 0) part.push_back({p.index, outgoing ? -1 : 1, sub});
                return {e.u, part};
            }
        }
        throw Error(err::Internal, "unreachable");
    };
    auto [a, prefix] = anchor(from, true);
    auto [b, suffix] = anchor(to, false);
    Path path = prefix;
    // tree route a -> b
    {
        std::vector<int> ua{a}, ub{b};
        const auto& basis = pd.basis;
        while (basis.parent_node[ua.back()] != ua.back()) ua.push_back(basis.parent_node[ua.back()]);
        while (basis.parent_node[ub.back()] != ub.back()) ub.push_back(basis.parent_node[ub.back()]);
        if (ua.back() != ub.back())
            throw Error(err::DisconnectedPoints, "points lie in different components");
        while (ua.size() > 1 && ub.size() > 1 && ua[ua.size() - 2] == ub[ub.size() - 2]) {
            ua.pop_back();
            ub.pop_back();
        }
        for (size_t i = 0; i + 1 < ua.size(); ++i) {
            int e = basis.parent_edge[ua[i]];
            path.push_back({e, g.edges[e].u == ua[i + 1] ? -1 : 1, g.edges[e].len});
        }
        std::vector<PathStep> down;
        for (size_t i = 0; i + 1 < ub.size(); ++i) {
            int e = basis.parent_edge[ub[i]];
            down.push_back({e, g.edges[e].u == ub[i] ? -1 : 1, g.edges[e].len});
        }
        for (auto it = down.rbegin(); it != down.rend(); ++it) path.push_back(*it);
    }
    path.insert(path.end(), suffix.begin(), suffix.end());
    return path;
}

inline std::vector<Rat> pairing_vector(const PeriodData& pd, const Path& path) {
    std::vector<Rat> v;
    v.reserve(pd.basis.cycles.size());
    for (const auto& beta : pd.basis.cycles) v.push_back(pairing(*pd.graph, path, beta));
    return v;
}

// F_{from}(to): pairing vector of a path from `from` to `to`, defined
// modulo B Z^g.
inline std::vector<Rat> abel_jacobi(const PeriodData& pd, const PointOnGraph& from,
                                    const PointOnGraph& to) {
    return pairing_vector(pd, route(pd, from, to));
}

struct TranslationVectors {
    std::vector<Rat> T;
    std::vector<Rat> Nvec;
    std::vector<std::vector<Rat>> Mvec;
};

inline TranslationVectors translation_vectors(const PeriodData& pd, const SpecialPoints& sp) {
    TranslationVectors tv;
    tv.T = abel_jacobi(pd, sp.P1, sp.P0);
    tv.Nvec = abel_jacobi(pd, sp.P2, sp.P0);
    for (const auto& p3 : sp.P3) tv.Mvec.push_back(abel_jacobi(pd, p3, sp.P0));
    return tv;
}

namespace detail {

// Solve B x = v exactly; nullopt when B is singular.
inline std::optional<std::vector<Rat>> solve_linear(std::vector<std::vector<Rat>> B,
                                                    std::vector<Rat> v) {
    const int n = static_cast<int>(B.size());
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (B[r][col] != 0) {
                piv = r;
                break;
            }
        if (piv < 0) return std::nullopt;
        std::swap(B[piv], B[col]);
        std::swap(v[piv], v[col]);
        for (int r = 0; r < n; ++r) {
            if (r == col || B[r][col] == 0) continue;
            Rat f = B[r][col] / B[col][col];
            for (int c2 = col; c2 < n; ++c2) B[r][c2] -= f * B[col][c2];
            v[r] -= f * v[col];
        }
    }
    std::vector<Rat> x(n);
    for (int i = 0; i < n; ++i) x[i] = v[i] / B[i][i];
    return x;
}

} // namespace detail

// Membership v in B Z^g (for g = 0 every empty vector belongs).
inline bool in_period_lattice(const PeriodData& pd, const std::vector<Rat>& v) {
    if (pd.B.empty()) return true;
    auto x = detail::solve_linear(pd.B, v);
    if (!x) throw Error(err::SingularPeriodMatrix, "period matrix is singular");
    for (const auto& c : *x)
        if (!is_integer(c)) return false;
    return true;
}

struct FundamentalCycle {
    long long Fpp = 1; // F'': order of T in the tropical Jacobian
    long long Fp = 1;  // F' = lcm(F'', d)
    std::vector<Rat> BinvT;
};

inline FundamentalCycle fundamental_cycle(const PeriodData& pd, const std::vector<Rat>& T,
                                          long long d) {
    if (d < 1) throw Error(err::InvariantViolation, "d must be >= 1");
    FundamentalCycle fc;
    if (!pd.B.empty()) {
        auto x = detail::solve_linear(pd.B, T);
        if (!x) throw Error(err::SingularPeriodMatrix, "period matrix is singular");
        fc.BinvT = *x;
        Int l = 1;
        for (const auto& c : *x) l = int_lcm(l, denominator(c));
        fc.Fpp = l.convert_to<long long>();
    }
    fc.Fp = std::lcm(fc.Fpp, d);
    return fc;
}

// Cycle as a vector in the edge space (basis-change checks).
inline std::vector<Rat> cycle_edge_vector(const MetricGraph& g, const Cycle& c) {
    std::vector<Rat> v(g.edges.size(), Rat(0));
    for (const auto& s : c) v[s.edge] += s.dir;
    return v;
}

inline bool is_positive_definite(const std::vector<std::vector<Rat>>& B) {
    const int n = static_cast<int>(B.size());
    // leading principal minors via fraction-free-ish elimination
    std::vector<std::vector<Rat>> a = B;
    for (int k = 0; k < n; ++k) {
        if (!(a[k][k] > 0)) return false;
        for (int r = k + 1; r < n; ++r) {
            Rat f = a[r][k] / a[k][k];
            for (int c2 = k; c2 < n; ++c2) a[r][c2] -= f * a[k][c2];
        }
    }
    return true;
}

} // namespace tropbbs
