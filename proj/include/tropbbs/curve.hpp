#pragma once

// Corner locus of a bivariate min-plus polynomial via the regular Newton
// subdivision (exact rational predicates), the multiplicity-split metric
// graph, and the location of the marked points used by the cycle algorithm.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "tropbbs/bbs.hpp"
#include "tropbbs/errors.hpp"
#include "tropbbs/spectral.hpp"
#include "tropbbs/trop_core.hpp"

namespace tropbbs {

struct RatPoint {
    Rat x, y;
    bool operator==(const RatPoint& o) const { return x == o.x && y == o.y; }
    bool operator<(const RatPoint& o) const { return x != o.x ? x < o.x : y < o.y; }
};

struct IPoint {
    long long i = 0, j = 0;
    auto operator<=>(const IPoint&) const = default;
};

struct CurveEdge {
    int u = 0, v = 0;      // vertex ids, u < v
    long long weight = 1;  // lattice length of the dual segment
    Rat lattice_len;       // of the edge itself
    IPoint dual_from, dual_to;
};

struct CurveRay {
    int v = 0;
    long long dirx = 0, diry = 0; // primitive direction
    long long weight = 1;
    IPoint dual_from, dual_to;
};

struct CornerLocus {
    std::vector<RatPoint> vertices;
    std::vector<CurveEdge> edges;
    std::vector<CurveRay> rays;
    bool degenerate = false; // support collinear: union of parallel lines
    std::string diagnostic;
};

namespace detail {

inline long long igcd(long long a, long long b) { return std::gcd(std::abs(a), std::abs(b)); }

struct Cell {
    Rat a, b, t;          // supporting plane c = a*i + b*j + t
    std::vector<int> on;  // indices of support points on the plane
};

} // namespace detail

inline CornerLocus corner_locus(const TropPoly2& p) {
    if (p.support().size() < 2)
        throw Error(err::DegenerateSupport, "corner locus needs at least two support points");
    std::vector<IPoint> pts;
    std::vector<Rat> lift;
    for (const auto& [k, c] : p.support()) {
        pts.push_back({k.first, k.second});
        lift.push_back(c);
    }
    const int n = static_cast<int>(pts.size());

    // collinear support: the locus is a union of parallel lines
    bool collinear = true;
    for (int k = 2; k < n && collinear; ++k) {
        long long cross = (pts[1].i - pts[0].i) * (pts[k].j - pts[0].j) -
                          (pts[1].j - pts[0].j) * (pts[k].i - pts[0].i);
        if (cross != 0) collinear = false;
    }
    CornerLocus out;
    if (collinear) {
        out.degenerate = true;
        out.diagnostic = "support is collinear; curve is a union of parallel lines";
        long long ux = pts[1].i - pts[0].i, uy = pts[1].j - pts[0].j;
        long long g = detail::igcd(ux, uy);
        ux /= g;
        uy /= g;
        TropPoly1 uni;
        for (int k = 0; k < n; ++k) {
            long long pos = (ux != 0) ? (pts[k].i - pts[0].i) / ux : (pts[k].j - pts[0].j) / uy;
            auto [it, fresh] = uni.try_emplace(pos, lift[k]);
            if (!fresh && lift[k] < it->second) it->second = lift[k];
        }
        auto roots = trop_roots(uni);
        long long lx = -uy, ly = ux; // line direction
        for (const auto& r : roots) {
            // the function is w0.(X,Y) + min_s(c_s + s*T) with T = u.(X,Y);
            // each breakpoint T = root contributes the line u.(X,Y) = root
            Rat t = r.root;
            Rat den = Rat(ux) * Rat(ux) + Rat(uy) * Rat(uy);
            RatPoint base{t * Rat(ux) / den, t * Rat(uy) / den};
            int vid = static_cast<int>(out.vertices.size());
            out.vertices.push_back(base);
            out.rays.push_back({vid, lx, ly, r.mult, pts[0], pts[0]});
            out.rays.push_back({vid, -lx, -ly, r.mult, pts[0], pts[0]});
        }
        return out;
    }

    // enumerate supporting planes from below (cells of the subdivision)
    std::map<std::pair<Rat, Rat>, detail::Cell> cells;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                long long d11 = pts[j].i - pts[i].i, d12 = pts[j].j - pts[i].j;
                long long d21 = pts[k].i - pts[i].i, d22 = pts[k].j - pts[i].j;
                long long det = d11 * d22 - d12 * d21;
                if (det == 0) continue;
                Rat r1 = lift[j] - lift[i], r2 = lift[k] - lift[i];
                Rat a = (r1 * Rat(d22) - r2 * Rat(d12)) / Rat(det);
                Rat b = (r2 * Rat(d11) - r1 * Rat(d21)) / Rat(det);
                if (cells.count({a, b})) continue;
                Rat t = lift[i] - a * Rat(pts[i].i) - b * Rat(pts[i].j);
                bool lower = true;
                std::vector<int> on;
                for (int w = 0; w < n && lower; ++w) {
                    Rat plane = a * Rat(pts[w].i) + b * Rat(pts[w].j) + t;
                    if (lift[w] < plane) lower = false;
                    else if (lift[w] == plane) on.push_back(w);
                }
                if (!lower) continue;
                cells.emplace(std::make_pair(a, b), detail::Cell{a, b, t, std::move(on)});
            }
    if (cells.empty())
        throw Error(err::Internal, "no lower cells found for 2-dimensional support");

    // vertices, ordered deterministically
    std::vector<detail::Cell> cs;
    std::vector<RatPoint> verts;
    for (auto& [key, cell] : cells) {
        cs.push_back(cell);
        verts.push_back({-cell.a, -cell.b});
    }
    std::vector<int> order(cs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return verts[x] < verts[y]; });
    std::vector<int> rank(cs.size());
    for (size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<int>(r);
    out.vertices.resize(cs.size());
    for (size_t c = 0; c < cs.size(); ++c) out.vertices[rank[c]] = verts[c];

    // 1-faces of every cell: maximal collinear runs on the hull boundary
    struct Face {
        IPoint lo, hi;
        std::vector<int> cells;
    };
    std::map<std::pair<IPoint, IPoint>, Face> faces;
    for (size_t c = 0; c < cs.size(); ++c) {
        const auto& on = cs[c].on;
        std::vector<IPoint> q;
        q.reserve(on.size());
        for (int idx : on) q.push_back(pts[idx]);
        std::sort(q.begin(), q.end());
        // monotone chain hull
        auto cross = [](const IPoint& o, const IPoint& a, const IPoint& b) {
            return (a.i - o.i) * (b.j - o.j) - (a.j - o.j) * (b.i - o.i);
        };
        std::vector<IPoint> hull;
        for (int pass = 0; pass < 2; ++pass) {
            size_t start = hull.size();
            for (size_t k = 0; k < q.size(); ++k) {
                const IPoint& pt = pass == 0 ? q[k] : q[q.size() - 1 - k];
                while (hull.size() >= start + 2 &&
                       cross(hull[hull.size() - 2], hull[hull.size() - 1], pt) <= 0)
                    hull.pop_back();
                hull.push_back(pt);
            }
            hull.pop_back();
        }
        for (size_t e = 0; e < hull.size(); ++e) {
            IPoint a = hull[e], b = hull[(e + 1) % hull.size()];
            IPoint lo = std::min(a, b), hi = std::max(a, b);
            auto [it, fresh] = faces.try_emplace({lo, hi}, Face{lo, hi, {}});
            it->second.cells.push_back(static_cast<int>(c));
        }
    }

    for (auto& [key, f] : faces) {
        long long di = f.hi.i - f.lo.i, dj = f.hi.j - f.lo.j;
        long long glen = detail::igcd(di, dj);
        if (f.cells.size() == 2) {
            int cu = rank[f.cells[0]], cv = rank[f.cells[1]];
            if (cu > cv) std::swap(cu, cv);
            const RatPoint& pu = out.vertices[cu];
            const RatPoint& pv = out.vertices[cv];
            // primitive direction of the edge, perpendicular to the dual
            long long px = dj / glen, py = -di / glen;
            Rat dx = pv.x - pu.x, dy = pv.y - pu.y;
            if ((px != 0 && (dx / Rat(px)) < 0) || (px == 0 && (dy / Rat(py)) < 0)) {
                px = -px;
                py = -py;
            }
            Rat len = (px != 0) ? dx / Rat(px) : dy / Rat(py);
            if (!(len > 0) || dx * Rat(py) != dy * Rat(px))
                throw Error(err::Internal, "dual edge not perpendicular to its segment");
            out.edges.push_back({cu, cv, glen, len, f.lo, f.hi});
        } else if (f.cells.size() == 1) {
            int c = f.cells[0];
            // inward normal of the face with respect to the cell
            long long px = dj / glen, py = -di / glen;
            long long sx = 0, sy = 0;
            for (int idx : cs[c].on) {
                sx = pts[idx].i - f.lo.i;
                sy = pts[idx].j - f.lo.j;
                if (sx * dj - sy * di != 0) break; // off the face line
            }
            if (px * sx + py * sy < 0) {
                px = -px;
                py = -py;
            }
            out.rays.push_back({rank[c], px, py, glen, f.lo, f.hi});
        } else {
            throw Error(err::Internal, "1-face shared by more than two cells");
        }
    }
    std::sort(out.edges.begin(), out.edges.end(), [](const CurveEdge& a, const CurveEdge& b) {
        return std::tie(a.u, a.v, a.dual_from, a.dual_to) <
               std::tie(b.u, b.v, b.dual_from, b.dual_to);
    });
    std::sort(out.rays.begin(), out.rays.end(), [](const CurveRay& a, const CurveRay& b) {
        return std::tie(a.v, a.dirx, a.diry, a.dual_from) <
               std::tie(b.v, b.dirx, b.diry, b.dual_from);
    });

    // balancing at every vertex (cheap internal canary)
    for (size_t v = 0; v < out.vertices.size(); ++v) {
        long long bx = 0, by = 0;
        for (const auto& e : out.edges) {
            Rat dx = out.vertices[e.v].x - out.vertices[e.u].x;
            Rat dy = out.vertices[e.v].y - out.vertices[e.u].y;
            Rat g = e.lattice_len;
            Rat qx = dx / g, qy = dy / g;
            long long px = numerator(qx).convert_to<long long>();
            long long py = numerator(qy).convert_to<long long>();
            if (e.u == static_cast<int>(v)) {
                bx += e.weight * px;
                by += e.weight * py;
            }
            if (e.v == static_cast<int>(v)) {
                bx -= e.weight * px;
                by -= e.weight * py;
            }
        }
        for (const auto& r : out.rays)
            if (r.v == static_cast<int>(v)) {
                bx += r.weight * r.dirx;
                by += r.weight * r.diry;
            }
        if (bx != 0 || by != 0)
            throw Error(err::Internal, "balancing violated at a corner-locus vertex");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metric graph with multiplicities split into parallel unit copies

struct MetricGraph {
    struct Node {
        RatPoint pos;
    };
    struct MEdge {
        int u = 0, v = 0; // node ids, u < v (orientation u -> v)
        int src_edge = 0;
        int copy = 0;
        Rat len;
    };
    struct Stub {
        int node = 0;
        long long dirx = 0, diry = 0;
        int src_ray = 0;
        int copy = 0;
    };
    std::vector<Node> nodes;
    std::vector<MEdge> edges;
    std::vector<Stub> stubs;
    bool degenerate = false;

    int components() const {
        std::vector<int> par(nodes.size());
        std::iota(par.begin(), par.end(), 0);
        std::function<int(int)> find = [&](int x) { return par[x] == x ? x : par[x] = find(par[x]); };
        for (const auto& e : edges) par[find(e.u)] = find(e.v);
        std::set<int> roots;
        for (size_t v = 0; v < nodes.size(); ++v) roots.insert(find(static_cast<int>(v)));
        return static_cast<int>(roots.size());
    }
    int genus() const {
        return static_cast<int>(edges.size()) - static_cast<int>(nodes.size()) + components();
    }
};

inline MetricGraph split_multiplicity(const CornerLocus& g0) {
    MetricGraph g;
    g.degenerate = g0.degenerate;
    g.nodes.reserve(g0.vertices.size());
    for (const auto& v : g0.vertices) g.nodes.push_back({v});
    for (size_t e = 0; e < g0.edges.size(); ++e)
        for (long long c = 0; c < g0.edges[e].weight; ++c)
            g.edges.push_back({g0.edges[e].u, g0.edges[e].v, static_cast<int>(e),
                               static_cast<int>(c), g0.edges[e].lattice_len});
    for (size_t r = 0; r < g0.rays.size(); ++r)
        for (long long c = 0; c < g0.rays[r].weight; ++c)
            g.stubs.push_back({g0.rays[r].v, g0.rays[r].dirx, g0.rays[r].diry,
                               static_cast<int>(r), static_cast<int>(c)});
    return g;
}

// ---------------------------------------------------------------------------
// Special points

struct PointOnGraph {
    enum class Kind { Vertex, EdgeInterior, StubRay } kind = Kind::Vertex;
    int index = 0;  // node id / edge id / stub id
    Rat t;          // edge: fraction in (0,1) from u; stub: lattice distance >= 0
    RatPoint coords;
};

struct SpecialPoints {
    PointOnGraph P0, P1, P2;
    std::vector<PointOnGraph> P3;
    bool ambiguous_ray = false;
    Rat G;
};

inline PointOnGraph locate_point(const MetricGraph& g, const RatPoint& pt) {
    for (size_t v = 0; v < g.nodes.size(); ++v)
        if (g.nodes[v].pos == pt) return {PointOnGraph::Kind::Vertex, static_cast<int>(v), Rat(0), pt};
    for (size_t e = 0; e < g.edges.size(); ++e) {
        if (g.edges[e].copy != 0) continue; // any copy works; take the first
        const RatPoint& a = g.nodes[g.edges[e].u].pos;
        const RatPoint& b = g.nodes[g.edges[e].v].pos;
        Rat dx = b.x - a.x, dy = b.y - a.y;
        Rat t;
        if (dx != 0) t = (pt.x - a.x) / dx;
        else if (dy != 0) t = (pt.y - a.y) / dy;
        else continue;
        if (!(t > 0 && t < 1)) continue;
        if (a.x + t * dx == pt.x && a.y + t * dy == pt.y)
            return {PointOnGraph::Kind::EdgeInterior, static_cast<int>(e), t, pt};
    }
    for (size_t s = 0; s < g.stubs.size(); ++s) {
        if (g.stubs[s].copy != 0) continue;
        const RatPoint& a = g.nodes[g.stubs[s].node].pos;
        Rat dx(g.stubs[s].dirx), dy(g.stubs[s].diry);
        Rat t;
        if (dx != 0) t = (pt.x - a.x) / dx;
        else t = (pt.y - a.y) / dy;
        if (!(t > 0)) continue;
        if (a.x + t * dx == pt.x && a.y + t * dy == pt.y)
            return {PointOnGraph::Kind::StubRay, static_cast<int>(s), t, pt};
    }
    throw Error(err::PointNotOnCurve,
                "(" + rat_str(pt.x) + ", " + rat_str(pt.y) + ") is not on the curve");
}

// P0: stub toward (-inf,-inf); P1: the point (G, A); P2: horizontal stub at
// height B; P3[m]: vertical stubs at the column sums H_m.
inline SpecialPoints locate_special_points(const BBSState& s, const SpectralData& sd,
                                           const MetricGraph& g) {
    Conserved c = conserved(s);
    SpecialPoints sp;
    // largest root of the Y = A restriction
    auto roots = trop_roots(restrict_y(sd.charpoly_trop, c.A));
    if (roots.empty())
        throw Error(err::PointNotOnCurve, "restricted polynomial has no tropical roots");
    sp.G = roots.back().root;
    sp.P1 = locate_point(g, {sp.G, c.A});

    // P0: prefer the puncture direction -(N/d, M/d)
    long long n1 = sd.N / sd.d, m1 = sd.M / sd.d;
    std::optional<size_t> preferred, fallback;
    int preferred_rays = 0, fallback_rays = 0;
    int last_pref_ray = -1, last_fall_ray = -1;
    for (size_t i = 0; i < g.stubs.size(); ++i) {
        const auto& st = g.stubs[i];
        if (st.copy != 0) continue;
        if (st.dirx < 0 && st.diry < 0) {
            if (!fallback) fallback = i;
            if (st.src_ray != last_fall_ray) {
                ++fallback_rays;
                last_fall_ray = st.src_ray;
            }
            if (st.dirx == -n1 && st.diry == -m1) {
                if (!preferred) preferred = i;
                if (st.src_ray != last_pref_ray) {
                    ++preferred_rays;
                    last_pref_ray = st.src_ray;
                }
            }
        }
    }
    if (!fallback)
        throw Error(err::PointNotOnCurve, "no ray toward (-inf, -inf)");
    size_t p0 = preferred ? *preferred : *fallback;
    sp.ambiguous_ray = preferred ? (preferred_rays > 1) : (fallback_rays > 1);
    sp.P0 = {PointOnGraph::Kind::StubRay, static_cast<int>(p0), Rat(0),
             g.nodes[g.stubs[p0].node].pos};

    // P2: horizontal stub at height B
    std::optional<size_t> p2;
    for (size_t i = 0; i < g.stubs.size() && !p2; ++i) {
        const auto& st = g.stubs[i];
        if (st.copy == 0 && st.dirx == 1 && st.diry == 0 && g.nodes[st.node].pos.y == c.B)
            p2 = i;
    }
    if (!p2)
        throw Error(err::PointNotOnCurve, "no horizontal ray at height B=" + rat_str(c.B));
    sp.P2 = {PointOnGraph::Kind::StubRay, static_cast<int>(*p2), Rat(0),
             g.nodes[g.stubs[*p2].node].pos};

    // P3[m]: vertical stubs at abscissa H_m, consuming distinct copies for
    // repeated column sums
    std::map<Rat, int> used;
    for (int m = 0; m < s.M; ++m) {
        int want = used[c.H[m]]++;
        std::optional<size_t> hit;
        int seen = 0;
        for (size_t i = 0; i < g.stubs.size() && !hit; ++i) {
            const auto& st = g.stubs[i];
            if (st.dirx == 0 && st.diry == 1 && g.nodes[st.node].pos.x == c.H[m]) {
                if (seen == want) hit = i;
                ++seen;
            }
        }
        if (!hit)
            throw Error(err::PointNotOnCurve,
                        "no vertical ray at H_" + std::to_string(m + 1) + "=" + rat_str(c.H[m]));
        sp.P3.push_back({PointOnGraph::Kind::StubRay, static_cast<int>(*hit), Rat(0),
                         g.nodes[g.stubs[*hit].node].pos});
    }
    return sp;
}

} // namespace tropbbs
