#pragma once

// Min-plus (tropical) scalars, matrices and bivariate polynomials, together
// with the spectral machinery used by the ultradiscrete solver: Kleene star,
// Karp minimum cycle mean, critical graph and tropical eigenvectors.
//
// Convention: addition is min, multiplication is rational +, the tropical
// zero is +infinity.  Matrix entries follow walk semantics: (a^k)(i,j) is the
// least weight of a k-arc walk from j to i, i.e. entry (r,c) is an arc c->r.

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "tropbbs/errors.hpp"
#include "tropbbs/rational.hpp"

namespace tropbbs {

// ---------------------------------------------------------------------------
// TropScalar

class TropScalar {
public:
    TropScalar() : inf_(true) {}
    TropScalar(Rat v) : inf_(false), v_(std::move(v)) {} // NOLINT(google-explicit-constructor)
    TropScalar(int v) : inf_(false), v_(v) {}            // NOLINT(google-explicit-constructor)

    static TropScalar infinity() { return TropScalar(); }
    static TropScalar zero() { return TropScalar(); }   // identity for min
    static TropScalar one() { return TropScalar(Rat(0)); } // identity for +

    bool is_inf() const { return inf_; }
    const Rat& value() const {
        if (inf_) throw Error(err::Internal, "value() on tropical infinity");
        return v_;
    }

    // min
    friend TropScalar t_add(const TropScalar& a, const TropScalar& b) {
        if (a.inf_) return b;
        if (b.inf_) return a;
        return TropScalar(std::min(a.v_, b.v_));
    }
    // rational +
    friend TropScalar t_mul(const TropScalar& a, const TropScalar& b) {
        if (a.inf_ || b.inf_) return infinity();
        return TropScalar(a.v_ + b.v_);
    }

    bool operator==(const TropScalar& o) const {
        if (inf_ != o.inf_) return false;
        return inf_ || v_ == o.v_;
    }
    bool operator!=(const TropScalar& o) const { return !(*this == o); }
    // +infinity compares greater than every finite value
    bool operator<(const TropScalar& o) const {
        if (inf_) return false;
        if (o.inf_) return true;
        return v_ < o.v_;
    }

private:
    bool inf_;
    Rat v_;
};

inline std::string to_string(const TropScalar& t) {
    return t.is_inf() ? "inf" : rat_str(t.value());
}

// ---------------------------------------------------------------------------
// TropMatrix

class TropMatrix {
public:
    explicit TropMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n) {
        if (n <= 0) throw Error(err::SizeMismatch, "matrix size must be positive");
    }

    static TropMatrix identity(int n) {
        TropMatrix e(n);
        for (int i = 0; i < n; ++i) e.at(i, i) = TropScalar::one();
        return e;
    }

    int size() const { return n_; }
    TropScalar& at(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    const TropScalar& at(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

    bool operator==(const TropMatrix& o) const { return n_ == o.n_ && a_ == o.a_; }

private:
    int n_;
    std::vector<TropScalar> a_;
};

inline TropMatrix tmat_mul(const TropMatrix& a, const TropMatrix& b) {
    if (a.size() != b.size())
        throw Error(err::SizeMismatch, "tropical matrix product on mismatched sizes");
    const int n = a.size();
    TropMatrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (a.at(i, j).is_inf()) continue;
            for (int k = 0; k < n; ++k)
                r.at(i, k) = t_add(r.at(i, k), t_mul(a.at(i, j), b.at(j, k)));
        }
    return r;
}

// a* = E (+) a (+) a^2 (+) ... ; entry (i,j) is the least-weight walk j -> i.
// Floyd-Warshall closure; requires every directed cycle to have weight >= 0.
inline TropMatrix kleene_star(const TropMatrix& a) {
    const int n = a.size();
    TropMatrix d = a;
    for (int i = 0; i < n; ++i) d.at(i, i) = t_add(d.at(i, i), TropScalar::one());
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            if (d.at(i, k).is_inf()) continue;
            for (int j = 0; j < n; ++j)
                d.at(i, j) = t_add(d.at(i, j), t_mul(d.at(i, k), d.at(k, j)));
        }
    for (int i = 0; i < n; ++i)
        if (d.at(i, i) < TropScalar::one())
            throw Error(err::NegativeCycle, "geometric series diverges: negative cycle");
    return d;
}

namespace detail {

// Strongly connected components of the finite-entry digraph (arc c->r for
// finite a(r,c)).  Returns component id per node, ids in reverse topological
// order (Kosaraju).
inline std::vector<int> scc_ids(const TropMatrix& a, int& comp_count) {
    const int n = a.size();
    std::vector<std::vector<int>> fwd(n), rev(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (!a.at(r, c).is_inf()) {
                fwd[c].push_back(r);
                rev[r].push_back(c);
            }
    std::vector<int> order;
    order.reserve(n);
    std::vector<char> seen(n, 0);
    for (int s = 0; s < n; ++s) {
        if (seen[s]) continue;
        // iterative DFS with explicit stack
        std::vector<std::pair<int, size_t>> st{{s, 0}};
        seen[s] = 1;
        while (!st.empty()) {
            auto& [v, idx] = st.back();
            if (idx < fwd[v].size()) {
                int w = fwd[v][idx++];
                if (!seen[w]) {
                    seen[w] = 1;
                    st.emplace_back(w, 0);
                }
            } else {
                order.push_back(v);
                st.pop_back();
            }
        }
    }
    std::vector<int> comp(n, -1);
    comp_count = 0;
    for (int k = n - 1; k >= 0; --k) {
        int s = order[k];
        if (comp[s] != -1) continue;
        std::vector<int> st{s};
        comp[s] = comp_count;
        while (!st.empty()) {
            int v = st.back();
            st.pop_back();
            for (int w : rev[v])
                if (comp[w] == -1) {
                    comp[w] = comp_count;
                    st.push_back(w);
                }
        }
        ++comp_count;
    }
    return comp;
}

} // namespace detail

// Karp's recurrence, run per strongly connected component.
inline Rat min_cycle_mean(const TropMatrix& a) {
    const int n = a.size();
    int comp_count = 0;
    std::vector<int> comp = detail::scc_ids(a, comp_count);
    std::optional<Rat> best;
    for (int cid = 0; cid < comp_count; ++cid) {
        std::vector<int> nodes;
        for (int v = 0; v < n; ++v)
            if (comp[v] == cid) nodes.push_back(v);
        // arcs inside the component
        struct Arc { int from, to; Rat w; };
        std::vector<Arc> arcs;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                if (comp[r] == cid && comp[c] == cid && !a.at(r, c).is_inf())
                    arcs.push_back({c, r, a.at(r, c).value()});
        if (arcs.empty()) continue;
        const int k = static_cast<int>(nodes.size());
        std::vector<int> pos(n, -1);
        for (int i = 0; i < k; ++i) pos[nodes[i]] = i;
        // D[l][v] = least weight of an l-arc walk from nodes[0] to v
        std::vector<std::vector<std::optional<Rat>>> D(
            k + 1, std::vector<std::optional<Rat>>(k));
        D[0][0] = Rat(0);
        for (int l = 1; l <= k; ++l)
            for (const auto& arc : arcs) {
                const auto& du = D[l - 1][pos[arc.from]];
                if (!du) continue;
                auto& dv = D[l][pos[arc.to]];
                Rat cand = *du + arc.w;
                if (!dv || cand < *dv) dv = cand;
            }
        std::optional<Rat> comp_best;
        for (int v = 0; v < k; ++v) {
            if (!D[k][v]) continue;
            std::optional<Rat> worst;
            for (int l = 0; l < k; ++l) {
                if (!D[l][v]) continue;
                Rat mean = (*D[k][v] - *D[l][v]) / Rat(k - l);
                if (!worst || mean > *worst) worst = mean;
            }
            if (worst && (!comp_best || *worst < *comp_best)) comp_best = worst;
        }
        if (comp_best && (!best || *comp_best < *best)) best = comp_best;
    }
    if (!best) throw Error(err::Acyclic, "digraph has no directed cycle");
    return *best;
}

struct TropEigen {
    std::vector<Rat> vec;                 // normalized so vec[0] == 0
    bool multiple_critical_classes = false; // warning flag
};

namespace detail {

// Eigenvector of a shifted matrix S (min cycle mean 0) that matches the
// valuation of the Perron vector of a positive realization of S.  Each
// critical class contributes its star column; when several classes tie at
// the top eigenvalue, the column offsets are fixed by the next perturbation
// order, which is again a tropical eigenproblem on the class-to-class
// distance matrix (with the class couplings halved around its cycles).
// Recursion depth is at most log2(size) since every second-level critical
// cycle merges at least two classes.
inline std::vector<TropScalar> perron_eigenvector_shifted(const TropMatrix& s, bool& multiple) {
    const int n = s.size();
    TropMatrix star = kleene_star(s);
    // arc c->r is critical iff it closes a zero-weight cycle
    TropMatrix critical_arcs(n);
    std::vector<char> critical_node(n, 0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            if (s.at(r, c).is_inf() || star.at(c, r).is_inf()) continue;
            if (s.at(r, c).value() + star.at(c, r).value() == 0) {
                critical_arcs.at(r, c) = TropScalar::one();
                critical_node[r] = critical_node[c] = 1;
            }
        }
    int comp_count = 0;
    std::vector<int> comp = scc_ids(critical_arcs, comp_count);
    std::vector<int> reps; // smallest critical node per class
    {
        std::vector<int> seen(comp_count, -1);
        for (int v = 0; v < n; ++v) {
            if (!critical_node[v]) continue;
            if (seen[comp[v]] == -1) {
                seen[comp[v]] = static_cast<int>(reps.size());
                reps.push_back(v);
            }
        }
    }
    if (reps.empty())
        throw Error(err::EigenvectorUndefined, "no critical cycle at the given eigenvalue");
    const int k = static_cast<int>(reps.size());
    std::vector<TropScalar> offsets(k, TropScalar::one());
    if (k > 1) {
        multiple = true;
        TropMatrix cls(k);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c)
                if (r != c) cls.at(r, c) = star.at(reps[r], reps[c]);
        Rat delta = min_cycle_mean(cls); // > 0: distinct classes
        TropMatrix shifted(k);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c)
                if (!cls.at(r, c).is_inf())
                    shifted.at(r, c) = TropScalar(cls.at(r, c).value() - delta);
        offsets = perron_eigenvector_shifted(shifted, multiple);
    }
    std::vector<TropScalar> m(n, TropScalar::infinity());
    for (int c = 0; c < k; ++c)
        for (int i = 0; i < n; ++i)
            m[i] = t_add(m[i], t_mul(offsets[c], star.at(i, reps[c])));
    return m;
}

} // namespace detail

// Tropical eigenvector for lambda = min_cycle_mean(a): a tropical sum of
// normalized critical columns of (a - lambda)*, the per-column offsets
// chosen so that the result is the valuation of the Perron eigenvector of
// any positive realization of a.  Satisfies min_j(a(i,j) + m_j) =
// lambda + m_i exactly (right eigenvector), and is normalized so m_1 = 0.
inline TropEigen trop_eigenvector(const TropMatrix& a, const Rat& lambda) {
    const int n = a.size();
    TropMatrix shifted(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!a.at(i, j).is_inf())
                shifted.at(i, j) = TropScalar(a.at(i, j).value() - lambda);
    TropEigen out;
    std::vector<TropScalar> m = detail::perron_eigenvector_shifted(shifted, out.multiple_critical_classes);
    if (m[0].is_inf())
        throw Error(err::EigenvectorUndefined, "eigenvector not normalizable at index 1");
    const Rat base = m[0].value();
    out.vec.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (m[i].is_inf())
            throw Error(err::EigenvectorUndefined,
                        "critical columns do not span a finite eigenvector");
        out.vec.push_back(m[i].value() - base);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Valuations with exact leading coefficients.
//
// When a tropical matrix is the valuation image of a positive matrix family
// with no cancellations, every entry also carries a well-defined leading
// integer coefficient (a walk count).  These coefficients break the ties the
// plain valuation data cannot: among several critical classes, the class
// whose zero-weight block has the strictly largest Perron root dominates the
// eigenvector limit.

struct TropCoef {
    TropScalar v;  // valuation; +inf means absent
    Int c;         // leading coefficient (> 0 when v finite)
    TropCoef() : v(TropScalar::infinity()), c(0) {}
    TropCoef(TropScalar val, Int coef) : v(std::move(val)), c(std::move(coef)) {}
};

inline TropCoef tc_add(const TropCoef& a, const TropCoef& b) {
    if (a.v.is_inf()) return b;
    if (b.v.is_inf()) return a;
    if (a.v < b.v) return a;
    if (b.v < a.v) return b;
    return TropCoef(a.v, a.c + b.c);
}

inline TropCoef tc_mul(const TropCoef& a, const TropCoef& b) {
    if (a.v.is_inf() || b.v.is_inf()) return TropCoef();
    return TropCoef(t_mul(a.v, b.v), a.c * b.c);
}

class TropCoefMatrix {
public:
    explicit TropCoefMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n) {}
    int size() const { return n_; }
    TropCoef& at(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    const TropCoef& at(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
    TropMatrix valuations() const {
        TropMatrix m(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) m.at(i, j) = at(i, j).v;
        return m;
    }

private:
    int n_;
    std::vector<TropCoef> a_;
};

inline TropCoefMatrix tcmat_mul(const TropCoefMatrix& a, const TropCoefMatrix& b) {
    if (a.size() != b.size())
        throw Error(err::SizeMismatch, "tropical matrix product on mismatched sizes");
    const int n = a.size();
    TropCoefMatrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (a.at(i, j).v.is_inf()) continue;
            for (int k = 0; k < n; ++k)
                r.at(i, k) = tc_add(r.at(i, k), tc_mul(a.at(i, j), b.at(j, k)));
        }
    return r;
}

// Star with minimal-walk counting.  Counting is valid only when every cycle
// has strictly positive weight (min-valuation walks are then simple paths and
// the Floyd-Warshall decomposition enumerates each exactly once); otherwise
// `counts_valid` is cleared and the coefficients must not be trusted.
inline TropCoefMatrix tcmat_star(const TropCoefMatrix& a, bool& counts_valid) {
    const int n = a.size();
    TropCoefMatrix d = a;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            if (d.at(i, k).v.is_inf()) continue;
            for (int j = 0; j < n; ++j)
                d.at(i, j) = tc_add(d.at(i, j), tc_mul(d.at(i, k), d.at(k, j)));
        }
    for (int i = 0; i < n; ++i) {
        if (d.at(i, i).v.is_inf()) continue;
        if (d.at(i, i).v < TropScalar::one())
            throw Error(err::NegativeCycle, "geometric series diverges: negative cycle");
        if (d.at(i, i).v == TropScalar::one()) counts_valid = false; // zero-weight cycle
    }
    for (int i = 0; i < n; ++i) d.at(i, i) = tc_add(d.at(i, i), TropCoef(TropScalar::one(), 1));
    return d;
}

namespace detail {

// Characteristic polynomial of an integer matrix, monic in x, exact.
inline std::vector<Int> int_charpoly(const std::vector<std::vector<Int>>& a) {
    const int n = static_cast<int>(a.size());
    // Faddeev-LeVerrier over rationals, coefficients are integers in the end
    std::vector<std::vector<Rat>> m(n, std::vector<Rat>(n, Rat(0)));
    std::vector<Rat> coef(n + 1, Rat(0));
    coef[n] = 1;
    std::vector<std::vector<Rat>> acc(n, std::vector<Rat>(n, Rat(0)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc[i][j] = Rat(a[i][j]);
    for (int k = 1; k <= n; ++k) {
        Rat tr = 0;
        for (int i = 0; i < n; ++i) tr += acc[i][i];
        Rat ck = -tr / Rat(k);
        coef[n - k] = ck;
        if (k == n) break;
        for (int i = 0; i < n; ++i) acc[i][i] += ck;
        // acc = A * acc
        std::vector<std::vector<Rat>> nxt(n, std::vector<Rat>(n, Rat(0)));
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < n; ++l) {
                if (a[i][l] == 0) continue;
                Rat f(a[i][l]);
                for (int j = 0; j < n; ++j) nxt[i][j] += f * acc[l][j];
            }
        acc = nxt;
    }
    std::vector<Int> out(n + 1);
    for (int i = 0; i <= n; ++i) out[i] = numerator(coef[i]); // denominators are 1
    return out;
}

inline std::vector<Rat> poly_derivative(const std::vector<Rat>& p) {
    std::vector<Rat> d;
    for (size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * Rat(static_cast<long>(i)));
    if (d.empty()) d.push_back(Rat(0));
    return d;
}

inline std::vector<Rat> poly_mod(std::vector<Rat> a, const std::vector<Rat>& b) {
    while (!a.empty() && a.back() == 0) a.pop_back();
    std::vector<Rat> bb = b;
    while (!bb.empty() && bb.back() == 0) bb.pop_back();
    if (bb.empty()) return a;
    while (a.size() >= bb.size()) {
        Rat f = a.back() / bb.back();
        size_t off = a.size() - bb.size();
        for (size_t i = 0; i < bb.size(); ++i) a[off + i] -= f * bb[i];
        while (!a.empty() && a.back() == 0) a.pop_back();
        if (a.empty()) break;
    }
    return a;
}

inline Rat poly_eval(const std::vector<Rat>& p, const Rat& x) {
    Rat r = 0;
    for (size_t i = p.size(); i-- > 0;) r = r * x + p[i];
    return r;
}

// Sturm chain root count in (lo, hi]
struct SturmChain {
    std::vector<std::vector<Rat>> seq;
    explicit SturmChain(const std::vector<Rat>& p) {
        std::vector<Rat> a = p;
        while (!a.empty() && a.back() == 0) a.pop_back();
        if (a.empty()) return;
        seq.push_back(a);
        std::vector<Rat> b = poly_derivative(a);
        while (!b.empty() && b.back() == 0) b.pop_back();
        while (!b.empty()) {
            seq.push_back(b);
            std::vector<Rat> r = poly_mod(seq[seq.size() - 2], b);
            for (auto& c : r) c = -c;
            b = r;
        }
    }
    int sign_changes(const Rat& x) const {
        int changes = 0, last = 0;
        for (const auto& p : seq) {
            Rat v = poly_eval(p, x);
            int s = v == 0 ? 0 : (v > 0 ? 1 : -1);
            if (s != 0) {
                if (last != 0 && s != last) ++changes;
                last = s;
            }
        }
        return changes;
    }
    int count_roots(const Rat& lo, const Rat& hi) const { // roots in (lo, hi]
        if (seq.empty()) return 0;
        return sign_changes(lo) - sign_changes(hi);
    }
};

inline std::vector<Rat> to_rat_poly(const std::vector<Int>& p) {
    std::vector<Rat> out;
    out.reserve(p.size());
    for (const auto& c : p) out.push_back(Rat(c));
    return out;
}

inline std::vector<Rat> squarefree_part(const std::vector<Rat>& p) {
    // p / gcd(p, p')
    auto gcd_poly = [](std::vector<Rat> a, std::vector<Rat> b) {
        while (!b.empty()) {
            std::vector<Rat> r = poly_mod(a, b);
            a = std::move(b);
            b = std::move(r);
        }
        return a;
    };
    std::vector<Rat> g = gcd_poly(p, poly_derivative(p));
    while (!g.empty() && g.back() == 0) g.pop_back();
    if (g.size() <= 1) return p;
    // exact division p / g
    std::vector<Rat> a = p, q;
    while (!a.empty() && a.back() == 0) a.pop_back();
    q.assign(a.size() - g.size() + 1, Rat(0));
    while (a.size() >= g.size()) {
        Rat f = a.back() / g.back();
        q[a.size() - g.size()] = f;
        size_t off = a.size() - g.size();
        for (size_t i = 0; i < g.size(); ++i) a[off + i] -= f * g[i];
        while (!a.empty() && a.back() == 0) a.pop_back();
        if (a.empty()) break;
    }
    return q;
}

// Compare the Perron roots (largest real roots) of two irreducible
// nonnegative integer matrices, exactly.  Returns -1, 0, +1.
inline int compare_perron_roots(const std::vector<std::vector<Int>>& A,
                                const std::vector<std::vector<Int>>& B) {
    auto upper = [](const std::vector<std::vector<Int>>& M) {
        Int u = 1;
        for (const auto& row : M) {
            Int s = 0;
            for (const auto& x : row) s += x;
            if (s > u) u = s;
        }
        return Rat(u + 1);
    };
    std::vector<Rat> pa = to_rat_poly(int_charpoly(A));
    std::vector<Rat> pb = to_rat_poly(int_charpoly(B));
    SturmChain sa(pa), sb(pb);
    // gcd of the two polynomials, squarefree: common roots certificate
    auto gcd_poly = [](std::vector<Rat> a, std::vector<Rat> b) {
        while (!b.empty()) {
            std::vector<Rat> r = poly_mod(a, b);
            a = std::move(b);
            b = std::move(r);
        }
        while (!a.empty() && a.back() == 0) a.pop_back();
        return a;
    };
    std::vector<Rat> g = gcd_poly(pa, pb);
    std::optional<SturmChain> sg;
    if (g.size() > 1) sg.emplace(squarefree_part(g));
    Rat lo_a(0), hi_a = upper(A), lo_b(0), hi_b = upper(B);
    for (int iter = 0; iter < 512; ++iter) {
        // shrink each bracket to isolate the largest root
        auto shrink = [](const SturmChain& s, Rat& lo, Rat& hi) {
            Rat mid = (lo + hi) / 2;
            if (s.count_roots(mid, hi) > 0)
                lo = mid;
            else
                hi = mid;
        };
        shrink(sa, lo_a, hi_a);
        shrink(sb, lo_b, hi_b);
        if (lo_a >= hi_b) return 1;  // rho_A > rho_B
        if (lo_b >= hi_a) return -1;
        if (sg) {
            Rat lo = std::max(lo_a, lo_b), hi = std::min(hi_a, hi_b);
            if (lo < hi && sa.count_roots(lo, hi_a) == 1 && sa.count_roots(hi, hi_a) == 0 &&
                sb.count_roots(lo, hi_b) == 1 && sb.count_roots(hi, hi_b) == 0 &&
                sg->count_roots(lo, hi) > 0)
                return 0; // the shared root is the largest root of both
        }
    }
    throw Error(err::Internal, "Perron root comparison did not converge");
}

} // namespace detail

// Valuation of the Perron eigenvector of a positive family whose entry
// valuations and leading coefficients are given by `a`.  The coefficient
// data resolves dominance between critical classes (strictly larger Perron
// root of the zero-weight block wins); classes whose roots tie exactly fall
// back to the next-order hierarchy.  With `coeffs_valid == false` all radii
// are treated as tied.
inline TropEigen perron_eigenvector(const TropCoefMatrix& a, const Rat& lambda,
                                    bool coeffs_valid) {
    const int n = a.size();
    TropMatrix shifted(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!a.at(i, j).v.is_inf())
                shifted.at(i, j) = TropScalar(a.at(i, j).v.value() - lambda);
    TropMatrix star = kleene_star(shifted);
    TropMatrix critical_arcs(n);
    std::vector<char> critical_node(n, 0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            if (shifted.at(r, c).is_inf() || star.at(c, r).is_inf()) continue;
            if (shifted.at(r, c).value() + star.at(c, r).value() == 0) {
                critical_arcs.at(r, c) = TropScalar::one();
                critical_node[r] = critical_node[c] = 1;
            }
        }
    int comp_count = 0;
    std::vector<int> comp = detail::scc_ids(critical_arcs, comp_count);
    std::vector<std::vector<int>> classes; // node lists
    {
        std::vector<int> idx(comp_count, -1);
        for (int v = 0; v < n; ++v) {
            if (!critical_node[v]) continue;
            if (idx[comp[v]] == -1) {
                idx[comp[v]] = static_cast<int>(classes.size());
                classes.emplace_back();
            }
            classes[idx[comp[v]]].push_back(v);
        }
    }
    if (classes.empty())
        throw Error(err::EigenvectorUndefined, "no critical cycle at the given eigenvalue");
    TropEigen out;
    const int k = static_cast<int>(classes.size());
    std::vector<int> dominant;
    if (k == 1) {
        dominant = {0};
    } else {
        out.multiple_critical_classes = true;
        // class radii: Perron roots of the critical blocks' coefficient
        // matrices (zero-weight arcs within the class)
        std::vector<std::vector<std::vector<Int>>> blocks;
        if (coeffs_valid) {
            for (const auto& cls : classes) {
                const int sz = static_cast<int>(cls.size());
                std::vector<std::vector<Int>> blk(sz, std::vector<Int>(sz, Int(0)));
                for (int r = 0; r < sz; ++r)
                    for (int c = 0; c < sz; ++c) {
                        if (critical_arcs.at(cls[r], cls[c]).is_inf()) continue;
                        blk[r][c] = a.at(cls[r], cls[c]).c;
                    }
                blocks.push_back(std::move(blk));
            }
            // dominant set by pairwise exact Perron-root comparison
            dominant = {0};
            for (int c = 1; c < k; ++c) {
                int cmp = detail::compare_perron_roots(blocks[c], blocks[dominant[0]]);
                if (cmp > 0)
                    dominant = {c};
                else if (cmp == 0)
                    dominant.push_back(c);
            }
        } else {
            dominant.resize(k);
            for (int c = 0; c < k; ++c) dominant[c] = c;
        }
    }
    std::vector<TropScalar> m(n, TropScalar::infinity());
    if (dominant.size() == 1) {
        int rep = classes[dominant[0]][0];
        for (int i = 0; i < n; ++i) m[i] = star.at(i, rep);
    } else {
        // equal radii: offsets from the next-order class hierarchy
        const int kd = static_cast<int>(dominant.size());
        std::vector<int> reps(kd);
        for (int c = 0; c < kd; ++c) reps[c] = classes[dominant[c]][0];
        TropMatrix cls(kd);
        for (int r = 0; r < kd; ++r)
            for (int c = 0; c < kd; ++c)
                if (r != c) cls.at(r, c) = star.at(reps[r], reps[c]);
        std::vector<TropScalar> offsets(kd, TropScalar::one());
        if (kd > 1) {
            Rat delta = min_cycle_mean(cls);
            TropMatrix sh2(kd);
            for (int r = 0; r < kd; ++r)
                for (int c = 0; c < kd; ++c)
                    if (!cls.at(r, c).is_inf())
                        sh2.at(r, c) = TropScalar(cls.at(r, c).value() - delta);
            bool dummy = false;
            offsets = detail::perron_eigenvector_shifted(sh2, dummy);
        }
        for (int c = 0; c < kd; ++c)
            for (int i = 0; i < n; ++i)
                m[i] = t_add(m[i], t_mul(offsets[c], star.at(i, reps[c])));
    }
    if (m[0].is_inf())
        throw Error(err::EigenvectorUndefined, "eigenvector not normalizable at index 1");
    const Rat base = m[0].value();
    out.vec.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (m[i].is_inf())
            throw Error(err::EigenvectorUndefined,
                        "critical columns do not span a finite eigenvector");
        out.vec.push_back(m[i].value() - base);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tropical polynomials

// Bivariate: finite support in Z^2, rational coefficients; absent = +inf.
class TropPoly2 {
public:
    using Key = std::pair<long long, long long>; // (i, j) = (X-degree, Y-degree)

    void set(long long i, long long j, Rat c) { c_[{i, j}] = std::move(c); }
    // keep the minimum if the point is already present
    void absorb(long long i, long long j, const Rat& c) {
        auto [it, fresh] = c_.try_emplace({i, j}, c);
        if (!fresh && c < it->second) it->second = c;
    }
    const std::map<Key, Rat>& support() const { return c_; }
    bool empty() const { return c_.empty(); }
    std::optional<Rat> coeff(long long i, long long j) const {
        auto it = c_.find({i, j});
        if (it == c_.end()) return std::nullopt;
        return it->second;
    }
    // min over support of c(i,j) + i*X + j*Y
    Rat eval(const Rat& X, const Rat& Y) const {
        std::optional<Rat> best;
        for (const auto& [k, c] : c_) {
            Rat v = c + Rat(k.first) * X + Rat(k.second) * Y;
            if (!best || v < *best) best = v;
        }
        if (!best) throw Error(err::Internal, "eval of empty tropical polynomial");
        return *best;
    }
    bool operator==(const TropPoly2& o) const { return c_ == o.c_; }

    // canonical "i j c" lines, sorted lexicographically
    std::string serialize() const {
        std::ostringstream os;
        for (const auto& [k, c] : c_)
            os << k.first << " " << k.second << " " << rat_str(c) << "\n";
        return os.str();
    }
    static TropPoly2 deserialize(const std::string& text) {
        TropPoly2 p;
        std::istringstream is(text);
        long long i, j;
        std::string c;
        while (is >> i >> j >> c) p.set(i, j, parse_rat(c));
        return p;
    }

private:
    std::map<Key, Rat> c_;
};

// Univariate tropical polynomial: X |-> min_i (c_i + i*X).
using TropPoly1 = std::map<long long, Rat>;

// Substitute Y = A: coefficient of X^i becomes min_j (c(i,j) + j*A).
inline TropPoly1 restrict_y(const TropPoly2& p, const Rat& A) {
    if (p.empty()) throw Error(err::Internal, "restrict_y of empty polynomial");
    TropPoly1 out;
    for (const auto& [k, c] : p.support()) {
        Rat v = c + Rat(k.second) * A;
        auto [it, fresh] = out.try_emplace(k.first, v);
        if (!fresh && v < it->second) it->second = v;
    }
    return out;
}

struct TropRoot {
    Rat root;
    long long mult;
};

// Breakpoints of the piecewise-linear minimum, via the lower Newton hull of
// the points (i, c_i).  Multiplicity = slope drop; sum of multiplicities
// equals the degree span.  Single-term polynomials have no roots.
inline std::vector<TropRoot> trop_roots(const TropPoly1& p) {
    std::vector<TropRoot> roots;
    if (p.size() < 2) return roots;
    // lower hull in coefficient direction, walking i ascending
    std::vector<std::pair<long long, Rat>> pts(p.begin(), p.end());
    std::vector<std::pair<long long, Rat>> hull;
    for (const auto& q : pts) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull[hull.size() - 1];
            // keep b only if it is strictly below segment a--q
            Rat lhs = (b.second - a.second) * Rat(q.first - a.first);
            Rat rhs = (q.second - a.second) * Rat(b.first - a.first);
            if (lhs < rhs) break;
            hull.pop_back();
        }
        hull.push_back(q);
    }
    for (size_t e = 0; e + 1 < hull.size(); ++e) {
        const auto& a = hull[e];
        const auto& b = hull[e + 1];
        roots.push_back({(a.second - b.second) / Rat(b.first - a.first), b.first - a.first});
    }
    std::sort(roots.begin(), roots.end(),
              [](const TropRoot& x, const TropRoot& y) { return x.root < y.root; });
    return roots;
}

} // namespace tropbbs
