#pragma once

// Lax matrices of the periodic lattice, their exact characteristic
// polynomial over the formal parameter, and its tropicalization, which is
// the input of the curve construction.

#include <algorithm>
#include <numeric>
#include <vector>

#include "tropbbs/bbs.hpp"
#include "tropbbs/formal_poly.hpp"
#include "tropbbs/trop_core.hpp"

namespace tropbbs {

struct SpectralData {
    FormalPoly charpoly_exact; // Phi(x, y, q), with q-powers scaled integers
    TropPoly2 charpoly_trop;   // c(i,j) = least q-degree / scale
    int N = 0;
    int M = 0;
    long long d = 1;           // gcd(N, M)
    Int scale = 1;             // least common denominator of the W entries
};

namespace detail {

inline int checked_int(const Rat& r, const char* what) {
    if (!is_integer(r))
        throw Error(err::NonIntegerState, std::string("non-integer ") + what + " after scaling");
    Int n = numerator(r);
    if (n > 1000000 || n < -1000000)
        throw Error(err::NonIntegerState, std::string(what) + " out of supported range");
    return static_cast<int>(n);
}

} // namespace detail

// Common denominator used to turn the W grid into integer q-exponents.
inline Int state_scale(const BBSState& s) {
    Int l = 1;
    for (const auto& row : s.W)
        for (const auto& w : row) l = int_lcm(l, denominator(w));
    return l;
}

// L_n = diag(q^{W[n][1]}, ..., q^{W[n][M]}) + S with S the cyclic shift
// carrying y in the corner.  Entries are exact polynomials; rational W
// entries are scaled to integers by `scale`.
inline std::vector<std::vector<std::vector<FormalPoly>>> build_lax(const BBSState& s,
                                                                   Int scale) {
    std::vector<std::vector<std::vector<FormalPoly>>> ls;
    ls.reserve(s.N);
    for (int n = 0; n < s.N; ++n) {
        std::vector<std::vector<FormalPoly>> L(s.M, std::vector<FormalPoly>(s.M));
        for (int m = 0; m < s.M; ++m) {
            Rat scaled = s.W[n][m] * Rat(scale);
            L[m][m] = FormalPoly::monomial(0, 0, detail::checked_int(scaled, "weight"));
        }
        for (int i = 0; i + 1 < s.M; ++i) L[i][i + 1] = L[i][i + 1] + FormalPoly::constant(1);
        L[s.M - 1][0] = L[s.M - 1][0] + FormalPoly::monomial(0, 1, 0);
        ls.push_back(std::move(L));
    }
    return ls;
}

inline std::vector<std::vector<std::vector<FormalPoly>>> build_lax(const BBSState& s) {
    return build_lax(s, state_scale(s));
}

namespace detail {

inline std::vector<std::vector<FormalPoly>> poly_matmul(
    const std::vector<std::vector<FormalPoly>>& a,
    const std::vector<std::vector<FormalPoly>>& b) {
    const int n = static_cast<int>(a.size());
    std::vector<std::vector<FormalPoly>> r(n, std::vector<FormalPoly>(n));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            if (a[i][k].is_zero()) continue;
            for (int j = 0; j < n; ++j) r[i][j] = r[i][j] + a[i][k] * b[k][j];
        }
    return r;
}

// determinant via cofactor expansion memoized over column subsets
inline FormalPoly poly_det(const std::vector<std::vector<FormalPoly>>& a) {
    const int n = static_cast<int>(a.size());
    std::vector<FormalPoly> dp(size_t(1) << n);
    dp[0] = FormalPoly::constant(1);
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        int row = __builtin_popcount(mask) - 1;
        FormalPoly acc;
        int sign = (row % 2 == 0) ? 1 : -1;
        for (int c = 0; c < n; ++c) {
            if (!(mask & (1u << c))) continue;
            if (!a[row][c].is_zero()) {
                FormalPoly term = a[row][c] * dp[mask ^ (1u << c)];
                acc = (sign > 0) ? acc + term : acc - term;
            }
            sign = -sign;
        }
        dp[mask] = std::move(acc);
    }
    return dp[(1u << n) - 1];
}

} // namespace detail

// X_1 = L_N ... L_2 L_1 as an exact polynomial matrix.
inline std::vector<std::vector<FormalPoly>> transfer_matrix(const BBSState& s, Int scale) {
    auto ls = build_lax(s, scale);
    std::vector<std::vector<FormalPoly>> x = ls[s.N - 1];
    for (int n = s.N - 2; n >= 0; --n) x = detail::poly_matmul(x, ls[n]);
    return x;
}

// det(X_1 - xE), exact over the integers in x, y, q.
inline FormalPoly char_poly_exact(const BBSState& s) {
    validate_state(s);
    Int scale = state_scale(s);
    auto x = transfer_matrix(s, scale);
    for (int i = 0; i < s.M; ++i) x[i][i] = x[i][i] - FormalPoly::monomial(1, 0, 0);
    return detail::poly_det(x);
}

// c(i, j) = minimal q-degree among terms x^i y^j, divided back by the
// scaling denominator.  Verifies the no-cancellation guarantee: for each
// (i, j) every stored q-term must carry the same sign.
inline TropPoly2 tropicalize(const FormalPoly& p, const Int& scale = Int(1)) {
    std::map<std::pair<long long, long long>, std::pair<int, int>> best; // (dq, sign)
    for (const auto& [m, c] : p.terms()) {
        int sign = c > 0 ? 1 : -1;
        auto key = std::make_pair<long long, long long>(m.dx, m.dy);
        auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(key, std::make_pair(m.dq, sign));
        } else {
            if (sign != it->second.second)
                throw Error(err::CancellationDetected,
                            "mixed signs within one (x,y) coefficient");
            if (m.dq < it->second.first) it->second.first = m.dq;
        }
    }
    TropPoly2 out;
    for (const auto& [k, v] : best) out.set(k.first, k.second, Rat(v.first) / Rat(scale));
    return out;
}

inline SpectralData spectral_data(const BBSState& s) {
    SpectralData sd;
    sd.N = s.N;
    sd.M = s.M;
    sd.d = std::gcd(static_cast<long long>(s.N), static_cast<long long>(s.M));
    sd.scale = state_scale(s);
    sd.charpoly_exact = char_poly_exact(s);
    sd.charpoly_trop = tropicalize(sd.charpoly_exact, sd.scale);
    return sd;
}

namespace detail {

inline Int binomial(long long n, long long k) {
    Int r = 1;
    for (long long i = 0; i < k; ++i) r = r * Int(n - i) / Int(i + 1);
    return r;
}

} // namespace detail

// Newton-polygon shape check: support inside the triangle N*i + M*j <= N*M,
// the boundary carried by exactly the d+1 lattice points from (M,0) to
// (0,N) in steps of (-M/d, N/d), each with valuation 0 and leading integer
// coefficient (-1)^(M-p) * binom(d, p).
inline bool newton_check(const SpectralData& sd, std::string* diagnostic = nullptr) {
    std::ostringstream diag;
    bool ok = true;
    const long long N = sd.N, M = sd.M, d = sd.d;
    const long long N1 = N / d, M1 = M / d;
    for (const auto& [k, c] : sd.charpoly_trop.support()) {
        if (k.first < 0 || k.second < 0 || N * k.first + M * k.second > N * M) {
            ok = false;
            diag << "support point (" << k.first << "," << k.second << ") outside triangle\n";
        }
    }
    for (long long p = 0; p <= d; ++p) {
        long long a = M - p * M1, b = p * N1;
        auto c = sd.charpoly_trop.coeff(a, b);
        if (!c || *c != 0) {
            ok = false;
            diag << "boundary point (" << a << "," << b << ") missing or valuation != 0\n";
            continue;
        }
        Int expect = detail::binomial(d, p);
        if ((M - p) % 2 != 0) expect = -expect;
        Int got = sd.charpoly_exact.coeff(static_cast<int>(a), static_cast<int>(b), 0);
        if (got != expect) {
            ok = false;
            diag << "boundary coefficient at (" << a << "," << b << ") is " << got.str()
                 << ", expected " << expect.str() << "\n";
        }
    }
    // no other support on the boundary line
    for (const auto& [k, c] : sd.charpoly_trop.support()) {
        if (N * k.first + M * k.second != N * M) continue;
        if ((M - k.first) % M1 != 0) {
            ok = false;
            diag << "unexpected boundary support at (" << k.first << "," << k.second << ")\n";
        }
    }
    if (diagnostic) *diagnostic = diag.str();
    return ok;
}

// Min-plus permanent-style lower bound of the tropical coefficients:
// bidegrees tracked through the permutation expansion, signs ignored.
// Cheap and equal to the exact valuations whenever no cancellation can
// occur at the minimal level.
inline TropPoly2 tropical_charpoly_lower_bound(const BBSState& s) {
    Int scale = state_scale(s);
    auto x = transfer_matrix(s, scale);
    const int M = s.M;
    // tropicalize each entry of (X - xE) as a map (dx, dy) -> min dq
    using Key = std::pair<long long, long long>;
    std::vector<std::vector<std::map<Key, Rat>>> e(M, std::vector<std::map<Key, Rat>>(M));
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            for (const auto& [m, c] : x[i][j].terms()) {
                Key k{m.dx, m.dy};
                auto [it, fresh] = e[i][j].try_emplace(k, Rat(m.dq));
                if (!fresh && Rat(m.dq) < it->second) it->second = Rat(m.dq);
            }
            if (i == j) {
                Key k{1, 0};
                e[i][j].try_emplace(k, Rat(0));
            }
        }
    // permanent over permutations, tropical product of the entries
    std::vector<int> perm(M);
    std::iota(perm.begin(), perm.end(), 0);
    TropPoly2 out;
    do {
        std::map<Key, Rat> acc{{{0, 0}, Rat(0)}};
        for (int i = 0; i < M && !acc.empty(); ++i) {
            std::map<Key, Rat> nxt;
            for (const auto& [k1, v1] : acc)
                for (const auto& [k2, v2] : e[i][perm[i]]) {
                    Key k{k1.first + k2.first, k1.second + k2.second};
                    Rat v = v1 + v2;
                    auto [it, fresh] = nxt.try_emplace(k, v);
                    if (!fresh && v < it->second) it->second = v;
                }
            acc = std::move(nxt);
        }
        for (const auto& [k, v] : acc) out.absorb(k.first, k.second, v / Rat(scale));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

} // namespace tropbbs
