#pragma once

// Periodic 2-dimensional box-ball system: state container, the unique
// Q-determination, time evolution, cyclic shifts, conserved quantities,
// brute-force cycle detection, and the text/ASCII interfaces.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tropbbs/errors.hpp"
#include "tropbbs/rational.hpp"
#include "tropbbs/trop_core.hpp"

namespace tropbbs {

using Grid = std::vector<std::vector<Rat>>; // [n][m], 0-based

// W-grid with period (N, M) plus the level A.  The Q-grid is derived on
// demand, never stored.  Invariant: sum_m W[n][m] is the same B for every n,
// and A <= B.
struct BBSState {
    int N = 0;
    int M = 0;
    Grid W;
    Rat A;

    bool operator==(const BBSState& o) const {
        return N == o.N && M == o.M && A == o.A && W == o.W;
    }
};

struct QGrid {
    Grid Q; // [n][m]
};

struct Conserved {
    Rat A;
    Rat B;
    std::vector<Rat> H; // H[m] = sum_n W[n][m]
};

inline Rat row_sum(const BBSState& s, int n) {
    Rat b = 0;
    for (int m = 0; m < s.M; ++m) b += s.W[n][m];
    return b;
}

// Throws InvariantViolation naming the offending column when the per-n sums
// differ, or LevelTooHigh when A > B.
inline void validate_state(const BBSState& s) {
    if (s.N <= 0 || s.M <= 0)
        throw Error(err::InvariantViolation, "periods must be positive");
    if (static_cast<int>(s.W.size()) != s.N)
        throw Error(err::InvariantViolation, "W has wrong n-extent");
    for (int n = 0; n < s.N; ++n)
        if (static_cast<int>(s.W[n].size()) != s.M)
            throw Error(err::InvariantViolation, "W has wrong m-extent");
    Rat B = row_sum(s, 0);
    for (int n = 1; n < s.N; ++n)
        if (row_sum(s, n) != B)
            throw Error(err::InvariantViolation,
                        "sum_m W[n][m] differs at n=" + std::to_string(n + 1) +
                            " (expected " + rat_str(B) + ", got " + rat_str(row_sum(s, n)) + ")");
    if (s.A > B)
        throw Error(err::LevelTooHigh,
                    "A=" + rat_str(s.A) + " exceeds B=" + rat_str(B));
}

inline Conserved conserved(const BBSState& s) {
    Conserved c;
    c.A = s.A;
    c.B = row_sum(s, 0);
    c.H.assign(s.M, Rat(0));
    for (int m = 0; m < s.M; ++m)
        for (int n = 0; n < s.N; ++n) c.H[m] += s.W[n][m];
    return c;
}

namespace detail {

// One sweep step: given Q at row n+1 and W at row n, produce Q at row n.
// Q[n][m] = W[n][m] + min(0, X[n][m]),
// X[n][m] = max_{k=0..M-1} sum_{l=0..k} (Qnext[m-l-1] - Wrow[m-l])  (cyclic).
inline std::vector<Rat> q_sweep_row(const std::vector<Rat>& w_row,
                                    const std::vector<Rat>& q_next) {
    const int M = static_cast<int>(w_row.size());
    std::vector<Rat> q(M);
    for (int m = 0; m < M; ++m) {
        Rat acc = 0;
        std::optional<Rat> x;
        for (int l = 0; l < M; ++l) {
            int mq = ((m - l - 1) % M + M) % M;
            int mw = ((m - l) % M + M) % M;
            acc += q_next[mq] - w_row[mw];
            if (!x || acc > *x) x = acc;
        }
        Rat minpart = (*x < 0) ? *x : Rat(0);
        q[m] = w_row[m] + minpart;
    }
    return q;
}

} // namespace detail

// Row 1 via the tropical eigenproblem, remaining rows by the explicit sweep,
// then an exact wrap-around re-derivation of row 1 as a consistency gate.
inline QGrid solve_q(const BBSState& s) {
    validate_state(s);
    const int M = s.M;
    const int N = s.N;

    // S_A^{-1}: 0 at (i+1, i), -A at (1, M), +inf elsewhere (1-based);
    // every entry is a single monomial, leading coefficient 1
    TropCoefMatrix s_inv(M);
    if (M == 1) {
        s_inv.at(0, 0) = TropCoef(TropScalar(-s.A), 1);
    } else {
        for (int i = 0; i + 1 < M; ++i) s_inv.at(i + 1, i) = TropCoef(TropScalar::one(), 1);
        s_inv.at(0, M - 1) = TropCoef(TropScalar(-s.A), 1);
    }

    bool coeffs_valid = true;
    std::optional<TropCoefMatrix> acc;
    for (int n = 0; n < N; ++n) {
        TropCoefMatrix c(M);
        for (int r = 0; r < M; ++r)
            for (int col = 0; col < M; ++col)
                if (!s_inv.at(r, col).v.is_inf())
                    c.at(r, col) =
                        TropCoef(TropScalar(s_inv.at(r, col).v.value() + s.W[n][col]), 1);
        // valuation (with walk counts) of (E + S^-1 V_n)^-1 S^-1
        TropCoefMatrix f = tcmat_mul(tcmat_star(c, coeffs_valid), s_inv);
        acc = acc ? tcmat_mul(*acc, f) : f;
    }
    TropMatrix vals = acc->valuations();
    Rat lambda = min_cycle_mean(vals); // equals -G
    TropEigen eig = perron_eigenvector(*acc, lambda, coeffs_valid);

    Grid q(N, std::vector<Rat>(M));
    for (int i = 0; i + 1 < M; ++i) q[0][i] = eig.vec[i + 1] - eig.vec[i];
    q[0][M - 1] = (eig.vec[0] + s.A) - eig.vec[M - 1];

    for (int n = N - 1; n >= 1; --n)
        q[n] = detail::q_sweep_row(s.W[n], q[(n + 1) % N]);

    std::vector<Rat> row1 = detail::q_sweep_row(s.W[0], q[N > 1 ? 1 : 0]);
    if (row1 != q[0])
        throw Error(err::InconsistentFixedPoint,
                    "wrap-around re-derivation of row 1 disagrees with the eigenvector row");
    for (int n = 0; n < N; ++n) {
        Rat sum = 0;
        for (int m = 0; m < M; ++m) sum += q[n][m];
        if (sum != s.A)
            throw Error(err::InconsistentFixedPoint,
                        "sum_m Q[n][m] != A at n=" + std::to_string(n + 1));
    }
    return QGrid{std::move(q)};
}

// W'[n][m] = Q[n+1][m] + W[n][m] - Q[n][m]; A and B are preserved.
inline BBSState evolve(const BBSState& s) {
    QGrid qg = solve_q(s);
    BBSState out = s;
    for (int n = 0; n < s.N; ++n)
        for (int m = 0; m < s.M; ++m)
            out.W[n][m] = qg.Q[(n + 1) % s.N][m] + s.W[n][m] - qg.Q[n][m];
    return out;
}

inline BBSState shift_n(const BBSState& s) {
    BBSState out = s;
    for (int n = 0; n < s.N; ++n) out.W[n] = s.W[(n + 1) % s.N];
    return out;
}

inline BBSState shift_m(const BBSState& s) {
    BBSState out = s;
    for (int n = 0; n < s.N; ++n)
        for (int m = 0; m < s.M; ++m) out.W[n][m] = s.W[n][(m + 1) % s.M];
    return out;
}

// Least F <= t_max with evolve^F(s) = s (exact equality of W grids), or
// nullopt when no repetition occurs within t_max.
inline std::optional<long> find_period(const BBSState& s, long t_max) {
    if (t_max < 1) throw Error(err::InvariantViolation, "t_max must be >= 1");
    BBSState cur = s;
    for (long t = 1; t <= t_max; ++t) {
        cur = evolve(cur);
        if (cur.W == s.W) return t;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Text interfaces

// Machine format: line 1 "N M"; line 2 "A <rational>"; then rows m = 1..M,
// each N whitespace-separated rationals W[1][m] ... W[N][m].
inline BBSState parse_state(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    auto next_line = [&](int lineno) -> std::string {
        while (std::getline(is, line)) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
        }
        throw Error(err::ParseError, "unexpected end of input at line " + std::to_string(lineno));
    };
    BBSState s;
    {
        std::istringstream hd(next_line(1));
        if (!(hd >> s.N >> s.M) || s.N <= 0 || s.M <= 0)
            throw Error(err::ParseError, "line 1: expected 'N M' with positive integers");
    }
    {
        std::istringstream hd(next_line(2));
        std::string tag, val;
        if (!(hd >> tag >> val) || tag != "A")
            throw Error(err::ParseError, "line 2: expected 'A <rational>'");
        try {
            s.A = parse_rat(val);
        } catch (const std::invalid_argument& e) {
            throw Error(err::ParseError, std::string("line 2: ") + e.what());
        }
    }
    s.W.assign(s.N, std::vector<Rat>(s.M));
    for (int m = 0; m < s.M; ++m) {
        int lineno = 3 + m;
        std::istringstream row(next_line(lineno));
        for (int n = 0; n < s.N; ++n) {
            std::string tok;
            if (!(row >> tok))
                throw Error(err::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                                 std::to_string(s.N) + " values");
            try {
                s.W[n][m] = parse_rat(tok);
            } catch (const std::invalid_argument& e) {
                throw Error(err::ParseError, "line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        std::string extra;
        if (row >> extra)
            throw Error(err::ParseError, "line " + std::to_string(lineno) + ": trailing token '" + extra + "'");
    }
    validate_state(s);
    return s;
}

inline std::string render_cell(const Rat& v) {
    if (v == 0) return ".";
    if (is_integer(v) && v >= 1 && v <= 9) return numerator(v).str();
    return "[" + rat_str(v) + "]";
}

// Paper layout: rows m = M..1, each "<Q_{1,m}>|<W_{N,m} ... W_{1,m}>",
// zeros rendered as '.'.
inline std::string render_state(const BBSState& s) {
    QGrid qg = solve_q(s);
    std::ostringstream os;
    for (int m = s.M - 1; m >= 0; --m) {
        os << render_cell(qg.Q[0][m]) << "|";
        for (int n = s.N - 1; n >= 0; --n) os << render_cell(s.W[n][m]);
        os << "\n";
    }
    return os.str();
}

inline std::string format_state(const BBSState& s) {
    std::ostringstream os;
    os << s.N << " " << s.M << "\n";
    os << "A " << rat_str(s.A) << "\n";
    for (int m = 0; m < s.M; ++m) {
        for (int n = 0; n < s.N; ++n) os << (n ? " " : "") << rat_str(s.W[n][m]);
        os << "\n";
    }
    return os.str();
}

} // namespace tropbbs
