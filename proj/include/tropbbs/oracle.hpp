#pragma once

// Discrete-level engine used as an independent ground-truth generator: the
// Perron solve of the time-evolution factorization, the explicit row sweep,
// the periodic reduction, determinant identities at sampled points, and
// valuation estimation for the ultradiscrete limit.
//
// The Perron pipeline works entirely in the log domain (matrix entries are
// stored as logarithms and sums are log-sum-exp).  Entries of e^(-W/eps)
// underflow any fixed-precision float long before eps reaches useful
// values; their logarithms are tame at every eps, so double precision
// suffices throughout.  The sign bookkeeping is exact: after conjugation by
// P = diag(1,-1,1,...) every matrix in the pipeline is positive.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tropbbs/bbs.hpp"
#include "tropbbs/errors.hpp"

namespace tropbbs {

struct DiscreteState {
    int N = 0;
    int M = 0;
    double eps = 0;
    std::vector<std::vector<double>> logV; // log V[n][m] = -W[n][m]/eps
    double log_alpha = 0;                  // log k1 - A/eps
    double log_beta = 0;                   // log k2 - B/eps
};

inline DiscreteState lift_state(const BBSState& s, double eps, double k1 = 1.0,
                                double k2 = 1.0) {
    validate_state(s);
    if (!(eps > 0) || eps > 1)
        throw Error(err::InvariantViolation, "eps must lie in (0, 1]");
    Conserved c = conserved(s);
    if (c.A == c.B && !(k1 > k2))
        throw Error(err::AequalsB, "A == B requires prefactors with k1 > k2");
    DiscreteState d;
    d.N = s.N;
    d.M = s.M;
    d.eps = eps;
    d.logV.assign(s.N, std::vector<double>(s.M));
    for (int n = 0; n < s.N; ++n)
        for (int m = 0; m < s.M; ++m) d.logV[n][m] = -rat_to_double(s.W[n][m]) / eps;
    d.log_alpha = std::log(k1) - rat_to_double(c.A) / eps;
    d.log_beta = std::log(k2) - rat_to_double(c.B) / eps;
    if (!(d.log_alpha > d.log_beta))
        throw Error(err::LevelTooHigh, "alpha > beta > 0 fails for this state");
    return d;
}

namespace logdom {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double lse(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

using Mat = std::vector<std::vector<double>>; // log magnitudes of a positive matrix

inline Mat matmul(const Mat& a, const Mat& b) {
    const size_t n = a.size();
    Mat r(n, std::vector<double>(n, kNegInf));
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < n; ++k) {
            if (a[i][k] == kNegInf) continue;
            for (size_t j = 0; j < n; ++j)
                if (b[k][j] != kNegInf) r[i][j] = lse(r[i][j], a[i][k] + b[k][j]);
        }
    return r;
}

inline std::vector<double> matvec(const Mat& a, const std::vector<double>& v) {
    const size_t n = a.size();
    std::vector<double> r(n, kNegInf);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (a[i][j] != kNegInf && v[j] != kNegInf) r[i] = lse(r[i], a[i][j] + v[j]);
    return r;
}

} // namespace logdom

struct SolveR {
    std::vector<double> logI;     // log I_{n,m}, all positive by Perron
    double log_kappa_abs = 0;     // log |kappa|
    int kappa_sign = 1;           // (-1)^N
    std::vector<double> log_mu_abs; // |mu_i|; sign of mu_i is (-1)^i (0-based)
    int iterations = 0;
};

// Perron solve for row n0 (0-based): power iteration on the positive matrix
// (-1)^N P X_alpha^{-1} P assembled from the factored form
// (E + S^-1 V)^{-1} S^-1, never by dense inversion.
inline SolveR discrete_solve_R(const DiscreteState& d, int n0 = 0) {
    using namespace logdom;
    const int M = d.M, N = d.N;
    for (const auto& row : d.logV)
        for (double v : row)
            if (!(v <= 0.0) && !(v > 0.0))
                throw Error(err::NonPositiveMatrix, "V entries must be positive finite");

    // K = -P S_alpha^{-1} P, positive with log entries
    Mat K(M, std::vector<double>(M, kNegInf));
    for (int i = 0; i + 1 < M; ++i) K[i + 1][i] = 0.0;
    K[0][M - 1] = -d.log_alpha; // 1/alpha in the corner (the whole matrix when M = 1)

    // per-factor geometric series: sum_j H^j with H = -P S^-1 V P positive
    auto factor = [&](int n) {
        Mat H(M, std::vector<double>(M, kNegInf));
        for (int i = 0; i + 1 < M; ++i) H[i + 1][i] = d.logV[n][i];
        H[0][M - 1] = (M == 1 ? d.logV[n][0] : d.logV[n][M - 1]) - d.log_alpha;
        Mat acc(M, std::vector<double>(M, kNegInf));
        for (int i = 0; i < M; ++i) acc[i][i] = 0.0;
        Mat term = H;
        for (int it = 0; it < 100000; ++it) {
            double top = kNegInf;
            for (int i = 0; i < M; ++i)
                for (int j = 0; j < M; ++j) {
                    if (term[i][j] == kNegInf) continue;
                    if (acc[i][j] == kNegInf) top = 1.0; // new walk, keep going
                    else top = std::max(top, term[i][j] - acc[i][j]);
                }
            for (int i = 0; i < M; ++i)
                for (int j = 0; j < M; ++j)
                    if (term[i][j] != kNegInf) acc[i][j] = lse(acc[i][j], term[i][j]);
            if (it >= 2 * M && top < -45.0) return acc; // tail below double resolution
            term = matmul(term, H);
        }
        throw Error(err::NonConvergence, "geometric series did not converge");
    };

    Mat pm;
    bool first = true;
    for (int k = 0; k < N; ++k) {
        Mat g = matmul(factor((n0 + k) % N), K);
        pm = first ? g : matmul(pm, g);
        first = false;
    }

    // Power iteration, shifted by the running Perron estimate.  The shift
    // adds a positive diagonal, which turns complex subdominant eigenvalues
    // (cyclic critical classes) into strictly smaller real ones; without it
    // the iterate rotates forever on e.g. uniform states.  Real ties (several
    // critical classes of equal strength) still stall and are reported as
    // NonConvergence, which is the honest outcome for ambiguous states.
    std::vector<double> v(M, 0.0);
    double rho = 0.0, prev_rho = kNegInf, shift = 0.0;
    int it = 0;
    for (; it < 100000; ++it) {
        std::vector<double> w = logdom::matvec(pm, v);
        for (int i = 0; i < M; ++i) w[i] = logdom::lse(w[i], shift + v[i]);
        double mx = kNegInf;
        for (double x : w) mx = std::max(mx, x);
        for (double& x : w) x -= mx;
        // recover the unshifted eigenvalue: e^rho = e^mx - e^shift
        rho = (it == 0) ? mx : mx + std::log1p(-std::exp(shift - mx));
        double delta = 0;
        for (int i = 0; i < M; ++i) delta = std::max(delta, std::fabs(w[i] - v[i]));
        v = std::move(w);
        if (it > 0 && std::fabs(rho - prev_rho) < 1e-13 && delta < 1e-13) break;
        prev_rho = rho;
        shift = rho + 1.0986122886681098; // 3x the Perron estimate: bounds the
                                          // shifted ratio away from 1 for every
                                          // root-of-unity rotor, including -1
    }
    if (it >= 100000)
        throw Error(err::NonConvergence, "power iteration hit the iteration cap");

    SolveR out;
    out.iterations = it + 1;
    out.log_mu_abs = v;
    out.log_kappa_abs = -rho;
    out.kappa_sign = (N % 2 == 0) ? 1 : -1;
    out.logI.resize(M);
    for (int m = 0; m + 1 < M; ++m) out.logI[m] = v[m + 1] - v[m];
    out.logI[M - 1] = d.log_alpha + v[0] - v[M - 1];
    return out;
}

// Explicit finite sum of the row formula (the denominator has M terms),
// evaluated in the log domain exactly as written.
inline std::vector<double> discrete_row_sweep(const std::vector<double>& logI_next,
                                              const std::vector<double>& logV_row,
                                              double log_alpha, double log_beta) {
    using namespace logdom;
    const int M = static_cast<int>(logV_row.size());
    if (static_cast<int>(logI_next.size()) != M)
        throw Error(err::SizeMismatch, "row length mismatch");
    if (!(log_alpha > log_beta))
        throw Error(err::NonPositiveMatrix, "requires alpha > beta");
    double log_ratio = std::log1p(-std::exp(log_beta - log_alpha)); // log(1 - beta/alpha)
    std::vector<double> out(M);
    for (int m = 0; m < M; ++m) {
        double logD = kNegInf, acc = 0.0;
        for (int k = 1; k <= M; ++k) {
            // term k: prod_{l=0}^{k-1} V[m-l] / prod_{l=1}^{k} I_next[m-l]
            int lv = ((m - (k - 1)) % M + M) % M;
            int li = ((m - k) % M + M) % M;
            acc += logV_row[lv] - logI_next[li];
            logD = lse(logD, acc);
        }
        out[m] = logV_row[m] + std::log1p(std::exp(log_ratio - logD));
    }
    return out;
}

// - eps log f extrapolated linearly in eps from the two smallest samples.
inline double ud_estimate_log(std::vector<std::pair<double, double>> eps_logf) {
    if (eps_logf.size() < 2)
        throw Error(err::InvariantViolation, "need at least two eps samples");
    std::sort(eps_logf.begin(), eps_logf.end());
    double e1 = eps_logf[1].first, e2 = eps_logf[0].first; // e2 < e1
    double v1 = -e1 * eps_logf[1].second, v2 = -e2 * eps_logf[0].second;
    return (e1 * v2 - e2 * v1) / (e1 - e2);
}

inline double ud_estimate(const std::vector<std::pair<double, double>>& eps_f) {
    std::vector<std::pair<double, double>> logs;
    for (auto [e, f] : eps_f) {
        if (!(f > 0)) throw Error(err::NonPositiveSample, "samples must be positive");
        logs.push_back({e, std::log(f)});
    }
    return ud_estimate_log(std::move(logs));
}

// ---------------------------------------------------------------------------
// Linear-domain structures for the determinant identities (moderate states)

namespace detail {

using DMat = std::vector<std::vector<double>>;
using YPolyMat = std::vector<DMat>; // coefficient matrices of y^0, y^1, ...

inline DMat dmat(int n) { return DMat(n, std::vector<double>(n, 0.0)); }

inline YPolyMat ypoly_mul(const YPolyMat& a, const YPolyMat& b, int n) {
    YPolyMat r(a.size() + b.size() - 1, dmat(n));
    for (size_t p = 0; p < a.size(); ++p)
        for (size_t q = 0; q < b.size(); ++q)
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) {
                    if (a[p][i][k] == 0) continue;
                    for (int j = 0; j < n; ++j)
                        r[p + q][i][j] += a[p][i][k] * b[q][k][j];
                }
    while (r.size() > 1) {
        bool zero = true;
        for (const auto& row : r.back())
            for (double x : row)
                if (x != 0) zero = false;
        if (!zero) break;
        r.pop_back();
    }
    return r;
}

inline double det_lu(DMat a) {
    const int n = static_cast<int>(a.size());
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        if (a[piv][c] == 0) return 0.0;
        if (piv != c) {
            std::swap(a[piv], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (int r = c + 1; r < n; ++r) {
            double f = a[r][c] / a[c][c];
            for (int k = c; k < n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    return det;
}

} // namespace detail

// X_{n0}(y) = L_{n0+N-1} ... L_{n0} as a y-polynomial with double matrices.
inline detail::YPolyMat transfer_matrix_numeric(const DiscreteState& d, int n0) {
    using namespace detail;
    const int M = d.M;
    auto lax = [&](int n) {
        YPolyMat L(2, dmat(M));
        for (int m = 0; m < M; ++m) L[0][m][m] = std::exp(d.logV[n % d.N][m]);
        for (int i = 0; i + 1 < M; ++i) L[0][i][i + 1] = 1.0;
        L[1][M - 1][0] = 1.0;
        return L;
    };
    YPolyMat x = lax(n0 + d.N - 1);
    for (int k = d.N - 2; k >= 0; --k) x = ypoly_mul(x, lax(n0 + k), M);
    return x;
}

// z-table of the periodic reduction: z(i, i+k) for 1 <= i <= M, 0 <= k < N,
// read off by matching y-powers of the transfer matrix.
struct PeriodicReduction {
    int N = 0, M = 0;
    std::vector<std::vector<double>> z; // z[i][k] = z_{i+1, i+1+k}, 0-based i
};

inline PeriodicReduction periodic_reduction(const detail::YPolyMat& x, int N, int M) {
    PeriodicReduction pr;
    pr.N = N;
    pr.M = M;
    pr.z.assign(M, std::vector<double>(N, 0.0));
    for (int i = 0; i < M; ++i)
        for (int k = 0; k < N; ++k) {
            int j = i + k; // 0-based column in the periodic extension
            int col = j % M;
            int ypow = (j - col) / M;
            if (ypow < static_cast<int>(x.size())) pr.z[i][k] = x[ypow][i][col];
        }
    return pr;
}

// Entrywise reconstruction error of X from the z-table plus the S^N part.
inline double reconstruction_error(const detail::YPolyMat& x, const PeriodicReduction& pr) {
    const int M = pr.M, N = pr.N;
    double err = 0;
    for (int i = 0; i < M; ++i)
        for (int c = 0; c < M; ++c)
            for (size_t p = 0; p < x.size(); ++p) {
                double expect = 0;
                long long j = c + static_cast<long long>(p) * M;
                long long off = j - i;
                if (off >= 0 && off < N) expect += pr.z[i][static_cast<int>(off)];
                if (off == N) expect += 1.0;
                double got = x[p][i][c];
                double scale = std::max({std::fabs(expect), std::fabs(got), 1e-300});
                err = std::max(err, std::fabs(expect - got) / scale);
            }
    return err;
}

// U_m, H_n, M_n as numeric N x N matrices at a given x.
inline detail::DMat u_matrix(const PeriodicReduction& pr, int m, double xval) {
    auto u = detail::dmat(pr.N);
    for (int i = 0; i + 1 < pr.N; ++i) u[i][i + 1] = 1.0;
    // bottom row: (x - z(m,m)), then -z(m, m+k)
    for (int k = 0; k < pr.N; ++k) {
        int i = (m % pr.M + pr.M) % pr.M;
        double zv = pr.z[i][k];
        u[pr.N - 1][k] = (k == 0 ? xval - zv : -zv);
    }
    return u;
}

inline detail::DMat space_step_matrix(const DiscreteState& d, const PeriodicReduction& pr,
                                      int n, double xval) {
    auto h = u_matrix(pr, 0, xval);
    for (int i = 0; i < pr.N; ++i) h[i][i] += std::exp(d.logV[n % d.N][i % d.M]);
    return h;
}

inline detail::DMat time_step_matrix(const std::vector<double>& logI,
                                     const PeriodicReduction& pr, double xval) {
    auto t = u_matrix(pr, 0, xval);
    for (int i = 0; i < pr.N; ++i) t[i][i] += std::exp(logI[i % pr.M]);
    return t;
}

// ---------------------------------------------------------------------------
// Determinant identities at random sample points

struct DetReport {
    struct Item {
        std::string name;
        double max_rel_err = 0;
        bool pass = true;
    };
    std::vector<Item> items;
    bool all_pass = true;
    double tolerance = 1e-9;
};

inline DetReport det_identities_check(const BBSState& s, double eps, int samples,
                                      std::uint64_t seed, double k1 = 1.0, double k2 = 1.0) {
    using namespace detail;
    Conserved cons = conserved(s);
    if (cons.A == cons.B && k1 == 1.0 && k2 == 1.0) k1 = 2.0;
    DiscreteState d = lift_state(s, eps, k1, k2);
    const int M = d.M, N = d.N;
    double alpha = std::exp(d.log_alpha), beta = std::exp(d.log_beta);
    double sgnM = (M % 2 == 0) ? 1.0 : -1.0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(0.5, 2.0);

    DetReport rep;
    auto item = [&](const std::string& name) -> DetReport::Item& {
        rep.items.push_back({name, 0.0, true});
        return rep.items.back();
    };
    auto update = [&](DetReport::Item& it, double got, double expect) {
        double scale = std::max({std::fabs(got), std::fabs(expect), 1e-300});
        it.max_rel_err = std::max(it.max_rel_err, std::fabs(got - expect) / scale);
    };

    // R, L, S determinants (M x M, polynomial in y)
    SolveR sr = discrete_solve_R(d, 0);
    auto& it_r = item("det R = alpha - (-1)^M y");
    auto& it_l = item("det L = beta - (-1)^M y");
    auto& it_s = item("det S = (-1)^(M+1) y");
    for (int t = 0; t < samples; ++t) {
        double y = coord(rng);
        DMat r = dmat(M), l = dmat(M), smat = dmat(M);
        for (int i = 0; i < M; ++i) {
            r[i][i] += std::exp(sr.logI[i]);
            l[i][i] += std::exp(d.logV[0][i]);
        }
        for (int i = 0; i + 1 < M; ++i) r[i][i + 1] = l[i][i + 1] = smat[i][i + 1] = 1.0;
        r[M - 1][0] += y;
        l[M - 1][0] += y;
        smat[M - 1][0] += y;
        update(it_r, det_lu(r), alpha - sgnM * y);
        update(it_l, det_lu(l), beta - sgnM * y);
        update(it_s, det_lu(smat), -sgnM * y);
    }

    // N x N matrices from the periodic reduction of X_1
    auto x = transfer_matrix_numeric(d, 0);
    PeriodicReduction pr = periodic_reduction(x, N, M);
    auto& it_rec = item("periodic reduction reconstructs X");
    it_rec.max_rel_err = reconstruction_error(x, pr);

    double sgnN1 = (N % 2 == 0) ? -1.0 : 1.0; // (-1)^(N+1)
    auto& it_h = item("det H = (-1)^(N+1) x");
    auto& it_u = item("det U_m = (-1)^(N+1) (x - prod_n V[n][m])");
    auto& it_m = item("det M = (-1)^(N+1) (x - kappa)");
    double kappa = sr.kappa_sign * std::exp(sr.log_kappa_abs);
    for (int t = 0; t < samples; ++t) {
        double xv = coord(rng);
        update(it_h, det_lu(space_step_matrix(d, pr, 0, xv)), sgnN1 * xv);
        for (int m = 0; m < M; ++m) {
            double gamma = 0;
            for (int n = 0; n < N; ++n) gamma += d.logV[n][m];
            update(it_u, det_lu(u_matrix(pr, m, xv)), sgnN1 * (xv - std::exp(gamma)));
        }
        update(it_m, det_lu(time_step_matrix(sr.logI, pr, xv)), sgnN1 * (xv - kappa));
    }

    for (auto& it : rep.items) {
        it.pass = it.max_rel_err <= rep.tolerance;
        rep.all_pass = rep.all_pass && it.pass;
    }
    return rep;
}

} // namespace tropbbs
