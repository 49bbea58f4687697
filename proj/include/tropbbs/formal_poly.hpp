#pragma once

// Exact polynomials in x, y and the formal parameter q with big-integer
// coefficients, used by the spectral construction and the discrete oracle.

#include <array>
#include <map>
#include <sstream>
#include <string>

#include "tropbbs/errors.hpp"
#include "tropbbs/rational.hpp"

namespace tropbbs {

struct Mono {
    int dx = 0;
    int dy = 0;
    int dq = 0;
    auto operator<=>(const Mono&) const = default;
};

// Canonical form: no zero coefficients stored.
class FormalPoly {
public:
    FormalPoly() = default;

    static FormalPoly constant(Int c) {
        FormalPoly p;
        p.add_term({0, 0, 0}, std::move(c));
        return p;
    }
    static FormalPoly monomial(int dx, int dy, int dq, Int c = 1) {
        FormalPoly p;
        p.add_term({dx, dy, dq}, std::move(c));
        return p;
    }

    void add_term(const Mono& m, Int c) {
        if (c == 0) return;
        auto [it, fresh] = t_.try_emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) t_.erase(it);
        }
    }

    bool is_zero() const { return t_.empty(); }
    const std::map<Mono, Int>& terms() const { return t_; }

    FormalPoly operator+(const FormalPoly& o) const {
        FormalPoly r = *this;
        for (const auto& [m, c] : o.t_) r.add_term(m, c);
        return r;
    }
    FormalPoly operator-(const FormalPoly& o) const {
        FormalPoly r = *this;
        for (const auto& [m, c] : o.t_) r.add_term(m, -c);
        return r;
    }
    FormalPoly operator-() const {
        FormalPoly r;
        for (const auto& [m, c] : t_) r.t_.emplace(m, -c);
        return r;
    }
    FormalPoly operator*(const FormalPoly& o) const {
        FormalPoly r;
        for (const auto& [m, c] : t_)
            for (const auto& [m2, c2] : o.t_)
                r.add_term({m.dx + m2.dx, m.dy + m2.dy, m.dq + m2.dq}, c * c2);
        return r;
    }
    bool operator==(const FormalPoly& o) const { return t_ == o.t_; }

    int x_degree() const {
        int d = 0;
        for (const auto& [m, c] : t_) d = std::max(d, m.dx);
        return d;
    }
    int y_degree() const {
        int d = 0;
        for (const auto& [m, c] : t_) d = std::max(d, m.dy);
        return d;
    }
    Int coeff(int dx, int dy, int dq) const {
        auto it = t_.find({dx, dy, dq});
        return it == t_.end() ? Int(0) : it->second;
    }

    // sorted monomial list, one "x^a y^b q^c : coeff" per line
    std::string to_string() const {
        std::ostringstream os;
        for (const auto& [m, c] : t_) {
            os << "x^" << m.dx << " y^" << m.dy << " q^" << m.dq << " : " << c.str() << "\n";
        }
        return os.str();
    }

    double eval_double(double x, double y, double q) const {
        double r = 0;
        for (const auto& [m, c] : t_) {
            double t = static_cast<double>(c);
            for (int i = 0; i < m.dx; ++i) t *= x;
            for (int i = 0; i < m.dy; ++i) t *= y;
            for (int i = 0; i < m.dq; ++i) t *= q;
            r += t;
        }
        return r;
    }

private:
    std::map<Mono, Int> t_;
};

} // namespace tropbbs
