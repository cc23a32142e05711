#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dunkl/permutation.hpp"
#include "dunkl/rational.hpp"

namespace dunkl {

constexpr int kMaxVars = 8;

/// Square-free word in the adjoined radicals r, r1, r2 and w.
enum RadicalBit : uint8_t {
    RAD_R = 1,
    RAD_R1 = 2,
    RAD_R2 = 4,
    RAD_W = 8,
};

/// Monomial in x_1..x_N, one exponent byte per variable (N <= 8).
struct Monomial {
    uint64_t bits = 0;

    int exp(int i) const { return static_cast<int>((bits >> (8 * i)) & 0xffu); }

    void set_exp(int i, int e) {
        if (e < 0 || e > 255) throw std::overflow_error("monomial exponent out of range");
        bits = (bits & ~(uint64_t{0xff} << (8 * i))) | (uint64_t(e) << (8 * i));
    }

    void bump(int i, int delta) { set_exp(i, exp(i) + delta); }

    int total_degree() const {
        uint64_t b = bits;
        int d = 0;
        while (b) {
            d += static_cast<int>(b & 0xffu);
            b >>= 8;
        }
        return d;
    }

    bool divisible_by(const Monomial& o) const {
        for (int i = 0; i < kMaxVars; ++i)
            if (exp(i) < o.exp(i)) return false;
        return true;
    }

    friend Monomial operator*(Monomial a, const Monomial& b) {
        for (int i = 0; i < kMaxVars; ++i)
            if (b.exp(i)) a.bump(i, b.exp(i));
        return a;
    }

    Monomial divide(const Monomial& o) const {
        Monomial q;
        for (int i = 0; i < kMaxVars; ++i) q.set_exp(i, exp(i) - o.exp(i));
        return q;
    }

    friend bool operator==(const Monomial&, const Monomial&) = default;
};

struct TermKey {
    Monomial mono;
    uint8_t rad = 0;

    friend bool operator==(const TermKey&, const TermKey&) = default;
};

/// Canonical term order: graded (total degree first), then lexicographic in
/// x_1-major exponents, then by radical word. Higher terms come first.
struct TermOrder {
    bool operator()(const TermKey& a, const TermKey& b) const {
        int da = a.mono.total_degree(), db = b.mono.total_degree();
        if (da != db) return da > db;
        for (int i = 0; i < kMaxVars; ++i) {
            int ea = a.mono.exp(i), eb = b.mono.exp(i);
            if (ea != eb) return ea > eb;
        }
        return a.rad < b.rad;
    }
};

/// Polynomial in the coordinates and square-free radical words.
struct PolyExt {
    std::map<TermKey, Scalar, TermOrder> terms;

    bool is_zero() const { return terms.empty(); }
    std::size_t size() const { return terms.size(); }

    void add_term(const TermKey& k, const Scalar& s) {
        if (s.is_zero()) return;
        auto [it, inserted] = terms.emplace(k, s);
        if (!inserted) {
            it->second += s;
            if (it->second.is_zero()) terms.erase(it);
        }
    }

    PolyExt& operator+=(const PolyExt& o) {
        for (const auto& [k, s] : o.terms) add_term(k, s);
        return *this;
    }

    PolyExt& operator-=(const PolyExt& o) {
        for (const auto& [k, s] : o.terms) add_term(k, -s);
        return *this;
    }

    PolyExt negated() const {
        PolyExt p;
        for (const auto& [k, s] : terms) p.terms.emplace(k, -s);
        return p;
    }

    PolyExt times(const Scalar& c) const {
        PolyExt p;
        if (c.is_zero()) return p;
        for (const auto& [k, s] : terms) p.terms.emplace(k, s * c);
        return p;
    }

    friend bool operator==(const PolyExt& a, const PolyExt& b) { return a.terms == b.terms; }
};

/// Denominator: product of r^d r1^d1 r2^d2 and root factors (x_i - x_j), i < j.
struct DenomWord {
    uint32_t d_r = 0, d_r1 = 0, d_r2 = 0;
    std::map<std::pair<uint8_t, uint8_t>, uint32_t> roots;

    bool is_trivial() const { return d_r == 0 && d_r1 == 0 && d_r2 == 0 && roots.empty(); }

    friend bool operator==(const DenomWord&, const DenomWord&) = default;
};

/// Element of the coefficient field: PolyExt numerator over a DenomWord.
struct RatCoeff {
    PolyExt num;
    DenomWord den;

    bool is_zero() const { return num.is_zero(); }

    friend bool operator==(const RatCoeff& a, const RatCoeff& b) {
        return a.num == b.num && a.den == b.den;
    }
};

/// Arithmetic context for the coefficient field. Fixes the number of
/// coordinates N and the two-center offset alpha (= a/sqrt(N)); these
/// determine the rewrite rules  r^2 -> sum x_i^2,
/// r1^2 -> sum (x_i - alpha)^2,  r2^2 -> sum (x_i + alpha)^2,  w^2 -> N.
///
/// Degenerate parameter values are folded away at construction so that the
/// square-free radical words stay linearly independent over the rational
/// functions (this is what makes the numerator-zero test exact):
///   - alpha == 0 collapses r1, r2 to r;
///   - perfect-square N collapses w to the integer sqrt(N).
class Field {
  public:
    explicit Field(int n, Rational alpha = Rational(0)) : n_(n), alpha_(std::move(alpha)) {
        if (n < 1 || n > kMaxVars) throw std::invalid_argument("field supports 1 <= N <= 8");
        long isq = std::lround(std::sqrt(static_cast<double>(n)));
        w_rational_ = isq * isq == n;
        w_val_ = Rational(isq);
        fold12_ = alpha_ == 0;
        for (int i = 0; i < n_; ++i) {
            TermKey k;
            k.mono.set_exp(i, 2);
            rw_r_.add_term(k, Scalar::one());
        }
        rw_r1_ = shifted_square(-alpha_);
        rw_r2_ = shifted_square(alpha_);
    }

    int vars() const { return n_; }
    const Rational& alpha() const { return alpha_; }
    bool w_is_rational() const { return w_rational_; }
    const Rational& w_value() const { return w_val_; }
    bool radicals_folded() const { return fold12_; }

    // --- constructors of field elements -------------------------------------

    RatCoeff zero() const { return {}; }

    RatCoeff constant(const Scalar& s) const {
        RatCoeff c;
        c.num.add_term(TermKey{}, s);
        return c;
    }

    RatCoeff constant(const Rational& q) const { return constant(Scalar(q)); }
    RatCoeff one() const { return constant(Scalar::one()); }

    RatCoeff coord(int i) const {
        check_index(i);
        RatCoeff c;
        TermKey k;
        k.mono.set_exp(i, 1);
        c.num.add_term(k, Scalar::one());
        return c;
    }

    RatCoeff coord_sum() const {
        RatCoeff c;
        for (int i = 0; i < n_; ++i) {
            TermKey k;
            k.mono.set_exp(i, 1);
            c.num.add_term(k, Scalar::one());
        }
        return c;
    }

    /// The radical as a value; honors the degeneracy folds.
    RatCoeff radical(RadicalBit which) const {
        uint8_t b = fold_bit(which);
        if (b == 0) return constant(w_val_);
        RatCoeff c;
        TermKey k;
        k.rad = b;
        c.num.add_term(k, Scalar::one());
        return c;
    }

    /// 1 / radical^power.
    RatCoeff inv_radical(RadicalBit which, uint32_t power = 1) const {
        if (which == RAD_W) {
            // w is never kept in denominators: 1/w = w/N.
            if (w_rational_) return constant(Rational(1) / w_val_);
            RatCoeff c = radical(RAD_W);
            return scalar_mul(c, Scalar(Rational(1) / Rational(n_)));
        }
        uint8_t b = fold_bit(which);
        RatCoeff c = one();
        if (b == RAD_R || which == RAD_R)
            c.den.d_r = power;
        else if (b == RAD_R1)
            c.den.d_r1 = power;
        else
            c.den.d_r2 = power;
        return c;
    }

    /// 1 / (x_i - x_j); stored over the ordered factor with a sign.
    RatCoeff inv_root(int i, int j) const {
        check_index(i);
        check_index(j);
        if (i == j) throw std::invalid_argument("inv_root needs distinct indices");
        bool flip = i > j;
        if (flip) std::swap(i, j);
        RatCoeff c;
        c.num.add_term(TermKey{}, flip ? -Scalar::one() : Scalar::one());
        c.den.roots[{static_cast<uint8_t>(i), static_cast<uint8_t>(j)}] = 1;
        return c;
    }

    // --- arithmetic ----------------------------------------------------------

    RatCoeff neg(const RatCoeff& a) const { return {a.num.negated(), a.den}; }

    RatCoeff scalar_mul(const RatCoeff& a, const Scalar& s) const {
        if (s.is_zero()) return {};
        return {a.num.times(s), a.den};
    }

    RatCoeff add(const RatCoeff& a, const RatCoeff& b) const {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        DenomWord lcm = denom_lcm(a.den, b.den);
        PolyExt na = scale_to(a, lcm);
        na += scale_to(b, lcm);
        RatCoeff c{std::move(na), lcm};
        cancel(c);
        return c;
    }

    RatCoeff sub(const RatCoeff& a, const RatCoeff& b) const { return add(a, neg(b)); }

    RatCoeff mul(const RatCoeff& a, const RatCoeff& b) const {
        if (a.is_zero() || b.is_zero()) return {};
        RatCoeff c;
        c.num = poly_mul(a.num, b.num);
        c.den = denom_mul(a.den, b.den);
        cancel(c);
        return c;
    }

    /// Exact partial derivative with respect to x_i.
    RatCoeff differentiate(const RatCoeff& c, int i) const {
        check_index(i);
        RatCoeff out;
        // numerator terms
        for (const auto& [k, s] : c.num.terms) {
            int e = k.mono.exp(i);
            if (e > 0) {
                TermKey nk = k;
                nk.mono.bump(i, -1);
                RatCoeff part;
                part.num.add_term(nk, s * Scalar(Rational(e)));
                part.den = c.den;
                cancel(part);
                out = add(out, part);
            }
            if (k.rad & RAD_R) {
                // d_i r = x_i / r
                TermKey nk = k;
                nk.rad = static_cast<uint8_t>(k.rad & ~RAD_R);
                nk.mono.bump(i, 1);
                RatCoeff part;
                part.num.add_term(nk, s);
                part.den = c.den;
                part.den.d_r += 1;
                cancel(part);
                out = add(out, part);
            }
            if (k.rad & RAD_R1) {
                // d_i r1 = (x_i - alpha) / r1
                RatCoeff part;
                TermKey base = k;
                base.rad = static_cast<uint8_t>(k.rad & ~RAD_R1);
                TermKey shifted = base;
                shifted.mono.bump(i, 1);
                part.num.add_term(shifted, s);
                part.num.add_term(base, s * Scalar(-alpha_));
                part.den = c.den;
                part.den.d_r1 += 1;
                cancel(part);
                out = add(out, part);
            }
            if (k.rad & RAD_R2) {
                RatCoeff part;
                TermKey base = k;
                base.rad = static_cast<uint8_t>(k.rad & ~RAD_R2);
                TermKey shifted = base;
                shifted.mono.bump(i, 1);
                part.num.add_term(shifted, s);
                part.num.add_term(base, s * Scalar(alpha_));
                part.den = c.den;
                part.den.d_r2 += 1;
                cancel(part);
                out = add(out, part);
            }
            // w is constant.
        }
        // denominator factors via the logarithmic derivative
        if (c.den.d_r) {
            RatCoeff factor;  // -d_r * x_i / r^2
            TermKey k;
            k.mono.set_exp(i, 1);
            factor.num.add_term(k, Scalar(Rational(-static_cast<long>(c.den.d_r))));
            factor.den.d_r = 2;
            out = add(out, mul_no_cancel_shortcut(c, factor));
        }
        if (c.den.d_r1) {
            RatCoeff factor;  // -d_r1 * (x_i - alpha) / r1^2
            TermKey k;
            k.mono.set_exp(i, 1);
            Scalar m(Rational(-static_cast<long>(c.den.d_r1)));
            factor.num.add_term(k, m);
            factor.num.add_term(TermKey{}, m * Scalar(-alpha_));
            factor.den.d_r1 = 2;
            out = add(out, mul_no_cancel_shortcut(c, factor));
        }
        if (c.den.d_r2) {
            RatCoeff factor;
            TermKey k;
            k.mono.set_exp(i, 1);
            Scalar m(Rational(-static_cast<long>(c.den.d_r2)));
            factor.num.add_term(k, m);
            factor.num.add_term(TermKey{}, m * Scalar(alpha_));
            factor.den.d_r2 = 2;
            out = add(out, mul_no_cancel_shortcut(c, factor));
        }
        for (const auto& [rf, m] : c.den.roots) {
            int a = rf.first, b = rf.second;
            int sgn = (i == a) ? 1 : (i == b) ? -1 : 0;
            if (!sgn) continue;
            RatCoeff factor;  // -m * sgn / (x_a - x_b)
            factor.num.add_term(TermKey{}, Scalar(Rational(-sgn * static_cast<long>(m))));
            factor.den.roots[rf] = 1;
            out = add(out, mul_no_cancel_shortcut(c, factor));
        }
        return out;
    }

    /// Coordinate-permutation action; all radicals are symmetric and stay put.
    RatCoeff permute(const RatCoeff& c, const Permutation& sigma) const {
        if (sigma.size() != n_) throw std::invalid_argument("permutation size mismatch");
        RatCoeff out;
        Scalar sign_acc = Scalar::one();
        out.den.d_r = c.den.d_r;
        out.den.d_r1 = c.den.d_r1;
        out.den.d_r2 = c.den.d_r2;
        long flips = 0;
        for (const auto& [rf, m] : c.den.roots) {
            int a = sigma(rf.first), b = sigma(rf.second);
            if (a > b) {
                std::swap(a, b);
                if (m & 1) ++flips;
            }
            out.den.roots[{static_cast<uint8_t>(a), static_cast<uint8_t>(b)}] += m;
        }
        if (flips & 1) sign_acc = -sign_acc;
        for (const auto& [k, s] : c.num.terms) {
            TermKey nk;
            nk.rad = k.rad;
            for (int i = 0; i < n_; ++i) {
                int e = k.mono.exp(i);
                if (e) nk.mono.set_exp(sigma(i), e);
            }
            out.num.add_term(nk, s * sign_acc);
        }
        // Canonical form is permutation-invariant, so no re-cancellation here.
        return out;
    }

    /// Numeric evaluation; point must be non-singular for the denominator.
    std::complex<double> evaluate(const RatCoeff& c, std::span<const double> pt) const {
        if (static_cast<int>(pt.size()) != n_)
            throw std::invalid_argument("evaluation point has wrong dimension");
        double a = alpha_.get_d();
        double r2 = 0, r12 = 0, r22 = 0;
        for (int i = 0; i < n_; ++i) {
            r2 += pt[i] * pt[i];
            r12 += (pt[i] - a) * (pt[i] - a);
            r22 += (pt[i] + a) * (pt[i] + a);
        }
        double rv = std::sqrt(r2), r1v = std::sqrt(r12), r2v = std::sqrt(r22);
        double wv = std::sqrt(static_cast<double>(n_));
        if (c.den.d_r && rv == 0.0) throw std::domain_error("evaluation at r = 0");
        if (c.den.d_r1 && r1v == 0.0) throw std::domain_error("evaluation at r1 = 0");
        if (c.den.d_r2 && r2v == 0.0) throw std::domain_error("evaluation at r2 = 0");
        std::complex<double> num(0.0, 0.0);
        for (const auto& [k, s] : c.num.terms) {
            double t = 1.0;
            for (int i = 0; i < n_; ++i)
                for (int e = 0; e < k.mono.exp(i); ++e) t *= pt[i];
            if (k.rad & RAD_R) t *= rv;
            if (k.rad & RAD_R1) t *= r1v;
            if (k.rad & RAD_R2) t *= r2v;
            if (k.rad & RAD_W) t *= wv;
            num += s.to_complex() * t;
        }
        double den = 1.0;
        for (uint32_t d = 0; d < c.den.d_r; ++d) den *= rv;
        for (uint32_t d = 0; d < c.den.d_r1; ++d) den *= r1v;
        for (uint32_t d = 0; d < c.den.d_r2; ++d) den *= r2v;
        for (const auto& [rf, m] : c.den.roots) {
            double f = pt[rf.first] - pt[rf.second];
            if (f == 0.0) throw std::domain_error("evaluation at coincident coordinates");
            for (uint32_t e = 0; e < m; ++e) den *= f;
        }
        return num / den;
    }

    /// Deterministic text form; terms in canonical order.
    std::string to_string(const RatCoeff& c) const {
        if (c.is_zero()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [k, s] : c.num.terms) {
            if (!first) os << " + ";
            first = false;
            os << "(" << s.to_string() << ")";
            for (int i = 0; i < n_; ++i) {
                int e = k.mono.exp(i);
                if (!e) continue;
                os << "*x" << (i + 1);
                if (e > 1) os << "^" << e;
            }
            if (k.rad & RAD_R) os << "*r";
            if (k.rad & RAD_R1) os << "*r1";
            if (k.rad & RAD_R2) os << "*r2";
            if (k.rad & RAD_W) os << "*w";
        }
        if (!c.den.is_trivial()) {
            os << " / (";
            bool f2 = true;
            auto emit = [&](const std::string& sym, uint32_t d) {
                if (!d) return;
                if (!f2) os << "*";
                f2 = false;
                os << sym;
                if (d > 1) os << "^" << d;
            };
            emit("r", c.den.d_r);
            emit("r1", c.den.d_r1);
            emit("r2", c.den.d_r2);
            for (const auto& [rf, m] : c.den.roots) {
                if (!f2) os << "*";
                f2 = false;
                os << "(x" << (rf.first + 1) << "-x" << (rf.second + 1) << ")";
                if (m > 1) os << "^" << m;
            }
            os << ")";
        }
        return os.str();
    }

    /// Canonical-form validation used by the property tests.
    bool validate_canonical(const RatCoeff& c) const {
        if (c.is_zero()) return c.den.is_trivial();
        for (const auto& [k, s] : c.num.terms)
            if (s.is_zero()) return false;
        if (fold12_ && (c.den.d_r1 || c.den.d_r2)) return false;
        for (const auto& [k, s] : c.num.terms) {
            (void)s;
            if (fold12_ && (k.rad & (RAD_R1 | RAD_R2))) return false;
            if (w_rational_ && (k.rad & RAD_W)) return false;
        }
        // no shared radical bit with positive denominator exponent
        for (uint8_t bit : {uint8_t(RAD_R), uint8_t(RAD_R1), uint8_t(RAD_R2)}) {
            uint32_t d = bit == RAD_R ? c.den.d_r : bit == RAD_R1 ? c.den.d_r1 : c.den.d_r2;
            if (d && all_terms_have_bit(c.num, bit)) return false;
        }
        // no root factor divides the numerator
        for (const auto& [rf, m] : c.den.roots) {
            if (m == 0) return false;
            if (divide_by_root(c.num, rf.first, rf.second)) return false;
        }
        // no even radical power cancellable against the rewrite polynomial
        if (c.den.d_r >= 2 && poly_divide_exact(c.num, rw_r_)) return false;
        if (c.den.d_r1 >= 2 && poly_divide_exact(c.num, rw_r1_)) return false;
        if (c.den.d_r2 >= 2 && poly_divide_exact(c.num, rw_r2_)) return false;
        return true;
    }

    // --- polynomial helpers (exposed for tests) ------------------------------

    /// Product of two extension polynomials with radical-square rewriting.
    PolyExt poly_mul(const PolyExt& a, const PolyExt& b) const {
        PolyExt out;
        for (const auto& [ka, sa] : a.terms)
            for (const auto& [kb, sb] : b.terms) term_mul_into(out, ka, sa, kb, sb);
        return out;
    }

    /// Exact division by a radical-free polynomial; nullopt if not divisible.
    std::optional<PolyExt> poly_divide_exact(const PolyExt& p, const PolyExt& d) const {
        if (d.is_zero()) throw std::domain_error("division by zero polynomial");
        PolyExt rem = p, quot;
        const auto& [lk, lc] = *d.terms.begin();
        if (lk.rad != 0) throw std::invalid_argument("divisor must be radical-free");
        while (!rem.is_zero()) {
            const auto& [rk, rc] = *rem.terms.begin();
            if (!rk.mono.divisible_by(lk.mono)) return std::nullopt;
            TermKey qk;
            qk.mono = rk.mono.divide(lk.mono);
            qk.rad = rk.rad;
            Scalar qc = rc / lc;
            quot.add_term(qk, qc);
            for (const auto& [dk, dc] : d.terms) {
                TermKey t;
                t.mono = qk.mono * dk.mono;
                t.rad = qk.rad;  // divisor radical-free
                rem.add_term(t, -(qc * dc));
            }
        }
        return quot;
    }

    /// Division of the numerator polynomial by (x_a - x_b); nullopt if not exact.
    std::optional<PolyExt> divide_by_root(const PolyExt& p, int a, int b) const {
        // Treat p as a polynomial in x_a; synthetic division, remainder is
        // p with x_a -> x_b substituted.
        PolyExt quot;
        std::map<int, PolyExt> by_deg;  // x_a-exponent -> rest
        int dmax = 0;
        for (const auto& [k, s] : p.terms) {
            int e = k.mono.exp(a);
            TermKey rest = k;
            rest.mono.set_exp(a, 0);
            by_deg[e].add_term(rest, s);
            dmax = std::max(dmax, e);
        }
        PolyExt carry;  // q_k accumulated downward
        for (int k = dmax - 1; k >= 0; --k) {
            PolyExt qk = carry;  // q_k = c_{k+1} + x_b * q_{k+1}
            auto it = by_deg.find(k + 1);
            if (it != by_deg.end()) qk += it->second;
            for (const auto& [tk, ts] : qk.terms) {
                TermKey out = tk;
                out.mono.bump(a, k);
                quot.add_term(out, ts);
            }
            // carry for next level: x_b * q_k
            PolyExt next;
            for (const auto& [tk, ts] : qk.terms) {
                TermKey sh = tk;
                sh.mono.bump(b, 1);
                next.add_term(sh, ts);
            }
            carry = std::move(next);
        }
        // remainder = c_0 + x_b*q_0 = carry + by_deg[0]
        PolyExt rem = carry;
        auto it0 = by_deg.find(0);
        if (it0 != by_deg.end()) rem += it0->second;
        if (!rem.is_zero()) return std::nullopt;
        return quot;
    }

    const PolyExt& rewrite_r() const { return rw_r_; }
    const PolyExt& rewrite_r1() const { return rw_r1_; }
    const PolyExt& rewrite_r2() const { return rw_r2_; }

    /// Brings a coefficient into canonical form (greedy cancellation).
    /// Deterministic rule order: root factors in lexicographic order, radical
    /// bit strips (r, r1, r2), then rewrite-polynomial divisions (r, r1, r2);
    /// repeat to a fixed point.
    void cancel(RatCoeff& c) const {
        if (c.num.is_zero()) {
            c.den = DenomWord{};
            return;
        }
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto it = c.den.roots.begin(); it != c.den.roots.end();) {
                bool erased = false;
                while (it->second > 0) {
                    auto q = divide_by_root(c.num, it->first.first, it->first.second);
                    if (!q) break;
                    c.num = std::move(*q);
                    --it->second;
                    changed = true;
                }
                if (it->second == 0) {
                    it = c.den.roots.erase(it);
                    erased = true;
                }
                if (!erased) ++it;
            }
            auto strip = [&](uint8_t bit, uint32_t& d) {
                while (d > 0 && all_terms_have_bit(c.num, bit)) {
                    PolyExt stripped;
                    for (const auto& [k, s] : c.num.terms) {
                        TermKey nk = k;
                        nk.rad = static_cast<uint8_t>(k.rad & ~bit);
                        stripped.add_term(nk, s);
                    }
                    c.num = std::move(stripped);
                    --d;
                    changed = true;
                }
            };
            strip(RAD_R, c.den.d_r);
            strip(RAD_R1, c.den.d_r1);
            strip(RAD_R2, c.den.d_r2);
            auto unsquare = [&](const PolyExt& rw, uint32_t& d) {
                while (d >= 2) {
                    auto q = poly_divide_exact(c.num, rw);
                    if (!q) break;
                    c.num = std::move(*q);
                    d -= 2;
                    changed = true;
                }
            };
            unsquare(rw_r_, c.den.d_r);
            unsquare(rw_r1_, c.den.d_r1);
            unsquare(rw_r2_, c.den.d_r2);
        }
    }

  private:
    void check_index(int i) const {
        if (i < 0 || i >= n_) throw std::out_of_range("coordinate index");
    }

    uint8_t fold_bit(RadicalBit which) const {
        switch (which) {
            case RAD_R:
                return RAD_R;
            case RAD_R1:
                return fold12_ ? RAD_R : RAD_R1;
            case RAD_R2:
                return fold12_ ? RAD_R : RAD_R2;
            case RAD_W:
                return w_rational_ ? 0 : RAD_W;
        }
        return 0;
    }

    PolyExt shifted_square(const Rational& shift) const {
        // sum_i (x_i + shift)^2 = sum x_i^2 + 2*shift*sum x_i + N*shift^2
        PolyExt p = rw_r_;
        if (shift != 0) {
            for (int i = 0; i < n_; ++i) {
                TermKey k;
                k.mono.set_exp(i, 1);
                p.add_term(k, Scalar(2 * shift));
            }
            p.add_term(TermKey{}, Scalar(Rational(n_) * shift * shift));
        }
        return p;
    }

    static bool all_terms_have_bit(const PolyExt& p, uint8_t bit) {
        if (p.is_zero()) return false;
        for (const auto& [k, s] : p.terms) {
            (void)s;
            if (!(k.rad & bit)) return false;
        }
        return true;
    }

    void term_mul_into(PolyExt& out, const TermKey& ka, const Scalar& sa, const TermKey& kb,
                       const Scalar& sb) const {
        Scalar s = sa * sb;
        TermKey k;
        k.mono = ka.mono * kb.mono;
        uint8_t doubled = ka.rad & kb.rad;
        k.rad = (ka.rad | kb.rad) & ~doubled;
        if (doubled & RAD_W) {
            s *= Scalar(Rational(n_));
            doubled = static_cast<uint8_t>(doubled & ~RAD_W);
        }
        if (!doubled) {
            out.add_term(k, s);
            return;
        }
        PolyExt acc;
        acc.add_term(k, s);
        if (doubled & RAD_R) acc = plain_mul(acc, rw_r_);
        if (doubled & RAD_R1) acc = plain_mul(acc, rw_r1_);
        if (doubled & RAD_R2) acc = plain_mul(acc, rw_r2_);
        out += acc;
    }

    /// Multiplication where b is radical-free (no rewriting can trigger).
    static PolyExt plain_mul(const PolyExt& a, const PolyExt& b) {
        PolyExt out;
        for (const auto& [ka, sa] : a.terms)
            for (const auto& [kb, sb] : b.terms) {
                TermKey k;
                k.mono = ka.mono * kb.mono;
                k.rad = ka.rad;
                out.add_term(k, sa * sb);
            }
        return out;
    }

    static DenomWord denom_mul(const DenomWord& a, const DenomWord& b) {
        DenomWord d = a;
        d.d_r += b.d_r;
        d.d_r1 += b.d_r1;
        d.d_r2 += b.d_r2;
        for (const auto& [rf, m] : b.roots) d.roots[rf] += m;
        return d;
    }

    static DenomWord denom_lcm(const DenomWord& a, const DenomWord& b) {
        DenomWord d = a;
        d.d_r = std::max(a.d_r, b.d_r);
        d.d_r1 = std::max(a.d_r1, b.d_r1);
        d.d_r2 = std::max(a.d_r2, b.d_r2);
        for (const auto& [rf, m] : b.roots) {
            auto it = d.roots.find(rf);
            if (it == d.roots.end())
                d.roots[rf] = m;
            else
                it->second = std::max(it->second, m);
        }
        return d;
    }

    /// Numerator of c rescaled to the common denominator `target`.
    PolyExt scale_to(const RatCoeff& c, const DenomWord& target) const {
        PolyExt out = c.num;
        auto apply_radical = [&](uint8_t bit, const PolyExt& rw, uint32_t delta) {
            for (uint32_t k = 0; k < delta / 2; ++k) out = plain_mul(out, rw);
            if (delta & 1) {
                PolyExt shifted;
                for (const auto& [tk, ts] : out.terms) {
                    if (tk.rad & bit) {
                        // r * r -> rewrite polynomial
                        TermKey nk = tk;
                        nk.rad = static_cast<uint8_t>(tk.rad & ~bit);
                        PolyExt one_term;
                        one_term.add_term(nk, ts);
                        shifted += plain_mul(one_term, rw);
                    } else {
                        TermKey nk = tk;
                        nk.rad = static_cast<uint8_t>(tk.rad | bit);
                        shifted.add_term(nk, ts);
                    }
                }
                out = std::move(shifted);
            }
        };
        if (target.d_r > c.den.d_r) apply_radical(RAD_R, rw_r_, target.d_r - c.den.d_r);
        if (target.d_r1 > c.den.d_r1) apply_radical(RAD_R1, rw_r1_, target.d_r1 - c.den.d_r1);
        if (target.d_r2 > c.den.d_r2) apply_radical(RAD_R2, rw_r2_, target.d_r2 - c.den.d_r2);
        for (const auto& [rf, m] : target.roots) {
            auto it = c.den.roots.find(rf);
            uint32_t have = it == c.den.roots.end() ? 0 : it->second;
            for (uint32_t k = have; k < m; ++k) {
                PolyExt shifted;
                for (const auto& [tk, ts] : out.terms) {
                    TermKey ka = tk;
                    ka.mono.bump(rf.first, 1);
                    shifted.add_term(ka, ts);
                    TermKey kb = tk;
                    kb.mono.bump(rf.second, 1);
                    shifted.add_term(kb, -ts);
                }
                out = std::move(shifted);
            }
        }
        return out;
    }

    RatCoeff mul_no_cancel_shortcut(const RatCoeff& a, const RatCoeff& b) const {
        return mul(a, b);
    }

    int n_;
    Rational alpha_;
    bool w_rational_ = false;
    Rational w_val_;
    bool fold12_ = true;
    PolyExt rw_r_, rw_r1_, rw_r2_;
};

}  // namespace dunkl
