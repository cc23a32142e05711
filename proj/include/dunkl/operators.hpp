#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dunkl/field.hpp"
#include "dunkl/permutation.hpp"
#include "dunkl/rational.hpp"

namespace dunkl {

/// Multi-index of partial derivatives, packed one order byte per variable.
struct DerivWord {
    uint64_t bits = 0;

    int order(int i) const { return static_cast<int>((bits >> (8 * i)) & 0xffu); }

    void set_order(int i, int k) {
        if (k < 0 || k > 255) throw std::overflow_error("derivative order out of range");
        bits = (bits & ~(uint64_t{0xff} << (8 * i))) | (uint64_t(k) << (8 * i));
    }

    int total_order() const {
        uint64_t b = bits;
        int d = 0;
        while (b) {
            d += static_cast<int>(b & 0xffu);
            b >>= 8;
        }
        return d;
    }

    friend auto operator<=>(const DerivWord&, const DerivWord&) = default;
};

struct OpKey {
    DerivWord deriv;
    uint32_t perm = 0;

    friend auto operator<=>(const OpKey&, const OpKey&) = default;
};

/// Thrown when a normal-form computation exceeds the configured term budget.
struct TermCapExceeded : std::runtime_error {
    explicit TermCapExceeded(std::size_t cap)
        : std::runtime_error("operator term budget exceeded (cap " + std::to_string(cap) + ")") {}
};

/// Operator in normal form: a finite sum of
///   coefficient(x, radicals) * d_1^{k_1}..d_N^{k_N} * permutation,
/// with at most one term per (derivative word, permutation) pair.
class Operator {
  public:
    Operator() : n_(0) {}
    explicit Operator(int n) : n_(n) {}

    static Operator zero(const Field& f) { return Operator(f.vars()); }

    static Operator identity(const Field& f) {
        Operator op(f.vars());
        op.add_term(OpKey{DerivWord{}, Permutation::identity(f.vars()).code()}, f.one());
        return op;
    }

    static Operator coefficient(const Field& f, const RatCoeff& c) {
        Operator op(f.vars());
        op.add_term(OpKey{DerivWord{}, Permutation::identity(f.vars()).code()}, c);
        return op;
    }

    static Operator partial(const Field& f, int i) {
        Operator op(f.vars());
        DerivWord d;
        d.set_order(i, 1);
        op.add_term(OpKey{d, Permutation::identity(f.vars()).code()}, f.one());
        return op;
    }

    static Operator permutation_op(const Field& f, const Permutation& sigma) {
        Operator op(f.vars());
        op.add_term(OpKey{DerivWord{}, sigma.code()}, f.one());
        return op;
    }

    int vars() const { return n_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    const std::map<OpKey, RatCoeff>& terms() const { return terms_; }

    /// Inserts a fresh term; merging terms under one key needs the field and
    /// goes through OperatorAlgebra::add.
    void add_term(const OpKey& key, const RatCoeff& c) {
        if (c.is_zero()) return;
        auto [it, inserted] = terms_.emplace(key, c);
        (void)it;
        if (!inserted) throw std::logic_error("duplicate operator term key");
    }

    /// Sorted deterministic text form.
    std::string to_string(const Field& f) const {
        std::ostringstream os;
        for (const auto& [k, c] : terms_) {
            os << "[";
            for (int i = 0; i < n_; ++i) {
                if (i) os << ",";
                os << k.deriv.order(i);
            }
            os << "] " << Permutation::from_code(k.perm, n_).to_string() << " : "
               << f.to_string(c) << "\n";
        }
        return os.str();
    }

    friend class OperatorAlgebra;

  private:
    int n_;
    std::map<OpKey, RatCoeff> terms_;
};

/// All operator arithmetic lives here and carries its Field context.
class OperatorAlgebra {
  public:
    explicit OperatorAlgebra(const Field& f, std::size_t term_cap = kDefaultTermCap)
        : f_(f), cap_(term_cap) {}

    static constexpr std::size_t kDefaultTermCap = 2'000'000;

    const Field& field() const { return f_; }

    Operator zero() const { return Operator::zero(f_); }
    Operator identity() const { return Operator::identity(f_); }
    Operator coefficient(const RatCoeff& c) const { return Operator::coefficient(f_, c); }
    Operator partial(int i) const { return Operator::partial(f_, i); }
    Operator permutation(const Permutation& s) const { return Operator::permutation_op(f_, s); }

    Operator add(const Operator& a, const Operator& b) const {
        check(a, b);
        Operator out = a;
        for (const auto& [k, c] : b.terms_) accumulate(out, k, c);
        return out;
    }

    Operator sub(const Operator& a, const Operator& b) const {
        check(a, b);
        Operator out = a;
        for (const auto& [k, c] : b.terms_) accumulate(out, k, f_.neg(c));
        return out;
    }

    Operator negate(const Operator& a) const {
        Operator out(a.vars());
        for (const auto& [k, c] : a.terms_) out.terms_.emplace(k, f_.neg(c));
        return out;
    }

    Operator scale(const Operator& a, const Scalar& s) const {
        Operator out(a.vars());
        if (s.is_zero()) return out;
        for (const auto& [k, c] : a.terms_) out.terms_.emplace(k, f_.scalar_mul(c, s));
        return out;
    }

    Operator scale(const Operator& a, const RatCoeff& c) const {
        return compose(coefficient(c), a);
    }

    /// Normal-form product AB. Permutations conjugate everything to their
    /// right; derivatives pass coefficients via the generalized Leibniz rule.
    Operator compose(const Operator& a, const Operator& b) const {
        check(a, b);
        Operator out(a.vars());
        const int n = a.vars();
        for (const auto& [ka, ca] : a.terms_) {
            Permutation sigma = Permutation::from_code(ka.perm, n);
            bool sigma_id = sigma.is_identity();
            for (const auto& [kb, cb] : b.terms_) {
                // sigma through the coefficient and derivative word of b
                RatCoeff cb_conj = sigma_id ? cb : f_.permute(cb, sigma);
                DerivWord db;
                if (sigma_id) {
                    db = kb.deriv;
                } else {
                    for (int i = 0; i < n; ++i) {
                        int o = kb.deriv.order(i);
                        if (o) db.set_order(sigma(i), o);
                    }
                }
                uint32_t perm_out =
                    sigma_id ? kb.perm : sigma.compose(Permutation::from_code(kb.perm, n)).code();
                // Leibniz: d^a (c f) = sum_{beta <= a} C(a,beta) d^{a-beta}(c) d^beta f
                leibniz(out, ka.deriv, ca, cb_conj, db, perm_out);
                if (out.terms_.size() > cap_) throw TermCapExceeded(cap_);
            }
        }
        return out;
    }

    Operator commutator(const Operator& a, const Operator& b) const {
        return sub(compose(a, b), compose(b, a));
    }

    Operator anticommutator(const Operator& a, const Operator& b) const {
        return add(compose(a, b), compose(b, a));
    }

    /// A acting on a field element as a differential-permutation operator.
    RatCoeff apply(const Operator& a, const RatCoeff& func) const {
        RatCoeff out;
        const int n = a.vars();
        for (const auto& [k, c] : a.terms_) {
            Permutation sigma = Permutation::from_code(k.perm, n);
            RatCoeff g = sigma.is_identity() ? func : f_.permute(func, sigma);
            for (int i = 0; i < n; ++i)
                for (int d = 0; d < k.deriv.order(i); ++d) g = f_.differentiate(g, i);
            out = f_.add(out, f_.mul(c, g));
        }
        return out;
    }

    /// Replaces every permutation factor by the identity. Valid only as an
    /// action on symmetric functions.
    Operator restrict_symmetric(const Operator& a) const {
        Operator out(a.vars());
        uint32_t id = Permutation::identity(a.vars()).code();
        for (const auto& [k, c] : a.terms_) accumulate(out, OpKey{k.deriv, id}, c);
        return out;
    }

    /// Structural probe: true iff no non-identity permutation term remains.
    bool permutation_free(const Operator& a) const {
        uint32_t id = Permutation::identity(a.vars()).code();
        for (const auto& [k, c] : a.terms_) {
            (void)c;
            if (k.perm != id) return false;
        }
        return true;
    }

  private:
    void check(const Operator& a, const Operator& b) const {
        if (a.vars() != b.vars() || a.vars() != f_.vars())
            throw std::invalid_argument("operator dimension mismatch");
    }

    void accumulate(Operator& out, const OpKey& key, const RatCoeff& c) const {
        if (c.is_zero()) return;
        auto it = out.terms_.find(key);
        if (it == out.terms_.end()) {
            out.terms_.emplace(key, c);
        } else {
            it->second = f_.add(it->second, c);
            if (it->second.is_zero()) out.terms_.erase(it);
        }
    }

    void leibniz(Operator& out, const DerivWord& a, const RatCoeff& ca, const RatCoeff& cb,
                 const DerivWord& db, uint32_t perm_out) const {
        const int n = f_.vars();
        if (a.total_order() == 0) {
            accumulate(out, OpKey{db, perm_out}, f_.mul(ca, cb));
            return;
        }
        // Enumerate beta <= a componentwise; derivative table of cb built on
        // the fly, indexed by the packed multi-index.
        std::map<uint64_t, RatCoeff> dtab;
        dtab.emplace(0, cb);
        std::vector<int> amax(n);
        for (int i = 0; i < n; ++i) amax[i] = a.order(i);
        std::vector<int> delta(n, 0);
        // iterate over all delta <= a in odometer order
        while (true) {
            // ensure dtab has entry for delta
            uint64_t dk = pack(delta);
            auto it = dtab.find(dk);
            if (it == dtab.end()) {
                // find predecessor with one fewer derivative
                for (int i = 0; i < n; ++i) {
                    if (delta[i] > 0) {
                        std::vector<int> prev = delta;
                        prev[i] -= 1;
                        const RatCoeff& base = dtab.at(pack(prev));
                        dtab.emplace(dk, f_.differentiate(base, i));
                        break;
                    }
                }
                it = dtab.find(dk);
            }
            const RatCoeff& dcb = it->second;
            if (!dcb.is_zero()) {
                // beta = a - delta
                DerivWord beta;
                unsigned long long mult = 1;
                for (int i = 0; i < n; ++i) {
                    beta.set_order(i, amax[i] - delta[i]);
                    mult *= binom(amax[i], delta[i]);
                }
                DerivWord total = beta;
                for (int i = 0; i < n; ++i) {
                    int o = db.order(i);
                    if (o) total.set_order(i, total.order(i) + o);
                }
                RatCoeff coef = f_.mul(ca, dcb);
                if (mult != 1)
                    coef = f_.scalar_mul(coef, Scalar(Rational(static_cast<long>(mult))));
                accumulate(out, OpKey{total, perm_out}, coef);
            }
            // odometer increment
            int i = 0;
            for (; i < n; ++i) {
                if (delta[i] < amax[i]) {
                    ++delta[i];
                    for (int j = 0; j < i; ++j) delta[j] = 0;
                    break;
                }
            }
            if (i == n) break;
        }
    }

    static uint64_t pack(const std::vector<int>& v) {
        uint64_t b = 0;
        for (std::size_t i = 0; i < v.size(); ++i) b |= uint64_t(v[i]) << (8 * i);
        return b;
    }

    static unsigned long long binom(int n, int k) {
        if (k < 0 || k > n) return 0;
        unsigned long long r = 1;
        for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
        return r;
    }

    const Field& f_;
    std::size_t cap_;
};

}  // namespace dunkl
