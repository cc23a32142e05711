#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace dunkl {

/// Arbitrary-precision rational number (always kept in lowest terms).
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

/// Parses "p", "p/q" or a finite decimal ("0.25") into an exact rational.
inline Rational parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        Rational q;
        if (q.set_str(text, 10) != 0)
            throw std::invalid_argument("bad rational literal: " + text);
        if (q.get_den() == 0)
            throw std::invalid_argument("zero denominator: " + text);
        q.canonicalize();
        return q;
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) {
        Rational q;
        if (q.set_str(text, 10) != 0)
            throw std::invalid_argument("bad rational literal: " + text);
        return q;
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac_len = text.size() - dot - 1;
    bool neg = false;
    if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) {
        neg = digits[0] == '-';
        digits.erase(digits.begin());
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("bad rational literal: " + text);
    mpz_class num(digits, 10), den(1);
    for (std::size_t k = 0; k < frac_len; ++k) den *= 10;
    Rational q(num, den);
    q.canonicalize();
    if (neg) q = -q;
    return q;
}

inline std::string rational_to_string(const Rational& q) { return q.get_str(); }

/// Exact complex number with rational real and imaginary parts.
struct Scalar {
    Rational re, im;

    Scalar() : re(0), im(0) {}
    Scalar(Rational r) : re(std::move(r)), im(0) {}
    Scalar(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    Scalar(long v) : re(v), im(0) {}

    static Scalar zero() { return Scalar(); }
    static Scalar one() { return Scalar(Rational(1)); }
    static Scalar unit_im() { return Scalar(Rational(0), Rational(1)); }

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_real() const { return im == 0; }

    Scalar operator-() const { return {-re, -im}; }
    Scalar conj() const { return {re, -im}; }

    Scalar& operator+=(const Scalar& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    Scalar& operator-=(const Scalar& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    Scalar& operator*=(const Scalar& o) {
        Rational nre = re * o.re - im * o.im;
        Rational nim = re * o.im + im * o.re;
        re = std::move(nre);
        im = std::move(nim);
        return *this;
    }

    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
    friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }

    friend Scalar operator/(const Scalar& a, const Scalar& b) {
        Rational n2 = b.re * b.re + b.im * b.im;
        if (n2 == 0) throw std::domain_error("division by zero scalar");
        return {(a.re * b.re + a.im * b.im) / n2, (a.im * b.re - a.re * b.im) / n2};
    }

    friend bool operator==(const Scalar& a, const Scalar& b) {
        return a.re == b.re && a.im == b.im;
    }

    std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }

    std::string to_string() const {
        if (im == 0) return re.get_str();
        if (re == 0) return im.get_str() + "*i";
        std::string s = re.get_str();
        if (im > 0) s += "+";
        return s + im.get_str() + "*i";
    }
};

inline Scalar imag_unit() { return Scalar::unit_im(); }

}  // namespace dunkl
