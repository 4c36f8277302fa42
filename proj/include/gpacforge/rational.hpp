#ifndef GPACFORGE_RATIONAL_HPP
#define GPACFORGE_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gpacforge {

using Integer = mpz_class;

/// Exact rational arithmetic on top of mpq_class, with one repair: the
/// (num, den) constructors canonicalize. Everything downstream relies on
/// denominator > 0 and gcd(|num|, den) = 1, and gmp only guarantees that
/// for results of arithmetic on already-canonical operands.
class Rational : public mpq_class {
  public:
    Rational() : mpq_class() {}
    Rational(const mpq_class& v) : mpq_class(v) {}
    Rational(mpq_class&& v) : mpq_class(std::move(v)) {}
    Rational(long n) : mpq_class(n) {}
    Rational(int n) : mpq_class(n) {}
    Rational(unsigned long n) : mpq_class(n) {}
    Rational(const Integer& n) : mpq_class(n) {}
    explicit Rational(double d) : mpq_class(d) {}
    Rational(long num, long den) : mpq_class(num, den) { canonicalize(); }
    Rational(const Integer& num, const Integer& den) : mpq_class(num, den) { canonicalize(); }
    template <class T, class U>
    Rational(const __gmp_expr<T, U>& e) : mpq_class(e) {}
};

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct CompileError : Error {
    using Error::Error;
};

inline Rational make_rational(long num, long den = 1) {
    if (den == 0) throw DomainError("rational with zero denominator");
    return Rational(num, den);
}

/// Parse decimal strings (unbounded size) as used by the JSON formats.
inline Rational rational_from_strings(const std::string& num, const std::string& den) {
    Integer n, d;
    if (n.set_str(num, 10) != 0) throw ParseError("bad integer literal: " + num);
    if (d.set_str(den, 10) != 0) throw ParseError("bad integer literal: " + den);
    if (d == 0) throw ParseError("rational with zero denominator");
    return Rational(n, d);
}

inline Rational rat_abs(const Rational& q) { return q >= 0 ? q : Rational(-q); }

inline Rational rat_pow(const Rational& q, unsigned long e) {
    Rational r;
    mpz_pow_ui(r.get_num_mpz_t(), q.get_num_mpz_t(), e);
    mpz_pow_ui(r.get_den_mpz_t(), q.get_den_mpz_t(), e);
    return r;  // powers of canonical rationals are canonical
}

/// Nearest integer; halves round away from zero (callers that care about the
/// tie are expected to stay away from it, cf. the rounding gadgets).
inline Integer rat_round(const Rational& q) {
    Integer n, rem;
    mpz_tdiv_qr(n.get_mpz_t(), rem.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    Rational frac = q - Rational(n);
    if (frac >= Rational(1, 2)) return n + 1;
    if (frac <= Rational(-1, 2)) return n - 1;
    return n;
}

inline Integer rat_floor(const Rational& q) {
    Integer n;
    mpz_fdiv_q(n.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return n;
}

}  // namespace gpacforge

#endif
