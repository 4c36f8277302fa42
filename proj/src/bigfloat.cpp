#include "gpacforge/bigfloat.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

namespace gpacforge {

namespace {
std::atomic<int> g_default_precision{128};
}

int BigFloat::default_precision() { return g_default_precision.load(std::memory_order_relaxed); }

void BigFloat::set_default_precision(int bits) {
    g_default_precision.store(bits < kMinPrecision ? kMinPrecision : bits, std::memory_order_relaxed);
}

BigFloat BigFloat::half_ulp() const {
    BigFloat r(precision());
    if (is_zero() || !is_finite()) return r;
    mpfr_exp_t e = mpfr_get_exp(v_);
    mpfr_set_ui_2exp(r.v_, 1, e - precision() - 1, MPFR_RNDN);
    return r;
}

std::string BigFloat::str() const {
    // Enough decimal digits to round-trip at this precision, trailing zeros
    // trimmed so output is deterministic and compact.
    int digits = static_cast<int>(std::ceil(precision() * 0.30103)) + 2;
    char* s = nullptr;
    mpfr_asprintf(&s, "%.*Re", digits, v_);
    std::string out(s);
    mpfr_free_str(s);
    auto epos = out.find('e');
    if (epos != std::string::npos) {
        size_t last = epos;
        while (last > 0 && out[last - 1] == '0') --last;
        if (last > 0 && out[last - 1] == '.') --last;
        out = out.substr(0, last) + out.substr(epos);
    }
    return out;
}

#define GPAC_BF_UNARY(name, fn)                  \
    BigFloat name(const BigFloat& x) {           \
        BigFloat r(x.precision());               \
        fn(r.raw(), x.raw(), MPFR_RNDN);         \
        return r;                                \
    }

GPAC_BF_UNARY(bf_abs, mpfr_abs)
GPAC_BF_UNARY(bf_sqrt, mpfr_sqrt)
GPAC_BF_UNARY(bf_exp, mpfr_exp)
GPAC_BF_UNARY(bf_log, mpfr_log)
GPAC_BF_UNARY(bf_sin, mpfr_sin)
GPAC_BF_UNARY(bf_cos, mpfr_cos)
GPAC_BF_UNARY(bf_tanh, mpfr_tanh)

#undef GPAC_BF_UNARY

BigFloat bf_pow_si(const BigFloat& x, long e) {
    BigFloat r(x.precision());
    mpfr_pow_si(r.raw(), x.raw(), e, MPFR_RNDN);
    return r;
}

BigFloat bf_max(const BigFloat& a, const BigFloat& b) { return a >= b ? a : b; }
BigFloat bf_min(const BigFloat& a, const BigFloat& b) { return a <= b ? a : b; }

BigFloat bf_pi(int prec) {
    BigFloat r(prec);
    mpfr_const_pi(r.raw(), MPFR_RNDN);
    return r;
}

BigFloat bf_pow2(long e, int prec) {
    BigFloat r(prec);
    mpfr_set_ui_2exp(r.raw(), 1, e, MPFR_RNDN);
    return r;
}

Integer bf_round_to_integer(const BigFloat& x) {
    mpfr_t t;
    mpfr_init2(t, mpfr_get_prec(x.raw()));
    mpfr_rint(t, x.raw(), MPFR_RNDN);
    Integer n;
    mpfr_get_z(n.get_mpz_t(), t, MPFR_RNDN);
    mpfr_clear(t);
    return n;
}

Rational bf_to_rational(const BigFloat& x) {
    if (!x.is_finite()) throw DomainError("non-finite value has no rational form");
    Rational q;
    mpfr_get_q(q.get_mpq_t(), x.raw());
    return q;
}

std::pair<Rational, Rational> rational_approx(const BigFloat& x, int bits) {
    BigFloat rounded = x.at_precision(bits);
    Rational q = bf_to_rational(rounded);
    Rational e = bf_to_rational(rounded.half_ulp());
    return {q, e};
}

}  // namespace gpacforge
