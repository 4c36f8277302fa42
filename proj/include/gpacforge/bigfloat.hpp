#ifndef GPACFORGE_BIGFLOAT_HPP
#define GPACFORGE_BIGFLOAT_HPP

#include <mpfr.h>

#include <atomic>
#include <string>
#include <utility>

#include "gpacforge/rational.hpp"

namespace gpacforge {

/// Arbitrary-precision binary float on top of MPFR. The rounding mode is
/// round-to-nearest for the whole process; precision travels with the value
/// (binary ops widen to the larger operand precision).
class BigFloat {
  public:
    static constexpr int kMinPrecision = 24;

    /// Process-wide default, overridable per run (see IntegrationConfig).
    static int default_precision();
    static void set_default_precision(int bits);

    BigFloat() : BigFloat(default_precision()) {}
    explicit BigFloat(int prec) {
        mpfr_init2(v_, check_prec(prec));
        mpfr_set_zero(v_, 1);
    }
    BigFloat(long x, int prec) {
        mpfr_init2(v_, check_prec(prec));
        mpfr_set_si(v_, x, MPFR_RNDN);
    }
    BigFloat(double x, int prec) {
        mpfr_init2(v_, check_prec(prec));
        mpfr_set_d(v_, x, MPFR_RNDN);
    }
    BigFloat(const Rational& q, int prec) {
        mpfr_init2(v_, check_prec(prec));
        mpfr_set_q(v_, q.get_mpq_t(), MPFR_RNDN);
    }

    BigFloat(const BigFloat& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    BigFloat(BigFloat&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    BigFloat& operator=(const BigFloat& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    BigFloat& operator=(BigFloat&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~BigFloat() { mpfr_clear(v_); }

    int precision() const { return static_cast<int>(mpfr_get_prec(v_)); }
    BigFloat at_precision(int prec) const {
        BigFloat r(prec);
        mpfr_set(r.v_, v_, MPFR_RNDN);
        return r;
    }

    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

    bool is_finite() const { return mpfr_number_p(v_) != 0; }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    /// Upper bound on the representation error of a value obtained by one
    /// correctly rounded operation: half a unit in the last place.
    BigFloat half_ulp() const;

    std::string str() const;  // round-trippable decimal at this precision

    friend BigFloat operator+(const BigFloat& a, const BigFloat& b) {
        BigFloat r(join(a, b));
        mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat operator-(const BigFloat& a, const BigFloat& b) {
        BigFloat r(join(a, b));
        mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat operator*(const BigFloat& a, const BigFloat& b) {
        BigFloat r(join(a, b));
        mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat operator/(const BigFloat& a, const BigFloat& b) {
        BigFloat r(join(a, b));
        mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    BigFloat operator-() const {
        BigFloat r(precision());
        mpfr_neg(r.v_, v_, MPFR_RNDN);
        return r;
    }
    BigFloat& operator+=(const BigFloat& b) {
        mpfr_add(v_, v_, b.v_, MPFR_RNDN);
        return *this;
    }
    BigFloat& operator-=(const BigFloat& b) {
        mpfr_sub(v_, v_, b.v_, MPFR_RNDN);
        return *this;
    }
    BigFloat& operator*=(const BigFloat& b) {
        mpfr_mul(v_, v_, b.v_, MPFR_RNDN);
        return *this;
    }

    friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
    friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
    friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
    friend bool operator>=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }
    friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
    friend bool operator!=(const BigFloat& a, const BigFloat& b) { return !(a == b); }

  private:
    static int check_prec(int prec) {
        return prec < kMinPrecision ? kMinPrecision : prec;
    }
    static int join(const BigFloat& a, const BigFloat& b) {
        int pa = a.precision(), pb = b.precision();
        return pa > pb ? pa : pb;
    }
    mpfr_t v_;
};

BigFloat bf_abs(const BigFloat& x);
BigFloat bf_sqrt(const BigFloat& x);
BigFloat bf_exp(const BigFloat& x);
BigFloat bf_log(const BigFloat& x);
BigFloat bf_sin(const BigFloat& x);
BigFloat bf_cos(const BigFloat& x);
BigFloat bf_tanh(const BigFloat& x);
BigFloat bf_pow_si(const BigFloat& x, long e);
BigFloat bf_max(const BigFloat& a, const BigFloat& b);
BigFloat bf_min(const BigFloat& a, const BigFloat& b);
BigFloat bf_pi(int prec);
/// 2^e at the given precision.
BigFloat bf_pow2(long e, int prec);
/// Nearest integer as a Rational (exact).
Integer bf_round_to_integer(const BigFloat& x);
/// Exact rational value of the float (floats are rationals).
Rational bf_to_rational(const BigFloat& x);
/// Round a value to a rational at `bits` of precision; second member bounds
/// the conversion error.
std::pair<Rational, Rational> rational_approx(const BigFloat& x, int bits);

}  // namespace gpacforge

#endif
