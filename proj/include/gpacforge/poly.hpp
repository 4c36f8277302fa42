#ifndef GPACFORGE_POLY_HPP
#define GPACFORGE_POLY_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "gpacforge/bigfloat.hpp"
#include "gpacforge/rational.hpp"

namespace gpacforge {

/// Sparse multivariate polynomial with exact rational coefficients. Exponent
/// vectors are dense per term (arities stay small, <~40 after closure).
/// Canonical form: no zero coefficients, exponent vectors pairwise distinct.
class MultiPoly {
  public:
    using Exponents = std::vector<std::uint32_t>;

    explicit MultiPoly(int arity = 0) : arity_(arity) {}

    static MultiPoly constant(int arity, const Rational& c);
    /// The monomial x_i (1-based index).
    static MultiPoly variable(int arity, int i);

    int arity() const { return arity_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    const std::map<Exponents, Rational>& terms() const { return terms_; }

    /// Adds c * x^e, restoring canonical form.
    void add_term(const Exponents& e, const Rational& c);

    /// `nullopt` encodes deg 0 = -infinity.
    std::optional<int> degree() const;
    /// Sum of the absolute values of the coefficients.
    Rational sigma() const;

    MultiPoly derivative(int i) const;  // partial derivative, 1-based index

    MultiPoly operator+(const MultiPoly& o) const;
    MultiPoly operator-(const MultiPoly& o) const;
    MultiPoly operator*(const MultiPoly& o) const;
    MultiPoly scale(const Rational& c) const;
    MultiPoly operator-() const { return scale(Rational(-1)); }

    bool operator==(const MultiPoly& o) const {
        return arity_ == o.arity_ && terms_ == o.terms_;
    }

    /// Extends the polynomial to a larger arity (extra variables unused).
    MultiPoly widened(int new_arity) const;

    Rational eval(const std::vector<Rational>& x) const;
    BigFloat eval(const std::vector<BigFloat>& x) const;

    /// Generic evaluation for any ring that supports v*v, v+v and
    /// construction from a Rational coefficient via `lift`.
    template <class T, class Lift>
    T eval_with(const std::vector<T>& x, Lift lift) const {
        if (static_cast<int>(x.size()) != arity_)
            throw DimensionError("poly_eval: arity mismatch");
        T acc = lift(Rational(0));
        for (const auto& [e, c] : terms_) {
            T m = lift(c);
            for (int i = 0; i < arity_; ++i)
                for (std::uint32_t k = 0; k < e[i]; ++k) m = m * x[i];
            acc = acc + m;
        }
        return acc;
    }

  private:
    void check_same_arity(const MultiPoly& o) const {
        if (arity_ != o.arity_) throw DimensionError("polynomial arity mismatch");
    }
    int arity_;
    std::map<Exponents, Rational> terms_;
};

/// The vector-of-polynomials forms of Σp and deg used by the solver cost
/// model: maxima over components.
Rational sigma_of(const std::vector<MultiPoly>& p);
std::optional<int> degree_of(const std::vector<MultiPoly>& p);

}  // namespace gpacforge

#endif
