#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gpacforge/io.hpp"
#include "gpacforge/poly.hpp"

using namespace gpacforge;

namespace {

MultiPoly from_terms(int arity,
                     std::initializer_list<std::pair<std::vector<std::uint32_t>, long>> ts) {
    MultiPoly p(arity);
    for (const auto& [e, c] : ts) p.add_term(e, Rational(c));
    return p;
}

MultiPoly random_poly(std::mt19937_64& rng, int arity, int max_terms) {
    std::uniform_int_distribution<int> nterms(0, max_terms);
    std::uniform_int_distribution<int> expo(0, 3);
    std::uniform_int_distribution<long> coef(-6, 6);
    MultiPoly p(arity);
    int n = nterms(rng);
    for (int t = 0; t < n; ++t) {
        std::vector<std::uint32_t> e(arity);
        for (auto& x : e) x = expo(rng);
        p.add_term(e, Rational(coef(rng)));
    }
    return p;
}

std::vector<Rational> random_point(std::mt19937_64& rng, int arity) {
    std::uniform_int_distribution<long> num(-8, 8);
    std::vector<Rational> x;
    for (int i = 0; i < arity; ++i) x.push_back(Rational(num(rng), 3));
    return x;
}

}  // namespace

TEST_CASE("rational canonical form") {
    Rational q = rational_from_strings("-6", "-4");
    CHECK(q == Rational(3, 2));
    CHECK(q.get_den() == 2);
    CHECK_THROWS_AS(rational_from_strings("1", "0"), ParseError);
    CHECK(rat_round(Rational(7, 2)) == 4);   // ties away from zero
    CHECK(rat_round(Rational(-7, 2)) == -4);
    CHECK(rat_round(Rational(34, 10)) == 3);
}

TEST_CASE("poly_eval basics") {
    // x1^2 + 1 at 0
    auto p = from_terms(1, {{{2}, 1}, {{0}, 1}});
    CHECK(p.eval(std::vector<Rational>{Rational(0)}) == 1);
    // 3x^2 - 2x + 1 at 2
    auto q = from_terms(1, {{{2}, 3}, {{1}, -2}, {{0}, 1}});
    CHECK(q.eval(std::vector<Rational>{Rational(2)}) == 9);
    // zero polynomial
    MultiPoly z(1);
    CHECK(z.eval(std::vector<Rational>{Rational(17)}) == 0);
    CHECK_THROWS_AS(q.eval(std::vector<Rational>{Rational(1), Rational(2)}), DimensionError);
}

TEST_CASE("poly_degree and the minus-infinity marker") {
    auto p = from_terms(2, {{{2, 1}, 1}, {{1, 0}, 1}});  // x1^2 x2 + x1
    CHECK(p.degree() == 3);
    auto c = from_terms(1, {{{0}, 5}});
    CHECK(c.degree() == 0);
    CHECK_FALSE(MultiPoly(3).degree().has_value());  // deg 0 = -inf
}

TEST_CASE("poly_sigma") {
    auto p = from_terms(1, {{{2}, 3}, {{1}, -2}, {{0}, 1}});
    CHECK(p.sigma() == 6);
    CHECK(MultiPoly(2).sigma() == 0);
    std::vector<MultiPoly> vec{from_terms(1, {{{1}, 1}}), from_terms(1, {{{1}, 2}, {{0}, 1}})};
    CHECK(sigma_of(vec) == 3);
}

TEST_CASE("poly_derivative") {
    auto p = from_terms(2, {{{2, 1}, 1}});  // x1^2 x2
    auto d1 = p.derivative(1);
    CHECK(d1 == from_terms(2, {{{1, 1}, 2}}));
    CHECK(from_terms(2, {{{0, 0}, 7}}).derivative(1).is_zero());
    CHECK(from_terms(2, {{{1, 0}, 1}}).derivative(2).is_zero());
}

TEST_CASE("poly arithmetic identities") {
    auto x = MultiPoly::variable(1, 1);
    auto one = MultiPoly::constant(1, Rational(1));
    auto sum = (x + one) + (x - one);
    CHECK(sum == x.scale(Rational(2)));
    auto p = from_terms(1, {{{3}, 2}, {{1}, -1}});
    CHECK((p * MultiPoly(1)).is_zero());
    CHECK(p * MultiPoly::constant(1, Rational(1)) == p);
    CHECK_THROWS_AS(p + MultiPoly(2), DimensionError);
}

TEST_CASE("canonical form is idempotent and exact") {
    MultiPoly p(2);
    p.add_term({1, 1}, Rational(1, 2));
    p.add_term({1, 1}, Rational(-1, 2));
    CHECK(p.is_zero());
    p.add_term({0, 1}, Rational(2, 4));
    CHECK(p.terms().begin()->second == Rational(1, 2));
}

TEST_CASE("ring and calculus properties on random polynomials") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 150; ++trial) {
        int arity = 1 + static_cast<int>(rng() % 3);
        MultiPoly p = random_poly(rng, arity, 5);
        MultiPoly q = random_poly(rng, arity, 5);
        auto x = random_point(rng, arity);
        // additivity of evaluation
        CHECK((p + q).eval(x) == p.eval(x) + q.eval(x));
        // sigma submultiplicativity, degree additivity
        CHECK((p * q).sigma() <= p.sigma() * q.sigma());
        auto dp = p.degree();
        auto dq = q.degree();
        auto dpq = (p * q).degree();
        if (dp && dq) {
            REQUIRE(dpq.has_value());
            CHECK(*dpq == *dp + *dq);
        } else {
            CHECK_FALSE(dpq.has_value());
        }
        // derivative linearity and the Leibniz rule
        int i = 1 + static_cast<int>(rng() % arity);
        CHECK((p + q).derivative(i) == p.derivative(i) + q.derivative(i));
        CHECK((p * q).derivative(i) == p.derivative(i) * q + p * q.derivative(i));
    }
}

TEST_CASE("bigfloat behavior") {
    BigFloat a(Rational(1, 3), 128);
    CHECK(a.precision() == 128);
    CHECK(bf_abs(-a) == a);
    // conversion error is within half an ulp
    auto [q, err] = rational_approx(bf_pi(256), 128);
    CHECK(rat_abs(q - bf_to_rational(bf_pi(256))) <= err);
    CHECK(BigFloat(2l, 64).precision() == 64);
    // round trip through the decimal printer
    BigFloat x(Rational(-355, 113), 96);
    std::string s = x.str();
    CHECK(s.find('e') != std::string::npos);
}

TEST_CASE("polynomial JSON round trip") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        MultiPoly p = random_poly(rng, 2, 6);
        CHECK(poly_from_json(poly_to_json(p)) == p);
    }
    // big integers survive as decimal strings
    MultiPoly big(1);
    big.add_term({1}, rational_from_strings("123456789012345678901234567890", "7"));
    CHECK(poly_from_json(poly_to_json(big)) == big);
    CHECK_THROWS_AS(poly_from_json(Json{{"arity", 1}}), ParseError);
}
