#include "gpacforge/poly.hpp"

#include <algorithm>
#include <numeric>

namespace gpacforge {

MultiPoly MultiPoly::constant(int arity, const Rational& c) {
    MultiPoly p(arity);
    p.add_term(Exponents(arity, 0), c);
    return p;
}

MultiPoly MultiPoly::variable(int arity, int i) {
    if (i < 1 || i > arity) throw DimensionError("variable index out of range");
    MultiPoly p(arity);
    Exponents e(arity, 0);
    e[i - 1] = 1;
    p.add_term(e, Rational(1));
    return p;
}

void MultiPoly::add_term(const Exponents& e, const Rational& c) {
    if (static_cast<int>(e.size()) != arity_)
        throw DimensionError("exponent vector length != arity");
    if (c == 0) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        terms_.emplace(e, c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

std::optional<int> MultiPoly::degree() const {
    if (terms_.empty()) return std::nullopt;
    int deg = 0;
    for (const auto& [e, c] : terms_) {
        int d = std::accumulate(e.begin(), e.end(), 0);
        deg = std::max(deg, d);
    }
    return deg;
}

Rational MultiPoly::sigma() const {
    Rational s(0);
    for (const auto& [e, c] : terms_) s += rat_abs(c);
    return s;
}

MultiPoly MultiPoly::derivative(int i) const {
    if (i < 1 || i > arity_) throw DimensionError("derivative index out of range");
    MultiPoly p(arity_);
    for (const auto& [e, c] : terms_) {
        if (e[i - 1] == 0) continue;
        Exponents d = e;
        d[i - 1] -= 1;
        p.add_term(d, c * Rational(static_cast<long>(e[i - 1])));
    }
    return p;
}

MultiPoly MultiPoly::operator+(const MultiPoly& o) const {
    check_same_arity(o);
    MultiPoly p = *this;
    for (const auto& [e, c] : o.terms_) p.add_term(e, c);
    return p;
}

MultiPoly MultiPoly::operator-(const MultiPoly& o) const {
    check_same_arity(o);
    MultiPoly p = *this;
    for (const auto& [e, c] : o.terms_) p.add_term(e, Rational(-c));
    return p;
}

MultiPoly MultiPoly::operator*(const MultiPoly& o) const {
    check_same_arity(o);
    MultiPoly p(arity_);
    for (const auto& [ea, ca] : terms_) {
        for (const auto& [eb, cb] : o.terms_) {
            Exponents e(arity_);
            for (int i = 0; i < arity_; ++i) e[i] = ea[i] + eb[i];
            p.add_term(e, ca * cb);
        }
    }
    return p;
}

MultiPoly MultiPoly::scale(const Rational& c) const {
    MultiPoly p(arity_);
    if (c == 0) return p;
    for (const auto& [e, k] : terms_) p.add_term(e, k * c);
    return p;
}

MultiPoly MultiPoly::widened(int new_arity) const {
    if (new_arity < arity_) throw DimensionError("widened: smaller arity");
    MultiPoly p(new_arity);
    for (const auto& [e, c] : terms_) {
        Exponents w(new_arity, 0);
        std::copy(e.begin(), e.end(), w.begin());
        p.add_term(w, c);
    }
    return p;
}

Rational MultiPoly::eval(const std::vector<Rational>& x) const {
    return eval_with<Rational>(x, [](const Rational& c) { return c; });
}

BigFloat MultiPoly::eval(const std::vector<BigFloat>& x) const {
    int prec = x.empty() ? BigFloat::default_precision() : x[0].precision();
    return eval_with<BigFloat>(x, [prec](const Rational& c) { return BigFloat(c, prec); });
}

Rational sigma_of(const std::vector<MultiPoly>& p) {
    Rational s(0);
    for (const auto& q : p) s = std::max(s, q.sigma());
    return s;
}

std::optional<int> degree_of(const std::vector<MultiPoly>& p) {
    std::optional<int> deg;
    for (const auto& q : p) {
        auto d = q.degree();
        if (d && (!deg || *d > *deg)) deg = d;
    }
    return deg;
}

}  // namespace gpacforge
