#include "gpacforge/tm.hpp"

#include <algorithm>

#include "gpacforge/gadgets.hpp"

namespace gpacforge::tm {

const Transition& Machine::at(int q, int s) const {
    if (q < 0 || q >= states || s < 0 || s > base - 2)
        throw DomainError("transition lookup outside Q x Sigma");
    return delta[q][s];
}

void Machine::validate() const {
    if (states < 1 || base < 2) throw DomainError("machine: need m >= 1 and k >= 2");
    if (q0 < 0 || q0 >= states || qinf < 0 || qinf >= states)
        throw DomainError("machine: q0/qinf out of range");
    if (static_cast<int>(delta.size()) != states)
        throw DomainError("machine: delta must have one row block per state");
    for (int q = 0; q < states; ++q) {
        if (static_cast<int>(delta[q].size()) != base - 1)
            throw DomainError("machine: delta must be total on Q x Sigma");
        for (int s = 0; s <= base - 2; ++s) {
            const Transition& t = delta[q][s];
            if (t.q2 < 0 || t.q2 >= states || t.s2 < 0 || t.s2 > base - 2)
                throw DomainError("machine: transition target out of range");
            if (q == qinf && !(t.q2 == qinf && t.s2 == s && t.move == Move::S))
                throw DomainError("machine: halting state must satisfy delta(qinf,s)=(qinf,s,S)");
        }
    }
    for (const auto& [letter, code] : gamma) {
        if (code < 1 || code > base - 2)
            throw DomainError("machine: gamma must map letters into 1..k-2");
        for (const auto& [l2, c2] : gamma)
            if (l2 != letter && c2 == code) throw DomainError("machine: gamma must be injective");
    }
}

std::vector<int> Machine::gamma_word(const std::vector<int>& letters) const {
    std::vector<int> out;
    out.reserve(letters.size());
    for (int l : letters) {
        auto it = gamma.find(l);
        if (it == gamma.end()) throw DomainError("gamma: unknown input letter");
        out.push_back(it->second);
    }
    return out;
}

std::vector<int> Machine::gamma_inverse_word(const std::vector<int>& symbols) const {
    std::vector<int> out;
    out.reserve(symbols.size());
    for (int s : symbols) {
        int found = -1;
        for (const auto& [letter, code] : gamma)
            if (code == s) found = letter;
        if (found < 0) throw DomainError("gamma: symbol has no preimage");
        out.push_back(found);
    }
    return out;
}

void Config::canonicalize() {
    while (!left.empty() && left.back() == 0) left.pop_back();
    while (!right.empty() && right.back() == 0) right.pop_back();
}

Config Config::initial(const Machine& m, const std::vector<int>& tape_word) {
    Config c{{}, 0, tape_word, m.q0};
    c.canonicalize();
    return c;
}

Config Config::final_of(const Machine& m, const std::vector<int>& tape_word) {
    Config c{{}, 0, tape_word, m.qinf};
    c.canonicalize();
    return c;
}

bool Config::is_final_form(const Machine& m) const {
    return state == m.qinf && left.empty() && sym == 0;
}

Config tm_step(const Machine& m, const Config& c) {
    const Transition& t = m.at(c.state, c.sym);
    Config n;
    n.state = t.q2;
    switch (t.move) {
        case Move::L:
            if (c.left.empty()) {
                n.left = {};
                n.sym = 0;
            } else {
                n.sym = c.left.front();
                n.left.assign(c.left.begin() + 1, c.left.end());
            }
            n.right = c.right;
            n.right.insert(n.right.begin(), t.s2);
            break;
        case Move::S:
            n.left = c.left;
            n.sym = t.s2;
            n.right = c.right;
            break;
        case Move::R:
            n.left = c.left;
            n.left.insert(n.left.begin(), t.s2);
            if (c.right.empty()) {
                n.sym = 0;
                n.right = {};
            } else {
                n.sym = c.right.front();
                n.right.assign(c.right.begin() + 1, c.right.end());
            }
            break;
    }
    n.canonicalize();
    return n;
}

std::optional<std::vector<int>> tm_run(const Machine& m, const std::vector<int>& w,
                                       long max_steps) {
    if (max_steps < 0) throw DomainError("tm_run: max_steps must be >= 0");
    Config c = Config::initial(m, w);
    for (long i = 0; i <= max_steps; ++i) {
        if (c.state == m.qinf) {
            if (c.is_final_form(m)) return c.right;
            return std::nullopt;  // frozen in a non-final shape
        }
        if (i == max_steps) break;
        c = tm_step(m, c);
    }
    return std::nullopt;
}

EncodedWord encode_word(const std::vector<int>& w, int k) {
    if (k < 2) throw DomainError("encode: k must be >= 2");
    Rational v(0);
    Rational scale(1);
    for (int s : w) {
        if (s < 0 || s > k - 2) throw DomainError("encode: symbol outside alphabet");
        scale /= k;
        v += scale * s;
    }
    return {v, static_cast<int>(w.size())};
}

std::vector<int> decode_exact_word(const Rational& x, int k) {
    if (x < 0 || x > Rational(k - 1, k)) throw DomainError("decode: value out of range");
    std::vector<int> w;
    Rational v = x;
    // an exact encoding terminates; anything else trips the digit checks
    for (int guard = 0; v != 0; ++guard) {
        if (guard > 4096) throw DomainError("decode: not an exact base-k encoding");
        v *= k;
        Integer d = rat_floor(v);
        long di = mpz_get_si(d.get_mpz_t());
        if (di < 0 || di > k - 2) throw DomainError("decode: digit outside alphabet");
        w.push_back(static_cast<int>(di));
        v -= Rational(d);
    }
    while (!w.empty() && w.back() == 0) w.pop_back();
    return w;
}

RealConfig encode_config(const Machine& m, const Config& c) {
    return {encode_word(c.left, m.base).value, Rational(c.sym),
            encode_word(c.right, m.base).value, Rational(c.state)};
}

Config decode_config(const Machine& m, const RealConfig& rc) {
    if (rc[1].get_den() != 1 || rc[3].get_den() != 1)
        throw DomainError("decode: head symbol and state must be integers");
    Config c;
    c.left = decode_exact_word(rc[0], m.base);
    c.right = decode_exact_word(rc[2], m.base);
    c.sym = static_cast<int>(rc[1].get_num().get_si());
    c.state = static_cast<int>(rc[3].get_num().get_si());
    if (c.sym < 0 || c.sym > m.base - 2 || c.state < 0 || c.state >= m.states)
        throw DomainError("decode: symbol or state out of range");
    return c;
}

namespace {

Rational q_int(const Rational& x) {
    Integer f = rat_floor(x);
    if (f < 0) return Rational(0);
    return Rational(f);
}

Rational q_frac(const Rational& x) { return x - q_int(x); }

}  // namespace

RealConfig ideal_real_step(const Machine& m, const RealConfig& rc) {
    Config c = decode_config(m, rc);  // domain check: exact encodings only
    const Transition& t = m.at(c.state, c.sym);
    const int k = m.base;
    Rational xt = rc[0], yt = rc[2];
    Rational sp(t.s2), qp(t.q2);
    switch (t.move) {
        case Move::L:
            return {q_frac(k * xt), q_int(k * xt), (sp + yt) / k, qp};
        case Move::S:
            return {xt, sp, yt, qp};
        case Move::R:
            return {(sp + xt) / k, q_int(k * yt), q_frac(k * yt), qp};
    }
    throw Error("unreachable move");
}

MultiPoly lagrange_interp(const std::vector<std::vector<Rational>>& axes,
                          const std::function<Rational(const std::vector<int>&)>& f) {
    const int d = static_cast<int>(axes.size());
    if (d == 0) throw DomainError("lagrange: need at least one axis");
    for (const auto& axis : axes) {
        if (axis.empty()) throw DomainError("lagrange: empty axis");
        for (size_t i = 0; i < axis.size(); ++i)
            for (size_t j = i + 1; j < axis.size(); ++j)
                if (axis[i] == axis[j]) throw DomainError("lagrange: degenerate grid");
    }
    std::vector<std::vector<MultiPoly>> basis(d);
    for (int a = 0; a < d; ++a) {
        for (size_t i = 0; i < axes[a].size(); ++i) {
            MultiPoly b = MultiPoly::constant(d, Rational(1));
            MultiPoly xa = MultiPoly::variable(d, a + 1);
            for (size_t j = 0; j < axes[a].size(); ++j) {
                if (j == i) continue;
                Rational den = axes[a][i] - axes[a][j];
                b = b * (xa - MultiPoly::constant(d, axes[a][j])).scale(1 / den);
            }
            basis[a].push_back(std::move(b));
        }
    }
    MultiPoly acc(d);
    std::vector<int> idx(d, 0);
    while (true) {
        Rational v = f(idx);
        if (v != 0) {
            MultiPoly term = MultiPoly::constant(d, v);
            for (int a = 0; a < d; ++a) term = term * basis[a][idx[a]];
            acc = acc + term;
        }
        int a = 0;
        for (; a < d; ++a) {
            if (++idx[a] < static_cast<int>(axes[a].size())) break;
            idx[a] = 0;
        }
        if (a == d) break;
    }
    return acc;
}

MultiPoly char_interp(const std::vector<std::vector<Rational>>& axes,
                      const std::function<Rational(const std::vector<int>&)>& f,
                      const Rational& alpha) {
    return lagrange_interp(axes, [&](const std::vector<int>& idx) {
        return f(idx) == alpha ? Rational(1) : Rational(0);
    });
}

CompiledStep compile_step(const Machine& m) {
    m.validate();
    CompiledStep cs;
    cs.machine = &m;
    std::vector<std::vector<Rational>> grid(2);
    for (int q = 0; q < m.states; ++q) grid[0].emplace_back(q);
    for (int s = 0; s <= m.base - 2; ++s) grid[1].emplace_back(s);
    auto surf = [&](auto pick) {
        return lagrange_interp(grid, [&](const std::vector<int>& idx) {
            return Rational(pick(m.at(idx[0], idx[1])));
        });
    };
    cs.d1 = surf([](const Transition& t) { return t.q2; });
    cs.d2 = surf([](const Transition& t) { return t.s2; });
    cs.d3 = surf([](const Transition& t) { return static_cast<int>(t.move); });
    std::vector<std::vector<Rational>> moves{{Rational(-1), Rational(0), Rational(1)}};
    auto ident = [](const std::vector<int>& idx) { return Rational(idx[0] - 1); };
    cs.chooseL = char_interp(moves, ident, Rational(-1));
    cs.chooseS = char_interp(moves, ident, Rational(0));
    cs.chooseR = char_interp(moves, ident, Rational(1));
    return cs;
}

RealConfig real_step_exact(const CompiledStep& cs, const RealConfig& cbar, const Rational& rho) {
    const Machine& m = *cs.machine;
    const int k = m.base;
    const Rational& xb = cbar[0];
    const Rational& yb = cbar[2];
    Rational sg = gadgets::rnd_star_exact(cbar[1], rho);
    Rational qg = gadgets::rnd_star_exact(cbar[3], rho);
    std::vector<Rational> qs{qg, sg};
    Rational q2 = cs.d1.eval(qs), s2 = cs.d2.eval(qs), d = cs.d3.eval(qs);
    Rational cl = cs.chooseL.eval(std::vector<Rational>{d});
    Rational cm = cs.chooseS.eval(std::vector<Rational>{d});
    Rational cr = cs.chooseR.eval(std::vector<Rational>{d});
    Rational rho_k = rho / k;
    auto int_star = [&](const Rational& v) {
        return gadgets::rnd_star_exact(v - Rational(1, 2) + Rational(1, 2 * k), rho_k);
    };
    Rational ix = int_star(k * xb), iy = int_star(k * yb);
    Rational fx = k * xb - ix, fy = k * yb - iy;
    return {cl * fx + cm * xb + cr * ((s2 + xb) / k),
            cl * ix + cm * s2 + cr * iy,
            cl * ((s2 + yb) / k) + cm * yb + cr * fy,
            q2};
}

Rational robustness_radius(int k, const Rational& rho) {
    Rational r = Rational(1, 2 * k * k) - rho;
    if (r <= 0) throw DomainError("robustness radius empty: rho too large for this k");
    return r;
}

std::array<SimDag::NodeId, 4> real_step_nodes(const CompiledStep& cs, SimDag& dag,
                                              const std::array<SimDag::NodeId, 4>& w,
                                              const Rational& rho) {
    const Machine& m = *cs.machine;
    const int k = m.base;
    const int prec = dag.precision();
    BigFloat rho_f(rho, prec), rho_k(rho / k, prec);
    auto sg = dag.rnd_star(w[1], rho_f);
    auto qg = dag.rnd_star(w[3], rho_f);
    std::vector<SimDag::NodeId> qs{qg, sg};
    auto q2 = dag.poly(cs.d1, qs), s2 = dag.poly(cs.d2, qs), d = dag.poly(cs.d3, qs);
    std::vector<SimDag::NodeId> dv{d};
    auto cl = dag.poly(cs.chooseL, dv);
    auto cm = dag.poly(cs.chooseS, dv);
    auto cr = dag.poly(cs.chooseR, dv);
    auto kx = dag.mul(dag.constant(Rational(k)), w[0]);
    auto ky = dag.mul(dag.constant(Rational(k)), w[2]);
    auto shift = dag.constant(Rational(1, 2 * k) - Rational(1, 2));
    auto ix = dag.rnd_star(dag.add(kx, shift), rho_k);
    auto iy = dag.rnd_star(dag.add(ky, shift), rho_k);
    auto fx = dag.sub(kx, ix);
    auto fy = dag.sub(ky, iy);
    auto invk = dag.constant(Rational(1, k));
    auto mix3 = [&](SimDag::NodeId l, SimDag::NodeId s, SimDag::NodeId r) {
        return dag.add(dag.add(dag.mul(cl, l), dag.mul(cm, s)), dag.mul(cr, r));
    };
    return {mix3(fx, w[0], dag.mul(invk, dag.add(s2, w[0]))),
            mix3(ix, s2, iy),
            mix3(dag.mul(invk, dag.add(s2, w[2])), w[2], fy),
            q2};
}

Decoded decode_word(const Rational& x, int n, int k1, int k2,
                    const std::function<int(int)>& kappa, const Rational& rho) {
    if (n < 0) throw DomainError("decode_word: n must be >= 0");
    if (k1 < 2 || k2 < 1) throw DomainError("decode_word: bad bases");
    if (rho <= 0 || rho > 1) throw DomainError("decode_word: rho = e^-mu must lie in (0, 1]");
    // Head extraction uses int*(v) = rnd*(v - 1/2 + (3/4) kap rho, kap rho / 4)
    // with kap = k1^(1-n). The kap factor makes the plateau cover the whole
    // admissible tube x - 0.w in [0, k1^-|w| (1 - rho)] for words up to
    // length n; a length-independent shift only covers |w| <= 1.
    Rational kap = rat_pow(Rational(1, k1), static_cast<unsigned long>(n > 0 ? n - 1 : 0));
    Rational rho4 = kap * rho / 4;
    Rational cur = x;
    Rational out(0);
    Rational scale(1);
    long nonzero = 0;
    for (int i = 0; i < n; ++i) {
        Rational shifted = k1 * cur - Rational(1, 2) + Rational(3) * rho4;
        Rational head = gadgets::rnd_star_exact(shifted, rho4);
        if (head.get_den() != 1) throw UndecodableError("decode_word: head digit in a gap");
        long hd = head.get_num().get_si();
        if (hd < 0 || hd >= k1) throw UndecodableError("decode_word: head digit out of range");
        int mapped = kappa(static_cast<int>(hd));
        if (mapped < 0 || mapped >= k2) throw UndecodableError("decode_word: kappa out of range");
        scale /= k2;
        out += scale * mapped;
        if (hd != 0) ++nonzero;
        cur = k1 * cur - head;
    }
    return {out, nonzero};
}

Decoded reenc(const Rational& x, int n, int k1, int k2, const std::function<int(int)>& kappa) {
    return decode_word(x, n, k1, k2, kappa, Rational(1));  // mu = 0: exact encodings only
}

long tlength(const Rational& x, int n_upper, int k) {
    auto id = [](int s) { return s; };
    return decode_word(x, n_upper, k, k, id, Rational(1)).nonzero;
}

// ---------------------------------------------------------------------------

Json machine_to_json(const Machine& m) {
    m.validate();
    Json rows = Json::array();
    for (int q = 0; q < m.states; ++q)
        for (int s = 0; s <= m.base - 2; ++s) {
            const Transition& t = m.at(q, s);
            const char* mv = t.move == Move::L ? "L" : (t.move == Move::S ? "S" : "R");
            rows.push_back(Json{{"q", q}, {"s", s}, {"q2", t.q2}, {"s2", t.s2}, {"move", mv}});
        }
    Json g = Json::object();
    for (const auto& [letter, code] : m.gamma) g[std::to_string(letter)] = code;
    return Json{{"states", m.states}, {"base", m.base}, {"q0", m.q0},
                {"qinf", m.qinf},     {"delta", rows},  {"gamma", g}};
}

Machine machine_from_json(const Json& j) {
    for (const char* key : {"states", "base", "q0", "qinf", "delta"})
        if (!j.contains(key))
            throw ParseError(std::string("machine: missing field '") + key + "'");
    Machine m;
    m.states = j["states"].get<int>();
    m.base = j["base"].get<int>();
    m.q0 = j["q0"].get<int>();
    m.qinf = j["qinf"].get<int>();
    if (m.states < 1 || m.base < 2) throw ParseError("machine: bad states/base");
    m.delta.assign(m.states, std::vector<Transition>(m.base - 1));
    std::vector<std::vector<bool>> seen(m.states, std::vector<bool>(m.base - 1, false));
    for (const auto& row : j["delta"]) {
        for (const char* key : {"q", "s", "q2", "s2", "move"})
            if (!row.contains(key))
                throw ParseError(std::string("machine: delta row missing '") + key + "'");
        int q = row["q"].get<int>(), s = row["s"].get<int>();
        if (q < 0 || q >= m.states || s < 0 || s > m.base - 2)
            throw ParseError("machine: delta row outside Q x Sigma");
        if (seen[q][s]) throw ParseError("machine: duplicate delta row");
        seen[q][s] = true;
        std::string mv = row["move"].get<std::string>();
        Move move;
        if (mv == "L") move = Move::L;
        else if (mv == "S") move = Move::S;
        else if (mv == "R") move = Move::R;
        else throw ParseError("machine: move must be L, S or R");
        m.delta[q][s] = Transition{row["q2"].get<int>(), row["s2"].get<int>(), move};
    }
    for (int q = 0; q < m.states; ++q)
        for (int s = 0; s <= m.base - 2; ++s)
            if (!seen[q][s])
                throw ParseError("machine: delta must list every (q, s) pair explicitly");
    if (j.contains("gamma"))
        for (const auto& [letter, code] : j["gamma"].items())
            m.gamma[std::stoi(letter)] = code.get<int>();
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// Machine library

namespace {
Machine build(int states, int base, int q0, int qinf,
              std::initializer_list<std::array<int, 5>> rows, std::map<int, int> gamma) {
    Machine m;
    m.states = states;
    m.base = base;
    m.q0 = q0;
    m.qinf = qinf;
    m.gamma = std::move(gamma);
    m.delta.assign(states, std::vector<Transition>(base - 1));
    for (const auto& r : rows)
        m.delta[r[0]][r[1]] = Transition{r[2], r[3], static_cast<Move>(r[4])};
    m.validate();
    return m;
}
constexpr int ML = -1, MS = 0, MR = 1;
}  // namespace

Machine unary_increment_prepend() {
    return build(3, 3, 0, 1,
                 {{0, 0, 1, 1, ML},
                  {0, 1, 0, 1, MS},
                  {1, 0, 1, 0, MS},
                  {1, 1, 1, 1, MS},
                  {2, 0, 2, 0, MS},
                  {2, 1, 2, 1, MS}},
                 {{0, 1}});
}

Machine unary_increment_append() {
    return build(4, 3, 0, 3,
                 {{0, 0, 1, 0, MR},
                  {0, 1, 0, 1, MS},
                  {1, 0, 2, 1, ML},
                  {1, 1, 1, 1, MR},
                  {2, 0, 3, 0, MS},
                  {2, 1, 2, 1, ML},
                  {3, 0, 3, 0, MS},
                  {3, 1, 3, 1, MS}},
                 {{0, 1}});
}

Machine binary_successor() {
    return build(5, 4, 0, 4,
                 {{0, 0, 1, 0, MR}, {0, 1, 0, 1, MS}, {0, 2, 0, 2, MS},
                  {1, 0, 2, 0, ML}, {1, 1, 1, 1, MR}, {1, 2, 1, 2, MR},
                  {2, 0, 3, 2, ML}, {2, 1, 3, 2, ML}, {2, 2, 2, 1, ML},
                  {3, 0, 4, 0, MS}, {3, 1, 3, 1, ML}, {3, 2, 3, 2, ML},
                  {4, 0, 4, 0, MS}, {4, 1, 4, 1, MS}, {4, 2, 4, 2, MS}},
                 {{0, 1}, {1, 2}});
}

Machine parity_checker() {
    return build(4, 4, 0, 3,
                 {{0, 0, 1, 0, MR}, {0, 1, 0, 1, MS}, {0, 2, 0, 2, MS},
                  {1, 0, 3, 2, ML}, {1, 1, 2, 0, MR}, {1, 2, 2, 0, MR},
                  {2, 0, 3, 1, ML}, {2, 1, 1, 0, MR}, {2, 2, 1, 0, MR},
                  {3, 0, 3, 0, MS}, {3, 1, 3, 1, MS}, {3, 2, 3, 2, MS}},
                 {{0, 1}, {1, 2}});
}

Machine rotate_k5() {
    return build(2, 5, 0, 1,
                 {{0, 0, 1, 0, MS}, {0, 1, 0, 2, MR}, {0, 2, 0, 3, MR}, {0, 3, 0, 1, MR},
                  {1, 0, 1, 0, MS}, {1, 1, 1, 1, MS}, {1, 2, 1, 2, MS}, {1, 3, 1, 3, MS}},
                 {{0, 1}, {1, 2}, {2, 3}});
}

}  // namespace gpacforge::tm
