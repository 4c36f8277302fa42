#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gpacforge/tm.hpp"

using namespace gpacforge;
using namespace gpacforge::tm;

TEST_CASE("machine validation") {
    Machine m = binary_successor();
    m.validate();
    // halting state must freeze
    Machine bad = m;
    bad.delta[bad.qinf][0] = Transition{0, 0, Move::S};
    CHECK_THROWS_AS(bad.validate(), DomainError);
    Machine bad2 = m;
    bad2.gamma[5] = 2;  // not injective
    CHECK_THROWS_AS(bad2.validate(), DomainError);
}

TEST_CASE("step function: named cases") {
    Machine m = binary_successor();
    // halting config maps to itself
    Config halt{{}, 0, {1, 2}, m.qinf};
    CHECK(tm_step(m, halt) == halt);
    // S move changes only symbol and state
    Machine u = unary_increment_append();
    Config before{{1}, 0, {}, 2};  // q_left reading blank -> halt, stay
    Config after = tm_step(u, before);
    CHECK(after.left == before.left);
    CHECK(after.right == before.right);
    CHECK(after.state == u.qinf);
    // hand-traced: one step of the 3-state unary incrementer from c0("11")
    Machine p = unary_increment_prepend();
    Config c0 = Config::initial(p, {1, 1});
    Config c1 = tm_step(p, c0);
    CHECK(c1 == Config::final_of(p, {1, 1, 1}));
}

TEST_CASE("runs: identity-like, successor, timeout") {
    Machine p = unary_increment_prepend();
    auto r = tm_run(p, {1, 1}, 10);
    REQUIRE(r.has_value());
    CHECK(*r == std::vector<int>{1, 1, 1});

    Machine s = binary_successor();
    auto succ = tm_run(s, s.gamma_word({0, 1, 1}), 50);
    REQUIRE(succ.has_value());
    CHECK(s.gamma_inverse_word(*succ) == std::vector<int>{1, 0, 0});
    auto wrap = tm_run(s, s.gamma_word({1, 1, 1}), 50);
    REQUIRE(wrap.has_value());
    CHECK(s.gamma_inverse_word(*wrap) == std::vector<int>{1, 0, 0, 0});

    // a machine that never halts on its input: spin in place
    Machine loop = p;
    loop.delta[0][0] = Transition{0, 0, Move::S};
    CHECK_FALSE(tm_run(loop, {1}, 100).has_value());
}

TEST_CASE("encoding examples and range") {
    // gamma = {0 -> 1, 1 -> 2}, k = 4: psi4("10") = (2/4 + 1/16, 2)
    Machine s = binary_successor();
    auto enc = encode_word(s.gamma_word({1, 0}), 4);
    CHECK(enc.value == Rational(9, 16));
    CHECK(enc.length == 2);
    auto empty = encode_word({}, 4);
    CHECK(empty.value == 0);
    CHECK(empty.length == 0);
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        int k = 3 + static_cast<int>(rng() % 3);
        std::vector<int> w(rng() % 7);
        for (auto& d : w) d = static_cast<int>(rng() % (k - 1));
        CHECK(encode_word(w, k).value <= Rational(k - 1, k));
        CHECK(encode_word(w, k).value >= 0);
    }
    CHECK_THROWS_AS(encode_word({3}, 4), DomainError);
}

TEST_CASE("ideal real step is encode-conjugate to the step function") {
    std::mt19937_64 rng(9);
    for (const Machine& m :
         {unary_increment_append(), binary_successor(), parity_checker(), rotate_k5()}) {
        for (int trial = 0; trial < 20; ++trial) {
            auto rand_word = [&] {
                std::vector<int> w(rng() % 5);
                for (auto& d : w) d = static_cast<int>(rng() % (m.base - 1));
                while (!w.empty() && w.back() == 0) w.pop_back();
                return w;
            };
            Config c{rand_word(), static_cast<int>(rng() % (m.base - 1)), rand_word(),
                     static_cast<int>(rng() % m.states)};
            RealConfig enc = encode_config(m, c);
            CHECK(decode_config(m, enc) == c);
            CHECK(ideal_real_step(m, enc) == encode_config(m, tm_step(m, c)));
        }
    }
    // halting encodings are fixed points
    Machine m = binary_successor();
    Config halt{{}, 0, {2, 1}, m.qinf};
    CHECK(ideal_real_step(m, encode_config(m, halt)) == encode_config(m, halt));
    // a non-encoding is rejected
    CHECK_THROWS_AS(ideal_real_step(m, RealConfig{Rational(1, 3), Rational(0), Rational(0),
                                                  Rational(0)}),
                    DomainError);
}

TEST_CASE("lagrange interpolation") {
    // single point -> constant
    auto c = lagrange_interp({{Rational(5)}}, [](const std::vector<int>&) { return Rational(7); });
    CHECK(c == MultiPoly::constant(1, Rational(7)));
    // identity on {0, 1}
    auto idp = lagrange_interp({{Rational(0), Rational(1)}},
                               [](const std::vector<int>& i) { return Rational(i[0]); });
    CHECK(idp == MultiPoly::variable(1, 1));
    // characteristic surface on a 2x2 grid
    std::vector<std::vector<Rational>> grid{{Rational(0), Rational(1)},
                                            {Rational(0), Rational(1)}};
    auto f = [](const std::vector<int>& i) { return Rational(i[0] == 1 && i[1] == 0 ? -1 : 0); };
    auto chi = char_interp(grid, f, Rational(-1));
    for (int a = 0; a <= 1; ++a)
        for (int b = 0; b <= 1; ++b) {
            Rational v = chi.eval(std::vector<Rational>{Rational(a), Rational(b)});
            CHECK(v == Rational(a == 1 && b == 0 ? 1 : 0));
        }
    CHECK_THROWS_AS(lagrange_interp({{Rational(1), Rational(1)}},
                                    [](const std::vector<int>&) { return Rational(0); }),
                    DomainError);
}

TEST_CASE("robust step equals the ideal step on exact encodings") {
    for (const Machine& m : {unary_increment_append(), binary_successor(), rotate_k5()}) {
        CompiledStep cs = compile_step(m);
        Rational rho(1, 4 * m.base * m.base);
        Config c = Config::initial(m, m.gamma_word({0}));
        for (int i = 0; i < 8; ++i) {
            RealConfig enc = encode_config(m, c);
            CHECK(real_step_exact(cs, enc, rho) == ideal_real_step(m, enc));
            c = tm_step(m, c);
        }
    }
}

TEST_CASE("robustness bound with interior perturbations") {
    std::mt19937_64 rng(31);
    Machine m = binary_successor();
    CompiledStep cs = compile_step(m);
    const int k = m.base;
    Rational rho(1, 4 * k * k);
    Rational eps = robustness_radius(k, rho);
    std::uniform_int_distribution<long> num(-(1 << 20), 1 << 20);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<int> w((rng() % 4) + 1);
        for (auto& d : w) d = 1 + static_cast<int>(rng() % 2);
        Config c{{}, static_cast<int>(rng() % 3), w, static_cast<int>(rng() % m.states)};
        c.canonicalize();
        RealConfig enc = encode_config(m, c);
        RealConfig pert = enc;
        Rational delta(0);
        for (auto& comp : pert) {
            Rational d = eps * Rational(num(rng), 1 << 20);
            comp += d;
            delta = std::max(delta, rat_abs(d));
        }
        RealConfig out = real_step_exact(cs, pert, rho);
        RealConfig want = encode_config(m, tm_step(m, c));
        for (int i = 0; i < 4; ++i) CHECK(rat_abs(out[i] - want[i]) <= Rational(k) * delta);
    }
}

TEST_CASE("error stays bounded under repeated halting steps") {
    Machine m = binary_successor();
    CompiledStep cs = compile_step(m);
    const int k = m.base;
    Rational rho(1, 4 * k * k);
    Config halt{{}, 0, {2, 1, 2}, m.qinf};
    RealConfig target = encode_config(m, halt);
    RealConfig cur = target;
    Rational eps = robustness_radius(k, rho) / 2;
    for (auto& c : cur) c += eps / 3;
    for (int i = 0; i < 12; ++i) {
        cur = real_step_exact(cs, cur, rho);
        Rational err(0);
        for (int j = 0; j < 4; ++j) err = std::max(err, rat_abs(cur[j] - target[j]));
        CHECK(err <= Rational(k) * eps);
    }
}

TEST_CASE("decode word: tolerance clause and failure modes") {
    auto id = [](int s) { return s; };
    // exhaustive small check, kappa = id
    for (int k1 : {2, 4}) {
        std::vector<std::vector<int>> words{{}};
        std::vector<std::vector<int>> frontier{{}};
        for (int l = 1; l <= 4; ++l) {
            std::vector<std::vector<int>> next;
            for (const auto& w : frontier)
                for (int d = 0; d < k1; ++d) {
                    auto w2 = w;
                    w2.push_back(d);
                    next.push_back(w2);
                }
            words.insert(words.end(), next.begin(), next.end());
            frontier = std::move(next);
        }
        Rational rho(1, 4);
        for (const auto& w : words) {
            Rational val(0), scale(1);
            long nz = 0;
            for (int d : w) {
                scale /= k1;
                val += scale * d;
                if (d) ++nz;
            }
            Rational eps = scale * (1 - rho);
            for (const Rational& x : {val, Rational(val + eps)}) {
                auto dec = decode_word(x, static_cast<int>(w.size()), k1, k1, id, rho);
                CHECK(dec.value == val);
                CHECK(dec.nonzero == nz);
            }
        }
    }
    // empty word
    auto d0 = decode_word(Rational(0), 0, 4, 4, id, Rational(1, 2));
    CHECK(d0.value == 0);
    CHECK(d0.nonzero == 0);
    // inside a rounding gap: no admissible tube
    CHECK_THROWS_AS(decode_word(Rational(9, 20), 1, 2, 2, id, Rational(1, 8)),
                    UndecodableError);
}

TEST_CASE("re-encode and length recovery") {
    auto id = [](int s) { return s; };
    // "21" base 4 -> base 3: 2/3 + 1/9
    Rational v = Rational(2, 4) + Rational(1, 16);
    auto re = reenc(v, 2, 4, 3, id);
    CHECK(re.value == Rational(2, 3) + Rational(1, 9));
    CHECK(re.nonzero == 2);
    // tlength with a tight and a padded bound
    CHECK(tlength(v, 2, 4) == 2);
    CHECK(tlength(v, 7, 4) == 2);
}

TEST_CASE("machine JSON: schema totality is enforced") {
    Machine m = parity_checker();
    Json j = machine_to_json(m);
    Machine back = machine_from_json(j);
    CHECK(back.delta == m.delta);
    CHECK(back.gamma == m.gamma);
    // dropping a row leaves the table partial: rejected
    Json bad = j;
    bad["delta"].erase(0);
    CHECK_THROWS_AS(machine_from_json(bad), ParseError);
    Json bad2 = j;
    bad2["delta"][0]["move"] = "X";
    CHECK_THROWS_AS(machine_from_json(bad2), ParseError);
    Json bad3 = j;
    bad3["delta"].push_back(bad3["delta"][0]);
    CHECK_THROWS_AS(machine_from_json(bad3), ParseError);
}

TEST_CASE("oracle commutation on exhaustive small machines") {
    // every machine in the library, all configs with combined tape <= 3
    for (const Machine& m : {unary_increment_prepend(), unary_increment_append(),
                             binary_successor(), parity_checker(), rotate_k5()}) {
        std::vector<std::vector<int>> words{{}};
        std::vector<std::vector<int>> frontier{{}};
        for (int l = 1; l <= 3; ++l) {
            std::vector<std::vector<int>> next;
            for (const auto& w : frontier)
                for (int d = 0; d <= m.base - 2; ++d) {
                    auto w2 = w;
                    w2.push_back(d);
                    next.push_back(w2);
                }
            for (const auto& w : next)
                if (w.back() != 0) words.push_back(w);
            frontier = std::move(next);
        }
        long count = 0;
        for (const auto& lw : words)
            for (const auto& rw : words) {
                if (lw.size() + rw.size() > 3) continue;
                for (int sym = 0; sym <= m.base - 2; ++sym)
                    for (int q = 0; q < m.states; ++q) {
                        Config c{lw, sym, rw, q};
                        RealConfig enc = encode_config(m, c);
                        REQUIRE(ideal_real_step(m, enc) ==
                                encode_config(m, tm_step(m, c)));
                        ++count;
                    }
            }
        CHECK(count > 0);
    }
}
