#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gpacforge/io.hpp"
#include "gpacforge/solver.hpp"

using namespace gpacforge;

namespace {

// N-fold symbolic differentiation through the chain rule: the independent
// oracle for the jet recurrence. c_{j+1} = (d c_j / dy) . p / (j + 1).
std::vector<std::vector<Rational>> taylor_by_symbolic_diff(const Pivp& p,
                                                           const std::vector<Rational>& y0,
                                                           int order) {
    const int d = p.dim;
    std::vector<MultiPoly> cur;  // c_j as polynomials in y
    for (int i = 0; i < d; ++i) cur.push_back(MultiPoly::variable(d, i + 1));
    std::vector<std::vector<Rational>> out(d);
    for (int i = 0; i < d; ++i) out[i].push_back(cur[i].eval(y0));
    for (int j = 1; j <= order; ++j) {
        std::vector<MultiPoly> next(d, MultiPoly(d));
        for (int i = 0; i < d; ++i) {
            MultiPoly acc(d);
            for (int v = 0; v < d; ++v) {
                MultiPoly dv = cur[i].derivative(v + 1);
                if (!dv.is_zero()) acc = acc + dv * p.rhs[v];
            }
            next[i] = acc.scale(Rational(1, j));
            out[i].push_back(next[i].eval(y0));
        }
        cur = std::move(next);
    }
    return out;
}

Pivp sine_system() {
    Pivp s;
    s.dim = 2;
    s.rhs = {MultiPoly::variable(2, 2), -MultiPoly::variable(2, 1)};
    s.init_point = Pivp::PointInit{{Rational(0), Rational(1)}};
    s.output_arity = 2;
    return s;
}

}  // namespace

TEST_CASE("taylor coefficients: named examples") {
    Pivp e;
    e.dim = 1;
    e.rhs = {MultiPoly::variable(1, 1)};
    e.init_point = Pivp::PointInit{{Rational(1)}};
    auto c = taylor_coeffs_exact(e, {Rational(1)}, 4);
    CHECK(c[0] == std::vector<Rational>{1, 1, Rational(1, 2), Rational(1, 6), Rational(1, 24)});

    Pivp z;
    z.dim = 1;
    z.rhs = {MultiPoly(1)};
    z.init_point = Pivp::PointInit{{Rational(5)}};
    auto cz = taylor_coeffs_exact(z, {Rational(5)}, 3);
    CHECK(cz[0] == std::vector<Rational>{5, 0, 0, 0});

    auto cs = taylor_coeffs_exact(sine_system(), {Rational(0), Rational(1)}, 3);
    CHECK(cs[0] == std::vector<Rational>{0, 1, 0, Rational(-1, 6)});
}

TEST_CASE("taylor recurrence matches symbolic differentiation") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long> coef(-3, 3);
    std::uniform_int_distribution<int> expo(0, 2);
    for (int trial = 0; trial < 30; ++trial) {
        int d = 1 + static_cast<int>(rng() % 3);
        Pivp p;
        p.dim = d;
        for (int i = 0; i < d; ++i) {
            MultiPoly q(d);
            for (int t = 0; t < 3; ++t) {
                std::vector<std::uint32_t> e(d);
                for (auto& x : e) x = expo(rng);
                q.add_term(e, Rational(coef(rng)));
            }
            p.rhs.push_back(q);
        }
        std::vector<Rational> y0;
        for (int i = 0; i < d; ++i) y0.push_back(Rational(coef(rng), 2));
        p.init_point = Pivp::PointInit{y0};
        auto jets = taylor_coeffs_exact(p, y0, 6);
        auto oracle = taylor_by_symbolic_diff(p, y0, 6);
        CHECK(jets == oracle);
    }
}

TEST_CASE("closure: polynomial passthrough has no auxiliaries") {
    auto r = closure_compile({ex_time()}, ClosureEnv{});
    CHECK(r.pivp.dim == 1);
    CHECK(r.aux_count == 0);
    CHECK(r.pivp.rhs[0] == MultiPoly::constant(1, Rational(1)));
    CHECK(r.pivp.init_point->values[0] == 0);
}

TEST_CASE("closure: tanh of time") {
    auto r = closure_compile({ex_tanh(ex_time())}, ClosureEnv{});
    CHECK(r.pivp.dim == 2);
    CHECK(r.aux_count == 1);
    // first component is the output: u' = 1 - u^2
    MultiPoly want(2);
    want.add_term({0, 0}, Rational(1));
    want.add_term({2, 0}, Rational(-1));
    CHECK(r.pivp.rhs[0] == want);
    CHECK(r.pivp.init_point->values[0] == 0);
}

TEST_CASE("closure: sine allocates the cos partner and integrates to 1") {
    auto r = closure_compile({ex_sin(ex_time())}, ClosureEnv{});
    CHECK(r.pivp.dim == 3);
    CHECK(r.aux_count == 2);
    IntegrationConfig cfg;
    cfg.local_tol_log2 = -60;
    // integrate to pi/2: the output approaches 1
    Trajectory tr = integrate(r.pivp, r.pivp.init_point->values, Rational(157079632679, 100000000000), cfg);
    CHECK(bf_abs(tr.back().y[0] - BigFloat(1l, 128)).to_double() < 1e-10);
}

TEST_CASE("closure: shared subexpressions compile once") {
    // sin(t) reused twice: one (sin, cos) pair, not two
    Expr s = ex_sin(ex_time());
    auto r = closure_compile({ex_mul(s, s), s}, ClosureEnv{});
    CHECK(r.aux_count == 2);
}

TEST_CASE("closure: unclosed input is a compilation error") {
    ClosureEnv env;
    env.input_init = {Rational(1)};
    env.input_constant = {false};  // declared non-constant, no dynamics
    CHECK_THROWS_AS(closure_compile({ex_input(0)}, env), CompileError);
    env.input_constant = {true};
    auto r = closure_compile({ex_input(0)}, env);
    CHECK(r.pivp.rhs[0].is_zero());
}

TEST_CASE("closure: invsqrt1m domain check at the initial point") {
    ClosureEnv env;
    env.input_init = {Rational(2)};
    env.input_constant = {true};
    CHECK_THROWS_AS(closure_compile({ex_invsqrt1m(ex_input(0))}, env), DomainError);
}

TEST_CASE("closure soundness on a sampled trajectory") {
    // output = tanh(t)^2 + sin(t); compare the integrated system against
    // direct expression evaluation on a dense grid
    Expr e = ex_add(ex_intpow(ex_tanh(ex_time()), 2), ex_sin(ex_time()));
    auto r = closure_compile({e}, ClosureEnv{});
    IntegrationConfig cfg;
    cfg.precision_bits = 128;
    cfg.local_tol_log2 = -70;
    for (int i = 1; i <= 100; ++i) cfg.checkpoints.push_back(Rational(i, 20));
    Trajectory tr = integrate(r.pivp, r.pivp.init_point->values, Rational(5), cfg);
    int checked = 0;
    for (int i = 1; i <= 100; ++i) {
        BigFloat t(Rational(i, 20), 128);
        auto y = tr.at_time(t);
        BigFloat want = ex_eval(e, {}, t);
        CHECK(bf_abs(y[0] - want).to_double() < 1e-15);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("closure with input dynamics") {
    // input follows u' = u from u(0) = 1; output exp-like via the input
    ClosureEnv env;
    env.input_init = {Rational(1)};
    env.input_constant = {false};
    env.input_dynamics = {MultiPoly::variable(1, 1)};
    auto r = closure_compile({ex_mul(ex_input(0), ex_input(0))}, env);
    IntegrationConfig cfg;
    cfg.local_tol_log2 = -70;
    Trajectory tr = integrate(r.pivp, r.pivp.init_point->values, Rational(1), cfg);
    BigFloat want = bf_exp(BigFloat(2l, 128));  // (e^t)^2 at t = 1
    CHECK(bf_abs(tr.back().y[0] - want).to_double() < 1e-20);
}

TEST_CASE("pivp JSON round trip and negative cases") {
    auto r = closure_compile({ex_tanh(ex_time())}, ClosureEnv{});
    Json j = pivp_to_json(r.pivp);
    Pivp back = pivp_from_json(j);
    CHECK(back.dim == r.pivp.dim);
    CHECK(back.rhs == r.pivp.rhs);
    CHECK(back.init_point->values == r.pivp.init_point->values);
    CHECK(back.output_arity == r.pivp.output_arity);

    // arity mismatch must be rejected
    Json bad = j;
    bad["rhs"][0]["arity"] = 7;
    CHECK_THROWS(pivp_from_json(bad));
    Json bad2 = j;
    bad2["init"] = Json{{"kind", "point"}, {"values", Json::array()}};
    CHECK_THROWS_AS(pivp_from_json(bad2), DimensionError);
}

TEST_CASE("golden: the dim-2 tanh system document") {
    // the compiled tanh(t) system serialized by hand
    Json j = Json::parse(R"({
      "dim": 2, "output_arity": 1,
      "rhs": [
        {"arity": 2, "terms": [{"exp": [0,0], "num": "1", "den": "1"},
                                {"exp": [2,0], "num": "-1", "den": "1"}]},
        {"arity": 2, "terms": [{"exp": [0,0], "num": "1", "den": "1"}]}
      ],
      "init": {"kind": "point", "values": [{"num": "0", "den": "1"},
                                             {"num": "0", "den": "1"}]}
    })");
    Pivp golden = pivp_from_json(j);
    auto r = closure_compile({ex_tanh(ex_time())}, ClosureEnv{});
    CHECK(golden.rhs == r.pivp.rhs);
    CHECK(golden.init_point->values == r.pivp.init_point->values);
}
