#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gpacforge/analog.hpp"

using namespace gpacforge;
using namespace gpacforge::analog;

namespace {
IntegrationConfig fast_cfg() {
    IntegrationConfig cfg;
    cfg.precision_bits = 128;
    cfg.order = 16;
    cfg.local_tol_log2 = -40;
    return cfg;
}
}  // namespace

TEST_CASE("iterate: zero cycles hold the input") {
    auto map = chebyshev_map(2);
    auto sched = IterationSchedule::for_map(map, Rational(1));
    auto res = iterate_ode(map, sched, {Rational(1, 3)}, 0, BigFloat(5l, 128), fast_cfg());
    CHECK(bf_abs(res.final_w[0] - BigFloat(Rational(1, 3), 128)) <=
          bf_exp(BigFloat(-5l, 128)));
}

TEST_CASE("iterate: Chebyshev cycles track the discrete orbit within the ladder") {
    auto map = chebyshev_map(2);
    Rational x0(309, 1000);
    auto omega = measure_settle_time(map, {x0}, BigFloat(15l, 128), 128);
    auto sched = IterationSchedule::for_map(map, omega);
    IntegrationConfig cfg = fast_cfg();
    cfg.local_tol_log2 = -110;  // resolve the ladder itself
    cfg.order = 18;
    BigFloat mu(8l, 128);
    const int n = 3;
    auto res = iterate_ode(map, sched, {x0}, n, mu, cfg);
    std::vector<Rational> v{x0};
    for (int i = 0; i <= n; ++i) {
        BigFloat err = bf_abs(res.snapshots[i][0] - BigFloat(v[0], 128));
        // honest ladder: every cycle error under the scheduled bound
        CHECK(err <= res.schedule.cycle_bound(i, n, mu, x0 + 1, 128));
        if (i < n) v = map.eval(v);
    }
    CHECK(bf_abs(res.final_w[0] - BigFloat(v[0], 128)) <= bf_exp(-mu));
}

TEST_CASE("iterate: real-step cycles reproduce machine steps") {
    tm::Machine m = tm::unary_increment_append();
    tm::CompiledStep cs = tm::compile_step(m);
    Rational rho(1, 4 * m.base * m.base);
    auto map = real_step_map(cs, rho);
    auto w = m.gamma_word({0, 0});
    tm::Config c = tm::Config::initial(m, w);
    tm::RealConfig enc = tm::encode_config(m, c);
    std::vector<Rational> x0{enc[0], enc[1], enc[2], enc[3]};
    auto sched = IterationSchedule::for_map(map, Rational(1));
    const int n = 5;
    auto res = iterate_ode(map, sched, x0, n, BigFloat(9l, 128), fast_cfg());
    for (int i = 0; i < n; ++i) c = tm::tm_step(m, c);
    tm::RealConfig want = tm::encode_config(m, c);
    for (int j = 0; j < 4; ++j)
        CHECK(bf_abs(res.final_w[j] - BigFloat(want[j], 128)).to_double() < 1e-3);
}

TEST_CASE("emulation end to end with decoded output") {
    tm::Machine m = tm::binary_successor();
    std::vector<int> w{1, 1};
    auto res = emulate_tm(m, w, 8, BigFloat(2l, 128), fast_cfg(), 3);
    CHECK(res.output_letters == std::vector<int>{1, 0, 0});
    CHECK(res.recovered_length == 3);
    Rational eps0(1, 4 * m.base * m.base);
    for (const auto& e : res.cycle_errors) CHECK(e <= BigFloat(eps0, 128));
}

TEST_CASE("decode map iterates the head-extraction function") {
    auto map = decode_step_map(4, 4, Rational(1, 2), 3);
    // exact path on "212": peel three digits
    std::vector<Rational> st{Rational(2, 4) + Rational(1, 16) + Rational(2, 64), Rational(0),
                             Rational(0), Rational(0)};
    for (int i = 0; i < 3; ++i) st = map.eval(st);
    CHECK(st[1] == Rational(2, 4) + Rational(1, 16) + Rational(2, 64));
    CHECK(st[2] == 3);
    CHECK(st[3] == 3);
}

TEST_CASE("recognition: verdicts, stability and budget") {
    auto prog = parity_recognizer();
    auto even = recognize(prog, {1, 0}, fast_cfg());
    CHECK(even.verdict == Verdict::Accept);
    CHECK(even.stability_violations == 0);
    CHECK(even.first_crossing_time.has_value());
    auto odd = recognize(prog, {1}, fast_cfg());
    CHECK(odd.verdict == Verdict::Reject);
    CHECK(odd.min_len_minus_t >= BigFloat(-1e-9, 128));
    Rational budget = prog.omega_budget.eval(std::vector<Rational>{Rational(1)});
    CHECK(odd.length_used <= BigFloat(budget, 128));
}

TEST_CASE("fp_extract equals the discrete run") {
    tm::Machine m = tm::unary_increment_append();
    std::vector<int> w{0, 0};
    long len = 0;
    auto out = fp_extract(m, w, 7, fast_cfg(), &len);
    auto want = tm::tm_run(m, m.gamma_word(w), 7);
    REQUIRE(want.has_value());
    CHECK(out == *want);
    CHECK(len == 3);
}

TEST_CASE("composition demo: identity o identity") {
    auto f = identity_program();
    auto res = compose_demo(f, f, Rational(-3, 7), 3, fast_cfg());
    CHECK(bf_abs(res.output - BigFloat(Rational(-3, 7), 128)) <= bf_exp(-res.mu_final));
    // the precision clock advances at least one unit per cycle
    for (size_t i = 0; i < res.mu_at_cycles.size(); ++i)
        CHECK(res.mu_at_cycles[i].to_double() >= static_cast<double>(i) + 1 - 1e-6);
}

TEST_CASE("composition demo: clamped exp of abs") {
    auto f = clamped_exp_program(Rational(0), Rational(10));
    auto g = abs_program();
    auto res = compose_demo(f, g, Rational(-1, 2), 3, fast_cfg());
    CHECK(bf_abs(res.output - res.expected) <= bf_exp(-res.mu_final));
}
