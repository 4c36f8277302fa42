#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gpacforge/solver.hpp"

using namespace gpacforge;

namespace {

Pivp exp_system(long y0 = 1) {
    Pivp p;
    p.dim = 1;
    p.rhs = {MultiPoly::variable(1, 1)};
    p.init_point = Pivp::PointInit{{Rational(y0)}};
    return p;
}

Pivp circle_system() {
    Pivp s;
    s.dim = 2;
    s.rhs = {MultiPoly::variable(2, 2), -MultiPoly::variable(2, 1)};
    s.init_point = Pivp::PointInit{{Rational(0), Rational(1)}};
    return s;
}

}  // namespace

TEST_CASE("e to twenty digits") {
    IntegrationConfig cfg;
    cfg.local_tol_log2 = -90;
    cfg.order = 12;
    Trajectory tr = integrate(exp_system(), {Rational(1)}, Rational(1), cfg);
    CHECK(tr.stop_reason == StopReason::TimeReached);
    BigFloat err = bf_abs(tr.back().y[0] - bf_exp(BigFloat(1l, 128)));
    CHECK(err.to_double() < 1e-20);
    CHECK(err <= tr.global_error_bound);
}

TEST_CASE("sine endpoint at pi/2") {
    IntegrationConfig cfg;
    cfg.local_tol_log2 = -70;
    Rational half_pi(157079632679489662, 100000000000000000);
    Trajectory tr = integrate(circle_system(), {Rational(0), Rational(1)}, half_pi, cfg);
    CHECK(bf_abs(tr.back().y[0] - BigFloat(1l, 128)).to_double() < 1e-15);
    CHECK(bf_abs(tr.back().y[1]).to_double() < 1e-15);
}

TEST_CASE("finite-time blowup reports divergence") {
    Pivp b;
    b.dim = 1;
    MultiPoly q(1);
    q.add_term({0}, Rational(1));
    q.add_term({2}, Rational(1));
    b.rhs = {q};
    b.init_point = Pivp::PointInit{{Rational(0)}};
    IntegrationConfig cfg;
    cfg.max_steps = 200000;
    Trajectory tr = integrate(b, {Rational(0)}, Rational(2), cfg);
    CHECK(tr.stop_reason == StopReason::Divergence);
    // the pole sits at pi/2
    CHECK(tr.back().t.to_double() < 1.5708);
    CHECK(tr.back().t.to_double() > 1.55);
}

TEST_CASE("length budget semantics") {
    Pivp unit;
    unit.dim = 1;
    unit.rhs = {MultiPoly::constant(1, Rational(1))};
    unit.init_point = Pivp::PointInit{{Rational(0)}};
    IntegrationConfig cfg;
    Trajectory tr = integrate_until_length(unit, {Rational(0)}, Rational(5), cfg);
    CHECK(tr.stop_reason == StopReason::LengthBudgetHit);
    double t = tr.back().t.to_double();
    CHECK(t >= 5.0);
    CHECK(t <= 5.0 + 0.25);  // default max_step_dlen

    // a stationary point never accumulates length
    Pivp still;
    still.dim = 1;
    still.rhs = {MultiPoly(1)};
    still.init_point = Pivp::PointInit{{Rational(3)}};
    IntegrationConfig cfg2;
    cfg2.max_steps = 500;
    Trajectory ts = integrate_until_length(still, {Rational(3)}, Rational(1), cfg2);
    CHECK((ts.stop_reason == StopReason::StepLimit ||
           ts.stop_reason == StopReason::StepUnderflow));
}

TEST_CASE("circle arc length over one period") {
    // integral of max(|sin|, |cos|) over [0, 2pi] = 4 sqrt(2)
    IntegrationConfig cfg;
    cfg.local_tol_log2 = -70;
    Rational two_pi(6283185307179586476, 1000000000000000000);
    Trajectory tr = integrate(circle_system(), {Rational(0), Rational(1)}, two_pi, cfg);
    BigFloat want = BigFloat(4l, 128) * bf_sqrt(BigFloat(2l, 128));
    CHECK(bf_abs(tr.back().len - want).to_double() < 1e-6);
}

TEST_CASE("pslen examples") {
    // y' = 1 on [0, T]: sigma = 1, deg = 0, PsLen = T
    Pivp unit;
    unit.dim = 1;
    unit.rhs = {MultiPoly::constant(1, Rational(1))};
    unit.init_point = Pivp::PointInit{{Rational(0)}};
    IntegrationConfig cfg;
    Trajectory tr = integrate(unit, {Rational(0)}, Rational(7), cfg);
    CHECK(bf_abs(pslen(tr, unit.rhs) - BigFloat(7l, 128)).to_double() < 1e-9);

    // y' = y from 1 on [0,1]: integral of max(1, e^t) = e - 1
    Trajectory te = integrate(exp_system(), {Rational(1)}, Rational(1), cfg);
    BigFloat want = bf_exp(BigFloat(1l, 128)) - BigFloat(1l, 128);
    CHECK(bf_abs(pslen(te, exp_system().rhs) - want).to_double() < 1e-6);

    // t_end = 0: empty run, zero pseudo-length
    Trajectory t0 = integrate(exp_system(), {Rational(1)}, Rational(0), cfg);
    CHECK(pslen(t0, exp_system().rhs).is_zero());

    // wrong right-hand side is rejected
    CHECK_THROWS_AS(pslen(te, unit.rhs), DomainError);
}

TEST_CASE("monotone accounting and PsLen >= len on generated systems") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<long> coef(-3, 3);
    std::uniform_int_distribution<int> expo(0, 2);
    for (int trial = 0; trial < 12; ++trial) {
        int d = 1 + static_cast<int>(rng() % 2);
        Pivp p;
        p.dim = d;
        for (int i = 0; i < d; ++i) {
            MultiPoly q(d);
            for (int t = 0; t < 2; ++t) {
                std::vector<std::uint32_t> e(d);
                for (auto& x : e) x = expo(rng);
                q.add_term(e, Rational(coef(rng)));
            }
            // keep sigma >= 1 for the PsLen comparison
            q.add_term(std::vector<std::uint32_t>(d, 0), Rational(1));
            p.rhs.push_back(q);
        }
        std::vector<Rational> y0(d, Rational(1));
        p.init_point = Pivp::PointInit{y0};
        IntegrationConfig cfg;
        cfg.max_steps = 4000;
        Trajectory tr = integrate(p, y0, Rational(1, 2), cfg);
        BigFloat last_len(128), last_ps(128);
        for (const auto& s : tr.samples) {
            CHECK(s.len >= last_len);
            CHECK(s.pslen >= last_ps);
            last_len = s.len;
            last_ps = s.pslen;
        }
        if (tr.stop_reason == StopReason::TimeReached)
            CHECK(tr.back().pslen >= tr.back().len - tr.quadrature_error);
    }
}

TEST_CASE("order scaling on fixed steps") {
    BigFloat e = bf_exp(BigFloat(1l, 160));
    for (int order : {4, 8}) {
        double errs[2];
        int i = 0;
        for (long den : {10, 20}) {
            IntegrationConfig cfg;
            cfg.precision_bits = 160;
            cfg.order = order;
            cfg.fixed_step = Rational(1, den);
            Trajectory tr = integrate(exp_system(), {Rational(1)}, Rational(1), cfg);
            errs[i++] = bf_abs(tr.back().y[0] - e).to_double();
        }
        double rate = std::log2(errs[0] / errs[1]);
        CHECK(std::abs(rate - order) < 0.5);
    }
}

TEST_CASE("checkpoints land exactly") {
    IntegrationConfig cfg;
    cfg.checkpoints = {Rational(1, 3), Rational(1, 2), Rational(2, 3)};
    Trajectory tr = integrate(exp_system(), {Rational(1)}, Rational(1), cfg);
    for (const auto& cp : cfg.checkpoints) {
        bool found = false;
        for (const auto& s : tr.samples)
            if (s.t == BigFloat(cp, 128)) found = true;
        CHECK(found);
    }
}

TEST_CASE("dual-bound run stops on whichever comes first") {
    Pivp unit;
    unit.dim = 1;
    unit.rhs = {MultiPoly::constant(1, Rational(1))};
    unit.init_point = Pivp::PointInit{{Rational(0)}};
    IntegrationConfig cfg;
    OdeSystem sys(unit, cfg.precision_bits);
    std::vector<BigFloat> y0{BigFloat(128)};
    auto a = integrate_bounded(sys, y0, BigFloat(2l, 128), BigFloat(50l, 128), cfg);
    CHECK(a.stop_reason == StopReason::TimeReached);
    auto b = integrate_bounded(sys, y0, BigFloat(50l, 128), BigFloat(2l, 128), cfg);
    CHECK(b.stop_reason == StopReason::LengthBudgetHit);
}
