#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gpacforge/gadgets.hpp"

using namespace gpacforge;
using namespace gpacforge::gadgets;

namespace {
constexpr int P = 128;
BigFloat bf(double v) { return BigFloat(v, P); }
BigFloat bf(long v) { return BigFloat(v, P); }
}  // namespace

TEST_CASE("smooth sign oracle and domain") {
    MultiPoly zero(1);
    CHECK(smooth_sign_oracle(bf(0l), bf(0l), zero).is_zero());
    MultiPoly one = MultiPoly::constant(1, Rational(1));  // U_p with |z/x| <= e
    CHECK(smooth_sign_oracle(bf(2l), bf(5l), one) == bf(5l));
    CHECK(smooth_sign_oracle(bf(-2l), bf(5l), one) == bf(-5l));
    CHECK_THROWS_AS(smooth_sign_oracle(bf(0l), bf(1l), zero), DomainError);
    // |z/x| above e^{p} is outside U_p
    CHECK_THROWS_AS(smooth_sign_oracle(bf(0.001), bf(1l), zero), DomainError);
}

TEST_CASE("abs and max/min algebra") {
    CHECK(abs_oracle(bf(-3l)) == bf(3l));
    CHECK(abs_oracle(bf(0l)).is_zero());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 200; ++i) {
        BigFloat a = bf(u(rng)), b = bf(u(rng));
        auto [mx, mn] = max_min_oracle(a, b);
        CHECK(mx + mn == a + b);
        CHECK(mx >= mn);
        CHECK(abs_oracle(a) >= bf(0l));
        CHECK(abs_oracle(-a) == abs_oracle(a));
    }
    auto [m1, m2] = max_min_oracle(bf(1l), bf(2l));
    CHECK(m1 == bf(2l));
    CHECK(m2 == bf(1l));
    auto [s1, s2] = max_min_oracle(bf(-5l), bf(3l));
    CHECK(s1 == bf(3l));
    CHECK(s2 == bf(-5l));
}

TEST_CASE("rnd* oracle piecewise shape") {
    // plateau
    CHECK(rnd_star_exact(Rational(3, 10), Rational(1, 10)) == 0);
    // exact integers and the transition midpoint
    CHECK(rnd_star_exact(Rational(7), Rational(1, 8)) == 7);
    CHECK(rnd_star_exact(Rational(1, 2), Rational(1, 7)) == Rational(1, 2));
    // affine strip: x = 0.47, rho = 0.1 -> 0.35
    CHECK(rnd_star_exact(Rational(47, 100), Rational(1, 10)) == Rational(35, 100));
    // continuity at the plateau edge
    CHECK(rnd_star_exact(Rational(4, 10), Rational(1, 10)) == 0);
    // floating oracle agrees with the exact form
    BigFloat v = rnd_star_oracle(BigFloat(Rational(47, 100), P), bf_log(bf(10l)));
    CHECK(bf_abs(v - BigFloat(Rational(7, 20), P)).to_double() < 1e-30);
    CHECK_THROWS_AS(rnd_star_exact(Rational(1), Rational(2, 3)), DomainError);
}

TEST_CASE("rnd satisfies both rounding bullets") {
    // |rnd - n| <= 1/2 on the cell, <= e^-mu off the 1/lambda margin
    for (long lambda : {2, 4, 8}) {
        for (int mu = 1; mu <= 6; ++mu) {
            BigFloat l = bf(lambda), m = bf(static_cast<long>(mu));
            for (int i = -20; i <= 20; ++i) {
                BigFloat x = bf(0.025 * i);  // around 0
                BigFloat r = rnd_oracle(x, m, l);
                if (bf_abs(x) <= bf(0.5))
                    CHECK(bf_abs(r).to_double() <= 0.5 + 1e-18);
                if (bf_abs(x) <= bf(0.5) - bf(1l) / l)
                    CHECK(bf_abs(r) <= bf_exp(-m));
            }
        }
    }
    CHECK_THROWS_AS(rnd_oracle(bf(0l), bf(1l), bf(1l)), DomainError);
}

TEST_CASE("clamped exponential oracle") {
    CHECK(bf_abs(clamped_exp_oracle(bf(0l), bf(10l), bf(1l), bf(0l), bf(2l)) -
                 bf_exp(bf(2l)))
              .to_double() < 1e-30);
    CHECK(clamped_exp_oracle(bf(0l), bf(1l), bf(1l), bf(0l), bf(5l)) == bf(1l));
    CHECK(clamped_exp_oracle(bf(0l), bf(1l), bf(0l), bf(0l), bf(7l)).is_zero());
    CHECK_THROWS_AS(clamped_exp_oracle(bf(2l), bf(1l), bf(1l), bf(0l), bf(0l)), DomainError);
}

TEST_CASE("norm band") {
    std::vector<BigFloat> v{bf(3l), bf(-4l)};
    BigFloat n = norm_inf_delta_oracle(v, bf(1l));
    CHECK(n >= bf(4l));
    CHECK(n <= bf(5l));
    std::vector<BigFloat> z{bf(0l)};
    BigFloat nz = norm_inf_delta_oracle(z, bf(0.5));
    CHECK(nz >= bf(0l));
    CHECK(nz <= bf(0.5));
    std::vector<BigFloat> ones{bf(1l), bf(1l), bf(1l)};
    BigFloat no = norm_inf_delta_oracle(ones, bf(0.5));
    CHECK(no >= bf(1l));
    CHECK(no <= bf(1.5));
    CHECK_THROWS_AS(norm_inf_delta_oracle(v, bf(2l)), DomainError);

    // smooth realization lands in the band
    auto real = realize_norm_inf_delta({Rational(3), Rational(-4)}, Rational(1, 2), P);
    IntegrationConfig cfg;
    cfg.local_tol_log2 = -60;
    Trajectory tr = integrate(real.system, real.y0, bf(12l), cfg);
    BigFloat out = real.read_outputs(tr.back().y)[0];
    CHECK(out >= bf(4l));
    CHECK(out <= bf(4.5));
}

TEST_CASE("lxh edge bound from the hyperbolic inequality") {
    // at t = a with mu = 2, x = 1: |lxh| <= e^-2
    auto [l, h] = lxh_hxl_oracle(Rational(0), Rational(1), bf(0l), bf(2l), bf(1l));
    CHECK(bf_abs(l) <= bf_exp(bf(-2l)));
    CHECK(bf_abs(bf(1l) - h) <= bf_exp(bf(-2l)));
    auto [l0, h0] = lxh_hxl_oracle(Rational(0), Rational(1), bf(0.3), bf(5l), bf(0l));
    CHECK(l0.is_zero());
    CHECK(h0.is_zero());
    CHECK_THROWS_AS(lxh_hxl_oracle(Rational(1), Rational(1), bf(0l), bf(1l), bf(1l)),
                    DomainError);
}

TEST_CASE("theta value check from the formula") {
    // constant nu = 3 at t = 3pi/4: (1 + tanh(-9))/2, below e^-3
    BigFloat t = bf_pi(P) * bf(0.75);
    BigFloat th = clock_theta(bf(3l), bf(0l), t);
    CHECK(bf_abs(th - (bf(1l) + bf_tanh(bf(-9l))) * bf(0.5)).to_double() < 1e-25);
    CHECK(th <= bf_exp(bf(-3l)));
    for (int i = 0; i < 40; ++i) {
        BigFloat ps = clock_psi(1, bf(3l), bf(0l), bf(0.17 * i));
        CHECK(ps >= bf(0l));
        CHECK(ps <= bf(1l));
    }
    CHECK_THROWS_AS(clock_psi(4, bf(1l), bf(0l), bf(0l)), DomainError);
}

TEST_CASE("reach bound: linear contraction closed form") {
    // constant target, A = 1, b = 0: the gap shrinks by e^-dt
    SimDag dag(2, P);
    auto T = dag.state(0);
    (void)T;
    auto Z = dag.state(1);
    dag.set_rhs({dag.constant(1l), dag.sub(dag.constant(Rational(2)), Z)});
    OdeSystem sys{std::move(dag)};
    IntegrationConfig cfg;
    cfg.local_tol_log2 = -60;
    std::vector<BigFloat> y0{bf(0l), bf(0l)};
    Trajectory tr = integrate(sys, y0, bf(3l), cfg);
    BigFloat gap = bf_abs(tr.back().y[1] - bf(2l));
    BigFloat bound = reach_error_bound(bf(2l), bf(3l), bf(0l), bf(0l), bf(3l));
    CHECK(gap <= bound * bf(1.0000001));
    CHECK(bf_abs(gap - bf(2l) * bf_exp(bf(-3l))).to_double() < 1e-12);
    // zero initial error, frozen target: the state stays put
    std::vector<BigFloat> y1{bf(0l), bf(2l)};
    Trajectory t2 = integrate(sys, y1, bf(3l), cfg);
    CHECK(bf_abs(t2.back().y[1] - bf(2l)).to_double() < 1e-30);
}

TEST_CASE("mix blends and respects the indicator") {
    CHECK(mix_oracle(bf(-1l), bf(7l), bf(9l)) == bf(7l));
    CHECK(mix_oracle(bf(1l), bf(7l), bf(9l)) == bf(9l));
    CHECK(mix_oracle(bf(0.5), bf(0l), bf(2l)) == bf(1l));
}

TEST_CASE("chebyshev polynomials and extraction") {
    MultiPoly t3 = chebyshev(3);  // 4x^3 - 3x
    MultiPoly want(1);
    want.add_term({3}, Rational(4));
    want.add_term({1}, Rational(-3));
    CHECK(t3 == want);
    // extract_2(1/2, 1) = cos(2 pi) = 1
    CHECK(bf_abs(extract_oracle(2, bf(0.5), 1) - bf(1l)).to_double() < 1e-30);
    // zero iterations: plain cos(2 pi x)
    CHECK(bf_abs(extract_oracle(2, bf(0.3), 0) - bf_cos(bf_pi(P) * bf(0.6))).to_double() <
          1e-30);
    // extract_2(1/8, 2) = cos(pi) = -1
    CHECK(bf_abs(extract_oracle(2, bf(0.125), 2) + bf(1l)).to_double() < 1e-30);
}

TEST_CASE("abs realization convergence example") {
    // x = 1e-3: |err| <= e^-10 by t = 10 + 3 ln 10
    auto real = realize_smooth_sign(Rational(1, 1000), Rational(1, 1000), P);
    IntegrationConfig cfg;
    cfg.local_tol_log2 = -60;
    BigFloat t_end = bf(10l) + bf(3l) * bf_log(bf(10l));
    Trajectory tr = integrate(real.system, real.y0, t_end, cfg);
    BigFloat err = bf_abs(real.read_outputs(tr.back().y)[0] - bf(0.001));
    CHECK(err <= bf_exp(bf(-10l)));
}

TEST_CASE("compiled ramp matches the pointwise ramp at moderate sharpness") {
    // the closure route keeps tanh as a state; sound while the saturation
    // depth stays well inside the precision budget
    BigFloat mu = bf(1l);
    auto compiled = realize_lxh_hxl_compiled(Rational(0), Rational(1), Rational(1), mu, 192);
    auto pointwise = realize_lxh_hxl(Rational(0), Rational(1), Rational(1), mu, 192);
    IntegrationConfig cfg;
    cfg.precision_bits = 192;
    cfg.local_tol_log2 = -80;
    cfg.max_step = Rational(1, 8);
    Trajectory a = integrate(compiled.system, compiled.y0, BigFloat(2l, 192), cfg);
    for (const auto& s : a.samples) {
        auto want = pointwise.read_outputs({s.t});
        CHECK(bf_abs(s.y[0] - want[0]).to_double() < 1e-18);
        CHECK(bf_abs(s.y[1] - want[1]).to_double() < 1e-18);
    }
    // same story for a gentle clock
    auto cpsi = realize_clock_psi_compiled(0, Rational(1, 2), 192);
    Trajectory b = integrate(cpsi.system, cpsi.y0, bf_pi(192), cfg);
    for (const auto& s : b.samples) {
        BigFloat want = clock_psi(0, BigFloat(192), BigFloat(Rational(1, 2), 192), s.t);
        CHECK(bf_abs(s.y[0] - want).to_double() < 1e-18);
    }
}
