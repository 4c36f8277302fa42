#include "gpacforge/gadgets.hpp"

#include <array>

namespace gpacforge::gadgets {

namespace {

void require_nonneg(const MultiPoly& p, const char* what) {
    for (const auto& [e, c] : p.terms())
        if (c < 0) throw DomainError(std::string(what) + ": bound polynomial has negative coefficient");
}

MultiPoly bound_poly2(std::initializer_list<std::pair<std::pair<int, int>, Rational>> terms) {
    MultiPoly p(2);
    for (const auto& [e, c] : terms)
        p.add_term({static_cast<std::uint32_t>(e.first), static_cast<std::uint32_t>(e.second)}, c);
    require_nonneg(p, "omega");
    return p;
}

MultiPoly bound_poly3(std::initializer_list<std::pair<std::array<int, 3>, Rational>> terms) {
    MultiPoly p(3);
    for (const auto& [e, c] : terms)
        p.add_term({static_cast<std::uint32_t>(e[0]), static_cast<std::uint32_t>(e[1]),
                    static_cast<std::uint32_t>(e[2])},
                   c);
    require_nonneg(p, "upsilon");
    return p;
}

BigFloat two_pi(int prec) { return bf_pi(prec) + bf_pi(prec); }

}  // namespace

// ---------------------------------------------------------------------------
// Oracles

BigFloat smooth_sign_oracle(const BigFloat& x, const BigFloat& z, const MultiPoly& p) {
    int prec = x.precision();
    if (x.is_zero()) {
        if (!z.is_zero()) throw DomainError("smooth_sign: (0, z) with z != 0 is outside U_p");
        return BigFloat(prec);
    }
    BigFloat norm = bf_max(bf_abs(x), bf_abs(z));
    BigFloat cap = bf_exp(p.eval(std::vector<BigFloat>{norm}));
    if (bf_abs(z / x) > cap) throw DomainError("smooth_sign: |z/x| exceeds e^{p(|(x,z)|)}");
    return x.sign() > 0 ? z : -z;
}

BigFloat abs_oracle(const BigFloat& x) { return bf_abs(x); }

std::pair<BigFloat, BigFloat> max_min_oracle(const BigFloat& a, const BigFloat& b) {
    BigFloat half(Rational(1, 2), a.precision());
    BigFloat mx = (a + b) * half + bf_abs(a - b) * half;
    return {mx, a + b - mx};
}

Rational rnd_star_exact(const Rational& x, const Rational& rho) {
    if (rho <= 0 || rho > Rational(1, 2))
        throw DomainError("rnd*: rho = e^-mu must lie in (0, 1/2]");
    Integer n = rat_round(x);
    Rational r = x - Rational(n);
    Rational plateau = Rational(1, 2) - rho;
    if (rat_abs(r) <= plateau) return Rational(n);
    Rational sg = r >= 0 ? Rational(1) : Rational(-1);
    return Rational(n) + (r - sg * plateau) / (2 * rho);
}

BigFloat rnd_star_oracle(const BigFloat& x, const BigFloat& mu) {
    if (mu.sign() < 0) throw DomainError("rnd*: mu must be >= 0");
    int prec = x.precision();
    BigFloat rho = bf_exp(-mu);
    Integer n = bf_round_to_integer(x);
    BigFloat nf(Rational(n), prec);
    BigFloat r = x - nf;
    BigFloat plateau = BigFloat(Rational(1, 2), prec) - rho;
    if (bf_abs(r) <= plateau) return nf;
    BigFloat sg(r.sign() >= 0 ? 1l : -1l, prec);
    return nf + (r - sg * plateau) / (rho + rho);
}

BigFloat rnd_oracle(const BigFloat& x, const BigFloat& mu, const BigFloat& lambda) {
    if (lambda < BigFloat(2l, lambda.precision()))
        throw DomainError("rnd: lambda must be >= 2");
    return rnd_star_oracle(x, bf_max(mu, bf_log(lambda)));
}

BigFloat clamped_exp_oracle(const BigFloat& a, const BigFloat& b, const BigFloat& c,
                            const BigFloat& d, const BigFloat& x) {
    if (a > b) throw DomainError("clamped_exp: requires a <= b");
    return bf_max(a, bf_min(b, c * bf_exp(x) + d));
}

BigFloat norm_inf_delta_oracle(const std::vector<BigFloat>& x, const BigFloat& delta) {
    int prec = delta.precision();
    if (delta.sign() <= 0 || delta > BigFloat(1l, prec))
        throw DomainError("norm_inf_delta: delta must lie in (0, 1]");
    BigFloat m(prec);
    for (const auto& v : x) m = bf_max(m, bf_abs(v));
    return m + delta * BigFloat(Rational(1, 2), prec);
}

std::pair<BigFloat, BigFloat> lxh_hxl_oracle(const Rational& a, const Rational& b,
                                             const BigFloat& t, const BigFloat& mu,
                                             const BigFloat& x) {
    if (!(a < b)) throw DomainError("lxh/hxl: requires a < b");
    int prec = t.precision();
    BigFloat af(a, prec), bf_(b, prec);
    BigFloat ln2 = bf_log(BigFloat(2l, prec));
    BigFloat gain = BigFloat(4l, prec) * (mu + ln2 + x * x);
    BigFloat arg = gain * ((t + t) - af - bf_) / (bf_ - af);
    BigFloat half(Rational(1, 2), prec);
    BigFloat phi1 = half + half * bf_tanh(arg);
    return {phi1 * x, (BigFloat(1l, prec) - phi1) * x};
}

BigFloat clock_theta(const BigFloat& nu0, const BigFloat& nu1, const BigFloat& t) {
    int prec = t.precision();
    BigFloat nu = nu0 + nu1 * t;
    BigFloat half(Rational(1, 2), prec);
    return half + half * bf_tanh((nu + nu) * (bf_sin(t + t) - half));
}

BigFloat clock_psi(int i, const BigFloat& nu0, const BigFloat& nu1, const BigFloat& t) {
    switch (i) {
        case 0: return clock_theta(nu0, nu1, t + t) * clock_theta(nu0, nu1, t);
        case 1: return clock_theta(nu0, nu1, -(t + t)) * clock_theta(nu0, nu1, t);
        case 2: return clock_theta(nu0, nu1, t + t) * clock_theta(nu0, nu1, -t);
        case 3: return clock_theta(nu0, nu1, -(t + t)) * clock_theta(nu0, nu1, -t);
        default: throw DomainError("clock_psi: phase index must be in {0,1,2,3}");
    }
}

Rational psi_window_lower_bound_times_96_over_pi() { return Rational(3); }

BigFloat reach_error_bound(const BigFloat& initial_gap, const BigFloat& int_A,
                           const BigFloat& y_drift, const BigFloat& eps, const BigFloat& dt) {
    return initial_gap * bf_exp(-int_A) + y_drift + dt * eps;
}

BigFloat mix_oracle(const BigFloat& i, const BigFloat& f0, const BigFloat& f1) {
    int prec = i.precision();
    if (i.sign() <= 0) return f0;
    if (i >= BigFloat(1l, prec)) return f1;
    return (BigFloat(1l, prec) - i) * f0 + i * f1;
}

MultiPoly chebyshev(int k) {
    if (k < 0) throw DomainError("chebyshev: k must be >= 0");
    MultiPoly t0 = MultiPoly::constant(1, Rational(1));
    if (k == 0) return t0;
    MultiPoly t1 = MultiPoly::variable(1, 1);
    MultiPoly x = t1;
    for (int i = 2; i <= k; ++i) {
        MultiPoly t2 = x.scale(Rational(2)) * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    return t1;
}

BigFloat extract_oracle(int k, const BigFloat& x, int n) {
    if (k < 2) throw DomainError("extract: k must be >= 2");
    if (n < 0) throw DomainError("extract: n must be >= 0");
    MultiPoly tk = chebyshev(k);
    BigFloat c = bf_cos(two_pi(x.precision()) * x);
    for (int i = 0; i < n; ++i) c = tk.eval(std::vector<BigFloat>{c});
    return c;
}

// ---------------------------------------------------------------------------
// Realizations

Realization realize_smooth_sign(const Rational& x, const Rational& z, int precision) {
    // y' = (1 - u^2) y, s' = u, u' = (1 - u^2) u, plus a clock
    Pivp p;
    p.dim = 4;
    const int Y = 1, S = 2, U = 3, T = 4;
    (void)S;
    MultiPoly y = MultiPoly::variable(4, Y), u = MultiPoly::variable(4, U);
    p.rhs.resize(4, MultiPoly(4));
    p.rhs[Y - 1] = y - u * u * y;
    p.rhs[S - 1] = u;
    p.rhs[U - 1] = u - u * u * u;
    p.rhs[T - 1] = MultiPoly::constant(4, Rational(1));
    auto [u0, uerr] = rational_approx(bf_tanh(BigFloat(x, precision + 32)), precision + 32);
    p.init_point = Pivp::PointInit{{z * u0, x, u0, Rational(0)}};
    p.output_arity = 1;
    p.var_names = {"y", "s", "u", "t"};
    p.init_error = uerr * (rat_abs(z) + 1);
    p.validate();

    Realization r{OdeSystem(p, precision), {}, {}, p.init_error};
    for (const auto& q : p.init_point->values) r.y0.emplace_back(q, precision);
    r.outputs = {r.system.dag.state(0)};
    return r;
}

Realization realize_clamped_exp(const Rational& a, const Rational& b, const Rational& c,
                                const Rational& d, const Rational& x, const BigFloat& mu,
                                int precision) {
    (void)mu;
    if (a > b) throw DomainError("clamped_exp: requires a <= b");
    Rational cap = std::max(rat_abs(a - d), std::max(rat_abs(b - d), rat_abs(c))) + 1;
    Rational ca = rat_abs(c);
    // y' = (1 + cap - y)(x - z) y, z' = (1 + cap - y)(x - z)
    Pivp p;
    p.dim = 3;
    MultiPoly y = MultiPoly::variable(3, 1), zz = MultiPoly::variable(3, 2);
    MultiPoly gate = (MultiPoly::constant(3, 1 + cap) - y) * (MultiPoly::constant(3, x) - zz);
    p.rhs = {gate * y, gate, MultiPoly::constant(3, Rational(1))};
    p.init_point = Pivp::PointInit{{ca, Rational(0), Rational(0)}};
    p.output_arity = 1;
    p.var_names = {"y", "z", "t"};
    p.validate();

    Realization r{OdeSystem(p, precision), {}, {}, Rational(0)};
    for (const auto& q : p.init_point->values) r.y0.emplace_back(q, precision);
    SimDag& dag = r.system.dag;
    auto yv = dag.state(0);
    auto signed_y = c >= 0 ? yv : dag.neg(yv);
    auto shifted = dag.add(signed_y, dag.constant(d));
    r.outputs = {dag.max(dag.constant(a), dag.min(dag.constant(b), shifted))};
    return r;
}

Realization realize_rnd_star(const Rational& x, const BigFloat& mu, int precision) {
    if (mu.sign() < 0) throw DomainError("rnd*: mu must be >= 0");
    const int prec = precision;
    const int wp = precision + 32;
    const Rational chart_clamp(17, 20);   // 0.85: keeps every invsqrt1m chain tame
    const Rational blend_lo(3, 5);        // charts blend over |cos| in [0.6, 0.8]

    BigFloat tp = two_pi(wp);
    BigFloat xf(x, wp);
    BigFloat s = bf_sin(tp * xf);
    BigFloat c = bf_cos(tp * xf);

    Rational err(0);
    auto approx = [&](const BigFloat& v) {
        auto [q, e] = rational_approx(v, wp);
        err += e;
        return q;
    };

    Rational s_q = approx(s);
    Rational cstar = approx(bf_min(bf_max(c, BigFloat(-chart_clamp, wp)),
                                   BigFloat(chart_clamp, wp)));
    Rational u0 = approx(bf_tanh(s));
    Rational yabs0 = s_q * u0;

    // chart weights from the constant cosine
    auto clamp01 = [](const Rational& v) {
        return std::min(Rational(1), std::max(Rational(0), v));
    };
    Rational c_q = approx(c);
    Rational w_plus = clamp01((c_q - blend_lo) * 5);
    Rational w_minus = clamp01((-c_q - blend_lo) * 5);
    Rational w_mid = 1 - w_plus - w_minus;

    // state: 0 cpath, 1 Wc, 2 Ac, 3 spath, 4 Ws, 5 As, 6 ssig, 7 usig, 8 yabs, 9 T
    SimDag dag(10, prec);
    auto CP = dag.state(0), WC = dag.state(1), SP = dag.state(3), WS = dag.state(4),
         US = dag.state(7), YA = dag.state(8);
    auto one = dag.constant(1l);

    auto cp_rhs = dag.sub(dag.constant(cstar), CP);
    auto wc3 = dag.mul(WC, dag.mul(WC, WC));
    auto wc_rhs = dag.mul(CP, dag.mul(wc3, cp_rhs));
    auto ac_rhs = dag.mul(WC, cp_rhs);
    auto target = dag.clamp(YA, Rational(0), chart_clamp);
    auto sp_rhs = dag.sub(target, SP);
    auto ws3 = dag.mul(WS, dag.mul(WS, WS));
    auto ws_rhs = dag.mul(SP, dag.mul(ws3, sp_rhs));
    auto as_rhs = dag.mul(WS, sp_rhs);
    auto one_m_us2 = dag.sub(one, dag.mul(US, US));
    auto ss_rhs = US;  // s_sig' = tanh(s_sig), carried as the u variable
    auto us_rhs = dag.mul(one_m_us2, US);
    auto ya_rhs = dag.mul(one_m_us2, YA);
    dag.set_rhs({cp_rhs, wc_rhs, ac_rhs, sp_rhs, ws_rhs, as_rhs, ss_rhs, us_rhs, ya_rhs,
                 dag.constant(1l)});

    // output: x - usig * max(0, min((1 - e^mu/2)(A - pi), A)) / (2 pi)
    BigFloat pi_f = bf_pi(wp);
    BigFloat emu = bf_exp(mu.at_precision(wp));
    auto As = dag.state(5);
    auto Ac = dag.state(2);
    auto A = dag.add(
        dag.add(dag.mul(dag.constant(w_plus), As),
                dag.mul(dag.constant(w_minus), dag.sub(dag.constant(approx(pi_f)), As))),
        dag.mul(dag.constant(w_mid),
                dag.sub(dag.constant(approx(pi_f * BigFloat(Rational(1, 2), wp))), Ac)));
    auto slope = dag.constant(approx(BigFloat(1l, wp) - emu * BigFloat(Rational(1, 2), wp)));
    auto gA = dag.mul(slope, dag.sub(A, dag.constant(approx(pi_f))));
    auto g = dag.max(dag.constant(0l), dag.min(gA, A));
    auto f = dag.mul(US, dag.mul(g, dag.constant(approx(BigFloat(1l, wp) /
                                                        (pi_f + pi_f)))));
    auto out = dag.sub(dag.constant(x), f);

    Realization r{OdeSystem(std::move(dag)), {}, {out}, err};
    auto push = [&](const Rational& q) { r.y0.emplace_back(q, prec); };
    push(Rational(0));  // cpath
    push(Rational(1));  // Wc
    push(Rational(0));  // Ac
    push(Rational(0));  // spath
    push(Rational(1));  // Ws
    push(Rational(0));  // As
    push(s_q);          // ssig
    push(u0);           // usig
    push(yabs0);        // yabs
    push(Rational(0));  // T
    return r;
}

Realization realize_norm_inf_delta(const std::vector<Rational>& x, const Rational& delta,
                                   int precision) {
    if (delta <= 0 || delta > 1) throw DomainError("norm_inf_delta: delta must lie in (0, 1]");
    if (x.empty()) throw DimensionError("norm_inf_delta: empty input");
    const int n = static_cast<int>(x.size());
    const int wp = precision + 32;
    // per input: yabs_i, s_i, u_i; then n-1 smoothed-max registers; then clock
    const int d = 3 * n + (n - 1) + 1;
    SimDag dag(d, precision);
    Rational err(0);
    std::vector<Rational> y0;
    std::vector<SimDag::NodeId> rhs(d);
    auto one = dag.constant(1l);
    std::vector<SimDag::NodeId> absv;
    for (int i = 0; i < n; ++i) {
        auto Y = dag.state(3 * i), U = dag.state(3 * i + 2);
        auto one_m_u2 = dag.sub(one, dag.mul(U, U));
        rhs[3 * i] = dag.mul(one_m_u2, Y);
        rhs[3 * i + 1] = U;
        rhs[3 * i + 2] = dag.mul(one_m_u2, U);
        auto [u0, e] = rational_approx(bf_tanh(BigFloat(x[i], wp)), wp);
        err += e;
        y0.push_back(x[i] * u0);
        y0.push_back(x[i]);
        y0.push_back(u0);
        absv.push_back(Y);
    }
    auto half = dag.constant(Rational(1, 2));
    auto gain = dag.constant(4l);
    SimDag::NodeId acc = absv[0];
    for (int j = 0; j + 1 < n; ++j) {
        auto M = dag.state(3 * n + j);
        auto u = acc, v = absv[j + 1];
        auto target = dag.add(dag.mul(half, dag.add(u, v)),
                              dag.mul(half, dag.abs(dag.sub(u, v))));
        rhs[3 * n + j] = dag.mul(gain, dag.sub(target, M));
        y0.push_back(Rational(0));
        acc = M;
    }
    rhs[d - 1] = dag.constant(1l);
    y0.push_back(Rational(0));
    dag.set_rhs(std::move(rhs));
    auto out = dag.add(acc, dag.constant(Rational(delta / 2)));

    Realization r{OdeSystem(std::move(dag)), {}, {out}, err};
    for (const auto& q : y0) r.y0.emplace_back(q, precision);
    return r;
}

Realization realize_lxh_hxl(const Rational& a, const Rational& b, const Rational& x,
                            const BigFloat& mu, int precision) {
    // Expression-driven: the ramp rides on the clock variable and the tanh
    // sits in the output map. Keeping tanh out of the state matters: a
    // compiled tanh variable starting e^{-2 gain} away from -1 rounds onto
    // the invariant manifold u = -1 and never ramps back (see the compiled
    // variant below, which is only sound at moderate sharpness).
    if (!(a < b)) throw DomainError("lxh/hxl: requires a < b");
    const int wp = precision + 32;
    auto [mu_q, e1] = rational_approx(mu.at_precision(wp), wp);
    auto [ln2_q, e2] = rational_approx(bf_log(BigFloat(2l, wp)), wp);
    Rational gain = 4 * (mu_q + ln2_q + x * x);
    SimDag dag(1, precision);
    auto T = dag.state(0);
    dag.set_rhs({dag.constant(1l)});
    auto arg = dag.mul(dag.constant(gain / (b - a)),
                       dag.sub(dag.add(T, T), dag.constant(a + b)));
    auto half = dag.constant(Rational(1, 2));
    auto phi1 = dag.mul(half, dag.add(dag.constant(1l), dag.tanh(arg)));
    auto xc = dag.constant(x);
    auto lxh = dag.mul(xc, phi1);
    auto hxl = dag.sub(xc, lxh);
    Realization r{OdeSystem(std::move(dag)), {}, {lxh, hxl}, e1 + e2, precision};
    r.y0.emplace_back(0l, precision);
    return r;
}

Realization realize_lxh_hxl_compiled(const Rational& a, const Rational& b, const Rational& x,
                                     const BigFloat& mu, int precision) {
    if (!(a < b)) throw DomainError("lxh/hxl: requires a < b");
    const int wp = precision + 32;
    auto [mu_q, e1] = rational_approx(mu.at_precision(wp), wp);
    auto [ln2_q, e2] = rational_approx(bf_log(BigFloat(2l, wp)), wp);
    // phi1 = (1 + tanh(4(mu + ln2 + x^2)(2t - a - b)/(b - a)))/2
    Rational gain = 4 * (mu_q + ln2_q + x * x);
    Expr t = ex_time();
    Expr arg = ex_mul(ex_const(gain / (b - a)),
                      ex_sub(ex_add(t, t), ex_const(a + b)));
    Expr phi1 = ex_mul(ex_const(Rational(1, 2)), ex_add(ex_const(1l), ex_tanh(arg)));
    Expr lxh = ex_mul(ex_const(x), phi1);
    Expr hxl = ex_mul(ex_const(x), ex_sub(ex_const(1l), phi1));
    auto cr = closure_compile({lxh, hxl}, ClosureEnv{{}, {}, {}, wp});
    cr.pivp.init_error += e1 + e2;

    Realization r{OdeSystem(cr.pivp, precision), {}, {}, cr.pivp.init_error, precision};
    for (const auto& q : cr.pivp.init_point->values) r.y0.emplace_back(q, precision);
    r.outputs = {r.system.dag.state(0), r.system.dag.state(1)};
    return r;
}

Realization realize_clock_psi(int i, const Rational& nu_slope, int precision) {
    // Expression-driven, same reasoning as the ramp: psi evaluates on the
    // clock variable through the output map.
    if (i < 0 || i > 3) throw DomainError("clock_psi: phase index must be in {0,1,2,3}");
    if (nu_slope < 0) throw DomainError("clock: nu must be nonnegative with nu(0) = 0");
    SimDag dag(1, precision);
    auto T = dag.state(0);
    dag.set_rhs({dag.constant(1l)});
    auto half = dag.constant(Rational(1, 2));
    auto theta_at = [&](SimDag::NodeId at, SimDag::NodeId nu_at) {
        auto arg = dag.mul(dag.add(nu_at, nu_at),
                           dag.sub(dag.sin(dag.add(at, at)), half));
        return dag.mul(half, dag.add(dag.constant(1l), dag.tanh(arg)));
    };
    auto nu_of = [&](SimDag::NodeId at) { return dag.mul(dag.constant(nu_slope), at); };
    auto t2 = dag.add(T, T);
    auto nt = dag.neg(T), nt2 = dag.neg(t2);
    auto first = (i == 0 || i == 2) ? theta_at(t2, nu_of(t2)) : theta_at(nt2, nu_of(nt2));
    auto second = (i == 0 || i == 1) ? theta_at(T, nu_of(T)) : theta_at(nt, nu_of(nt));
    auto psi = dag.mul(first, second);
    Realization r{OdeSystem(std::move(dag)), {}, {psi}, Rational(0), precision};
    r.y0.emplace_back(0l, precision);
    return r;
}

Realization realize_clock_psi_compiled(int i, const Rational& nu_slope, int precision) {
    if (i < 0 || i > 3) throw DomainError("clock_psi: phase index must be in {0,1,2,3}");
    if (nu_slope < 0) throw DomainError("clock: nu must be nonnegative with nu(0) = 0");
    const int wp = precision + 32;
    Expr t = ex_time();
    auto theta_at = [&](Expr at, Expr nu_at) {
        // 1/2 + 1/2 tanh(2 nu (sin 2t' - 1/2))
        Expr arg = ex_mul(ex_add(nu_at, nu_at),
                          ex_sub(ex_sin(ex_add(at, at)), ex_const(Rational(1, 2))));
        return ex_add(ex_const(Rational(1, 2)),
                      ex_mul(ex_const(Rational(1, 2)), ex_tanh(arg)));
    };
    auto nu_of = [&](Expr at) { return ex_mul(ex_const(nu_slope), at); };
    Expr t2 = ex_add(t, t);
    Expr first = (i == 0 || i == 2) ? theta_at(t2, nu_of(t2)) : theta_at(ex_neg(t2), nu_of(ex_neg(t2)));
    Expr second = (i == 0 || i == 1) ? theta_at(t, nu_of(t)) : theta_at(ex_neg(t), nu_of(ex_neg(t)));
    Expr psi = ex_mul(first, second);
    auto cr = closure_compile({psi}, ClosureEnv{{}, {}, {}, wp});

    Realization r{OdeSystem(cr.pivp, precision), {}, {}, cr.pivp.init_error, precision};
    for (const auto& q : cr.pivp.init_point->values) r.y0.emplace_back(q, precision);
    r.outputs = {r.system.dag.state(0)};
    return r;
}

SimDag::NodeId window_bump(SimDag& dag, SimDag::NodeId T, const Rational& a, const Rational& b,
                           const Rational& tau, const BigFloat& mu, int precision) {
    if (!(Rational(0) <= a && a < b && b <= tau)) throw DomainError("bump: need [a,b] in [0,tau]");
    if (2 * (b - a) >= tau) throw DomainError("bump: window must cover less than half a period");
    const int wp = precision + 32;
    BigFloat tp = two_pi(wp);
    BigFloat tau_f(tau, wp);
    BigFloat omega_ang = tp / tau_f;  // angle per unit time
    BigFloat alpha = BigFloat(a, wp) * omega_ang;
    BigFloat beta = BigFloat(b, wp) * omega_ang;
    BigFloat rho_ang = (BigFloat(b - a, wp) * omega_ang) * BigFloat(Rational(1, 3), wp);
    BigFloat g_sharp = mu.at_precision(wp) * BigFloat(Rational(1, 2), wp) + BigFloat(14l, wp);
    BigFloat scale = g_sharp / bf_sin(rho_ang * BigFloat(Rational(1, 2), wp));

    auto ang_sin = dag.sin(dag.mul(dag.constant(omega_ang), T));
    auto ang_cos = dag.cos(dag.mul(dag.constant(omega_ang), T));
    auto half = dag.constant(Rational(1, 2));
    auto one = dag.constant(1l);
    // sigmoid crossing at angle phi, rising: sin(ang - phi); falling: -sin
    auto edge = [&](const BigFloat& phi, bool rising) {
        BigFloat cphi = bf_cos(phi), sphi = bf_sin(phi);
        auto sa = dag.sub(dag.mul(dag.constant(cphi), ang_sin),
                          dag.mul(dag.constant(sphi), ang_cos));
        auto q = rising ? sa : dag.neg(sa);
        auto arg = dag.mul(dag.constant(scale), q);
        return dag.mul(half, dag.add(one, dag.tanh(arg)));
    };
    auto sig1 = edge(alpha + rho_ang * BigFloat(Rational(1, 2), wp), true);
    auto sig2 = edge(beta - rho_ang * BigFloat(Rational(1, 2), wp), false);
    return dag.mul(sig1, sig2);
}

SimDag::NodeId reach_term(SimDag& dag, const BigFloat& mu, SimDag::NodeId y, SimDag::NodeId x,
                          int precision) {
    auto diff = dag.sub(x, y);
    auto gain = dag.mul(dag.constant(5l),
                        dag.add(dag.constant(mu.at_precision(precision + 32)),
                                dag.add(dag.mul(diff, diff), dag.constant(2l))));
    return dag.mul(gain, diff);
}

SimDag::NodeId sample_hold_rhs(SimDag& dag, SimDag::NodeId T, const Rational& a,
                               const Rational& b, const Rational& tau, const BigFloat& mu,
                               SimDag::NodeId y, SimDag::NodeId x, int precision) {
    auto bump = window_bump(dag, T, a, b, tau, mu, precision);
    return dag.mul(bump, reach_term(dag, mu, y, x, precision));
}

SimDag::NodeId hold_after_rhs(SimDag& dag, SimDag::NodeId T, const Rational& t_off,
                              const BigFloat& mu, SimDag::NodeId inner, int precision) {
    const int wp = precision + 32;
    BigFloat sharp = mu.at_precision(wp) + mu.at_precision(wp) + BigFloat(28l, wp);
    auto s = dag.sub(T, dag.constant(t_off));
    auto arg = dag.mul(dag.constant(sharp), dag.sub(dag.add(s, s), dag.constant(1l)));
    auto half = dag.constant(Rational(1, 2));
    auto phi1 = dag.mul(half, dag.add(dag.constant(1l), dag.tanh(arg)));
    return dag.mul(dag.sub(dag.constant(1l), phi1), inner);
}

// ---------------------------------------------------------------------------
// Specs

GadgetSpec smooth_sign_spec(const MultiPoly& tolerance_p) {
    GadgetSpec s;
    s.name = "smooth_sign";
    s.input_arity = 2;
    s.output_arity = 1;
    MultiPoly p = tolerance_p;
    s.oracle = [p](const std::vector<BigFloat>& x, const BigFloat&) {
        return std::vector<BigFloat>{smooth_sign_oracle(x[0], x[1], p)};
    };
    s.realize = [](const std::vector<Rational>& x, const BigFloat&, int prec) {
        return realize_smooth_sign(x[0], x[1], prec);
    };
    // err <= |z/x| e^-t  and  len <= t max(1, r); p folded in by the caller
    s.omega = bound_poly2({{{0, 0}, Rational(3)},
                           {{0, 1}, Rational(1)},
                           {{1, 0}, Rational(3)},
                           {{1, 1}, Rational(1)}});
    s.upsilon = bound_poly3({{{0, 0, 0}, Rational(2)},
                             {{1, 0, 0}, Rational(1)},
                             {{0, 0, 1}, Rational(1)}});
    s.lambda = bound_poly2({{{0, 0}, Rational(2)}, {{0, 1}, Rational(1)}});
    return s;
}

GadgetSpec abs_spec() {
    GadgetSpec s = smooth_sign_spec(MultiPoly(1));
    s.name = "abs";
    s.input_arity = 1;
    s.oracle = [](const std::vector<BigFloat>& x, const BigFloat&) {
        return std::vector<BigFloat>{abs_oracle(x[0])};
    };
    s.realize = [](const std::vector<Rational>& x, const BigFloat&, int prec) {
        return realize_smooth_sign(x[0], x[0], prec);
    };
    return s;
}

GadgetSpec max_min_spec() {
    GadgetSpec s;
    s.name = "max_min";
    s.input_arity = 2;
    s.output_arity = 2;
    s.oracle = [](const std::vector<BigFloat>& x, const BigFloat&) {
        auto [mx, mn] = max_min_oracle(x[0], x[1]);
        return std::vector<BigFloat>{mx, mn};
    };
    s.realize = [](const std::vector<Rational>& x, const BigFloat&, int prec) {
        // (a+b)/2 +- |a-b|/2 through the abs realization of a-b
        Realization r = realize_smooth_sign(x[0] - x[1], x[0] - x[1], prec);
        SimDag& dag = r.system.dag;
        auto half = dag.constant(Rational(1, 2));
        auto mean = dag.constant(Rational((x[0] + x[1]) / 2));
        auto habs = dag.mul(half, r.outputs[0]);
        r.outputs = {dag.add(mean, habs), dag.sub(mean, habs)};
        return r;
    };
    s.omega = bound_poly2({{{0, 0}, Rational(4)},
                           {{0, 1}, Rational(1)},
                           {{1, 0}, Rational(4)},
                           {{1, 1}, Rational(2)}});
    s.upsilon = bound_poly3({{{0, 0, 0}, Rational(3)},
                             {{1, 0, 0}, Rational(2)},
                             {{0, 0, 1}, Rational(1)}});
    return s;
}

GadgetSpec clamped_exp_spec() {
    GadgetSpec s;
    s.name = "clamped_exp";
    s.input_arity = 5;
    s.output_arity = 1;
    s.oracle = [](const std::vector<BigFloat>& x, const BigFloat&) {
        return std::vector<BigFloat>{clamped_exp_oracle(x[0], x[1], x[2], x[3], x[4])};
    };
    s.realize = [](const std::vector<Rational>& x, const BigFloat& mu, int prec) {
        return realize_clamped_exp(x[0], x[1], x[2], x[3], x[4], mu, prec);
    };
    s.omega = bound_poly2({{{0, 0}, Rational(10)},
                           {{1, 0}, Rational(7)},
                           {{0, 1}, Rational(1)}});
    s.upsilon = bound_poly3({{{0, 0, 0}, Rational(4)},
                             {{1, 0, 0}, Rational(3)},
                             {{0, 0, 1}, Rational(1)}});
    return s;
}

GadgetSpec rnd_star_spec() {
    GadgetSpec s;
    s.name = "rnd_star";
    s.input_arity = 1;
    s.output_arity = 1;
    s.oracle = [](const std::vector<BigFloat>& x, const BigFloat& mu) {
        return std::vector<BigFloat>{rnd_star_oracle(x[0], mu)};
    };
    s.realize = [](const std::vector<Rational>& x, const BigFloat& mu, int prec) {
        return realize_rnd_star(x[0], mu, prec);
    };
    s.omega = bound_poly2({{{0, 0}, Rational(32)}, {{0, 1}, Rational(3)}});
    s.upsilon = bound_poly3({{{0, 0, 0}, Rational(7)},
                             {{1, 0, 0}, Rational(1)},
                             {{0, 0, 1}, Rational(1)}});
    s.lambda = bound_poly2({{{0, 0}, Rational(6)}, {{0, 1}, Rational(2)}});
    return s;
}

GadgetSpec rnd_spec() {
    GadgetSpec s = rnd_star_spec();
    s.name = "rnd";
    // rnd(x, mu, lambda) = rnd*(x, max(mu, ln lambda)); callers fold lambda
    // into mu before reaching the realization.
    s.oracle = [](const std::vector<BigFloat>& x, const BigFloat& mu) {
        return std::vector<BigFloat>{rnd_star_oracle(x[0], mu)};
    };
    return s;
}

GadgetSpec norm_inf_delta_spec(int n_inputs) {
    GadgetSpec s;
    s.name = "norm_inf_delta";
    s.input_arity = n_inputs;
    s.output_arity = 1;
    s.oracle = [](const std::vector<BigFloat>& x, const BigFloat&) {
        // the band width delta rides in the last input slot
        return std::vector<BigFloat>{
            norm_inf_delta_oracle(std::vector<BigFloat>(x.begin(), x.end() - 1), x.back())};
    };
    s.realize = [](const std::vector<Rational>& x, const BigFloat&, int prec) {
        return realize_norm_inf_delta(std::vector<Rational>(x.begin(), x.end() - 1), x.back(),
                                      prec);
    };
    s.omega = bound_poly2({{{0, 0}, Rational(8)},
                           {{0, 1}, Rational(1)},
                           {{1, 0}, Rational(4)},
                           {{1, 1}, Rational(1)}});
    s.upsilon = bound_poly3({{{0, 0, 0}, Rational(3)},
                             {{1, 0, 0}, Rational(2)},
                             {{0, 0, 1}, Rational(1)}});
    return s;
}

GadgetSpec lxh_hxl_spec(const Rational& a, const Rational& b) {
    GadgetSpec s;
    s.name = "lxh_hxl";
    s.input_arity = 2;  // (t, x)
    s.output_arity = 2;
    Rational aa = a, bb = b;
    s.oracle = [aa, bb](const std::vector<BigFloat>& x, const BigFloat& mu) {
        auto [l, h] = lxh_hxl_oracle(aa, bb, x[0], mu, x[1]);
        return std::vector<BigFloat>{l, h};
    };
    s.realize = [aa, bb](const std::vector<Rational>& x, const BigFloat& mu, int prec) {
        return realize_lxh_hxl(aa, bb, x[1], mu, prec);
    };
    s.omega = bound_poly2({{{0, 0}, Rational(2)}, {{0, 1}, Rational(1)}, {{1, 0}, Rational(1)}});
    s.upsilon = bound_poly3({{{0, 0, 0}, Rational(2)},
                             {{1, 0, 0}, Rational(1)},
                             {{0, 0, 1}, Rational(1)}});
    return s;
}

GadgetSpec clock_spec(int psi_index, const Rational& nu_slope) {
    GadgetSpec s;
    s.name = "clock_psi" + std::to_string(psi_index);
    s.input_arity = 1;  // t
    s.output_arity = 1;
    int idx = psi_index;
    Rational slope = nu_slope;
    s.oracle = [idx, slope](const std::vector<BigFloat>& x, const BigFloat&) {
        int prec = x[0].precision();
        return std::vector<BigFloat>{
            clock_psi(idx, BigFloat(prec), BigFloat(slope, prec), x[0])};
    };
    s.realize = [idx, slope](const std::vector<Rational>&, const BigFloat&, int prec) {
        return realize_clock_psi(idx, slope, prec);
    };
    s.omega = bound_poly2({{{0, 0}, Rational(1)}, {{0, 1}, Rational(1)}});
    s.upsilon = bound_poly3({{{0, 0, 0}, Rational(2)}, {{0, 0, 1}, Rational(1)}});
    return s;
}

GadgetSpec mix_spec() {
    GadgetSpec s;
    s.name = "mix";
    s.input_arity = 3;  // (i, f0, f1) pre-evaluated
    s.output_arity = 1;
    s.oracle = [](const std::vector<BigFloat>& x, const BigFloat&) {
        return std::vector<BigFloat>{mix_oracle(x[0], x[1], x[2])};
    };
    s.omega = bound_poly2({{{0, 0}, Rational(1)}, {{0, 1}, Rational(1)}});
    s.upsilon = bound_poly3({{{0, 0, 0}, Rational(1)}, {{1, 0, 0}, Rational(1)}});
    return s;
}

}  // namespace gpacforge::gadgets
