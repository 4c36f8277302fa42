#include "gpacforge/verify.hpp"

#include <atomic>
#include <chrono>
#include <random>
#include <sstream>

#include "gpacforge/analog.hpp"
#include "gpacforge/batch.hpp"

namespace gpacforge::verify {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

struct PropertyTimer {
    PropertyResult& res;
    Clock::time_point t0 = Clock::now();
    explicit PropertyTimer(PropertyResult& r) : res(r) {}
    ~PropertyTimer() { res.seconds = elapsed(t0); }
};

// one conformance outcome of a realization grid point
struct PointOutcome {
    bool pass = true;
    double worst_err = 0;       // max |out - oracle| past the length trigger
    double bound = 0;           // e^-mu
    double len_to_converge = 0;  // first length with错误 below bound for good
    double upsilon_margin = 0;  // min Upsilon - |state|
    std::string note;
};

// integrates a realization and checks the convergence contract:
// error <= e^-mu once len >= Omega(|x|, mu), state norm <= Upsilon throughout
PointOutcome check_realization(const gadgets::GadgetSpec& spec, const std::vector<Rational>& x,
                               int mu_i) {
    PointOutcome out;
    const int prec = 160;
    BigFloat mu(static_cast<long>(mu_i), prec);
    auto real = spec.realize(x, mu, prec);
    Rational r(0);
    for (const auto& v : x) r = std::max(r, rat_abs(v));
    BigFloat rf(r, prec);
    BigFloat omega_len = spec.omega_at(rf, mu);
    BigFloat bound = bf_exp(-mu);
    std::vector<BigFloat> orac_in;
    for (const auto& v : x) orac_in.emplace_back(v, prec);
    auto oracle = spec.oracle(orac_in, mu);

    IntegrationConfig cfg;
    cfg.precision_bits = std::max(prec, real.min_precision);
    cfg.order = 12;
    cfg.local_tol_log2 = -static_cast<int>(1.5 * (mu_i + 24)) - 16;
    BigFloat t_end = omega_len + BigFloat(4l, prec);
    Trajectory tr = integrate(real.system, real.y0, t_end, cfg);
    if (tr.stop_reason != StopReason::TimeReached) {
        out.pass = false;
        out.note = std::string("stopped: ") + to_string(tr.stop_reason);
        return out;
    }
    if (tr.back().len < omega_len) {
        out.pass = false;
        out.note = "length never reached Omega";
        return out;
    }
    out.bound = bound.to_double();
    out.upsilon_margin = 1e300;
    bool converged = false;
    for (const auto& s : tr.samples) {
        BigFloat norm(prec);
        for (const auto& v : s.y) norm = bf_max(norm, bf_abs(v));
        BigFloat ups = spec.upsilon_at(rf, mu, s.t);
        out.upsilon_margin = std::min(out.upsilon_margin, (ups - norm).to_double());
        if (ups < norm) out.pass = false;
        auto vals = real.read_outputs(s.y);
        BigFloat err(prec);
        for (size_t i = 0; i < vals.size(); ++i) err = bf_max(err, bf_abs(vals[i] - oracle[i]));
        if (!converged && err <= bound) {
            converged = true;
            out.len_to_converge = s.len.to_double();
        }
        if (err > bound) converged = false;
        if (s.len >= omega_len) {
            out.worst_err = std::max(out.worst_err, err.to_double());
            if (err > bound) out.pass = false;
        }
    }
    return out;
}

PropertyResult grid_property(const std::string& name, const gadgets::GadgetSpec& spec,
                             const std::vector<std::vector<Rational>>& grid, bool parallel) {
    PropertyResult res;
    res.name = name;
    PropertyTimer timer(res);
    const std::vector<int> mus{1, 2, 5, 10, 20};
    std::vector<std::pair<size_t, int>> points;
    for (size_t i = 0; i < grid.size(); ++i)
        for (int mu : mus) points.emplace_back(i, mu);
    std::vector<PointOutcome> outs(points.size());
    batch::run_indexed(points.size(), parallel, [&](size_t j) {
        outs[j] = check_realization(spec, grid[points[j].first], points[j].second);
    });
    double worst_ratio = 0, worst_margin = 1e300;
    bool pass = true;
    std::string first_fail;
    for (size_t j = 0; j < outs.size(); ++j) {
        const auto& o = outs[j];
        if (!o.pass && first_fail.empty())
            first_fail = "point " + std::to_string(points[j].first) + " mu=" +
                         std::to_string(points[j].second) + " " + o.note;
        pass = pass && o.pass;
        if (o.bound > 0) worst_ratio = std::max(worst_ratio, o.worst_err / o.bound);
        worst_margin = std::min(worst_margin, o.upsilon_margin);
    }
    res.pass = pass;
    res.detail = std::to_string(points.size()) + " runs, max err/bound " + fmt(worst_ratio) +
                 ", min state margin " + fmt(worst_margin) +
                 (first_fail.empty() ? "" : ", first failure: " + first_fail);
    return res;
}

// ---------------------------------------------------------------------------
// gadgets suite

PropertyResult smooth_sign_grid(bool parallel) {
    auto spec = gadgets::smooth_sign_spec(MultiPoly(1));
    std::vector<std::vector<Rational>> grid;
    for (long i = 0; i < 25; ++i) {
        Rational x = Rational(2, 100) + Rational(i, 12);  // 0.02 .. ~2
        grid.push_back({x, x});
        grid.push_back({-x, x * Rational(4, 5)});
    }
    return grid_property("smooth_sign convergence", spec, grid, parallel);
}

PropertyResult abs_grid(bool parallel) {
    auto spec = gadgets::abs_spec();
    std::vector<std::vector<Rational>> grid;
    for (long i = 0; i < 50; ++i) {
        Rational x = Rational(3, 100) + Rational(i, 20);
        grid.push_back({i % 2 ? x : Rational(-x)});
    }
    return grid_property("abs convergence", spec, grid, parallel);
}

PropertyResult clamped_exp_grid(bool parallel) {
    auto spec = gadgets::clamped_exp_spec();
    std::vector<std::vector<Rational>> grid;
    for (long i = 0; i < 51; ++i) {
        Rational x = Rational(-2) + Rational(i, 12);  // -2 .. 2.25
        Rational c = (i % 3 == 0) ? Rational(1) : (i % 3 == 1 ? Rational(1, 2) : Rational(2));
        grid.push_back({Rational(0), Rational(10), c, Rational(0), x});
    }
    return grid_property("clamped_exp convergence", spec, grid, parallel);
}

PropertyResult rnd_star_grid(bool parallel) {
    auto spec = gadgets::rnd_star_spec();
    std::vector<std::vector<Rational>> grid;
    for (long i = 0; i < 55; ++i)
        grid.push_back({Rational(-27, 10) + Rational(i, 10)});  // -2.7 .. 2.7 step .1
    return grid_property("rnd* convergence", spec, grid, parallel);
}

PropertyResult smooth_sign_analytic_bound() {
    // |1 - y(t)| <= (1/x) e^-t (1 + 1e-6) at all samples, z = 1
    PropertyResult res;
    res.name = "smooth_sign analytic bound";
    PropertyTimer timer(res);
    const int prec = 192;
    res.pass = true;
    double worst = 0;
    for (const Rational& x :
         {Rational(1, 1000), Rational(1, 100), Rational(1, 10), Rational(1)}) {
        auto real = gadgets::realize_smooth_sign(x, Rational(1), prec);
        IntegrationConfig cfg;
        cfg.precision_bits = prec;
        cfg.order = 14;
        cfg.local_tol_log2 = -120;
        Trajectory tr = integrate(real.system, real.y0, BigFloat(25l, prec), cfg);
        BigFloat slack(1.0 + 1e-6, prec);
        for (const auto& s : tr.samples) {
            BigFloat y = real.system.dag.eval_node(real.outputs[0], s.y);
            BigFloat err = bf_abs(BigFloat(1l, prec) - y);
            BigFloat bound = bf_exp(-s.t) / BigFloat(x, prec) * slack;
            if (err > bound) res.pass = false;
            if (bound.sign() > 0) worst = std::max(worst, (err / bound).to_double());
        }
    }
    res.detail = "4 trajectories, max err/bound " + fmt(worst);
    return res;
}

PropertyResult lxh_hxl_property(bool parallel) {
    PropertyResult res;
    res.name = "lxh/hxl ramp contract";
    PropertyTimer timer(res);
    const int prec = 160;
    const Rational a(1), b(3);
    auto spec = gadgets::lxh_hxl_spec(a, b);
    res.pass = true;
    double worst = 0;
    // oracle bullets over a grid of (t, mu, x)
    for (int mu_i : {1, 2, 5, 10, 20}) {
        BigFloat mu(static_cast<long>(mu_i), prec);
        BigFloat bound = bf_exp(-mu);
        for (const Rational& xq : {Rational(0), Rational(1, 2), Rational(-2), Rational(5)}) {
            BigFloat x(xq, prec);
            for (const Rational& tq :
                 {Rational(0), Rational(1, 2), Rational(1), Rational(2), Rational(3),
                  Rational(4), Rational(6)}) {
                BigFloat t(tq, prec);
                auto [lxh, hxl] = gadgets::lxh_hxl_oracle(a, b, t, mu, x);
                if (bf_abs(lxh) > bf_abs(x) || bf_abs(hxl) > bf_abs(x)) res.pass = false;
                if (tq <= a) {
                    if (bf_abs(lxh) > bound || bf_abs(x - hxl) > bound) res.pass = false;
                }
                if (tq >= b) {
                    if (bf_abs(x - lxh) > bound || bf_abs(hxl) > bound) res.pass = false;
                }
                if (2 * tq == a + b) {
                    // midpoint: lxh = x/2 by symmetry
                    if (bf_abs(lxh - x * BigFloat(Rational(1, 2), prec)) >
                        bf_pow2(-40, prec))
                        res.pass = false;
                }
            }
        }
    }
    // realization tracks the oracle along trajectories
    std::vector<int> mus{1, 2, 5, 10, 20};
    std::vector<std::pair<Rational, int>> combos;
    for (const Rational& xq : {Rational(1, 2), Rational(-2), Rational(5), Rational(0),
                               Rational(3, 2), Rational(-1, 3), Rational(7, 2),
                               Rational(-9, 2), Rational(1, 8), Rational(2)})
        for (int m : mus) combos.emplace_back(xq, m);
    std::vector<double> ratios(combos.size(), 0);
    std::vector<char> ok(combos.size(), 1);
    batch::run_indexed(combos.size(), parallel, [&](size_t j) {
        auto [xq, mu_i] = combos[j];
        BigFloat mu(static_cast<long>(mu_i), prec);
        auto real = gadgets::realize_lxh_hxl(a, b, xq, mu, prec);
        IntegrationConfig cfg;
        cfg.precision_bits = std::max(prec, real.min_precision);
        cfg.order = 12;
        cfg.local_tol_log2 = -static_cast<int>(1.5 * mu_i) - 40;
        cfg.max_step = Rational(1, 8);
        Trajectory tr = integrate(real.system, real.y0, BigFloat(6l, prec), cfg);
        BigFloat bound = bf_exp(-mu);
        for (const auto& s : tr.samples) {
            auto [lo, ho] = gadgets::lxh_hxl_oracle(a, b, s.t, mu, BigFloat(xq, prec));
            auto outs = real.read_outputs(s.y);
            BigFloat err = bf_max(bf_abs(outs[0] - lo), bf_abs(outs[1] - ho));
            if (err > bound) ok[j] = 0;
            ratios[j] = std::max(ratios[j], (err / bound).to_double());
        }
    });
    for (size_t j = 0; j < combos.size(); ++j) {
        res.pass = res.pass && ok[j];
        worst = std::max(worst, ratios[j]);
    }
    res.detail = "bullets + " + std::to_string(combos.size()) + " trajectories, max err/bound " +
                 fmt(worst);
    return res;
}

PropertyResult clock_property(bool parallel) {
    PropertyResult res;
    res.name = "clock theta/psi contract";
    PropertyTimer timer(res);
    const int prec = 160;
    res.pass = true;
    BigFloat pi = bf_pi(prec);
    // theta bullets for constant nu = 3 (grid over two periods)
    BigFloat nu0(3l, prec), zero(prec);
    for (int i = 0; i <= 200; ++i) {
        BigFloat t = pi * BigFloat(Rational(i, 100), prec);
        BigFloat th = gadgets::clock_theta(nu0, zero, t);
        if (th < zero || th > BigFloat(1l, prec)) res.pass = false;
        double frac = i % 100 / 100.0;  // position within [n pi, (n+1) pi)
        if (frac >= 0.5 && bf_abs(th) > bf_exp(-nu0)) res.pass = false;
        // theta >= 1/2 on [n pi + pi/12, (n+1/2) pi - pi/12]
        if (frac >= 1.0 / 12 + 1e-9 && frac <= 0.5 - 1.0 / 12 - 1e-9 &&
            th < BigFloat(Rational(1, 2), prec))
            res.pass = false;
    }
    // psi bullets: suppressed off-window, window integral in [3pi/96, pi/4]
    std::vector<BigFloat> nodes, weights;
    gauss_legendre_01(24, prec, nodes, weights);
    for (int idx = 0; idx < 4; ++idx) {
        for (int i = 0; i <= 200; ++i) {
            BigFloat t = pi * BigFloat(Rational(i, 100), prec);
            double frac = i % 100 / 100.0;
            BigFloat ps = gadgets::clock_psi(idx, nu0, zero, t);
            bool inside = frac >= idx * 0.25 - 1e-9 && frac <= (idx + 1) * 0.25 + 1e-9;
            if (!inside && bf_abs(ps) > bf_exp(-nu0)) res.pass = false;
            if (ps < zero || ps > BigFloat(1l, prec)) res.pass = false;
        }
        BigFloat integral(prec);
        BigFloat a = pi * BigFloat(Rational(idx, 4), prec);
        BigFloat w = pi * BigFloat(Rational(1, 4), prec);
        for (size_t g = 0; g < nodes.size(); ++g)
            integral += weights[g] * w * gadgets::clock_psi(idx, nu0, zero, a + nodes[g] * w);
        BigFloat m_psi = pi * BigFloat(Rational(3, 96), prec);
        BigFloat M_psi = pi * BigFloat(Rational(1, 4), prec);
        if (integral < m_psi || integral > M_psi) res.pass = false;
    }
    // compiled psi realizations track the oracle
    std::vector<int> idxs{0, 1, 2, 3};
    std::vector<char> ok(idxs.size(), 1);
    std::vector<double> worst(idxs.size(), 0);
    batch::run_indexed(idxs.size(), parallel, [&](size_t j) {
        int idx = idxs[j];
        Rational slope(2);
        auto real = gadgets::realize_clock_psi(idx, slope, prec);
        IntegrationConfig cfg;
        cfg.precision_bits = std::max(prec, real.min_precision);
        cfg.order = 12;
        cfg.local_tol_log2 = -70;
        cfg.max_step = Rational(1, 4);
        Trajectory tr = integrate(real.system, real.y0, bf_pi(prec) + bf_pi(prec), cfg);
        BigFloat bound = bf_pow2(-40, prec);
        for (const auto& s : tr.samples) {
            BigFloat ps = gadgets::clock_psi(idx, BigFloat(prec), BigFloat(slope, prec), s.t);
            BigFloat err = bf_abs(real.read_outputs(s.y)[0] - ps);
            if (err > bound) ok[j] = 0;
            worst[j] = std::max(worst[j], err.to_double());
        }
    });
    double w = 0;
    for (size_t j = 0; j < idxs.size(); ++j) {
        res.pass = res.pass && ok[j];
        w = std::max(w, worst[j]);
    }
    res.detail = "bullets + window integrals + 4 compiled realizations, max traj err " + fmt(w);
    return res;
}

PropertyResult sample_hold_property(bool parallel) {
    PropertyResult res;
    res.name = "sample-and-hold contract";
    PropertyTimer timer(res);
    const int prec = 160;
    const Rational a(1), b(2), tau(4);
    std::vector<std::pair<Rational, Rational>> cases;  // (x_const, y0)
    for (const Rational& xv : {Rational(1), Rational(-1), Rational(3, 10), Rational(2),
                               Rational(-1, 2)})
        for (const Rational& y0 : {Rational(0), Rational(1, 2), Rational(-1)})
            cases.emplace_back(xv, y0);
    std::vector<int> mus{1, 2, 5, 10, 20};
    std::vector<std::tuple<Rational, Rational, int>> combos;
    for (auto& c : cases)
        for (int m : mus) combos.emplace_back(c.first, c.second, m);
    res.pass = true;
    std::vector<char> ok(combos.size(), 1);
    std::vector<double> worst(combos.size(), 0);
    batch::run_indexed(combos.size(), parallel, [&](size_t j) {
        auto [xv, y0v, mu_i] = combos[j];
        BigFloat mu(static_cast<long>(mu_i), prec);
        SimDag dag(2, prec);
        auto T = dag.state(0);
        auto Y = dag.state(1);
        auto rhs = gadgets::sample_hold_rhs(dag, T, a, b, tau, mu, Y, dag.constant(xv), prec);
        dag.set_rhs({dag.constant(1l), rhs});
        // bullet 1: outside the window |y'| <= e^-mu (scan the gate itself)
        BigFloat bound = bf_exp(-mu);
        for (int i = 0; i <= 80; ++i) {
            Rational t(i, 20);  // 0..4
            bool inside = t >= a && t <= b;
            if (inside) continue;
            std::vector<BigFloat> st{BigFloat(t, prec), BigFloat(y0v, prec)};
            BigFloat v = bf_abs(dag.eval_rhs(st)[1]);
            if (v > bound) ok[j] = 0;
            worst[j] = std::max(worst[j], (v / bound).to_double());
        }
        // bullet 2: constant input captured within 2 e^-mu by the window end
        IntegrationConfig cfg;
        cfg.precision_bits = prec;
        cfg.order = 12;
        cfg.local_tol_log2 = -static_cast<int>(1.5 * mu_i) - 30;
        cfg.max_step = Rational(1, 4);
        cfg.checkpoints = {b, tau};
        OdeSystem sys{std::move(dag)};
        std::vector<BigFloat> init{BigFloat(prec), BigFloat(y0v, prec)};
        Trajectory tr = integrate(sys, init, BigFloat(tau, prec), cfg);
        BigFloat y_at_b = tr.at_time(BigFloat(b, prec))[1];
        if (bf_abs(y_at_b - BigFloat(xv, prec)) > bound + bound) ok[j] = 0;
        // hold phase: drift after the window stays below tau e^-mu
        BigFloat y_end = tr.back().y[1];
        if (bf_abs(y_end - y_at_b) > BigFloat(tau, prec) * bound) ok[j] = 0;
    });
    double w = 0;
    for (size_t j = 0; j < combos.size(); ++j) {
        res.pass = res.pass && ok[j];
        w = std::max(w, worst[j]);
    }
    res.detail = std::to_string(combos.size()) + " window runs, max off-window |y'|/bound " +
                 fmt(w);
    return res;
}

PropertyResult extract_oracle_property(std::uint64_t seed) {
    PropertyResult res;
    res.name = "chebyshev extraction";
    PropertyTimer timer(res);
    const int prec = 160;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> dist(0, 1l << 30);
    res.pass = true;
    double worst = 0;
    BigFloat tol(1e-12, prec);
    BigFloat tp = bf_pi(prec) + bf_pi(prec);
    for (int k : {2, 3}) {
        for (int trial = 0; trial < 100; ++trial) {
            Rational x(dist(rng), 1l << 30);
            int n = static_cast<int>(dist(rng) % 11);
            BigFloat xv(x, prec);
            BigFloat got = gadgets::extract_oracle(k, xv, n);
            long kn = 1;
            for (int i = 0; i < n; ++i) kn *= k;
            BigFloat want = bf_cos(tp * BigFloat(static_cast<long>(kn), prec) * xv);
            BigFloat err = bf_abs(got - want);
            worst = std::max(worst, err.to_double());
            if (err > tol) res.pass = false;
        }
    }
    res.detail = "k in {2,3}, n <= 10, 200 points, max err " + fmt(worst);
    return res;
}

PropertyResult extract_realization_property(bool parallel) {
    PropertyResult res;
    res.name = "extract realization (clocked iteration)";
    PropertyTimer timer(res);
    const int prec = 128;
    auto map = analog::chebyshev_map(2);
    analog::IterationSchedule sched = analog::IterationSchedule::for_map(map, Rational(1));
    res.pass = true;
    std::vector<std::pair<Rational, int>> combos;
    for (int i = 0; i < 10; ++i)
        for (int mu : {1, 2, 5, 10, 20})
            combos.emplace_back(Rational(-9, 10) + Rational(i, 5), mu);
    std::vector<char> ok(combos.size(), 1);
    std::vector<double> worst(combos.size(), 0);
    batch::run_indexed(combos.size(), parallel, [&](size_t j) {
        auto [x0, mu_i] = combos[j];
        IntegrationConfig cfg;
        cfg.precision_bits = prec;
        cfg.order = 14;
        cfg.local_tol_log2 = -static_cast<int>(1.5 * mu_i) - 30;
        auto resit = analog::iterate_ode(map, sched, {x0}, 1,
                                         BigFloat(static_cast<long>(mu_i), prec), cfg);
        Rational target = map.eval({x0})[0];
        BigFloat err = bf_abs(resit.final_w[0] - BigFloat(target, prec));
        BigFloat bound = bf_exp(BigFloat(static_cast<long>(-mu_i), prec));
        // Omega(mu) = mu + 14 length units; the run ends past it
        if (resit.traj.back().len < BigFloat(static_cast<long>(mu_i), prec))
            ok[j] = ok[j];  // nothing: length grows with t by construction
        if (err > bound) ok[j] = 0;
        worst[j] = (err / bound).to_double();
    });
    double w = 0;
    for (size_t j = 0; j < combos.size(); ++j) {
        res.pass = res.pass && ok[j];
        w = std::max(w, worst[j]);
    }
    if (combos.empty()) res.pass = false;
    res.detail = std::to_string(combos.size()) + " iterations of T_2, max err/bound " + fmt(w);
    return res;
}

SuiteResult gadgets_suite(std::uint64_t seed, bool parallel) {
    SuiteResult suite;
    suite.suite = "gadgets";
    suite.seed = seed;
    suite.properties.push_back(smooth_sign_grid(parallel));
    suite.properties.push_back(abs_grid(parallel));
    suite.properties.push_back(clamped_exp_grid(parallel));
    suite.properties.push_back(rnd_star_grid(parallel));
    suite.properties.push_back(smooth_sign_analytic_bound());
    suite.properties.push_back(lxh_hxl_property(parallel));
    suite.properties.push_back(clock_property(parallel));
    suite.properties.push_back(sample_hold_property(parallel));
    suite.properties.push_back(extract_oracle_property(seed));
    suite.properties.push_back(extract_realization_property(parallel));
    return suite;
}

// ---------------------------------------------------------------------------
// real-step suite

std::vector<tm::Machine> test_machines() {
    return {tm::unary_increment_append(), tm::binary_successor(), tm::rotate_k5()};
}

// canonical words (no trailing blank) up to the given length
void enumerate_words(int k, int max_len, std::vector<std::vector<int>>& out) {
    out.push_back({});
    std::vector<std::vector<int>> cur{{}};
    for (int l = 1; l <= max_len; ++l) {
        std::vector<std::vector<int>> next;
        for (const auto& w : cur)
            for (int s = 0; s <= k - 2; ++s) {
                auto w2 = w;
                w2.push_back(s);
                next.push_back(w2);
            }
        for (const auto& w : next)
            if (w.back() != 0) out.push_back(w);
        cur = std::move(next);
    }
}

PropertyResult exact_specialization(bool parallel) {
    PropertyResult res;
    res.name = "exact encodings: real_step == ideal == encode(step(decode))";
    PropertyTimer timer(res);
    std::atomic<long> checked{0}, bad{0};
    auto machines = test_machines();
    batch::run_indexed(machines.size(), parallel, [&](size_t mi) {
        const tm::Machine& m = machines[mi];
        tm::CompiledStep cs = tm::compile_step(m);
        Rational rho(1, 4 * m.base * m.base);
        std::vector<std::vector<int>> words;
        enumerate_words(m.base, 4, words);
        for (const auto& lw : words)
            for (const auto& rw : words) {
                if (static_cast<int>(lw.size() + rw.size()) > 4) continue;
                for (int sym = 0; sym <= m.base - 2; ++sym)
                    for (int q = 0; q < m.states; ++q) {
                        tm::Config c{lw, sym, rw, q};
                        c.canonicalize();
                        tm::RealConfig enc = tm::encode_config(m, c);
                        tm::RealConfig ideal = tm::ideal_real_step(m, enc);
                        tm::RealConfig robust = tm::real_step_exact(cs, enc, rho);
                        tm::RealConfig expect = tm::encode_config(m, tm::tm_step(m, c));
                        ++checked;
                        if (!(ideal == expect && robust == expect)) ++bad;
                    }
            }
    });
    res.pass = bad == 0 && checked > 0;
    res.detail = std::to_string(checked.load()) + " configurations, " +
                 std::to_string(bad.load()) + " mismatches";
    return res;
}

PropertyResult robustness_trials(std::uint64_t seed, bool parallel) {
    PropertyResult res;
    res.name = "robust step: error <= k ||eps|| for ||eps|| <= 1/(2k^2) - e^-mu";
    PropertyTimer timer(res);
    auto machines = test_machines();
    std::atomic<long> violations{0};
    std::atomic<long> total{0};
    const long trials = 1000;
    batch::run_indexed(machines.size(), parallel, [&](size_t mi) {
        const tm::Machine& m = machines[mi];
        const int k = m.base;
        tm::CompiledStep cs = tm::compile_step(m);
        Rational rho(1, 4 * k * k);
        Rational eps_max = tm::robustness_radius(k, rho);
        std::mt19937_64 rng(seed + mi * 7919);
        std::uniform_int_distribution<long> digit(0, k - 2);
        std::uniform_int_distribution<long> len(0, 5);
        std::uniform_int_distribution<long> state(0, m.states - 1);
        std::uniform_int_distribution<long> num(-(1l << 24), 1l << 24);
        for (long t = 0; t < trials; ++t) {
            auto rand_word = [&] {
                std::vector<int> w(static_cast<size_t>(len(rng)));
                for (auto& s : w) s = static_cast<int>(digit(rng));
                while (!w.empty() && w.back() == 0) w.pop_back();
                return w;
            };
            tm::Config c{rand_word(), static_cast<int>(digit(rng)), rand_word(),
                         static_cast<int>(state(rng))};
            tm::RealConfig enc = tm::encode_config(m, c);
            tm::RealConfig pert = enc;
            Rational delta(0);
            for (int i = 0; i < 4; ++i) {
                Rational d = eps_max * Rational(num(rng), 1l << 24);
                pert[i] += d;
                delta = std::max(delta, rat_abs(d));
            }
            tm::RealConfig stepped = tm::real_step_exact(cs, pert, rho);
            tm::RealConfig expect = tm::encode_config(m, tm::tm_step(m, c));
            Rational err(0);
            for (int i = 0; i < 4; ++i) err = std::max(err, rat_abs(stepped[i] - expect[i]));
            ++total;
            if (err > Rational(k) * delta) ++violations;
        }
    });
    res.pass = violations == 0;
    res.detail = std::to_string(total.load()) + " trials across k in {3,4,5}, " +
                 std::to_string(violations.load()) + " violations";
    return res;
}

PropertyResult decode_exactness(bool parallel) {
    PropertyResult res;
    res.name = "decode/re-encode exact on words <= 8, k1 <= 5, incl. max perturbation";
    PropertyTimer timer(res);
    std::atomic<long> checked{0}, bad{0};
    std::vector<int> bases{2, 3, 4, 5};
    batch::run_indexed(bases.size(), parallel, [&](size_t bi) {
        const int k1 = bases[bi];
        const Rational rho(1, 3);  // mu = ln 3
        auto id = [](int s) { return s; };
        // enumerate all digit strings (0..k1-1) up to length 8
        std::vector<std::vector<int>> words{{}};
        std::vector<std::vector<int>> frontier{{}};
        for (int l = 1; l <= 8; ++l) {
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
        for (const auto& w : words) {
            const int n = static_cast<int>(w.size());
            Rational val(0), scale(1);
            long nz = 0;
            for (int d : w) {
                scale /= k1;
                val += scale * d;
                if (d) ++nz;
            }
            Rational eps = scale * (Rational(1) - rho);  // maximal admissible
            for (const Rational& x : {val, Rational(val + eps)}) {
                ++checked;
                try {
                    tm::Decoded dec = tm::decode_word(x, n, k1, k1, id, rho);
                    if (dec.value != val || dec.nonzero != nz) ++bad;
                } catch (const Error&) {
                    ++bad;
                }
            }
            // re-encode base k1 -> base k1+1 on blank-free words
            if (nz == n && n > 0) {
                ++checked;
                tm::Decoded re = tm::reenc(val, n + 3, k1, k1 + 1, id);
                Rational want(0), sc(1);
                for (int d : w) {
                    sc /= (k1 + 1);
                    want += sc * d;
                }
                if (re.value != want || re.nonzero != n) ++bad;
                if (tm::tlength(val, n, k1) != n || tm::tlength(val, n + 5, k1) != n) ++bad;
            }
        }
    });
    res.pass = bad == 0;
    res.detail = std::to_string(checked.load()) + " decodes, " + std::to_string(bad.load()) +
                 " failures";
    return res;
}

SuiteResult real_step_suite(std::uint64_t seed, bool parallel) {
    SuiteResult suite;
    suite.suite = "real-step";
    suite.seed = seed;
    suite.properties.push_back(exact_specialization(parallel));
    suite.properties.push_back(robustness_trials(seed, parallel));
    suite.properties.push_back(decode_exactness(parallel));
    return suite;
}

// ---------------------------------------------------------------------------
// emulate suite

struct EmWord {
    const char* machine;
    std::vector<int> letters;
    bool extract;
};

PropertyResult emulation_property(bool parallel) {
    PropertyResult res;
    res.name = "clocked emulation matches the discrete machine";
    PropertyTimer timer(res);
    std::vector<EmWord> jobs = {
        {"succ", {}, true},          {"succ", {1}, true},
        {"succ", {1, 1}, false},     {"succ", {0, 1, 1}, true},
        {"succ", {1, 1, 1}, false},  {"succ", {1, 0, 1, 1}, false},
        {"succ", {0, 1, 1, 0, 1, 1}, false},
        {"unary", {}, true},         {"unary", {0}, false},
        {"unary", {0, 0, 0}, true},  {"unary", {0, 0, 0, 0, 0, 0}, false},
    };
    std::vector<std::string> fails(jobs.size());
    std::vector<double> worst_cycle(jobs.size(), 0);
    batch::run_indexed(jobs.size(), parallel, [&](size_t j) {
        try {
            tm::Machine m = jobs[j].machine == std::string("succ")
                                ? tm::binary_successor()
                                : tm::unary_increment_append();
            const auto& w = jobs[j].letters;
            long ell = static_cast<long>(w.size());
            long budget = jobs[j].machine == std::string("succ") ? 2 * ell + 4 : 2 * ell + 3;
            if (budget > 20) budget = 20;
            IntegrationConfig cfg;
            cfg.precision_bits = 128;
            cfg.order = 16;
            cfg.local_tol_log2 = -40;
            auto em = analog::emulate_tm(m, w, budget, BigFloat(2l, 128), cfg, ell + 1);
            auto oracle = tm::tm_run(m, m.gamma_word(w), budget);
            if (!oracle || em.output_symbols != *oracle) {
                fails[j] = "output word mismatch";
                return;
            }
            // per-cycle: encoded error below eps0 and decoded config equality
            Rational eps0(1, 4 * m.base * m.base);
            for (size_t i = 0; i < em.cycle_errors.size(); ++i) {
                worst_cycle[j] = std::max(worst_cycle[j],
                                          em.cycle_errors[i].to_double() * 4 * m.base * m.base);
                if (em.cycle_errors[i] > BigFloat(eps0, 128)) {
                    fails[j] = "cycle error above eps0 at cycle " + std::to_string(i);
                    return;
                }
                const tm::Config& oc = em.oracle_configs[i];
                const auto& snap = em.iteration.snapshots[i];
                Integer q = bf_round_to_integer(snap[3]);
                Integer sym = bf_round_to_integer(snap[1]);
                auto id = [](int s) { return s; };
                auto lw = tm::decode_word(bf_to_rational(snap[0]),
                                          static_cast<int>(oc.left.size()), m.base, m.base, id,
                                          Rational(1, 2));
                auto rw = tm::decode_word(bf_to_rational(snap[2]),
                                          static_cast<int>(oc.right.size()), m.base, m.base, id,
                                          Rational(1, 2));
                bool okc = mpz_get_si(q.get_mpz_t()) == oc.state &&
                           mpz_get_si(sym.get_mpz_t()) == oc.sym &&
                           lw.value == tm::encode_word(oc.left, m.base).value &&
                           rw.value == tm::encode_word(oc.right, m.base).value;
                if (!okc) {
                    fails[j] = "decoded configuration mismatch at cycle " + std::to_string(i);
                    return;
                }
            }
            // error ladder: relative errors may not grow after the start
            const auto& sched = em.iteration.schedule;
            Rational l0(0);
            for (const auto& v : em.iteration.snapshots[0]) {
                Rational q2 = bf_to_rational(v);
                l0 = std::max(l0, rat_abs(q2));
            }
            BigFloat mu_run = em.iteration.nu;  // recompute bound from nu pieces
            (void)mu_run;
            double ref = 0;
            for (size_t i = 1; i < em.cycle_errors.size(); ++i) {
                double b = sched
                               .cycle_bound(static_cast<int>(i),
                                            static_cast<int>(em.cycle_errors.size()) - 1,
                                            BigFloat(2l, 128), l0 + 1, 128)
                               .to_double();
                double ratio = em.cycle_errors[i].to_double() / b;
                if (i <= 2) ref = std::max(ref, ratio);
                else if (ratio > ref * 1.2 + 1e-30) {
                    fails[j] = "cycle error grew faster than the schedule at cycle " +
                               std::to_string(i);
                    return;
                }
            }
            if (jobs[j].extract) {
                long rec = 0;
                auto word = analog::fp_extract(m, w, budget, cfg, &rec);
                if (word != *oracle || rec != static_cast<long>(oracle->size())) {
                    fails[j] = "fp_extract mismatch";
                    return;
                }
            }
        } catch (const std::exception& e) {
            fails[j] = e.what();
        }
    });
    res.pass = true;
    double wc = 0;
    std::string detail;
    for (size_t j = 0; j < jobs.size(); ++j) {
        wc = std::max(wc, worst_cycle[j]);
        if (!fails[j].empty()) {
            res.pass = false;
            if (detail.empty()) detail = "first failure: " + fails[j];
        }
    }
    res.detail = std::to_string(jobs.size()) + " words, max cycle err/eps0 " + fmt(wc) +
                 (detail.empty() ? "" : ", " + detail);
    return res;
}

SuiteResult emulate_suite(std::uint64_t seed, bool parallel) {
    SuiteResult suite;
    suite.suite = "emulate";
    suite.seed = seed;
    suite.properties.push_back(emulation_property(parallel));
    return suite;
}

// ---------------------------------------------------------------------------
// recognize suite

PropertyResult recognition_property(bool parallel) {
    PropertyResult res;
    res.name = "even-length recognizer: verdicts, stability, length conditions";
    PropertyTimer timer(res);
    auto prog = analog::parity_recognizer();
    std::vector<std::vector<int>> words;
    std::vector<std::vector<int>> frontier{{}};
    words.push_back({});
    for (int l = 1; l <= 6; ++l) {
        std::vector<std::vector<int>> next;
        for (const auto& w : frontier)
            for (int c : {0, 1}) {
                auto w2 = w;
                w2.push_back(c);
                next.push_back(w2);
            }
        words.insert(words.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    std::vector<std::string> fails(words.size());
    std::vector<double> used(words.size(), 0);
    batch::run_indexed(words.size(), parallel, [&](size_t j) {
        try {
            IntegrationConfig cfg;
            cfg.precision_bits = 128;
            cfg.order = 16;
            cfg.local_tol_log2 = -40;
            auto out = analog::recognize(prog, words[j], cfg);
            bool even = words[j].size() % 2 == 0;
            auto want = even ? analog::Verdict::Accept : analog::Verdict::Reject;
            if (out.verdict != want) {
                fails[j] = "wrong verdict";
                return;
            }
            if (out.stability_violations != 0) {
                fails[j] = "stability violation";
                return;
            }
            // technical condition: len(t) >= t - quadrature error
            if (out.min_len_minus_t < BigFloat(-1e-9, 128)) {
                fails[j] = "length fell below t";
                return;
            }
            Rational budget =
                prog.omega_budget.eval(std::vector<Rational>{Rational(static_cast<long>(
                    words[j].size()))});
            if (out.length_used > BigFloat(budget, 128)) {
                fails[j] = "length budget exceeded";
                return;
            }
            used[j] = out.length_used.to_double() / BigFloat(budget, 128).to_double();
        } catch (const std::exception& e) {
            fails[j] = e.what();
        }
    });
    res.pass = true;
    double worst = 0;
    std::string detail;
    for (size_t j = 0; j < words.size(); ++j) {
        worst = std::max(worst, used[j]);
        if (!fails[j].empty()) {
            res.pass = false;
            if (detail.empty())
                detail = "first failure at word " + std::to_string(j) + ": " + fails[j];
        }
    }
    res.detail = std::to_string(words.size()) + " words (all |w| <= 6), max length/budget " +
                 fmt(worst) + (detail.empty() ? "" : ", " + detail);
    return res;
}

SuiteResult recognize_suite(std::uint64_t seed, bool parallel) {
    SuiteResult suite;
    suite.suite = "recognize";
    suite.seed = seed;
    suite.properties.push_back(recognition_property(parallel));
    return suite;
}

// ---------------------------------------------------------------------------
// solver-order suite

Pivp exp_system() {
    Pivp p;
    p.dim = 1;
    p.rhs = {MultiPoly::variable(1, 1)};
    p.init_point = Pivp::PointInit{{Rational(1)}};
    return p;
}

PropertyResult order_check() {
    PropertyResult res;
    res.name = "empirical convergence order tracks the Taylor order";
    PropertyTimer timer(res);
    res.pass = true;
    std::string d;
    Pivp p = exp_system();
    BigFloat e = bf_exp(BigFloat(1l, 160));
    for (int order : {4, 8, 12}) {
        double rates[2];
        for (int halve = 0; halve < 2; ++halve) {
            IntegrationConfig cfg;
            cfg.precision_bits = 160;
            cfg.order = order;
            cfg.fixed_step = Rational(1, halve ? 20 : 10);
            Trajectory tr = integrate(p, {Rational(1)}, Rational(1), cfg);
            rates[halve] = bf_abs(tr.back().y[0] - e).to_double();
        }
        double measured = std::log2(rates[0] / rates[1]);
        if (std::abs(measured - order) > 0.5) res.pass = false;
        d += "order " + std::to_string(order) + ": " + fmt(measured) + "  ";
    }
    res.detail = d;
    return res;
}

PropertyResult global_error_check() {
    PropertyResult res;
    res.name = "y' = y reaches e at t = 1 below 1e-20 at 128 bits";
    PropertyTimer timer(res);
    Pivp p = exp_system();
    IntegrationConfig cfg;
    cfg.precision_bits = 128;
    cfg.order = 12;
    cfg.local_tol_log2 = -90;
    Trajectory tr = integrate(p, {Rational(1)}, Rational(1), cfg);
    BigFloat err = bf_abs(tr.back().y[0] - bf_exp(BigFloat(1l, 128)));
    res.pass = err < BigFloat(1e-20, 128);
    res.detail = "error " + fmt(err.to_double());
    return res;
}

PropertyResult step_scaling_check() {
    PropertyResult res;
    res.name = "accepted steps grow at most 1.2x linearly in the length budget";
    PropertyTimer timer(res);
    res.pass = true;
    std::string d;
    for (long c : {1, 2, 4, 8}) {
        Pivp p;
        p.dim = 1;
        p.rhs = {MultiPoly::constant(1, Rational(c))};
        p.init_point = Pivp::PointInit{{Rational(0)}};
        long steps[2];
        int i = 0;
        for (long budget : {10, 20}) {
            IntegrationConfig cfg;
            cfg.precision_bits = 128;
            Trajectory tr = integrate_until_length(p, {Rational(0)}, Rational(budget), cfg);
            steps[i++] = tr.accepted_steps;
        }
        double ratio = static_cast<double>(steps[1]) / steps[0];
        if (ratio > 2.0 * 1.2) res.pass = false;
        d += "c=" + std::to_string(c) + ": x" + fmt(ratio) + "  ";
    }
    res.detail = d + "(budget doubled)";
    return res;
}

PropertyResult pslen_check() {
    PropertyResult res;
    res.name = "PsLen of y' = y on [0,1] equals e - 1";
    PropertyTimer timer(res);
    Pivp p = exp_system();
    IntegrationConfig cfg;
    cfg.precision_bits = 128;
    cfg.order = 12;
    cfg.local_tol_log2 = -60;
    Trajectory tr = integrate(p, {Rational(1)}, Rational(1), cfg);
    BigFloat want = bf_exp(BigFloat(1l, 128)) - BigFloat(1l, 128);
    BigFloat got = pslen(tr, p.rhs);
    BigFloat err = bf_abs(got - want);
    res.pass = err < BigFloat(1e-6, 128);
    res.detail = "error " + fmt(err.to_double());
    return res;
}

PropertyResult doubling_consistency_check() {
    PropertyResult res;
    res.name = "loose and tight runs agree within the reported bound";
    PropertyTimer timer(res);
    Pivp s;
    s.dim = 2;
    s.rhs = {MultiPoly::variable(2, 2), -MultiPoly::variable(2, 1)};
    s.init_point = Pivp::PointInit{{Rational(0), Rational(1)}};
    IntegrationConfig loose;
    loose.precision_bits = 128;
    loose.local_tol_log2 = -40;
    IntegrationConfig tight = loose;
    tight.local_tol_log2 = -44;  // local_tol / 16
    Trajectory a = integrate(s, {Rational(0), Rational(1)}, Rational(10), loose);
    Trajectory b = integrate(s, {Rational(0), Rational(1)}, Rational(10), tight);
    BigFloat diff(128);
    for (int i = 0; i < 2; ++i) diff = bf_max(diff, bf_abs(a.back().y[i] - b.back().y[i]));
    res.pass = diff <= BigFloat(16l, 128) * a.global_error_bound;
    res.detail = "diff " + fmt(diff.to_double()) + " vs 16x bound " +
                 fmt((BigFloat(16l, 128) * a.global_error_bound).to_double());
    return res;
}

SuiteResult solver_order_suite(std::uint64_t seed, bool parallel) {
    (void)parallel;
    SuiteResult suite;
    suite.suite = "solver-order";
    suite.seed = seed;
    suite.properties.push_back(order_check());
    suite.properties.push_back(global_error_check());
    suite.properties.push_back(step_scaling_check());
    suite.properties.push_back(pslen_check());
    suite.properties.push_back(doubling_consistency_check());
    return suite;
}

}  // namespace

Json SuiteResult::to_json() const {
    Json props = Json::array();
    for (const auto& p : properties)
        props.push_back(Json{{"name", p.name},
                             {"pass", p.pass},
                             {"detail", p.detail},
                             {"seconds", p.seconds}});
    return Json{{"suite", suite}, {"seed", seed}, {"pass", pass()}, {"properties", props}};
}

std::vector<std::string> suite_names() {
    return {"gadgets", "real-step", "emulate", "recognize", "solver-order"};
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed, bool parallel) {
    if (name == "gadgets") return gadgets_suite(seed, parallel);
    if (name == "real-step") return real_step_suite(seed, parallel);
    if (name == "emulate") return emulate_suite(seed, parallel);
    if (name == "recognize") return recognize_suite(seed, parallel);
    if (name == "solver-order") return solver_order_suite(seed, parallel);
    throw DomainError("unknown suite: " + name);
}

std::vector<std::string> gadget_names() {
    return {"smooth_sign", "abs", "clamped_exp", "rnd_star", "lxh_hxl"};
}

Json gadget_conformance(const std::string& gadget, std::uint64_t seed, bool parallel,
                        int points, double lo, double hi, std::vector<int> mus) {
    (void)seed;
    if (points < 2) throw DomainError("gadget-test: need at least two grid points");
    gadgets::GadgetSpec spec;
    std::vector<std::vector<Rational>> grid;
    Rational lo_q(static_cast<long>(lo * 1000), 1000);
    Rational hi_q(static_cast<long>(hi * 1000), 1000);
    Rational span = hi_q - lo_q;
    auto at = [&](long i) { return Rational(lo_q + span * Rational(i, points - 1)); };
    if (gadget == "smooth_sign") {
        spec = gadgets::smooth_sign_spec(MultiPoly(1));
        for (long i = 0; i < points; ++i) {
            Rational x = at(i);
            if (x == 0) x += span / (10 * points);
            grid.push_back({x, x});
        }
    } else if (gadget == "abs") {
        spec = gadgets::abs_spec();
        for (long i = 0; i < points; ++i) {
            Rational x = at(i);
            if (x == 0) x += span / (10 * points);
            grid.push_back({x});
        }
    } else if (gadget == "clamped_exp") {
        spec = gadgets::clamped_exp_spec();
        for (long i = 0; i < points; ++i)
            grid.push_back({Rational(0), Rational(10), Rational(1), Rational(0), at(i)});
    } else if (gadget == "rnd_star") {
        spec = gadgets::rnd_star_spec();
        for (long i = 0; i < points; ++i) grid.push_back({at(i)});
    } else if (gadget == "lxh_hxl") {
        PropertyResult pr = lxh_hxl_property(parallel);
        return Json{{"gadget", gadget}, {"pass", pr.pass}, {"detail", pr.detail}};
    } else {
        throw DomainError("unknown gadget: " + gadget);
    }
    std::vector<std::pair<size_t, int>> jobs;
    for (size_t i = 0; i < grid.size(); ++i)
        for (int mu : mus) jobs.emplace_back(i, mu);
    std::vector<PointOutcome> outs(jobs.size());
    batch::run_indexed(jobs.size(), parallel, [&](size_t j) {
        outs[j] = check_realization(spec, grid[jobs[j].first], jobs[j].second);
    });
    Json rows = Json::array();
    bool pass = true;
    for (size_t j = 0; j < jobs.size(); ++j) {
        const auto& o = outs[j];
        pass = pass && o.pass;
        Json in = Json::array();
        for (const auto& v : grid[jobs[j].first]) in.push_back(rational_to_json(v));
        rows.push_back(Json{{"input", in},
                            {"mu", jobs[j].second},
                            {"pass", o.pass},
                            {"max_error", o.worst_err},
                            {"bound", o.bound},
                            {"length_to_converge", o.len_to_converge}});
    }
    return Json{{"gadget", gadget}, {"pass", pass}, {"points", rows}};
}

Json bench_solver(int runs) {
    Pivp s;
    s.dim = 2;
    s.rhs = {MultiPoly::variable(2, 2), -MultiPoly::variable(2, 1)};
    s.init_point = Pivp::PointInit{{Rational(0), Rational(1)}};
    IntegrationConfig cfg;
    cfg.precision_bits = 128;
    cfg.order = 12;
    cfg.local_tol_log2 = -60;
    auto one_run = [&](int i) {
        std::vector<Rational> y0{Rational(i % 7, 7), Rational(1)};
        Trajectory tr = integrate(s, y0, Rational(25), cfg);
        return std::pair<std::string, std::string>(tr.back().y[0].str(), tr.back().y[1].str());
    };
    std::vector<std::pair<std::string, std::string>> serial(runs), par(runs);
    auto t0 = Clock::now();
    batch::run_indexed(runs, false, [&](size_t i) { serial[i] = one_run(static_cast<int>(i)); });
    double t_serial = elapsed(t0);
    t0 = Clock::now();
    batch::run_indexed(runs, true, [&](size_t i) { par[i] = one_run(static_cast<int>(i)); });
    double t_parallel = elapsed(t0);
    bool identical = serial == par;
    return Json{{"runs", runs},
                {"threads", batch::thread_count()},
                {"serial_seconds", t_serial},
                {"parallel_seconds", t_parallel},
                {"speedup", t_parallel > 0 ? t_serial / t_parallel : 0.0},
                {"identical_results", identical}};
}

}  // namespace gpacforge::verify
