#include "gpacforge/solver.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace gpacforge {

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::TimeReached: return "TimeReached";
        case StopReason::LengthBudgetHit: return "LengthBudgetHit";
        case StopReason::Divergence: return "Divergence";
        case StopReason::StepUnderflow: return "StepUnderflow";
        case StopReason::StepLimit: return "StepLimit";
    }
    return "?";
}

void gauss_legendre_01(int n, int precision, std::vector<BigFloat>& nodes,
                       std::vector<BigFloat>& weights) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::pair<std::vector<BigFloat>, std::vector<BigFloat>>>
        cache;
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find({n, precision});
        if (it != cache.end()) {
            nodes = it->second.first;
            weights = it->second.second;
            return;
        }
    }
    // Newton on P_n over [-1,1], double-precision seeds
    int prec = precision + 32;
    std::vector<BigFloat> xs, ws;
    BigFloat one(1l, prec), two(2l, prec);
    for (int i = 1; i <= n; ++i) {
        double seed = std::cos(M_PI * (i - 0.25) / (n + 0.5));
        BigFloat x(seed, prec);
        for (int it = 0; it < 200; ++it) {
            // evaluate P_n and P_n' by recurrence
            BigFloat p0(1l, prec), p1 = x;
            for (int k = 2; k <= n; ++k) {
                BigFloat pk = (BigFloat(2 * k - 1l, prec) * x * p1 -
                               BigFloat(k - 1l, prec) * p0) /
                              BigFloat(static_cast<long>(k), prec);
                p0 = p1;
                p1 = pk;
            }
            BigFloat dp = BigFloat(static_cast<long>(n), prec) * (x * p1 - p0) /
                          (x * x - one);
            BigFloat dx = p1 / dp;
            x -= dx;
            if (bf_abs(dx) < bf_pow2(-precision - 16, prec)) break;
        }
        // weight = 2 / ((1-x^2) P_n'(x)^2)
        BigFloat p0(1l, prec), p1 = x;
        for (int k = 2; k <= n; ++k) {
            BigFloat pk = (BigFloat(2 * k - 1l, prec) * x * p1 - BigFloat(k - 1l, prec) * p0) /
                          BigFloat(static_cast<long>(k), prec);
            p0 = p1;
            p1 = pk;
        }
        BigFloat dp = BigFloat(static_cast<long>(n), prec) * (x * p1 - p0) / (x * x - one);
        BigFloat w = two / ((one - x * x) * dp * dp);
        // map to [0,1]
        xs.push_back(((x + one) / two).at_precision(precision));
        ws.push_back((w / two).at_precision(precision));
    }
    std::lock_guard<std::mutex> lk(mu);
    cache[{n, precision}] = {xs, ws};
    nodes = xs;
    weights = ws;
}

namespace {

// Horner evaluation of the jet polynomial and its derivative at offset s.
void jet_eval(const std::vector<std::vector<BigFloat>>& c, const BigFloat& s,
              std::vector<BigFloat>* value, std::vector<BigFloat>* deriv) {
    const int d = static_cast<int>(c.size());
    const int n = static_cast<int>(c[0].size()) - 1;
    int prec = s.precision();
    for (int i = 0; i < d; ++i) {
        if (value) {
            BigFloat acc = c[i][n];
            for (int j = n - 1; j >= 0; --j) acc = acc * s + c[i][j];
            (*value)[i] = acc;
        }
        if (deriv) {
            BigFloat acc(prec);
            for (int j = n; j >= 1; --j)
                acc = acc * s + BigFloat(static_cast<long>(j), prec) * c[i][j];
            (*deriv)[i] = acc;
        }
    }
}

BigFloat inf_norm(const std::vector<BigFloat>& v) {
    BigFloat m(v.empty() ? BigFloat::default_precision() : v[0].precision());
    for (const auto& x : v) m = bf_max(m, bf_abs(x));
    return m;
}

bool all_finite(const std::vector<BigFloat>& v) {
    for (const auto& x : v)
        if (!x.is_finite()) return false;
    return true;
}

struct Integrator {
    const OdeSystem& sys;
    const IntegrationConfig& cfg;
    std::optional<BigFloat> t_end;
    std::optional<BigFloat> length_budget;

    int prec;
    int order;
    BigFloat tol, min_h, max_h, overflow, branch_floor;
    std::vector<BigFloat> gl_nodes, gl_weights;
    BigFloat sigma_f;
    long deg = 0;
    bool have_pslen = false;

    Trajectory traj;

    Integrator(const OdeSystem& s, const IntegrationConfig& c)
        : sys(s), cfg(c), prec(c.precision_bits), order(c.order), tol(c.local_tol()),
          min_h(c.min_step()), max_h(Rational(c.max_step), prec),
          overflow(c.overflow_threshold()),
          branch_floor(bf_pow2(
              c.branch_step_floor_log2 != 0 ? c.branch_step_floor_log2 : -c.precision_bits / 2,
              c.precision_bits)),
          sigma_f(prec) {
        if (order < 2) throw DomainError("integration order must be >= 2");
        gauss_legendre_01((order + 3) / 2 + 1, prec, gl_nodes, gl_weights);
        if (sys.sigma) {
            sigma_f = BigFloat(*sys.sigma, prec);
            deg = sys.degree.value_or(0);
            have_pslen = true;
        }
        traj.global_error_bound = BigFloat(prec);
        traj.quadrature_error = BigFloat(prec);
    }

    // arc-length (and pseudo-length) increment over [0,h] of the local jet
    void quadrature(const std::vector<std::vector<BigFloat>>& c, const BigFloat& h,
                    BigFloat& dlen, BigFloat& dpslen, int refine) {
        const int d = sys.dim();
        std::vector<BigFloat> dv(d, BigFloat(prec));
        std::vector<BigFloat> yv(d, BigFloat(prec));
        dlen = BigFloat(prec);
        dpslen = BigFloat(prec);
        int pieces = refine;
        BigFloat hp = h / BigFloat(static_cast<long>(pieces), prec);
        for (int pc = 0; pc < pieces; ++pc) {
            BigFloat base = hp * BigFloat(static_cast<long>(pc), prec);
            for (size_t g = 0; g < gl_nodes.size(); ++g) {
                BigFloat s = base + gl_nodes[g] * hp;
                jet_eval(c, s, have_pslen ? &yv : nullptr, &dv);
                BigFloat w = gl_weights[g] * hp;
                dlen += w * inf_norm(dv);
                if (have_pslen) {
                    BigFloat m = bf_max(BigFloat(1l, prec), inf_norm(yv));
                    dpslen += w * sigma_f * bf_pow_si(m, deg);
                }
            }
        }
    }

    Trajectory run(std::vector<BigFloat> y, BigFloat t) {
        BigFloat len(prec), psl(prec);
        traj.rhs_sigma = sys.sigma;
        traj.rhs_degree = sys.degree;
        traj.samples.push_back({t, y, len, psl});

        size_t next_cp = 0;
        auto next_limit = [&](const BigFloat& now) -> std::optional<BigFloat> {
            std::optional<BigFloat> lim = t_end;
            while (next_cp < cfg.checkpoints.size()) {
                BigFloat cp(cfg.checkpoints[next_cp], prec);
                if (cp > now) {
                    if (!lim || cp < *lim) lim = cp;
                    break;
                }
                ++next_cp;
            }
            return lim;
        };

        std::vector<std::vector<BigFloat>> c;
        std::vector<BigFloat> ynew(sys.dim(), BigFloat(prec));
        std::vector<int> sig_start, sig_end;
        const bool track_branches = true;
        long steps_since_doubling = 0;

        while (true) {
            if (t_end && t >= *t_end) {
                traj.stop_reason = StopReason::TimeReached;
                break;
            }
            if (length_budget && len >= *length_budget) {
                traj.stop_reason = StopReason::LengthBudgetHit;
                break;
            }
            if (traj.accepted_steps + traj.rejected_steps >= cfg.max_steps) {
                traj.stop_reason = StopReason::StepLimit;
                break;
            }
            if (!all_finite(y) || inf_norm(y) > overflow) {
                traj.stop_reason = StopReason::Divergence;
                break;
            }

            sys.dag.taylor(y, order, c);
            if (track_branches) sig_start = sys.dag.branch_signature(y);

            // propose a step from the two highest coefficients
            BigFloat h(prec);
            if (cfg.fixed_step) {
                h = BigFloat(*cfg.fixed_step, prec);
            } else {
                BigFloat cn(prec), cn1(prec);
                for (int i = 0; i < sys.dim(); ++i) {
                    cn = bf_max(cn, bf_abs(c[i][order]));
                    cn1 = bf_max(cn1, bf_abs(c[i][order - 1]));
                }
                h = max_h;
                if (cn.sign() > 0) {
                    BigFloat r = tol / cn;
                    BigFloat e = bf_exp(bf_log(r) / BigFloat(static_cast<long>(order), prec));
                    h = bf_min(h, e);
                }
                if (cn1.sign() > 0) {
                    BigFloat r = tol / cn1;
                    BigFloat e =
                        bf_exp(bf_log(r) / BigFloat(static_cast<long>(order - 1), prec));
                    h = bf_min(h, e);
                }
                h = h * BigFloat(Rational(4, 5), prec);
                if (length_budget) {
                    // cap the per-step length increase
                    BigFloat speed(prec);
                    for (int i = 0; i < sys.dim(); ++i) speed = bf_max(speed, bf_abs(c[i][1]));
                    speed += BigFloat(1l, prec);
                    h = bf_min(h, BigFloat(cfg.max_step_dlen, prec) / speed);
                }
            }
            std::optional<BigFloat> land;
            if (auto lim = next_limit(t)) {
                if (t + h >= *lim) {
                    h = *lim - t;
                    land = lim;
                }
            }

            // accept/reject loop
            bool accepted = false;
            for (int attempt = 0; attempt < 80 && !accepted; ++attempt) {
                if (h < min_h) break;
                if (!cfg.fixed_step) {
                    BigFloat est(prec);
                    for (int i = 0; i < sys.dim(); ++i)
                        est = bf_max(est, bf_abs(c[i][order]) * bf_pow_si(h, order));
                    if (est > tol) {
                        h = h * BigFloat(Rational(1, 2), prec);
                        ++traj.rejected_steps;
                        land.reset();
                        continue;
                    }
                }
                jet_eval(c, h, &ynew, nullptr);
                if (track_branches && all_finite(ynew)) {
                    sig_end = sys.dag.branch_signature(ynew);
                    if (sig_end != sig_start && h > branch_floor) {
                        h = h * BigFloat(Rational(1, 2), prec);
                        ++traj.rejected_steps;
                        land.reset();
                        continue;
                    }
                }
                accepted = true;
            }
            if (!accepted) {
                traj.stop_reason = StopReason::StepUnderflow;
                break;
            }

            BigFloat step_err(prec);
            for (int i = 0; i < sys.dim(); ++i)
                step_err = bf_max(step_err, bf_abs(c[i][order]) * bf_pow_si(h, order));

            // step-doubling cross check
            if (!cfg.fixed_step && ++steps_since_doubling >= cfg.doubling_check_every) {
                steps_since_doubling = 0;
                BigFloat h2 = h * BigFloat(Rational(1, 2), prec);
                std::vector<BigFloat> mid(sys.dim(), BigFloat(prec));
                jet_eval(c, h2, &mid, nullptr);
                std::vector<std::vector<BigFloat>> c2;
                sys.dag.taylor(mid, order, c2);
                std::vector<BigFloat> two_step(sys.dim(), BigFloat(prec));
                jet_eval(c2, h2, &two_step, nullptr);
                BigFloat diff(prec);
                for (int i = 0; i < sys.dim(); ++i)
                    diff = bf_max(diff, bf_abs(two_step[i] - ynew[i]));
                step_err = bf_max(step_err, diff);
            }
            traj.global_error_bound += step_err;
            // roundoff floor: a few ulps of the state per step
            traj.global_error_bound +=
                BigFloat(8l * sys.dim(), prec) * bf_max(inf_norm(ynew), BigFloat(1l, prec)).half_ulp();

            BigFloat dlen(prec), dpsl(prec);
            quadrature(c, h, dlen, dpsl, 1);
            {
                BigFloat dlen2(prec), dpsl2(prec);
                quadrature(c, h, dlen2, dpsl2, 2);
                traj.quadrature_error += bf_abs(dlen2 - dlen) + bf_abs(dpsl2 - dpsl);
                dlen = dlen2;
                dpsl = dpsl2;
            }
            len += dlen;
            psl += dpsl;
            t = land ? *land : t + h;
            y = ynew;
            ++traj.accepted_steps;
            traj.samples.push_back({t, y, len, psl});
        }
        return std::move(traj);
    }
};

}  // namespace

std::vector<BigFloat> Trajectory::at_time(const BigFloat& t) const {
    if (samples.empty()) throw DomainError("empty trajectory");
    // nearest sample not after t, then the one matching exactly if present
    const Sample* best = &samples.front();
    for (const auto& s : samples) {
        if (s.t == t) return s.y;
        if (s.t < t) best = &s;
    }
    return best->y;
}

Trajectory integrate(const OdeSystem& sys, const std::vector<BigFloat>& y0, const BigFloat& t_end,
                     const IntegrationConfig& cfg) {
    if (static_cast<int>(y0.size()) != sys.dim())
        throw DimensionError("integrate: initial state size != dim");
    if (t_end.sign() < 0) throw DomainError("integrate: t_end must be >= 0");
    Integrator integ(sys, cfg);
    integ.t_end = t_end.at_precision(cfg.precision_bits);
    std::vector<BigFloat> y;
    for (const auto& v : y0) y.push_back(v.at_precision(cfg.precision_bits));
    return integ.run(std::move(y), BigFloat(cfg.precision_bits));
}

Trajectory integrate(const Pivp& pivp, const std::vector<Rational>& y0, const Rational& t_end,
                     const IntegrationConfig& cfg) {
    OdeSystem sys(pivp, cfg.precision_bits);
    std::vector<BigFloat> y;
    for (const auto& q : y0) y.emplace_back(q, cfg.precision_bits);
    Trajectory tr = integrate(sys, y, BigFloat(t_end, cfg.precision_bits), cfg);
    // rounding committed when transcendental initial values were stored
    tr.global_error_bound += BigFloat(pivp.init_error, cfg.precision_bits);
    return tr;
}

Trajectory integrate_until_length(const OdeSystem& sys, const std::vector<BigFloat>& y0,
                                  const BigFloat& budget, const IntegrationConfig& cfg) {
    if (static_cast<int>(y0.size()) != sys.dim())
        throw DimensionError("integrate: initial state size != dim");
    if (budget.sign() <= 0) throw DomainError("length budget must be positive");
    Integrator integ(sys, cfg);
    integ.length_budget = budget.at_precision(cfg.precision_bits);
    std::vector<BigFloat> y;
    for (const auto& v : y0) y.push_back(v.at_precision(cfg.precision_bits));
    return integ.run(std::move(y), BigFloat(cfg.precision_bits));
}

Trajectory integrate_until_length(const Pivp& pivp, const std::vector<Rational>& y0,
                                  const Rational& budget, const IntegrationConfig& cfg) {
    OdeSystem sys(pivp, cfg.precision_bits);
    std::vector<BigFloat> y;
    for (const auto& q : y0) y.emplace_back(q, cfg.precision_bits);
    Trajectory tr = integrate_until_length(sys, y, BigFloat(budget, cfg.precision_bits), cfg);
    tr.global_error_bound += BigFloat(pivp.init_error, cfg.precision_bits);
    return tr;
}

Trajectory integrate_bounded(const OdeSystem& sys, const std::vector<BigFloat>& y0,
                             const BigFloat& t_end, const BigFloat& budget,
                             const IntegrationConfig& cfg) {
    if (static_cast<int>(y0.size()) != sys.dim())
        throw DimensionError("integrate: initial state size != dim");
    Integrator integ(sys, cfg);
    integ.t_end = t_end.at_precision(cfg.precision_bits);
    integ.length_budget = budget.at_precision(cfg.precision_bits);
    std::vector<BigFloat> y;
    for (const auto& v : y0) y.push_back(v.at_precision(cfg.precision_bits));
    return integ.run(std::move(y), BigFloat(cfg.precision_bits));
}

BigFloat pslen(const Trajectory& traj, const std::vector<MultiPoly>& rhs) {
    if (traj.samples.empty()) throw DomainError("pslen: empty trajectory");
    Rational sig = sigma_of(rhs);
    auto deg = degree_of(rhs);
    if (!traj.rhs_sigma || *traj.rhs_sigma != sig ||
        traj.rhs_degree.value_or(0) != (deg ? *deg : 0))
        throw DomainError("pslen: trajectory was not produced from this right-hand side");
    return traj.samples.back().pslen;
}

}  // namespace gpacforge
