#ifndef GPACFORGE_GADGETS_HPP
#define GPACFORGE_GADGETS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gpacforge/solver.hpp"

namespace gpacforge::gadgets {

/// A gadget realization ready to integrate: an autonomous system (clock
/// variable included so arc length grows at least linearly in time), its
/// initial state, and output expressions over the state.
struct Realization {
    OdeSystem system;
    std::vector<BigFloat> y0;
    std::vector<SimDag::NodeId> outputs;
    Rational init_error{0};
    /// Working precision the realization needs. Compiled tanh states must
    /// resolve their deepest saturation: once tanh(v0) rounds to +-1 the
    /// variable sits on an invariant manifold and never ramps back.
    int min_precision = 0;

    std::vector<BigFloat> read_outputs(const std::vector<BigFloat>& state) const {
        std::vector<BigFloat> out;
        out.reserve(outputs.size());
        for (auto id : outputs) out.push_back(system.dag.eval_node(id, state));
        return out;
    }
};

/// A toolbox entry: a direct numeric oracle plus an ODE realization with a
/// quantified convergence contract. omega bounds the curve length needed to
/// reach accuracy e^-mu, upsilon bounds the state norm.
struct GadgetSpec {
    std::string name;
    int input_arity = 1;
    int output_arity = 1;
    std::function<std::vector<BigFloat>(const std::vector<BigFloat>&, const BigFloat& mu)>
        oracle;
    std::function<Realization(const std::vector<Rational>&, const BigFloat& mu, int precision)>
        realize;  // may be empty for oracle-only gadgets
    MultiPoly omega;    // arity 2: (|x|, mu), nonnegative coefficients
    MultiPoly upsilon;  // arity 3: (|x|, mu, t), nonnegative coefficients
    std::optional<MultiPoly> lambda;  // perturbation modulus, arity 2
    std::optional<MultiPoly> theta;   // perturbation budget, arity 2; carried as
                                      // metadata, no operation consumes it yet

    BigFloat omega_at(const BigFloat& r, const BigFloat& mu) const {
        return omega.eval(std::vector<BigFloat>{r, mu});
    }
    BigFloat upsilon_at(const BigFloat& r, const BigFloat& mu, const BigFloat& t) const {
        return upsilon.eval(std::vector<BigFloat>{r, mu, t});
    }
};

// ---------------------------------------------------------------------------
// Oracles

/// sgn(x) * z on the domain U_p: (0,0) or |z/x| <= e^{p(|(x,z)|)}.
BigFloat smooth_sign_oracle(const BigFloat& x, const BigFloat& z, const MultiPoly& p);
BigFloat abs_oracle(const BigFloat& x);
std::pair<BigFloat, BigFloat> max_min_oracle(const BigFloat& a, const BigFloat& b);

/// rnd*(x, mu): n on [n-1/2+e^-mu, n+1/2-e^-mu], affine between. The second
/// argument is rho = e^-mu, which lets exact rational parameters flow through
/// (mu = ln(4k^2) gives rho = 1/(4k^2)).
Rational rnd_star_exact(const Rational& x, const Rational& rho);
BigFloat rnd_star_oracle(const BigFloat& x, const BigFloat& mu);
/// rnd(x, mu, lambda) = rnd*(x, max(mu, ln lambda)); satisfies both bullets
/// of the rounding contract (within 1/2 on the cell, e^-mu off the margin).
BigFloat rnd_oracle(const BigFloat& x, const BigFloat& mu, const BigFloat& lambda);

/// max(a, min(b, c e^x + d)), requires a <= b.
BigFloat clamped_exp_oracle(const BigFloat& a, const BigFloat& b, const BigFloat& c,
                            const BigFloat& d, const BigFloat& x);

/// ||x||_inf + delta/2 (center of the allowed [||x||, ||x||+delta] band).
BigFloat norm_inf_delta_oracle(const std::vector<BigFloat>& x, const BigFloat& delta);

/// Ramp pair on I=[a,b]: lxh = phi1 * x rises from ~0 to ~x across I, hxl is
/// the complement. phi1 = (1 + tanh(4(mu+ln2+x^2)(2t-a-b)/(b-a)))/2.
std::pair<BigFloat, BigFloat> lxh_hxl_oracle(const Rational& a, const Rational& b,
                                             const BigFloat& t, const BigFloat& mu,
                                             const BigFloat& x);

/// theta_nu(t) = 1/2 + 1/2 tanh(2 nu(t) (sin 2t - 1/2)); nu affine: n0+n1*t.
BigFloat clock_theta(const BigFloat& nu0, const BigFloat& nu1, const BigFloat& t);
/// psi_{i,nu}: the four quarter-phase products of theta at (+-t, +-2t).
BigFloat clock_psi(int i, const BigFloat& nu0, const BigFloat& nu1, const BigFloat& t);
/// Window integral lower bound 3*pi/96 (independent of nu).
Rational psi_window_lower_bound_times_96_over_pi();

/// Error bound of the convergent reach z' = A (y - z) + b with A >= 0 and
/// |b| <= eps: |z(t)-y(t)| <= |z(a)-y(a)| e^{-intA} + ydrift + (t-a) eps.
BigFloat reach_error_bound(const BigFloat& initial_gap, const BigFloat& int_A,
                           const BigFloat& y_drift, const BigFloat& eps, const BigFloat& dt);

/// mix(i, f0, f1): f0 for i<=0, f1 for i>=1, linear blend between.
BigFloat mix_oracle(const BigFloat& i, const BigFloat& f0, const BigFloat& f1);

/// Degree-k Chebyshev polynomial (exact integer coefficients, arity 1).
MultiPoly chebyshev(int k);
/// cos(2 pi k^n x) via n-fold iteration of T_k on cos(2 pi x).
BigFloat extract_oracle(int k, const BigFloat& x, int n);

// ---------------------------------------------------------------------------
// Realization builders (used by the specs and by the analog runtime)

Realization realize_smooth_sign(const Rational& x, const Rational& z, int precision);
Realization realize_clamped_exp(const Rational& a, const Rational& b, const Rational& c,
                                const Rational& d, const Rational& x, const BigFloat& mu,
                                int precision);
Realization realize_rnd_star(const Rational& x, const BigFloat& mu, int precision);
Realization realize_norm_inf_delta(const std::vector<Rational>& x, const Rational& delta,
                                   int precision);
Realization realize_lxh_hxl(const Rational& a, const Rational& b, const Rational& x,
                            const BigFloat& mu, int precision);
/// Closure-compiled variant (tanh as a state). Only numerically sound while
/// the saturation depth stays well under precision/3 bits; the tests pin the
/// sound regime, realize_lxh_hxl is the production path.
Realization realize_lxh_hxl_compiled(const Rational& a, const Rational& b, const Rational& x,
                                     const BigFloat& mu, int precision);
Realization realize_clock_psi(int i, const Rational& nu_slope, int precision);
Realization realize_clock_psi_compiled(int i, const Rational& nu_slope, int precision);

/// Analytic indicator of the window [a,b] (mod tau): a product of two tanh
/// sigmoids in the angle 2 pi T / tau with transition bands of width
/// (b-a)/3 placed inside the window; outside the window (edges included)
/// the bump is at most e^{-mu-28}. Requires b - a < tau/2.
SimDag::NodeId window_bump(SimDag& dag, SimDag::NodeId T, const Rational& a, const Rational& b,
                           const Rational& tau, const BigFloat& mu, int precision);

/// The reach term 5 (mu + (x-y)^2 + 2) (x - y) driving y toward x.
SimDag::NodeId reach_term(SimDag& dag, const BigFloat& mu, SimDag::NodeId y, SimDag::NodeId x,
                          int precision);

/// Adds a sample-and-hold right-hand side to a DAG under construction:
///   bump_{[a,b] mod tau}(T) * 5 (mu + (x-y)^2 + 2) (x - y)
/// where T, y, x are existing nodes.
SimDag::NodeId sample_hold_rhs(SimDag& dag, SimDag::NodeId T, const Rational& a,
                               const Rational& b, const Rational& tau, const BigFloat& mu,
                               SimDag::NodeId y, SimDag::NodeId x, int precision);

/// The hold-forever ramp (1 - phi1(s, mu, .)) applied to `inner`, shutting an
/// update term down for s = T - t_off >= 1.
SimDag::NodeId hold_after_rhs(SimDag& dag, SimDag::NodeId T, const Rational& t_off,
                              const BigFloat& mu, SimDag::NodeId inner, int precision);

// ---------------------------------------------------------------------------
// Registered specs

GadgetSpec smooth_sign_spec(const MultiPoly& tolerance_p);
GadgetSpec abs_spec();
GadgetSpec max_min_spec();
GadgetSpec clamped_exp_spec();
GadgetSpec rnd_star_spec();
GadgetSpec rnd_spec();
GadgetSpec norm_inf_delta_spec(int n_inputs);
GadgetSpec lxh_hxl_spec(const Rational& a, const Rational& b);
GadgetSpec clock_spec(int psi_index, const Rational& nu_slope);
GadgetSpec mix_spec();

}  // namespace gpacforge::gadgets

#endif
