#ifndef GPACFORGE_SOLVER_HPP
#define GPACFORGE_SOLVER_HPP

#include <optional>
#include <vector>

#include "gpacforge/pivp.hpp"
#include "gpacforge/simexpr.hpp"

namespace gpacforge {

struct IntegrationConfig {
    int order = 10;
    int precision_bits = 128;
    /// Per-step truncation tolerance as log2: local_tol = 2^local_tol_log2.
    int local_tol_log2 = -40;
    std::optional<double> max_time_hint;  // informational; real limit is t_end
    long max_steps = 4000000;
    int min_step_log2 = 0;  // 0 = derive from precision (2^-precision_bits)
    /// Cap on the arc length a single step may add under a length budget.
    Rational max_step_dlen = Rational(1, 4);
    /// Absolute cap on the step size (keeps stationary systems from racing).
    Rational max_step = Rational(16);
    int doubling_check_every = 16;
    std::optional<Rational> fixed_step;  // disables adaptivity when set
    std::vector<Rational> checkpoints;   // times the integrator must land on
    /// Piecewise nodes freeze their branch for a whole step; steps whose
    /// endpoint lands on a different branch shrink down to this floor before
    /// being taken anyway (0 = derive as 2^-(precision/2)).
    int branch_step_floor_log2 = 0;

    BigFloat local_tol() const { return bf_pow2(local_tol_log2, precision_bits); }
    BigFloat min_step() const {
        return bf_pow2(min_step_log2 != 0 ? min_step_log2 : -precision_bits, precision_bits);
    }
    BigFloat overflow_threshold() const { return bf_pow2(precision_bits / 2, precision_bits); }
};

enum class StopReason { TimeReached, LengthBudgetHit, Divergence, StepUnderflow, StepLimit };

const char* to_string(StopReason r);

struct Sample {
    BigFloat t;
    std::vector<BigFloat> y;
    BigFloat len;    // cumulative arc length, inf-norm speed
    BigFloat pslen;  // cumulative pseudo-length (0 unless polynomial-backed)
};

struct Trajectory {
    std::vector<Sample> samples;
    StopReason stop_reason = StopReason::TimeReached;
    BigFloat global_error_bound;
    BigFloat quadrature_error;
    long accepted_steps = 0;
    long rejected_steps = 0;
    /// Cost-model quantities of the producing right-hand side, when known.
    std::optional<Rational> rhs_sigma;
    std::optional<int> rhs_degree;

    const Sample& back() const { return samples.back(); }
    /// State at time t: exact at sample times (checkpoints land on samples),
    /// otherwise the latest sample not after t.
    std::vector<BigFloat> at_time(const BigFloat& t) const;
};

/// The system handed to the integrator: a lowered DAG plus, when the source
/// is polynomial, the cost-model quantities sigma(p) and deg(p).
struct OdeSystem {
    SimDag dag;
    std::optional<Rational> sigma;
    std::optional<int> degree;

    explicit OdeSystem(SimDag d) : dag(std::move(d)) {}
    OdeSystem(const Pivp& p, int precision) : dag(p.to_simdag(precision)) {
        sigma = p.sigma();
        auto dg = p.degree();
        degree = dg ? *dg : 0;
    }
    int dim() const { return dag.dim(); }
};

Trajectory integrate(const OdeSystem& sys, const std::vector<BigFloat>& y0, const BigFloat& t_end,
                     const IntegrationConfig& cfg);
Trajectory integrate(const Pivp& pivp, const std::vector<Rational>& y0, const Rational& t_end,
                     const IntegrationConfig& cfg);

/// Runs until the cumulative arc length reaches `budget` (or another stop
/// condition fires first).
Trajectory integrate_until_length(const OdeSystem& sys, const std::vector<BigFloat>& y0,
                                  const BigFloat& budget, const IntegrationConfig& cfg);
Trajectory integrate_until_length(const Pivp& pivp, const std::vector<Rational>& y0,
                                  const Rational& budget, const IntegrationConfig& cfg);

/// Runs until either t_end or the length budget is reached, whichever fires
/// first (stop_reason tells which).
Trajectory integrate_bounded(const OdeSystem& sys, const std::vector<BigFloat>& y0,
                             const BigFloat& t_end, const BigFloat& budget,
                             const IntegrationConfig& cfg);

/// Final pseudo-length of a trajectory produced from the given right-hand
/// side. The integrand sigma(p) max(1, |y|)^deg(p) is accumulated by
/// quadrature at integration time; this checks the match and reports it.
BigFloat pslen(const Trajectory& traj, const std::vector<MultiPoly>& rhs);

/// Gauss-Legendre nodes/weights on [0,1] at the given precision (cached).
void gauss_legendre_01(int n, int precision, std::vector<BigFloat>& nodes,
                       std::vector<BigFloat>& weights);

}  // namespace gpacforge

#endif
