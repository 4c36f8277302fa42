#ifndef GPACFORGE_ANALOG_HPP
#define GPACFORGE_ANALOG_HPP

#include "gpacforge/gadgets.hpp"
#include "gpacforge/tm.hpp"

namespace gpacforge::analog {

/// A map suitable for clocked iteration: a DAG emitter for the ODE side, a
/// discrete oracle for the tests, and the growth/modulus polynomials the
/// schedule consumes.
struct IterMap {
    int dim = 1;
    std::function<std::vector<SimDag::NodeId>(SimDag&, const std::vector<SimDag::NodeId>&)>
        emit;
    std::function<std::vector<Rational>(const std::vector<Rational>&)> eval;
    MultiPoly mho{1};          // modulus: inputs within e^{-mho(l)-mu} map within e^-mu
    MultiPoly pi{2};           // growth: |f^[n](x)| <= pi(|x|, n)
    MultiPoly modulus_pad{1};  // nu* = nu + pad(l*): stability the held input owes the map
};

IterMap chebyshev_map(int k);
/// One robust TM step at tolerance rho = e^-mu.
IterMap real_step_map(const tm::CompiledStep& cs, const Rational& rho);
/// The word-decoding head-extraction map on (x, y, n, m); kap/rho as in
/// tm::decode_word with words of length <= n_max.
IterMap decode_step_map(int k1, int k2, const Rational& rho, int n_max);

/// The cycle timing and precision ladder of the iteration construction.
struct IterationSchedule {
    Rational omega{1};  // settling time of the online subsystem
    Rational tau{3};    // omega + 2
    MultiPoly mho{1};
    MultiPoly pi{2};
    MultiPoly modulus_pad{1};

    static IterationSchedule for_map(const IterMap& map, const Rational& omega);
    /// nu(n, mu) = n mho(l*) + n ln6 + mu + ln3 with l* = 1 + pi(l0, n),
    /// using rational upper bounds for the logarithms.
    BigFloat nu(int n, const BigFloat& mu, const Rational& l0, int precision) const;
    BigFloat nu_star(int n, const BigFloat& mu, const Rational& l0, int precision) const;
    /// Scheduled bound e^{-(n-i) mho(l*) - (n-i) ln6 - mu - ln3} on the
    /// error after cycle i.
    BigFloat cycle_bound(int i, int n, const BigFloat& mu, const Rational& l0,
                         int precision) const;
};

/// First time the plain reach subsystem settles within e^-nu of the frozen
/// map value, doubled and snapped to quarters (at least 1).
Rational measure_settle_time(const IterMap& map, const std::vector<Rational>& probe,
                             const BigFloat& nu, int precision);

struct IterationResult {
    Trajectory traj;
    std::vector<std::vector<BigFloat>> snapshots;  // w at cycle boundaries 0..n
    std::vector<BigFloat> final_w;                 // w at n tau + 1
    BigFloat nu;
    IterationSchedule schedule;
    int map_dim = 0;
};

/// The three-register cycle: y tracks f(w) whenever w is held, z samples y
/// on [omega, omega+1] (mod tau), w copies z on [omega+1, omega+2] (mod tau)
/// and freezes for good after n cycles.
IterationResult iterate_ode(const IterMap& map, const IterationSchedule& sched,
                            const std::vector<Rational>& x0, int n, const BigFloat& mu,
                            const IntegrationConfig& cfg);

struct EmulationResult {
    std::vector<int> output_symbols;
    std::vector<int> output_letters;
    std::vector<tm::Config> oracle_configs;   // step^i(c0), i = 0..n
    std::vector<BigFloat> cycle_errors;       // |w(i tau) - enc(step^i(c0))|
    long recovered_length = 0;
    IterationResult iteration;
};

/// Runs the clocked iteration of the robust step at mu = ln(4k^2) for
/// step_budget cycles and decodes the final tape. out_len_budget bounds the
/// output word length (<= 0 selects the generic |w| + steps bound); tighter
/// bounds keep the decoding precision, and with it the run cost, down.
EmulationResult emulate_tm(const tm::Machine& m, const std::vector<int>& letters,
                           long step_budget, const BigFloat& mu_out,
                           const IntegrationConfig& cfg, long out_len_budget = 0);

enum class Verdict { Accept, Reject, Undecided };
const char* to_string(Verdict v);

struct RecognitionOutcome {
    Verdict verdict = Verdict::Undecided;
    BigFloat length_used;
    std::optional<BigFloat> first_crossing_time;
    long stability_violations = 0;
    /// min over samples of len(t) - t (the technical condition margin; may
    /// be slightly negative within the quadrature error).
    BigFloat min_len_minus_t;
    BigFloat final_decision;
};

/// A language recognizer: a deciding machine mapping words to the two answer
/// letters, wrapped in the ramp-gated decision integrator.
struct RecognizerProgram {
    tm::Machine machine;
    int accept_letter = 1;
    int reject_letter = 0;
    /// step budget of the machine as a polynomial of |w|
    MultiPoly step_budget{1};
    /// declared length budget Omega(|w|)
    MultiPoly omega_budget{1};
};

RecognizerProgram parity_recognizer();

RecognitionOutcome recognize(const RecognizerProgram& prog, const std::vector<int>& letters,
                             const IntegrationConfig& cfg);

/// Two-phase extraction of f(w) from the emulation trajectory: a coarse
/// solve recovers |f(w)| by rounding the analog decoder's digit count, a
/// sharp solve recovers the digits from k^{|f(w)|} y1.
std::vector<int> fp_extract(const tm::Machine& m, const std::vector<int>& letters,
                            long step_budget, const IntegrationConfig& cfg,
                            long* recovered_length = nullptr);

/// A scalar program for the phase-clocked composition demo: a PIVP whose
/// input rides in the initial condition (components marked nullopt take the
/// input value), first component converging to the result.
struct ScalarProgram {
    std::string name;
    Pivp dynamics;  // rhs only; init built per input
    std::vector<std::optional<Rational>> init;  // nullopt = input slot
    std::function<BigFloat(const BigFloat&)> oracle;
    std::function<BigFloat(const BigFloat&)> post;  // output map on the copy register
};

ScalarProgram identity_program();
ScalarProgram abs_program();
ScalarProgram clamped_exp_program(const Rational& lo, const Rational& hi);

struct ComposeResult {
    BigFloat output;
    BigFloat expected;
    BigFloat mu_final;
    std::vector<BigFloat> mu_at_cycles;  // mu(n pi) >= n + 1 along the run
    long accepted_steps = 0;
};

/// Four-phase clocked composition f(g(x)): phase 0 resets the shared state,
/// phase 1 runs g (with the initial map of f tracked on top), phase 2 runs
/// f on the same coordinates, phase 3 advances the precision clock; a
/// ramp-gated register copies the result out during phase 3.
ComposeResult compose_demo(const ScalarProgram& f, const ScalarProgram& g, const Rational& x,
                           int cycles, const IntegrationConfig& cfg);

}  // namespace gpacforge::analog

#endif
