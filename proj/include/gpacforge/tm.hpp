#ifndef GPACFORGE_TM_HPP
#define GPACFORGE_TM_HPP

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "gpacforge/io.hpp"
#include "gpacforge/simexpr.hpp"

namespace gpacforge::tm {

struct UndecodableError : Error {
    using Error::Error;
};

enum class Move : int { L = -1, S = 0, R = 1 };

struct Transition {
    int q2 = 0;
    int s2 = 0;
    Move move = Move::S;
    bool operator==(const Transition&) const = default;
};

/// Deterministic one-tape machine over states 0..m-1 and alphabet 0..k-2
/// with blank 0. The transition table is total and freezes the halting
/// state in place.
struct Machine {
    int states = 0;  // m
    int base = 0;    // k; alphabet is 0..k-2
    int q0 = 0;
    int qinf = 0;
    std::vector<std::vector<Transition>> delta;  // [q][s]
    std::map<int, int> gamma;                    // input letter -> tape symbol

    int alphabet_size() const { return base - 1; }
    const Transition& at(int q, int s) const;
    void validate() const;

    std::vector<int> gamma_word(const std::vector<int>& letters) const;
    std::vector<int> gamma_inverse_word(const std::vector<int>& symbols) const;
};

/// Tape words store the symbol adjacent to the head first; the far end
/// carries no blanks (canonical form).
struct Config {
    std::vector<int> left;
    int sym = 0;
    std::vector<int> right;
    int state = 0;
    bool operator==(const Config&) const = default;

    void canonicalize();
    static Config initial(const Machine& m, const std::vector<int>& tape_word);
    static Config final_of(const Machine& m, const std::vector<int>& tape_word);
    /// Halting form (lambda, b, y, qinf)?
    bool is_final_form(const Machine& m) const;
};

/// The 4-real encoding (0.x, sigma, 0.y, q), exact.
using RealConfig = std::array<Rational, 4>;

struct EncodedWord {
    Rational value;
    int length = 0;
};

/// 0.w = sum w_i k^-i. Symbols must lie in 0..k-2.
EncodedWord encode_word(const std::vector<int>& w, int k);
/// Recover the digits of an exact encoding (error if x is not one).
std::vector<int> decode_exact_word(const Rational& x, int k);
RealConfig encode_config(const Machine& m, const Config& c);
Config decode_config(const Machine& m, const RealConfig& rc);

Config tm_step(const Machine& m, const Config& c);
/// Runs from c0(w); returns the output word if the machine reaches the
/// final form within max_steps, nothing otherwise.
std::optional<std::vector<int>> tm_run(const Machine& m, const std::vector<int>& w,
                                       long max_steps);

/// Exact interpolation over a product grid; axes[i] lists the (pairwise
/// distinct) coordinates of axis i and f receives per-axis indices.
MultiPoly lagrange_interp(const std::vector<std::vector<Rational>>& axes,
                          const std::function<Rational(const std::vector<int>&)>& f);
/// Interpolates the 0/1 indicator of f = alpha.
MultiPoly char_interp(const std::vector<std::vector<Rational>>& axes,
                      const std::function<Rational(const std::vector<int>&)>& f,
                      const Rational& alpha);

/// Per-machine cache of the interpolated transition surfaces and the move
/// selector characteristics; shared by the exact step, the robustness
/// checks and the compiled iteration systems.
struct CompiledStep {
    const Machine* machine = nullptr;
    MultiPoly d1{2}, d2{2}, d3{2};             // over (q, sigma)
    MultiPoly chooseL{1}, chooseS{1}, chooseR{1};  // over the move value
};
CompiledStep compile_step(const Machine& m);

RealConfig ideal_real_step(const Machine& m, const RealConfig& rc);

/// The robust step at working rho = e^-mu (exact rationals throughout; with
/// mu = ln(4k^2) the tolerance rho = 1/(4k^2) is exact).
RealConfig real_step_exact(const CompiledStep& cs, const RealConfig& cbar, const Rational& rho);
/// Largest perturbation the robust step tolerates: 1/(2k^2) - rho.
Rational robustness_radius(int k, const Rational& rho);

/// Emits the real-step map into a DAG: w are the four state nodes, the
/// result nodes compute the next encoded configuration.
std::array<SimDag::NodeId, 4> real_step_nodes(const CompiledStep& cs, SimDag& dag,
                                              const std::array<SimDag::NodeId, 4>& w,
                                              const Rational& rho);

struct Decoded {
    Rational value;
    long nonzero = 0;
};

/// Iterated digit decoder: n applications of the head-extraction map with
/// int*(v) = rnd*(v - 1/2 + (3/4) kap rho, kap rho/4), kap = k1^(1-n).
/// Tolerates x - 0.w in [0, k1^-|w| (1 - rho)] for any |w| <= n; anything
/// outside every tube throws UndecodableError.
Decoded decode_word(const Rational& x, int n, int k1, int k2,
                    const std::function<int(int)>& kappa, const Rational& rho);
/// Re-encoding of a word over nonzero symbols (exact, any n >= |w|).
Decoded reenc(const Rational& x, int n, int k1, int k2, const std::function<int(int)>& kappa);
/// Length of a word over nonzero symbols from its encoding, given n >= |w|.
long tlength(const Rational& x, int n_upper, int k);

Json machine_to_json(const Machine& m);
Machine machine_from_json(const Json& j);

// Small machine library used by tests, verification suites and the docs.
Machine unary_increment_prepend();  // 3 states, k = 3: one-step prepend
Machine unary_increment_append();   // 4 states, k = 3: scan, append, return
Machine binary_successor();         // 5 states, k = 4: msb-first successor
Machine parity_checker();           // 4 states, k = 4: even-length word test
Machine rotate_k5();                // 2 states, k = 5: symbol rotation

}  // namespace gpacforge::tm

#endif
