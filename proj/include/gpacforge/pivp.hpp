#ifndef GPACFORGE_PIVP_HPP
#define GPACFORGE_PIVP_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gpacforge/poly.hpp"
#include "gpacforge/simexpr.hpp"

namespace gpacforge {

/// A polynomial initial value problem y' = p(y). The initial condition is
/// either a concrete rational point or a polynomial map of n inputs.
struct Pivp {
    int dim = 0;
    std::vector<MultiPoly> rhs;  // dim entries of arity dim
    struct PointInit {
        std::vector<Rational> values;
    };
    struct PolyInit {
        int input_arity = 0;
        std::vector<MultiPoly> polys;  // dim entries of arity input_arity
    };
    std::optional<PointInit> init_point;
    std::optional<PolyInit> init_poly;
    int output_arity = 1;
    std::vector<std::string> var_names;  // optional labels
    /// Bound on the rounding error committed when storing transcendental
    /// auxiliary initial values as rationals; folded into solver accounting.
    Rational init_error = Rational(0);

    void validate() const;
    std::vector<Rational> init_for(const std::vector<Rational>& inputs) const;

    Rational sigma() const { return sigma_of(rhs); }
    std::optional<int> degree() const { return degree_of(rhs); }

    /// Lower the right-hand side into a simulation DAG.
    SimDag to_simdag(int precision) const;
};

/// Expression DAG over the derivative-closed primitive set. These are the
/// only function symbols whose derivatives close polynomially, which is what
/// makes the compilation to a PIVP possible.
enum class PrimTag { Sin, Cos, Tanh, Exp, InvSqrt1m };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Const, Input, Time, Add, Mul, Neg, IntPow, Prim };
    Kind kind;
    Rational value;       // Const
    int input = 0;        // Input
    unsigned exponent = 0;  // IntPow
    PrimTag tag = PrimTag::Sin;
    Expr a, b;
};

Expr ex_const(const Rational& q);
Expr ex_const(long n);
Expr ex_input(int i);
Expr ex_time();
Expr ex_add(Expr a, Expr b);
Expr ex_sub(Expr a, Expr b);
Expr ex_mul(Expr a, Expr b);
Expr ex_neg(Expr a);
Expr ex_intpow(Expr a, unsigned e);
Expr ex_prim(PrimTag tag, Expr a);
inline Expr ex_sin(Expr a) { return ex_prim(PrimTag::Sin, std::move(a)); }
inline Expr ex_cos(Expr a) { return ex_prim(PrimTag::Cos, std::move(a)); }
inline Expr ex_tanh(Expr a) { return ex_prim(PrimTag::Tanh, std::move(a)); }
inline Expr ex_exp(Expr a) { return ex_prim(PrimTag::Exp, std::move(a)); }
inline Expr ex_invsqrt1m(Expr a) { return ex_prim(PrimTag::InvSqrt1m, std::move(a)); }

/// Direct numeric evaluation of an expression (reference semantics for the
/// closure-soundness checks). `inputs` supplies the input variables, `t` the
/// time variable.
BigFloat ex_eval(const Expr& e, const std::vector<BigFloat>& inputs, const BigFloat& t);

/// Inputs of a compilation: initial values, constancy flags and optional
/// polynomial dynamics shared by all inputs.
struct ClosureEnv {
    std::vector<Rational> input_init;
    std::vector<bool> input_constant;           // per input; true = frozen
    std::vector<MultiPoly> input_dynamics;      // empty or one poly per input, arity = #inputs
    int aux_precision_bits = 160;               // precision for transcendental initial values
};

struct ClosureResult {
    Pivp pivp;
    int aux_count = 0;  // variables added for primitive nodes (pair partners included)
};

/// Compiles expressions into a pure polynomial ODE system whose first
/// components follow the output expressions along any trajectory of the
/// declared input dynamics. Each primitive node contributes auxiliary
/// variables with its defining polynomial ODE; sin and cos are allocated as
/// a pair.
ClosureResult closure_compile(const std::vector<Expr>& outputs, const ClosureEnv& env);

/// Taylor coefficients c[i][j] with y_i(t0 + h) = sum_j c[i][j] h^j.
std::vector<std::vector<BigFloat>> taylor_coeffs(const Pivp& pivp,
                                                 const std::vector<BigFloat>& state, int order);
/// Exact rational variant (the reference for the order-N recurrence).
std::vector<std::vector<Rational>> taylor_coeffs_exact(const Pivp& pivp,
                                                       const std::vector<Rational>& state,
                                                       int order);

}  // namespace gpacforge

#endif
