#ifndef GPACFORGE_SIMEXPR_HPP
#define GPACFORGE_SIMEXPR_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gpacforge/bigfloat.hpp"
#include "gpacforge/poly.hpp"

namespace gpacforge {

/// Expression DAG used to drive simulations: polynomial right-hand sides,
/// closure-compiled primitives and the piecewise-rational gadget oracles all
/// lower to this form. Nodes are stored in an arena in topological order;
/// structural hashing dedups shared subexpressions.
///
/// The jet evaluator computes truncated Taylor coefficients of every node in
/// one interleaved pass (coefficient j of each node only needs coefficients
/// <= j of its children). Piecewise nodes (Abs, Max, Min, Clamp, RndStar)
/// pick their branch from coefficient 0 and stay on it for the whole jet;
/// the step controller rejects steps whose endpoint lands on a different
/// branch, so a trajectory only ever commits to a branch it stays on.
class SimDag {
  public:
    enum class Kind : std::uint8_t {
        Const,     // payload constant
        State,     // state variable, payload index
        Add,       // a + b
        Sub,       // a - b
        Mul,       // a * b
        Neg,       // -a
        Tanh,      // tanh(a)
        Exp,       // exp(a)
        Sin,       // sin(a)   (cos aux buffer kept internally)
        Cos,       // cos(a)
        InvSqrt1m, // (1 - a^2)^(-1/2), |a| < 1 required
        Abs,       // |a|, branch-frozen
        Max,       // max(a, b), branch-frozen
        Min,       // min(a, b), branch-frozen
        RndStar,   // rnd*(a, mu) with e^(-mu) = payload, branch-frozen
    };

    using NodeId = std::uint32_t;

    explicit SimDag(int dim, int precision);

    int dim() const { return dim_; }
    int precision() const { return precision_; }
    std::size_t node_count() const { return nodes_.size(); }

    NodeId constant(const BigFloat& c);
    NodeId constant(const Rational& q);
    NodeId constant(long n) { return constant(Rational(n)); }
    NodeId state(int index);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId neg(NodeId a);
    NodeId intpow(NodeId a, unsigned e);
    NodeId tanh(NodeId a);
    NodeId exp(NodeId a);
    NodeId sin(NodeId a);
    NodeId cos(NodeId a);
    NodeId invsqrt1m(NodeId a);
    NodeId abs(NodeId a);
    NodeId max(NodeId a, NodeId b);
    NodeId min(NodeId a, NodeId b);
    NodeId clamp(NodeId a, const Rational& lo, const Rational& hi);
    /// rnd*(a, mu) parameterized by rho = e^(-mu) in (0, 1/2].
    NodeId rnd_star(NodeId a, const BigFloat& rho);
    /// mix(i, a, b): a for i<=0, b for i>=1, linear blend between.
    NodeId mix(NodeId i, NodeId a, NodeId b);
    /// Expands a MultiPoly over the given state-variable ids.
    NodeId poly(const MultiPoly& p, const std::vector<NodeId>& args);

    /// Designate the right-hand side node of each state variable. Nodes not
    /// reachable from the rhs (output expressions) do not take part in the
    /// branch bookkeeping of the step controller.
    void set_rhs(std::vector<NodeId> rhs);
    const std::vector<NodeId>& rhs() const { return rhs_; }

    /// Point evaluation of a node at a state vector.
    BigFloat eval_node(NodeId id, const std::vector<BigFloat>& state) const;
    std::vector<BigFloat> eval_rhs(const std::vector<BigFloat>& state) const;

    /// Taylor coefficients of the autonomous system y' = rhs(y) at `y0`:
    /// out[i][j] = j-th coefficient of variable i, j = 0..order.
    void taylor(const std::vector<BigFloat>& y0, int order,
                std::vector<std::vector<BigFloat>>& out) const;

    /// One small integer per piecewise node identifying its active branch.
    std::vector<int> branch_signature(const std::vector<BigFloat>& state) const;

  private:
    struct Node {
        Kind kind;
        NodeId a = 0, b = 0;
        int index = 0;        // State
        BigFloat payload;     // Const, RndStar rho
    };

    NodeId push(Node n, const std::string& key);
    template <class F>
    void for_each_scalar(const std::vector<BigFloat>& state, F&& visit) const;

    int dim_;
    int precision_;
    std::vector<Node> nodes_;
    std::vector<NodeId> rhs_;
    std::vector<bool> dynamic_;  // reachable from rhs_
    std::map<std::string, NodeId> dedup_;
};

}  // namespace gpacforge

#endif
