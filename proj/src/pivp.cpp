#include "gpacforge/pivp.hpp"

#include <map>
#include <unordered_map>

namespace gpacforge {

void Pivp::validate() const {
    if (dim <= 0) throw DimensionError("pivp: dim must be positive");
    if (static_cast<int>(rhs.size()) != dim) throw DimensionError("pivp: rhs size != dim");
    for (const auto& p : rhs)
        if (p.arity() != dim) throw DimensionError("pivp: rhs component arity != dim");
    if (!init_point && !init_poly) throw DimensionError("pivp: missing initial condition");
    if (init_point && static_cast<int>(init_point->values.size()) != dim)
        throw DimensionError("pivp: init point size != dim");
    if (init_poly) {
        if (static_cast<int>(init_poly->polys.size()) != dim)
            throw DimensionError("pivp: init poly count != dim");
        for (const auto& p : init_poly->polys)
            if (p.arity() != init_poly->input_arity)
                throw DimensionError("pivp: init poly arity mismatch");
    }
    if (output_arity < 1 || output_arity > dim)
        throw DimensionError("pivp: output arity out of range");
}

std::vector<Rational> Pivp::init_for(const std::vector<Rational>& inputs) const {
    if (init_point) {
        if (!inputs.empty()) throw DimensionError("pivp: point init takes no inputs");
        return init_point->values;
    }
    std::vector<Rational> y0;
    y0.reserve(dim);
    for (const auto& p : init_poly->polys) y0.push_back(p.eval(inputs));
    return y0;
}

SimDag Pivp::to_simdag(int precision) const {
    validate();
    SimDag dag(dim, precision);
    std::vector<SimDag::NodeId> vars;
    for (int i = 0; i < dim; ++i) vars.push_back(dag.state(i));
    std::vector<SimDag::NodeId> out;
    for (const auto& p : rhs) out.push_back(dag.poly(p, vars));
    dag.set_rhs(std::move(out));
    return dag;
}

// ---------------------------------------------------------------------------
// Expression DAG

namespace {
Expr make(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }
}

Expr ex_const(const Rational& q) {
    ExprNode n;
    n.kind = ExprNode::Kind::Const;
    n.value = q;
    return make(std::move(n));
}
Expr ex_const(long v) { return ex_const(Rational(v)); }

Expr ex_input(int i) {
    ExprNode n;
    n.kind = ExprNode::Kind::Input;
    n.input = i;
    return make(std::move(n));
}

Expr ex_time() { ExprNode n;
    n.kind = ExprNode::Kind::Time;
    return make(std::move(n)); }

Expr ex_add(Expr a, Expr b) {
    ExprNode n;
    n.kind = ExprNode::Kind::Add;
    n.a = std::move(a);
    n.b = std::move(b);
    return make(std::move(n));
}

Expr ex_sub(Expr a, Expr b) { return ex_add(std::move(a), ex_neg(std::move(b))); }

Expr ex_mul(Expr a, Expr b) {
    ExprNode n;
    n.kind = ExprNode::Kind::Mul;
    n.a = std::move(a);
    n.b = std::move(b);
    return make(std::move(n));
}

Expr ex_neg(Expr a) {
    ExprNode n;
    n.kind = ExprNode::Kind::Neg;
    n.a = std::move(a);
    return make(std::move(n));
}

Expr ex_intpow(Expr a, unsigned e) {
    ExprNode n;
    n.kind = ExprNode::Kind::IntPow;
    n.a = std::move(a);
    n.exponent = e;
    return make(std::move(n));
}

Expr ex_prim(PrimTag tag, Expr a) {
    ExprNode n;
    n.kind = ExprNode::Kind::Prim;
    n.a = std::move(a);
    n.tag = tag;
    return make(std::move(n));
}

BigFloat ex_eval(const Expr& e, const std::vector<BigFloat>& inputs, const BigFloat& t) {
    int prec = t.precision();
    switch (e->kind) {
        case ExprNode::Kind::Const: return BigFloat(e->value, prec);
        case ExprNode::Kind::Input:
            if (e->input < 0 || e->input >= static_cast<int>(inputs.size()))
                throw DimensionError("expression input index out of range");
            return inputs[e->input];
        case ExprNode::Kind::Time: return t;
        case ExprNode::Kind::Add: return ex_eval(e->a, inputs, t) + ex_eval(e->b, inputs, t);
        case ExprNode::Kind::Mul: return ex_eval(e->a, inputs, t) * ex_eval(e->b, inputs, t);
        case ExprNode::Kind::Neg: return -ex_eval(e->a, inputs, t);
        case ExprNode::Kind::IntPow:
            return bf_pow_si(ex_eval(e->a, inputs, t), static_cast<long>(e->exponent));
        case ExprNode::Kind::Prim: {
            BigFloat c = ex_eval(e->a, inputs, t);
            switch (e->tag) {
                case PrimTag::Sin: return bf_sin(c);
                case PrimTag::Cos: return bf_cos(c);
                case PrimTag::Tanh: return bf_tanh(c);
                case PrimTag::Exp: return bf_exp(c);
                case PrimTag::InvSqrt1m: {
                    BigFloat u = BigFloat(1l, prec) - c * c;
                    if (u.sign() <= 0)
                        throw DomainError("invsqrt1m: argument outside (-1,1)");
                    return BigFloat(1l, prec) / bf_sqrt(u);
                }
            }
        }
    }
    throw Error("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Closure compilation

namespace {

struct Compiler {
    const ClosureEnv& env;
    int n_inputs;
    bool uses_time = false;

    // growing system description; var indices are 0-based internally
    std::vector<MultiPoly> var_rhs;       // arity fixed up at the end
    std::vector<Rational> var_init;
    std::vector<std::string> var_names;
    Rational init_error{0};
    int time_var = -1;
    std::vector<int> input_var;           // per input, -1 until allocated
    int aux_count = 0;

    // memo: node pointer -> polynomial over allocated variables
    std::unordered_map<const ExprNode*, MultiPoly> memo;

    explicit Compiler(const ClosureEnv& e)
        : env(e), n_inputs(static_cast<int>(e.input_init.size())),
          input_var(static_cast<size_t>(n_inputs), -1) {}

    // Working arity: we compile with a generous arity and shrink at the end.
    // Instead we track polynomials at "current" arity and widen on demand.
    int dim() const { return static_cast<int>(var_rhs.size()); }

    MultiPoly widen(const MultiPoly& p) const {
        return p.arity() == dim() ? p : p.widened(dim());
    }

    int alloc_var(const std::string& name, const Rational& init) {
        var_rhs.push_back(MultiPoly(0));  // placeholder, set later
        var_init.push_back(init);
        var_names.push_back(name);
        return dim() - 1;
    }

    void set_rhs(int v, const MultiPoly& p) { var_rhs[v] = p; }

    MultiPoly var_poly(int v) const { return MultiPoly::variable(dim(), v + 1); }

    int ensure_time() {
        if (time_var < 0) {
            time_var = alloc_var("t", Rational(0));
            set_rhs(time_var, MultiPoly::constant(1, Rational(1)));
        }
        return time_var;
    }

    int ensure_input(int i) {
        if (i < 0 || i >= n_inputs) throw CompileError("undeclared input variable");
        if (input_var[i] < 0) {
            bool constant = i < static_cast<int>(env.input_constant.size())
                                ? env.input_constant[i]
                                : true;
            if (!constant && env.input_dynamics.empty())
                throw CompileError("unclosed input: non-constant input without dynamics");
            // allocate all inputs at once so the dynamics can reference them
            int base = dim();
            for (int k = 0; k < n_inputs; ++k)
                input_var[k] = alloc_var("u" + std::to_string(k + 1), env.input_init[k]);
            for (int k = 0; k < n_inputs; ++k) {
                bool kconst = k < static_cast<int>(env.input_constant.size())
                                  ? env.input_constant[k]
                                  : true;
                if (kconst || env.input_dynamics.empty()) {
                    set_rhs(input_var[k], MultiPoly(dim()));
                } else {
                    // remap input dynamics (arity n_inputs) onto the slots
                    const MultiPoly& d = env.input_dynamics[k];
                    if (d.arity() != n_inputs)
                        throw DimensionError("input dynamics arity != input count");
                    MultiPoly r(base + n_inputs);
                    for (const auto& [e, c] : d.terms()) {
                        MultiPoly::Exponents w(base + n_inputs, 0);
                        for (int j = 0; j < n_inputs; ++j) w[base + j] = e[j];
                        r.add_term(w, c);
                    }
                    set_rhs(input_var[k], r);
                }
            }
        }
        return input_var[i];
    }

    /// d/dt of a polynomial over the state, via the chain rule and the
    /// right-hand sides allocated so far.
    MultiPoly flow_derivative(const MultiPoly& p) {
        MultiPoly acc(dim());
        MultiPoly pw = widen(p);
        for (int v = 0; v < dim(); ++v) {
            MultiPoly dv = pw.derivative(v + 1);
            if (dv.is_zero()) continue;
            acc = acc + dv * widen(var_rhs[v]);
        }
        return acc;
    }

    Rational eval_init(const MultiPoly& p) const {
        std::vector<Rational> pt(var_init.begin(), var_init.begin() + p.arity());
        return p.eval(pt);
    }

    /// Rationalize a transcendental initial value, recording the error.
    Rational rounded_init(const BigFloat& v) {
        auto [q, err] = rational_approx(v, env.aux_precision_bits);
        init_error += err;
        return q;
    }

    MultiPoly compile(const Expr& e) {
        auto it = memo.find(e.get());
        if (it != memo.end()) return widen(it->second);
        MultiPoly result(0);
        switch (e->kind) {
            case ExprNode::Kind::Const:
                result = MultiPoly::constant(dim(), e->value);
                break;
            case ExprNode::Kind::Input:
                result = var_poly(ensure_input(e->input));
                break;
            case ExprNode::Kind::Time:
                result = var_poly(ensure_time());
                break;
            case ExprNode::Kind::Add: {
                MultiPoly a = compile(e->a);
                MultiPoly b = compile(e->b);
                result = widen(a) + widen(b);
                break;
            }
            case ExprNode::Kind::Mul: {
                MultiPoly a = compile(e->a);
                MultiPoly b = compile(e->b);
                result = widen(a) * widen(b);
                break;
            }
            case ExprNode::Kind::Neg:
                result = -compile(e->a);
                break;
            case ExprNode::Kind::IntPow: {
                MultiPoly a = compile(e->a);
                result = MultiPoly::constant(dim(), Rational(1));
                for (unsigned k = 0; k < e->exponent; ++k) result = result * widen(a);
                break;
            }
            case ExprNode::Kind::Prim: {
                MultiPoly child = compile(e->a);
                Rational c0 = eval_init(child);
                int prec = env.aux_precision_bits + 16;
                BigFloat c0f(c0, prec);
                switch (e->tag) {
                    case PrimTag::Sin:
                    case PrimTag::Cos: {
                        int s = alloc_var("sin#" + std::to_string(aux_count),
                                          rounded_init(bf_sin(c0f)));
                        int c = alloc_var("cos#" + std::to_string(aux_count),
                                          rounded_init(bf_cos(c0f)));
                        aux_count += 2;
                        MultiPoly dchild = flow_derivative(child);
                        set_rhs(s, var_poly(c) * widen(dchild));
                        set_rhs(c, -(var_poly(s) * widen(dchild)));
                        result = var_poly(e->tag == PrimTag::Sin ? s : c);
                        break;
                    }
                    case PrimTag::Tanh: {
                        int u = alloc_var("tanh#" + std::to_string(aux_count),
                                          rounded_init(bf_tanh(c0f)));
                        aux_count += 1;
                        MultiPoly dchild = flow_derivative(child);
                        MultiPoly one = MultiPoly::constant(dim(), Rational(1));
                        set_rhs(u, (one - var_poly(u) * var_poly(u)) * widen(dchild));
                        result = var_poly(u);
                        break;
                    }
                    case PrimTag::Exp: {
                        int u = alloc_var("exp#" + std::to_string(aux_count),
                                          rounded_init(bf_exp(c0f)));
                        aux_count += 1;
                        MultiPoly dchild = flow_derivative(child);
                        set_rhs(u, var_poly(u) * widen(dchild));
                        result = var_poly(u);
                        break;
                    }
                    case PrimTag::InvSqrt1m: {
                        BigFloat u0 = BigFloat(1l, prec) - c0f * c0f;
                        if (u0.sign() <= 0)
                            throw DomainError(
                                "invsqrt1m: initial point outside (-1,1)");
                        int w = alloc_var("invsqrt1m#" + std::to_string(aux_count),
                                          rounded_init(BigFloat(1l, prec) / bf_sqrt(u0)));
                        aux_count += 1;
                        MultiPoly dchild = flow_derivative(child);
                        MultiPoly w3 = var_poly(w) * var_poly(w) * var_poly(w);
                        set_rhs(w, widen(child) * w3 * widen(dchild));
                        result = var_poly(w);
                        break;
                    }
                }
                break;
            }
        }
        memo[e.get()] = result;
        return result;
    }
};

}  // namespace

ClosureResult closure_compile(const std::vector<Expr>& outputs, const ClosureEnv& env) {
    if (outputs.empty()) throw CompileError("closure_compile: no outputs");
    Compiler c(env);

    std::vector<MultiPoly> out_polys;
    out_polys.reserve(outputs.size());
    for (const auto& e : outputs) out_polys.push_back(c.compile(e));

    // Outputs must be state components: reuse plain variables, otherwise
    // allocate a tracking variable following the polynomial along the flow.
    std::vector<int> out_vars;
    std::vector<bool> taken(c.var_rhs.size() + outputs.size(), false);
    for (auto& p : out_polys) {
        MultiPoly pw = c.widen(p);
        int reuse = -1;
        if (pw.term_count() == 1) {
            const auto& [e, coef] = *pw.terms().begin();
            int idx = -1, total = 0;
            for (int i = 0; i < static_cast<int>(e.size()); ++i) {
                total += e[i];
                if (e[i] == 1) idx = i;
            }
            if (total == 1 && coef == 1 && idx >= 0 && !taken[idx]) reuse = idx;
        }
        if (reuse >= 0) {
            taken[reuse] = true;
            out_vars.push_back(reuse);
        } else {
            int v = c.alloc_var("out#" + std::to_string(out_vars.size()), c.eval_init(pw));
            c.set_rhs(v, c.flow_derivative(pw));
            taken[v] = true;
            out_vars.push_back(v);
        }
    }

    // Permute outputs to the front.
    int d = c.dim();
    std::vector<int> perm(d, -1);  // old index -> new index
    int next = 0;
    for (int v : out_vars) perm[v] = next++;
    for (int v = 0; v < d; ++v)
        if (perm[v] < 0) perm[v] = next++;

    Pivp pivp;
    pivp.dim = d;
    pivp.rhs.assign(d, MultiPoly(d));
    pivp.init_point = Pivp::PointInit{std::vector<Rational>(d)};
    pivp.var_names.assign(d, "");
    for (int v = 0; v < d; ++v) {
        MultiPoly src = c.widen(c.var_rhs[v]);
        MultiPoly dst(d);
        for (const auto& [e, coef] : src.terms()) {
            MultiPoly::Exponents pe(d, 0);
            for (int i = 0; i < d; ++i) pe[perm[i]] = e[i];
            dst.add_term(pe, coef);
        }
        pivp.rhs[perm[v]] = dst;
        pivp.init_point->values[perm[v]] = c.var_init[v];
        pivp.var_names[perm[v]] = c.var_names[v];
    }
    pivp.output_arity = static_cast<int>(outputs.size());
    pivp.init_error = c.init_error;
    pivp.validate();
    return ClosureResult{std::move(pivp), c.aux_count};
}

// ---------------------------------------------------------------------------
// Taylor coefficients via truncated power series over an arbitrary scalar

namespace {

template <class S>
struct Series {
    std::vector<S> c;
    explicit Series(int len, const S& zero) : c(static_cast<size_t>(len), zero) {}
    Series operator+(const Series& o) const {
        Series r = *this;
        for (size_t i = 0; i < c.size(); ++i) r.c[i] = r.c[i] + o.c[i];
        return r;
    }
    Series operator*(const Series& o) const {
        Series r(static_cast<int>(c.size()), c[0]);
        for (auto& x : r.c) x = x - x;  // zero of S
        for (size_t i = 0; i < c.size(); ++i)
            for (size_t j = 0; i + j < c.size(); ++j) r.c[i + j] = r.c[i + j] + c[i] * o.c[j];
        return r;
    }
};

template <class S, class Lift, class Div>
std::vector<std::vector<S>> taylor_impl(const Pivp& pivp, const std::vector<S>& state, int order,
                                        Lift lift, Div div_by_int) {
    pivp.validate();
    if (static_cast<int>(state.size()) != pivp.dim)
        throw DimensionError("taylor_coeffs: state size != dim");
    if (order < 1) throw DomainError("taylor_coeffs: order must be >= 1");
    const int d = pivp.dim;
    const S zero = lift(Rational(0));
    std::vector<std::vector<S>> coef(d, std::vector<S>(order + 1, zero));
    for (int i = 0; i < d; ++i) coef[i][0] = state[i];
    for (int j = 0; j < order; ++j) {
        // evaluate rhs on series truncated at length j+1
        std::vector<Series<S>> ys;
        ys.reserve(d);
        for (int i = 0; i < d; ++i) {
            Series<S> s(j + 1, zero);
            for (int k = 0; k <= j; ++k) s.c[k] = coef[i][k];
            ys.push_back(std::move(s));
        }
        for (int i = 0; i < d; ++i) {
            Series<S> v = pivp.rhs[i].eval_with(ys, [&](const Rational& q) {
                Series<S> s(j + 1, zero);
                s.c[0] = lift(q);
                return s;
            });
            coef[i][j + 1] = div_by_int(v.c[j], j + 1);
        }
    }
    return coef;
}

}  // namespace

std::vector<std::vector<BigFloat>> taylor_coeffs(const Pivp& pivp,
                                                 const std::vector<BigFloat>& state, int order) {
    int prec = state.empty() ? BigFloat::default_precision() : state[0].precision();
    return taylor_impl<BigFloat>(
        pivp, state, order, [prec](const Rational& q) { return BigFloat(q, prec); },
        [prec](const BigFloat& v, int n) { return v / BigFloat(static_cast<long>(n), prec); });
}

std::vector<std::vector<Rational>> taylor_coeffs_exact(const Pivp& pivp,
                                                       const std::vector<Rational>& state,
                                                       int order) {
    return taylor_impl<Rational>(
        pivp, state, order, [](const Rational& q) { return q; },
        [](const Rational& v, int n) { return Rational(v / Rational(n)); });
}

}  // namespace gpacforge
