#include "gpacforge/simexpr.hpp"

#include <sstream>

namespace gpacforge {

namespace {

// acc += x * y with a single rounding
inline void fma_acc(BigFloat& acc, const BigFloat& x, const BigFloat& y) {
    mpfr_fma(acc.raw(), x.raw(), y.raw(), acc.raw(), MPFR_RNDN);
}

inline void fms_acc(BigFloat& acc, const BigFloat& x, const BigFloat& y) {
    mpfr_fms(acc.raw(), x.raw(), y.raw(), acc.raw(), MPFR_RNDN);
    mpfr_neg(acc.raw(), acc.raw(), MPFR_RNDN);  // acc - x*y computed as -(x*y - acc)
}

}  // namespace

SimDag::SimDag(int dim, int precision) : dim_(dim), precision_(precision) {}

SimDag::NodeId SimDag::push(Node n, const std::string& key) {
    auto it = dedup_.find(key);
    if (it != dedup_.end()) return it->second;
    nodes_.push_back(std::move(n));
    NodeId id = static_cast<NodeId>(nodes_.size() - 1);
    dedup_.emplace(key, id);
    return id;
}

SimDag::NodeId SimDag::constant(const BigFloat& c) {
    Node n;
        n.kind = Kind::Const;
    n.payload = c.at_precision(precision_);
    return push(std::move(n), "c:" + n.payload.str());
}

SimDag::NodeId SimDag::constant(const Rational& q) { return constant(BigFloat(q, precision_)); }

SimDag::NodeId SimDag::state(int index) {
    if (index < 0 || index >= dim_) throw DimensionError("state index out of range");
    Node n;
        n.kind = Kind::State;
    n.index = index;
    return push(std::move(n), "s:" + std::to_string(index));
}

#define GPAC_BINARY(name, K, tag)                                     \
    SimDag::NodeId SimDag::name(NodeId a, NodeId b) {                    \
        Node n;                                                          \
        n.kind = Kind::K;                                                \
        n.a = a;                                                         \
        n.b = b;                                                         \
        return push(std::move(n),                                        \
                    tag + std::to_string(a) + "," + std::to_string(b));  \
    }

GPAC_BINARY(add, Add, std::string("+:"))
GPAC_BINARY(sub, Sub, std::string("-:"))
GPAC_BINARY(mul, Mul, std::string("*:"))
GPAC_BINARY(max, Max, std::string("M:"))
GPAC_BINARY(min, Min, std::string("m:"))
#undef GPAC_BINARY

#define GPAC_UNARY(name, K, tag)                                \
    SimDag::NodeId SimDag::name(NodeId a) {                        \
        Node n;                                                    \
        n.kind = Kind::K;                                          \
        n.a = a;                                                   \
        return push(std::move(n), tag + std::to_string(a));        \
    }

GPAC_UNARY(neg, Neg, std::string("n:"))
GPAC_UNARY(tanh, Tanh, std::string("th:"))
GPAC_UNARY(exp, Exp, std::string("e:"))
GPAC_UNARY(sin, Sin, std::string("si:"))
GPAC_UNARY(cos, Cos, std::string("co:"))
GPAC_UNARY(invsqrt1m, InvSqrt1m, std::string("iq:"))
GPAC_UNARY(abs, Abs, std::string("ab:"))
#undef GPAC_UNARY

SimDag::NodeId SimDag::intpow(NodeId a, unsigned e) {
    if (e == 0) return constant(Rational(1));
    NodeId acc = a;
    // binary powering, reusing dedup'd squares
    NodeId result = 0;
    bool have = false;
    while (e > 0) {
        if (e & 1u) {
            result = have ? mul(result, acc) : acc;
            have = true;
        }
        e >>= 1u;
        if (e) acc = mul(acc, acc);
    }
    return result;
}

SimDag::NodeId SimDag::clamp(NodeId a, const Rational& lo, const Rational& hi) {
    return min(max(a, constant(lo)), constant(hi));
}

SimDag::NodeId SimDag::rnd_star(NodeId a, const BigFloat& rho) {
    Node n;
        n.kind = Kind::RndStar;
    n.a = a;
    n.payload = rho.at_precision(precision_);
    return push(std::move(n), "r:" + std::to_string(a) + ";" + n.payload.str());
}

SimDag::NodeId SimDag::mix(NodeId i, NodeId a, NodeId b) {
    NodeId w = clamp(i, Rational(0), Rational(1));
    return add(a, mul(w, sub(b, a)));
}

SimDag::NodeId SimDag::poly(const MultiPoly& p, const std::vector<NodeId>& args) {
    if (static_cast<int>(args.size()) != p.arity())
        throw DimensionError("poly node: arity mismatch");
    bool have = false;
    NodeId acc = 0;
    for (const auto& [e, c] : p.terms()) {
        NodeId term = constant(c);
        for (int i = 0; i < p.arity(); ++i)
            if (e[i] > 0) term = mul(term, intpow(args[i], e[i]));
        acc = have ? add(acc, term) : term;
        have = true;
    }
    if (!have) return constant(Rational(0));
    return acc;
}

void SimDag::set_rhs(std::vector<NodeId> rhs) {
    if (static_cast<int>(rhs.size()) != dim_) throw DimensionError("rhs size != dim");
    rhs_ = std::move(rhs);
    dynamic_.assign(nodes_.size(), false);
    // children precede parents, so one reverse sweep marks the closure
    for (NodeId r : rhs_) dynamic_[r] = true;
    for (NodeId k = static_cast<NodeId>(nodes_.size()); k-- > 0;) {
        if (!dynamic_[k]) continue;
        const Node& n = nodes_[k];
        if (n.kind == Kind::Const || n.kind == Kind::State) continue;
        dynamic_[n.a] = true;
        if (n.kind == Kind::Add || n.kind == Kind::Sub || n.kind == Kind::Mul ||
            n.kind == Kind::Max || n.kind == Kind::Min)
            dynamic_[n.b] = true;
    }
}

BigFloat SimDag::eval_node(NodeId id, const std::vector<BigFloat>& state) const {
    if (static_cast<int>(state.size()) != dim_) throw DimensionError("state size != dim");
    int prec = state.empty() ? precision_ : state[0].precision();
    std::vector<BigFloat> val(id + 1, BigFloat(prec));
    for (NodeId k = 0; k <= id; ++k) {
        const Node& n = nodes_[k];
        BigFloat& o = val[k];
        switch (n.kind) {
            case Kind::Const: o = n.payload.at_precision(prec); break;
            case Kind::State: o = state[n.index]; break;
            case Kind::Add: o = val[n.a] + val[n.b]; break;
            case Kind::Sub: o = val[n.a] - val[n.b]; break;
            case Kind::Mul: o = val[n.a] * val[n.b]; break;
            case Kind::Neg: o = -val[n.a]; break;
            case Kind::Tanh: o = bf_tanh(val[n.a]); break;
            case Kind::Exp: o = bf_exp(val[n.a]); break;
            case Kind::Sin: o = bf_sin(val[n.a]); break;
            case Kind::Cos: o = bf_cos(val[n.a]); break;
            case Kind::InvSqrt1m: {
                BigFloat u = BigFloat(1l, prec) - val[n.a] * val[n.a];
                if (u.sign() <= 0) throw DomainError("invsqrt1m: argument outside (-1,1)");
                o = BigFloat(1l, prec) / bf_sqrt(u);
                break;
            }
            case Kind::Abs: o = bf_abs(val[n.a]); break;
            case Kind::Max: o = bf_max(val[n.a], val[n.b]); break;
            case Kind::Min: o = bf_min(val[n.a], val[n.b]); break;
            case Kind::RndStar: {
                const BigFloat& x = val[n.a];
                BigFloat rho = n.payload.at_precision(prec);
                Integer nn = bf_round_to_integer(x);
                BigFloat nf(Rational(nn), prec);
                BigFloat r = x - nf;
                BigFloat plateau = BigFloat(Rational(1, 2), prec) - rho;
                if (bf_abs(r) <= plateau) {
                    o = nf;
                } else {
                    BigFloat sg(r.sign() >= 0 ? 1l : -1l, prec);
                    o = nf + (r - sg * plateau) / (rho + rho);
                }
                break;
            }
        }
    }
    return val[id];
}

std::vector<BigFloat> SimDag::eval_rhs(const std::vector<BigFloat>& state) const {
    std::vector<BigFloat> out;
    out.reserve(dim_);
    for (NodeId r : rhs_) out.push_back(eval_node(r, state));
    return out;
}

std::vector<int> SimDag::branch_signature(const std::vector<BigFloat>& state) const {
    int prec = state.empty() ? precision_ : state[0].precision();
    std::vector<BigFloat> val(nodes_.size(), BigFloat(prec));
    std::vector<int> sig;
    for (NodeId k = 0; k < nodes_.size(); ++k) {
        if (!dynamic_.empty() && (k >= dynamic_.size() || !dynamic_[k])) continue;
        const Node& n = nodes_[k];
        BigFloat& o = val[k];
        switch (n.kind) {
            case Kind::Const: o = n.payload.at_precision(prec); break;
            case Kind::State: o = state[n.index]; break;
            case Kind::Add: o = val[n.a] + val[n.b]; break;
            case Kind::Sub: o = val[n.a] - val[n.b]; break;
            case Kind::Mul: o = val[n.a] * val[n.b]; break;
            case Kind::Neg: o = -val[n.a]; break;
            case Kind::Tanh: o = bf_tanh(val[n.a]); break;
            case Kind::Exp: o = bf_exp(val[n.a]); break;
            case Kind::Sin: o = bf_sin(val[n.a]); break;
            case Kind::Cos: o = bf_cos(val[n.a]); break;
            case Kind::InvSqrt1m: {
                BigFloat u = BigFloat(1l, prec) - val[n.a] * val[n.a];
                if (u.sign() <= 0) throw DomainError("invsqrt1m: argument outside (-1,1)");
                o = BigFloat(1l, prec) / bf_sqrt(u);
                break;
            }
            case Kind::Abs:
                sig.push_back(val[n.a].sign() >= 0 ? 1 : -1);
                o = bf_abs(val[n.a]);
                break;
            case Kind::Max:
                sig.push_back(val[n.a] >= val[n.b] ? 0 : 1);
                o = bf_max(val[n.a], val[n.b]);
                break;
            case Kind::Min:
                sig.push_back(val[n.a] <= val[n.b] ? 0 : 1);
                o = bf_min(val[n.a], val[n.b]);
                break;
            case Kind::RndStar: {
                const BigFloat& x = val[n.a];
                BigFloat rho = n.payload.at_precision(prec);
                Integer nn = bf_round_to_integer(x);
                BigFloat nf(Rational(nn), prec);
                BigFloat r = x - nf;
                BigFloat plateau = BigFloat(Rational(1, 2), prec) - rho;
                long base = 2 * mpz_get_si(nn.get_mpz_t());
                if (bf_abs(r) <= plateau) {
                    sig.push_back(static_cast<int>(base % 1000003));
                    o = nf;
                } else {
                    BigFloat sg(r.sign() >= 0 ? 1l : -1l, prec);
                    sig.push_back(static_cast<int>((base + r.sign()) % 1000003));
                    o = nf + (r - sg * plateau) / (rho + rho);
                }
                break;
            }
        }
    }
    return sig;
}

void SimDag::taylor(const std::vector<BigFloat>& y0, int order,
                    std::vector<std::vector<BigFloat>>& out) const {
    if (static_cast<int>(y0.size()) != dim_) throw DimensionError("taylor: state size != dim");
    if (rhs_.empty()) throw CompileError("taylor: no rhs set");
    const int prec = y0.empty() ? precision_ : y0[0].precision();
    const BigFloat zero(prec);
    const std::size_t nn = nodes_.size();

    // per-node main and auxiliary coefficient buffers
    std::vector<std::vector<BigFloat>> buf(nn), aux(nn);
    std::vector<int> branch(nn, 0);
    std::vector<BigFloat> slope(nn, zero);
    for (std::size_t k = 0; k < nn; ++k) {
        buf[k].assign(order + 1, zero);
        Kind kd = nodes_[k].kind;
        if (kd == Kind::Tanh || kd == Kind::Sin || kd == Kind::Cos || kd == Kind::InvSqrt1m)
            aux[k].assign(order + 1, zero);
    }

    out.assign(dim_, std::vector<BigFloat>(order + 1, zero));
    for (int i = 0; i < dim_; ++i) out[i][0] = y0[i];

    for (int j = 0; j <= order; ++j) {
        if (j > 0) {
            // y_i,j = (rhs_i)_{j-1} / j
            BigFloat inv_j = BigFloat(1l, prec) / BigFloat(static_cast<long>(j), prec);
            for (int i = 0; i < dim_; ++i) out[i][j] = buf[rhs_[i]][j - 1] * inv_j;
        }
        for (std::size_t k = 0; k < nn; ++k) {
            if (!dynamic_.empty() && (k >= dynamic_.size() || !dynamic_[k])) continue;
            const Node& n = nodes_[k];
            const std::vector<BigFloat>* A = nullptr;
            const std::vector<BigFloat>* B = nullptr;
            if (n.kind != Kind::Const && n.kind != Kind::State) {
                A = &buf[n.a];
                if (n.kind == Kind::Add || n.kind == Kind::Sub || n.kind == Kind::Mul ||
                    n.kind == Kind::Max || n.kind == Kind::Min)
                    B = &buf[n.b];
            }
            BigFloat& o = buf[k][j];
            switch (n.kind) {
                case Kind::Const:
                    o = (j == 0) ? n.payload.at_precision(prec) : zero;
                    break;
                case Kind::State:
                    o = out[n.index][j];
                    break;
                case Kind::Add: o = (*A)[j] + (*B)[j]; break;
                case Kind::Sub: o = (*A)[j] - (*B)[j]; break;
                case Kind::Neg: o = -(*A)[j]; break;
                case Kind::Mul: {
                    BigFloat acc(prec);
                    for (int t = 0; t <= j; ++t) fma_acc(acc, (*A)[t], (*B)[j - t]);
                    o = acc;
                    break;
                }
                case Kind::Tanh: {
                    // u' = (1 - u^2) v'; aux holds s = u^2
                    if (j == 0) {
                        o = bf_tanh((*A)[0]);
                    } else {
                        BigFloat acc(prec);
                        for (int t = 0; t < j; ++t) {
                            BigFloat w = BigFloat(static_cast<long>(j - t), prec) * (*A)[j - t];
                            fma_acc(acc, aux[k][t], w);
                        }
                        o = (*A)[j] - acc / BigFloat(static_cast<long>(j), prec);
                    }
                    BigFloat s(prec);
                    for (int t = 0; t <= j; ++t) fma_acc(s, buf[k][t], buf[k][j - t]);
                    aux[k][j] = s;
                    break;
                }
                case Kind::Exp: {
                    if (j == 0) {
                        o = bf_exp((*A)[0]);
                    } else {
                        BigFloat acc(prec);
                        for (int t = 0; t < j; ++t) {
                            BigFloat w = BigFloat(static_cast<long>(j - t), prec) * (*A)[j - t];
                            fma_acc(acc, buf[k][t], w);
                        }
                        o = acc / BigFloat(static_cast<long>(j), prec);
                    }
                    break;
                }
                case Kind::Sin:
                case Kind::Cos: {
                    // own buffer = requested function, aux = its partner
                    if (j == 0) {
                        if (n.kind == Kind::Sin) {
                            o = bf_sin((*A)[0]);
                            aux[k][0] = bf_cos((*A)[0]);
                        } else {
                            o = bf_cos((*A)[0]);
                            aux[k][0] = bf_sin((*A)[0]);
                        }
                    } else {
                        BigFloat acc_o(prec), acc_p(prec);
                        for (int t = 0; t < j; ++t) {
                            BigFloat w = BigFloat(static_cast<long>(j - t), prec) * (*A)[j - t];
                            fma_acc(acc_o, aux[k][t], w);
                            fma_acc(acc_p, buf[k][t], w);
                        }
                        BigFloat inv_j = BigFloat(1l, prec) / BigFloat(static_cast<long>(j), prec);
                        if (n.kind == Kind::Sin) {
                            o = acc_o * inv_j;             // s_j = (1/j) sum c (j-t) v
                            aux[k][j] = -(acc_p * inv_j);  // c_j = -(1/j) sum s (j-t) v
                        } else {
                            o = -(acc_o * inv_j);
                            aux[k][j] = acc_p * inv_j;
                        }
                    }
                    break;
                }
                case Kind::InvSqrt1m: {
                    // aux u = 1 - v^2, own w = u^(-1/2)
                    BigFloat u(prec);
                    if (j == 0) {
                        u = BigFloat(1l, prec) - (*A)[0] * (*A)[0];
                    } else {
                        BigFloat acc(prec);
                        for (int t = 0; t <= j; ++t) fma_acc(acc, (*A)[t], (*A)[j - t]);
                        u = -acc;
                    }
                    aux[k][j] = u;
                    if (j == 0) {
                        if (u.sign() <= 0) throw DomainError("invsqrt1m: argument outside (-1,1)");
                        o = BigFloat(1l, prec) / bf_sqrt(u);
                    } else {
                        // n w_n u0 = a*sum_{t<n} w_t (n-t) u_{n-t} - sum_{1<=t<n} u_t (n-t) w_{n-t}
                        BigFloat acc(prec);
                        BigFloat half(Rational(-1, 2), prec);
                        for (int t = 0; t < j; ++t) {
                            BigFloat w = BigFloat(static_cast<long>(j - t), prec) * aux[k][j - t];
                            fma_acc(acc, half * buf[k][t], w);
                        }
                        for (int t = 1; t < j; ++t) {
                            BigFloat w = BigFloat(static_cast<long>(j - t), prec) * buf[k][j - t];
                            BigFloat neg = -aux[k][t];
                            fma_acc(acc, neg, w);
                        }
                        o = acc / (BigFloat(static_cast<long>(j), prec) * aux[k][0]);
                    }
                    break;
                }
                case Kind::Abs: {
                    if (j == 0) {
                        branch[k] = (*A)[0].sign() >= 0 ? 1 : -1;
                        o = bf_abs((*A)[0]);
                    } else {
                        o = branch[k] >= 0 ? (*A)[j] : -(*A)[j];
                    }
                    break;
                }
                case Kind::Max:
                case Kind::Min: {
                    if (j == 0) {
                        bool pick_a = (n.kind == Kind::Max) ? ((*A)[0] >= (*B)[0])
                                                            : ((*A)[0] <= (*B)[0]);
                        branch[k] = pick_a ? 0 : 1;
                        o = pick_a ? (*A)[0] : (*B)[0];
                    } else {
                        o = branch[k] == 0 ? (*A)[j] : (*B)[j];
                    }
                    break;
                }
                case Kind::RndStar: {
                    if (j == 0) {
                        BigFloat rho = n.payload.at_precision(prec);
                        Integer nn_i = bf_round_to_integer((*A)[0]);
                        BigFloat nf(Rational(nn_i), prec);
                        BigFloat r = (*A)[0] - nf;
                        BigFloat plateau = BigFloat(Rational(1, 2), prec) - rho;
                        if (bf_abs(r) <= plateau) {
                            branch[k] = 0;
                            slope[k] = zero;
                            o = nf;
                        } else {
                            branch[k] = 1;
                            slope[k] = BigFloat(1l, prec) / (rho + rho);
                            BigFloat sg(r.sign() >= 0 ? 1l : -1l, prec);
                            o = nf + (r - sg * plateau) * slope[k];
                        }
                    } else {
                        o = branch[k] ? slope[k] * (*A)[j] : zero;
                    }
                    break;
                }
            }
        }
    }
}

}  // namespace gpacforge
