#pragma once

#include "toeplitz_hc/elliptic.hpp"
#include "toeplitz_hc/types.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace toeplitz_hc {

using json = nlohmann::json;

enum class ExprOp {
    Constant,
    Identity,
    Add,
    Multiply,
    Power,
    Reciprocal,
    Compose,
    ScaleArg,
    Mobius,
    Blaschke,
    Exp,
    Log,
    EllipticSn,
    EllipticAsn,
    Affine,
};

/**
 * Immutable expression tree for holomorphic functions of one variable.
 *
 * Unary function nodes (power, reciprocal, Mobius, Blaschke, exp, log, sn,
 * asn, affine) act on their single argument expression, which defaults to the
 * identity. `compose(outer, inner)` substitutes `inner` for the variable of
 * `outer`; `scale_arg(e, rho)` evaluates `e` at `rho * z`.
 *
 * Every evaluation returns a Jet (value and derivative) built node by node by
 * the chain rule. Nodes are shared and never mutated, so an Expr can be
 * evaluated from many threads at once.
 */
class Expr {
public:
    Expr();

    static Expr constant(cplx c);
    static Expr identity();
    static Expr add(std::vector<Expr> terms);
    static Expr multiply(std::vector<Expr> factors);
    static Expr power(Expr base, int exponent);
    static Expr reciprocal(Expr e);
    static Expr compose(Expr outer, Expr inner);
    static Expr scale_arg(Expr e, double rho);
    static Expr mobius(cplx a, cplx b, cplx c, cplx d, Expr arg = identity());
    static Expr blaschke(CVec zeros, cplx unimodular, Expr arg = identity());
    static Expr exp(Expr arg);
    static Expr log(Expr arg);
    static Expr sn(elliptic::Modulus mod, Expr arg);
    static Expr asn(elliptic::Modulus mod, Expr arg);
    static Expr affine(cplx a, cplx b, Expr arg = identity());

    [[nodiscard]] Jet jet(cplx z) const;
    [[nodiscard]] cplx operator()(cplx z) const { return jet(z).value; }

    [[nodiscard]] ExprOp op() const;
    [[nodiscard]] const std::vector<Expr> &args() const;
    [[nodiscard]] bool is_constant(cplx c) const;

    [[nodiscard]] json to_json() const;
    static Expr from_json(const json &j);

    friend Expr operator+(const Expr &a, const Expr &b) { return add({a, b}); }
    friend Expr operator*(const Expr &a, const Expr &b) { return multiply({a, b}); }
    friend Expr operator*(cplx s, const Expr &e) { return affine(s, 0.0, e); }

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

std::string_view op_name(ExprOp op);

json complex_to_json(cplx c);
cplx complex_from_json(const json &j);

} // namespace toeplitz_hc
