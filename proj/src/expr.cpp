#include "toeplitz_hc/expr.hpp"

#include "toeplitz_hc/error.hpp"

#include <array>
#include <cmath>
#include <utility>

namespace toeplitz_hc {

struct Expr::Node {
    ExprOp op = ExprOp::Identity;
    std::vector<Expr> args;
    std::array<cplx, 4> coef{}; // constant | mobius a,b,c,d | affine a,b
    int exponent = 0;
    double scale = 1.0;
    CVec zeros;
    elliptic::Modulus mod{};
};

namespace {

constexpr std::array<std::pair<ExprOp, std::string_view>, 15> kOpNames{{
    {ExprOp::Constant, "constant"},
    {ExprOp::Identity, "z"},
    {ExprOp::Add, "add"},
    {ExprOp::Multiply, "mul"},
    {ExprOp::Power, "pow"},
    {ExprOp::Reciprocal, "recip"},
    {ExprOp::Compose, "compose"},
    {ExprOp::ScaleArg, "scale"},
    {ExprOp::Mobius, "mobius"},
    {ExprOp::Blaschke, "blaschke"},
    {ExprOp::Exp, "exp"},
    {ExprOp::Log, "log"},
    {ExprOp::EllipticSn, "sn"},
    {ExprOp::EllipticAsn, "asn"},
    {ExprOp::Affine, "affine"},
}};

ExprOp op_from_name(const std::string &name)
{
    for (const auto &[op, n] : kOpNames) {
        if (n == name) {
            return op;
        }
    }
    throw Error(ErrorCode::SchemaError, "unknown expression op '" + name + "'");
}

Jet jmul(const Jet &a, const Jet &b)
{
    return {a.value * b.value, a.deriv * b.value + a.value * b.deriv};
}

Jet jpow(const Jet &u, int n)
{
    if (n == 0) {
        return {1.0, 0.0};
    }
    THC_FAIL_IF(n < 0 && std::abs(u.value) == 0.0, DomainViolation,
                "negative power of zero");
    const cplx vn1 = ipow(u.value, n - 1);
    return {vn1 * u.value, double(n) * vn1 * u.deriv};
}

} // namespace

std::string_view op_name(ExprOp op)
{
    for (const auto &[o, n] : kOpNames) {
        if (o == op) {
            return n;
        }
    }
    return "?";
}

json complex_to_json(cplx c)
{
    return json::array({c.real(), c.imag()});
}

cplx complex_from_json(const json &j)
{
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    THC_FAIL_IF(!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number(),
                SchemaError, "complex value must be [re, im], got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>()};
}

Expr::Expr() : Expr(identity()) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::identity()
{
    static const auto id = [] {
        auto n = std::make_shared<Node>();
        n->op = ExprOp::Identity;
        return std::shared_ptr<const Node>(std::move(n));
    }();
    return Expr(id);
}

Expr Expr::constant(cplx c)
{
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Constant;
    n->coef[0] = c;
    return Expr(std::move(n));
}

Expr Expr::add(std::vector<Expr> terms)
{
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Add;
    n->args = std::move(terms);
    return Expr(std::move(n));
}

Expr Expr::multiply(std::vector<Expr> factors)
{
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Multiply;
    n->args = std::move(factors);
    return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent)
{
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Power;
    n->args = {std::move(base)};
    n->exponent = exponent;
    return Expr(std::move(n));
}

Expr Expr::reciprocal(Expr e)
{
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Reciprocal;
    n->args = {std::move(e)};
    return Expr(std::move(n));
}

Expr Expr::compose(Expr outer, Expr inner)
{
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Compose;
    n->args = {std::move(outer), std::move(inner)};
    return Expr(std::move(n));
}

Expr Expr::scale_arg(Expr e, double rho)
{
    auto n = std::make_shared<Node>();
    n->op = ExprOp::ScaleArg;
    n->args = {std::move(e)};
    n->scale = rho;
    return Expr(std::move(n));
}

Expr Expr::mobius(cplx a, cplx b, cplx c, cplx d, Expr arg)
{
    THC_FAIL_IF(a * d - b * c == cplx(0.0), ParamInvalid, "degenerate Mobius map");
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Mobius;
    n->coef = {a, b, c, d};
    n->args = {std::move(arg)};
    return Expr(std::move(n));
}

Expr Expr::blaschke(CVec zeros, cplx unimodular, Expr arg)
{
    for (const cplx &a : zeros) {
        THC_FAIL_IF(!(std::abs(a) < 1.0), ZeroOutsideDisk, "Blaschke zero outside the disk");
    }
    THC_FAIL_IF(std::abs(std::abs(unimodular) - 1.0) > 1e-12, ParamInvalid,
                "Blaschke factor must be unimodular");
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Blaschke;
    n->zeros = std::move(zeros);
    n->coef[0] = unimodular;
    n->args = {std::move(arg)};
    return Expr(std::move(n));
}

Expr Expr::exp(Expr arg)
{
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Exp;
    n->args = {std::move(arg)};
    return Expr(std::move(n));
}

Expr Expr::log(Expr arg)
{
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Log;
    n->args = {std::move(arg)};
    return Expr(std::move(n));
}

Expr Expr::sn(elliptic::Modulus mod, Expr arg)
{
    auto n = std::make_shared<Node>();
    n->op = ExprOp::EllipticSn;
    n->mod = mod;
    n->args = {std::move(arg)};
    return Expr(std::move(n));
}

Expr Expr::asn(elliptic::Modulus mod, Expr arg)
{
    auto n = std::make_shared<Node>();
    n->op = ExprOp::EllipticAsn;
    n->mod = mod;
    n->args = {std::move(arg)};
    return Expr(std::move(n));
}

Expr Expr::affine(cplx a, cplx b, Expr arg)
{
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Affine;
    n->coef[0] = a;
    n->coef[1] = b;
    n->args = {std::move(arg)};
    return Expr(std::move(n));
}

ExprOp Expr::op() const { return node_->op; }

const std::vector<Expr> &Expr::args() const { return node_->args; }

bool Expr::is_constant(cplx c) const
{
    return node_->op == ExprOp::Constant && node_->coef[0] == c;
}

Jet Expr::jet(cplx z) const
{
    const Node &n = *node_;
    switch (n.op) {
    case ExprOp::Constant:
        return {n.coef[0], 0.0};
    case ExprOp::Identity:
        return {z, 1.0};
    case ExprOp::Add: {
        Jet acc{0.0, 0.0};
        for (const Expr &t : n.args) {
            const Jet j = t.jet(z);
            acc.value += j.value;
            acc.deriv += j.deriv;
        }
        return acc;
    }
    case ExprOp::Multiply: {
        Jet acc{1.0, 0.0};
        for (const Expr &f : n.args) {
            acc = jmul(acc, f.jet(z));
        }
        return acc;
    }
    case ExprOp::Compose: {
        const Jet inner = n.args[1].jet(z);
        const Jet outer = n.args[0].jet(inner.value);
        return {outer.value, outer.deriv * inner.deriv};
    }
    case ExprOp::ScaleArg: {
        const Jet j = n.args[0].jet(n.scale * z);
        return {j.value, n.scale * j.deriv};
    }
    default:
        break;
    }

    const Jet u = n.args.empty() ? Jet{z, 1.0} : n.args[0].jet(z);
    switch (n.op) {
    case ExprOp::Power:
        return jpow(u, n.exponent);
    case ExprOp::Reciprocal: {
        THC_FAIL_IF(std::abs(u.value) == 0.0, DomainViolation, "reciprocal of zero");
        const cplx inv = 1.0 / u.value;
        return {inv, -u.deriv * inv * inv};
    }
    case ExprOp::Mobius: {
        const auto &[a, b, c, d] = n.coef;
        const cplx den = c * u.value + d;
        THC_FAIL_IF(std::abs(den) == 0.0, PoleHit, "Mobius pole");
        return {(a * u.value + b) / den, (a * d - b * c) / (den * den) * u.deriv};
    }
    case ExprOp::Blaschke: {
        Jet acc{n.coef[0], 0.0};
        for (const cplx &a : n.zeros) {
            const cplx den = 1.0 - std::conj(a) * u.value;
            const cplx f = (u.value - a) / den;
            const cplx fp = (1.0 - std::norm(a)) / (den * den);
            acc = jmul(acc, Jet{f, fp});
        }
        return {acc.value, acc.deriv * u.deriv};
    }
    case ExprOp::Exp: {
        const cplx e = std::exp(u.value);
        return {e, e * u.deriv};
    }
    case ExprOp::Log:
        THC_FAIL_IF(std::abs(u.value) == 0.0, DomainViolation, "log of zero");
        return {std::log(u.value), u.deriv / u.value};
    case ExprOp::EllipticSn: {
        const auto f = elliptic::jacobi(u.value, n.mod);
        return {f.sn, f.cn * f.dn * u.deriv};
    }
    case ExprOp::EllipticAsn: {
        const cplx w = elliptic::inverse_sn(u.value, n.mod);
        const auto f = elliptic::jacobi(w, n.mod);
        const cplx cd = f.cn * f.dn;
        THC_FAIL_IF(std::abs(cd) == 0.0, DomainViolation, "inverse sn at a branch point");
        return {w, u.deriv / cd};
    }
    case ExprOp::Affine:
        return {n.coef[0] * u.value + n.coef[1], n.coef[0] * u.deriv};
    default:
        break;
    }
    throw Error(ErrorCode::SchemaError, "unhandled expression op");
}

json Expr::to_json() const
{
    const Node &n = *node_;
    json j;
    j["op"] = std::string(op_name(n.op));
    json args = json::array();
    for (const Expr &a : n.args) {
        args.push_back(a.to_json());
    }
    j["args"] = std::move(args);
    json p = json::object();
    switch (n.op) {
    case ExprOp::Constant:
        p["value"] = complex_to_json(n.coef[0]);
        break;
    case ExprOp::Power:
        p["n"] = n.exponent;
        break;
    case ExprOp::ScaleArg:
        p["rho"] = n.scale;
        break;
    case ExprOp::Mobius:
        p["a"] = complex_to_json(n.coef[0]);
        p["b"] = complex_to_json(n.coef[1]);
        p["c"] = complex_to_json(n.coef[2]);
        p["d"] = complex_to_json(n.coef[3]);
        break;
    case ExprOp::Blaschke: {
        json zs = json::array();
        for (const cplx &a : n.zeros) {
            zs.push_back(complex_to_json(a));
        }
        p["zeros"] = std::move(zs);
        p["unimodular"] = complex_to_json(n.coef[0]);
        break;
    }
    case ExprOp::EllipticSn:
    case ExprOp::EllipticAsn:
        p["m"] = n.mod.m;
        p["m1"] = n.mod.m1;
        break;
    case ExprOp::Affine:
        p["a"] = complex_to_json(n.coef[0]);
        p["b"] = complex_to_json(n.coef[1]);
        break;
    default:
        break;
    }
    j["params"] = std::move(p);
    return j;
}

Expr Expr::from_json(const json &j)
{
    THC_FAIL_IF(!j.is_object() || !j.contains("op"), SchemaError,
                "expression node must be an object with an 'op' field");
    const ExprOp op = op_from_name(j.at("op").get<std::string>());
    std::vector<Expr> args;
    if (j.contains("args")) {
        for (const json &a : j.at("args")) {
            args.push_back(from_json(a));
        }
    }
    const json params = j.value("params", json::object());
    const auto arg0 = [&]() { return args.empty() ? identity() : args[0]; };
    const auto param = [&](const char *key) -> const json & {
        THC_FAIL_IF(!params.contains(key), SchemaError,
                    std::string("missing parameter '") + key + "' for op " + std::string(op_name(op)));
        return params.at(key);
    };
    switch (op) {
    case ExprOp::Constant:
        return constant(complex_from_json(param("value")));
    case ExprOp::Identity:
        return identity();
    case ExprOp::Add:
        return add(std::move(args));
    case ExprOp::Multiply:
        return multiply(std::move(args));
    case ExprOp::Power:
        return power(arg0(), param("n").get<int>());
    case ExprOp::Reciprocal:
        return reciprocal(arg0());
    case ExprOp::Compose:
        THC_FAIL_IF(args.size() != 2, SchemaError, "compose needs [outer, inner]");
        return compose(args[0], args[1]);
    case ExprOp::ScaleArg:
        return scale_arg(arg0(), param("rho").get<double>());
    case ExprOp::Mobius:
        return mobius(complex_from_json(param("a")), complex_from_json(param("b")),
                      complex_from_json(param("c")), complex_from_json(param("d")), arg0());
    case ExprOp::Blaschke: {
        CVec zs;
        for (const json &z : param("zeros")) {
            zs.push_back(complex_from_json(z));
        }
        const cplx u = params.contains("unimodular") ? complex_from_json(params["unimodular"]) : 1.0;
        return blaschke(std::move(zs), u, arg0());
    }
    case ExprOp::Exp:
        return exp(arg0());
    case ExprOp::Log:
        return log(arg0());
    case ExprOp::EllipticSn:
    case ExprOp::EllipticAsn: {
        const double m = param("m").get<double>();
        const double m1 = params.contains("m1") ? params["m1"].get<double>() : 1.0 - m;
        const elliptic::Modulus mod{m, m1};
        return op == ExprOp::EllipticSn ? sn(mod, arg0()) : asn(mod, arg0());
    }
    case ExprOp::Affine:
        return affine(complex_from_json(param("a")), complex_from_json(param("b")), arg0());
    }
    throw Error(ErrorCode::SchemaError, "unhandled expression op");
}

} // namespace toeplitz_hc
