#include "toeplitz_hc/examples.hpp"

#include "toeplitz_hc/conditions.hpp"
#include "toeplitz_hc/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace toeplitz_hc::examples {

namespace {

// Frozen from search_beta at grid 512 with the default sector parameters.
constexpr double kFig1Beta = 0.152735;
constexpr double kFig2Beta = 0.0992778;

conformal::SectorAnnulusParams figure_defaults(double beta)
{
    conformal::SectorAnnulusParams p;
    p.alpha = 0.02;
    p.rho = 1.0 - 1e-5;
    p.beta = beta;
    return p;
}

std::string canonical(const std::string &id)
{
    if (id == "fig1") {
        return "ex4";
    }
    if (id == "fig2") {
        return "ex5";
    }
    return id;
}

json merge(const std::string &id, json defaults, const json &params)
{
    THC_FAIL_IF(!params.is_object(), ParamInvalid, "params for " + id + " must be a JSON object");
    for (auto it = params.begin(); it != params.end(); ++it) {
        THC_FAIL_IF(!defaults.contains(it.key()), ParamInvalid, "unknown parameter '" + it.key() + "' for " + id);
        defaults[it.key()] = it.value();
    }
    return defaults;
}

CVec cvec_from_json(const json &j, const std::string &what)
{
    THC_FAIL_IF(!j.is_array(), ParamInvalid, what + " must be an array");
    CVec out;
    for (const json &e : j) {
        out.push_back(complex_from_json(e));
    }
    return out;
}

Expr polynomial_expr(const CVec &c)
{
    std::vector<Expr> terms;
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k] == cplx(0.0)) {
            continue;
        }
        terms.push_back(k == 0 ? Expr::constant(c[k]) : Expr::affine(c[k], 0.0, Expr::power(Expr::identity(), int(k))));
    }
    if (terms.empty()) {
        return Expr::constant(0.0);
    }
    return terms.size() == 1 ? terms.front() : Expr::add(std::move(terms));
}

CVec trimmed(CVec c)
{
    while (!c.empty() && c.back() == cplx(0.0)) {
        c.pop_back();
    }
    return c;
}

// Radius past 1 up to which 1/f stays analytic, given the roots of f that
// must stay outside.
double radius_below(const CVec &outside_roots, double cap)
{
    double m = cap;
    for (const cplx &r : outside_roots) {
        m = std::min(m, std::abs(r));
    }
    return m;
}

Fixture rolewicz(const json &p)
{
    const cplx a = complex_from_json(p.at("alpha"));
    THC_FAIL_IF(a == cplx(0.0), ParamInvalid, "alpha must be nonzero");
    RationalPart rp;
    rp.poly = {0.0, a};
    return {"rolewicz", p, Symbol(rp, Expr::constant(0.0)), std::nullopt, {}};
}

Fixture tridiagonal(const json &p)
{
    const cplx a = complex_from_json(p.at("a"));
    const cplx b = complex_from_json(p.at("b"));
    THC_FAIL_IF(a == cplx(0.0), ParamInvalid, "a must be nonzero");
    RationalPart rp;
    rp.poly = {0.0, a};
    return {"tridiagonal", p, Symbol(rp, Expr::affine(b, 0.0)), std::nullopt, {}};
}

Fixture twofold(const json &p)
{
    const cplx a = complex_from_json(p.at("a"));
    const cplx b = complex_from_json(p.at("b"));
    THC_FAIL_IF(!(std::abs(b) > std::abs(a)) || a == cplx(0.0), ParamInvalid,
                "twofold needs 0 < |a| < |b| so that both roots of b z^2 + a lie in the disk");
    RationalPart rp;
    rp.poly = {0.0, a};
    Fixture f{"twofold", p, Symbol(rp, Expr::affine(b, 0.0)), std::nullopt, {}};
    f.notes.push_back("the value 0 is taken at both square roots of -a/b, inside the disk");
    return f;
}

Fixture ex1(const json &p)
{
    const CVec psi = trimmed(cvec_from_json(p.at("psi"), "psi"));
    const CVec zeros = cvec_from_json(p.at("zeros"), "zeros");
    const cplx u = complex_from_json(p.at("unimodular"));
    const double ar = p.at("analytic_radius").get<double>();
    THC_FAIL_IF(psi.size() < 2, ParamInvalid, "psi must be a nonconstant polynomial");
    THC_FAIL_IF(zeros.empty(), ParamInvalid, "the Blaschke product needs at least one zero");
    THC_FAIL_IF(!(ar > 1.0), ParamInvalid, "analytic_radius must exceed 1");

    const Expr psi_e = polynomial_expr(psi);
    const conformal::UnivalenceEvidence ue = conformal::univalence_evidence(psi_e);
    THC_FAIL_IF(!ue.ok(), ParamInvalid, "psi is not univalent on the sampled disk");

    // gamma: the unique zero of psi in the disk.
    const CVec psi_roots = conformal::polynomial_roots(psi);
    std::optional<cplx> gamma;
    CVec other;
    for (const cplx &r : psi_roots) {
        if (std::abs(r) < 1.0) {
            THC_FAIL_IF(gamma.has_value(), ParamInvalid, "psi has more than one zero in the disk");
            gamma = r;
        } else {
            other.push_back(r);
        }
    }
    THC_FAIL_IF(!gamma, ParamInvalid, "psi has no zero in the disk");

    const conformal::MapExpr b = conformal::blaschke(zeros, u);
    const Expr phi = Expr::reciprocal(Expr::compose(psi_e, b.forward));

    // Poles: roots of u prod (z - a) - gamma prod (1 - conj(a) z).
    CVec num{u}, den{1.0};
    for (const cplx &a : zeros) {
        CVec n2(num.size() + 1, 0.0), d2(den.size() + 1, 0.0);
        for (std::size_t i = 0; i < num.size(); ++i) {
            n2[i] -= a * num[i];
            n2[i + 1] += num[i];
            d2[i] += den[i];
            d2[i + 1] -= std::conj(a) * den[i];
        }
        num = std::move(n2);
        den = std::move(d2);
    }
    CVec eq(num.size());
    for (std::size_t i = 0; i < eq.size(); ++i) {
        eq[i] = num[i] - *gamma * den[i];
    }
    const std::vector<conformal::PoleGuess> poles =
        conformal::cluster_roots(conformal::polynomial_roots(eq), 1e-6);

    // Other singularities of 1/psi(B) must stay beyond the claimed radius:
    // poles of B and preimages of the remaining zeros of psi.
    double sampled = 1.0e300;
    for (const cplx &a : zeros) {
        if (a != cplx(0.0)) {
            sampled = std::min(sampled, 1.0 / std::abs(a));
        }
    }
    for (const cplx &w : other) {
        CVec e2(num.size());
        for (std::size_t i = 0; i < e2.size(); ++i) {
            e2[i] = num[i] - w * den[i];
        }
        sampled = std::min(sampled, radius_below(conformal::polynomial_roots(e2), sampled));
    }
    THC_FAIL_IF(!(sampled > ar), ParamInvalid,
                "a singularity of 1/psi(B) lies inside the claimed analytic radius");

    Fixture f{"ex1", p, conformal::peel_principal_parts(phi, poles, ar), std::nullopt, {}};
    f.notes.push_back("psi(gamma) = 0 at gamma = " + complex_to_json(*gamma).dump());
    return f;
}

Fixture ex2(const json &p)
{
    const CVec psi = trimmed(cvec_from_json(p.at("psi"), "psi"));
    const int n = p.at("N").get<int>();
    THC_FAIL_IF(n < 1, ParamInvalid, "N must be positive");
    THC_FAIL_IF(psi.size() < 2 || psi[0] != cplx(0.0) || psi[1] == cplx(0.0), ParamInvalid,
                "psi must vanish at 0 with nonzero derivative");
    for (std::size_t k = 2; k < psi.size(); ++k) {
        THC_FAIL_IF(psi[k] != cplx(0.0) && (k - 1) % std::size_t(n) != 0, ParamInvalid,
                    "psi must commute with rotation by 2 pi / N (only powers 1 mod N)");
    }
    if (psi.size() == 2) {
        RationalPart rp;
        rp.poly.assign(std::size_t(n) + 1, 0.0);
        rp.poly[std::size_t(n)] = ipow(psi[1], -n);
        return {"ex2", p, Symbol(rp, Expr::constant(0.0)), std::nullopt, {}};
    }
    const Expr psi_e = polynomial_expr(psi);
    THC_FAIL_IF(!conformal::univalence_evidence(psi_e).ok(), ParamInvalid, "psi is not univalent on the sampled disk");
    CVec rest;
    for (const cplx &r : conformal::polynomial_roots(psi)) {
        if (std::abs(r) > 1e-12) {
            rest.push_back(r);
        }
    }
    const double lim = radius_below(rest, Symbol::kInfiniteRadius);
    THC_FAIL_IF(!(lim > 1.0), ParamInvalid, "psi vanishes in the closed disk away from 0");
    const double ar = std::isinf(lim) ? lim : 0.5 * (1.0 + lim);
    const Expr phi = Expr::reciprocal(Expr::power(psi_e, n));
    return {"ex2", p, conformal::peel_principal_parts(phi, {{0.0, n}}, ar), std::nullopt, {}};
}

Fixture ex3(const json &p)
{
    const int n = p.at("n").get<int>();
    const double eps = p.at("eps").get<double>();
    const cplx lambda = complex_from_json(p.at("lambda"));
    const CVec psi = trimmed(cvec_from_json(p.at("psi"), "psi"));
    THC_FAIL_IF(n < 1, ParamInvalid, "n must be positive");
    THC_FAIL_IF(!(eps >= 0.0), ParamInvalid, "eps must be nonnegative");

    const bool identity = psi.size() == 2 && psi[0] == cplx(0.0) && psi[1] == cplx(1.0);
    if (eps == 0.0 || identity) {
        // z^{-n} / (1 + eps z) = sum_{m<n} (-eps)^m z^{m-n} + (-eps)^n / (1 + eps z).
        RationalPart rp;
        rp.poly.assign(std::size_t(n) + 1, 0.0);
        rp.poly[0] = lambda;
        for (int m = 0; m < n; ++m) {
            rp.poly[std::size_t(n - m)] = std::pow(-eps, m);
        }
        Expr tail = eps == 0.0 ? Expr::constant(0.0) : Expr::mobius(0.0, std::pow(-eps, n), eps, 1.0);
        const double ar = eps == 0.0 ? Symbol::kInfiniteRadius : 1.0 / eps;
        THC_FAIL_IF(!(ar > 1.0), ParamInvalid, "eps must be below 1");
        return {"ex3", p, Symbol(rp, tail, ar), std::nullopt, {}};
    }
    CVec one_plus(psi.size(), 0.0);
    for (std::size_t k = 0; k < psi.size(); ++k) {
        one_plus[k] = eps * psi[k];
    }
    one_plus[0] += 1.0;
    const double lim = radius_below(conformal::polynomial_roots(trimmed(one_plus)), Symbol::kInfiniteRadius);
    THC_FAIL_IF(!(lim > 1.0), ParamInvalid, "1 + eps psi vanishes in the closed disk");
    const double ar = std::isinf(lim) ? lim : 0.5 * (1.0 + lim);
    const Expr inner = Expr::multiply({Expr::power(Expr::identity(), n), polynomial_expr(one_plus)});
    const Expr phi = Expr::add({Expr::constant(lambda), Expr::reciprocal(inner)});
    return {"ex3", p, conformal::peel_principal_parts(phi, {{0.0, n}}, ar), std::nullopt, {}};
}

Fixture sector_fixture(const std::string &id, const json &p)
{
    conformal::SectorAnnulusParams sp = conformal::SectorAnnulusParams::from_json(p, {});
    sp.validate();
    const Expr h = sector_h_expr(sp);
    const double ar = 1.0 / sp.rho;
    Fixture f;
    f.id = id;
    f.params = p;
    f.h = Symbol(RationalPart{}, h, ar);
    f.phi = conformal::peel_principal_parts(Expr::reciprocal(h), {{0.0, 2}}, ar);
    return f;
}

} // namespace

json Fixture::to_json() const
{
    json j{{"id", id}, {"params", params}, {"symbol", phi.to_json()}, {"notes", notes}};
    j["h"] = h ? h->to_json() : json(nullptr);
    return j;
}

const std::vector<std::string> &example_ids()
{
    static const std::vector<std::string> ids{"rolewicz", "tridiagonal", "ex1", "ex2", "ex3", "ex4",
                                              "ex5",      "fig1",        "fig2", "twofold"};
    return ids;
}

json default_params(const std::string &id)
{
    const std::string c = canonical(id);
    if (c == "rolewicz") {
        return {{"alpha", 2.0}};
    }
    if (c == "tridiagonal") {
        return {{"a", 2.0}, {"b", 1.0}};
    }
    if (c == "twofold") {
        return {{"a", 1.0}, {"b", 3.0}};
    }
    if (c == "ex1") {
        return {{"psi", {0.0, 0.5, 0.05}}, {"zeros", {0.0, 0.0}}, {"unimodular", 1.0}, {"analytic_radius", 1.5}};
    }
    if (c == "ex2") {
        return {{"psi", {0.0, 0.5}}, {"N", 3}};
    }
    if (c == "ex3") {
        return {{"n", 3}, {"eps", 0.01}, {"lambda", 0.5}, {"psi", {0.0, 1.0}}};
    }
    if (c == "ex4") {
        return figure_defaults(kFig1Beta).to_json();
    }
    if (c == "ex5") {
        return figure_defaults(kFig2Beta).to_json();
    }
    throw Error(ErrorCode::ParamInvalid, "unknown example id '" + id + "'");
}

Fixture example_symbol(const std::string &id, const json &params)
{
    const json p = merge(id, default_params(id), params);
    const std::string c = canonical(id);
    Fixture f;
    if (c == "rolewicz") {
        f = rolewicz(p);
    } else if (c == "tridiagonal") {
        f = tridiagonal(p);
    } else if (c == "twofold") {
        f = twofold(p);
    } else if (c == "ex1") {
        f = ex1(p);
    } else if (c == "ex2") {
        f = ex2(p);
    } else if (c == "ex3") {
        f = ex3(p);
    } else {
        f = sector_fixture(c, p);
    }
    f.id = id;
    return f;
}

Expr sector_h_expr(const conformal::SectorAnnulusParams &p)
{
    const Expr psi = conformal::sector_annulus_map(p).forward;
    const Expr g = Expr::add({Expr::multiply({Expr::affine(p.eps, 1.0, psi), Expr::power(psi, 2)}),
                              Expr::constant(-p.beta * cplx(1.0, 1.0))});
    return Expr::scale_arg(Expr::power(g, 2), p.rho);
}

bool matches_fig1_pattern(const valence::RegionMap &map, const valence::GeneralPositionReport &gp)
{
    if (!gp.ok() || map.max_k() != 2 || map.holes().empty()) {
        return false;
    }
    bool island = false;
    for (const valence::Component &c : map.components) {
        if (c.k != 2) {
            continue;
        }
        island = true;
        for (int nb : map.neighbors(c.id)) {
            if (map.component(nb).k != 1) {
                return false;
            }
        }
    }
    return island && conditions::descending_chains(map, map.unbounded).blocked.empty();
}

bool matches_fig2_pattern(const valence::RegionMap &map, const valence::GeneralPositionReport &gp)
{
    return gp.ok() && map.max_k() == 2 && !conditions::descending_chains(map, map.unbounded).blocked.empty();
}

BetaSearch search_beta(int figure, conformal::SectorAnnulusParams p, int steps, int grid_n)
{
    THC_FAIL_IF(figure != 1 && figure != 2, ParamInvalid, "figure must be 1 or 2");
    THC_FAIL_IF(steps < 2, ParamInvalid, "steps must be at least 2");
    const double b0 = p.r * p.r / std::sqrt(2.0);
    const double b1 = p.R * p.R / std::sqrt(2.0);
    BetaSearch out;
    std::vector<bool> hit(static_cast<std::size_t>(steps), false);
    std::vector<double> betas(static_cast<std::size_t>(steps));
    for (int i = 1; i < steps; ++i) {
        p.beta = b0 + (b1 - b0) * double(i) / double(steps);
        betas[std::size_t(i)] = p.beta;
        ++out.tried;
        try {
            p.validate();
            const Symbol h(RationalPart{}, sector_h_expr(p), 1.0 / p.rho);
            valence::RegionOptions o;
            o.grid_n = grid_n;
            const valence::RegionMap m = valence::region_map(h, 1.0, o);
            const valence::GeneralPositionReport gp = valence::general_position(h, m.curve);
            const bool ok = figure == 1 ? matches_fig1_pattern(m, gp) : matches_fig2_pattern(m, gp);
            if (ok) {
                hit[std::size_t(i)] = true;
                out.hits.push_back(p.beta);
            }
        } catch (const Error &) {
            // invalid beta or unresolvable curve: not a hit
        }
    }
    int best_lo = -1, best_len = 0;
    for (int i = 1; i < steps;) {
        if (!hit[std::size_t(i)]) {
            ++i;
            continue;
        }
        int j = i;
        while (j < steps && hit[std::size_t(j)]) {
            ++j;
        }
        if (j - i > best_len) {
            best_len = j - i;
            best_lo = i;
        }
        i = j;
    }
    if (best_lo >= 0) {
        out.beta = betas[std::size_t(best_lo + best_len / 2)];
    }
    return out;
}

} // namespace toeplitz_hc::examples
