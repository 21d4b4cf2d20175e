#include "toeplitz_hc/conditions.hpp"
#include "toeplitz_hc/error.hpp"
#include "toeplitz_hc/examples.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace toeplitz_hc;
using namespace toeplitz_hc::examples;

namespace {

ErrorCode code_of(const std::string &id, const json &params)
{
    try {
        (void)example_symbol(id, params);
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::SchemaError;
}

} // namespace

TEST_CASE("preset ids and defaults")
{
    const auto &ids = example_ids();
    CHECK(ids.size() == 10);
    for (const std::string &id : ids) {
        const json d = default_params(id);
        CHECK(d.is_object());
    }
    CHECK(default_params("rolewicz") == json{{"alpha", 2.0}});
    CHECK(default_params("fig1") == default_params("ex4"));
    CHECK(default_params("fig2") == default_params("ex5"));
    CHECK(code_of("nosuch", json::object()) == ErrorCode::ParamInvalid);
    CHECK(code_of("rolewicz", {{"beta", 1.0}}) == ErrorCode::ParamInvalid);
}

TEST_CASE("closed-form presets")
{
    const Fixture r = example_symbol("rolewicz", {{"alpha", 3.0}});
    CHECK(r.params.at("alpha") == 3.0);
    CHECK(r.phi.degree() == 1);
    CHECK(std::abs(r.phi.eval(0.5) - 6.0) < 1e-15);

    const Fixture t = example_symbol("tridiagonal");
    CHECK(t.phi.degree() == 1);
    CHECK(std::abs(t.phi.eval(cplx(0.0, 0.5)) - (2.0 / cplx(0.0, 0.5) + cplx(0.0, 0.5))) < 1e-14);

    const Fixture two = example_symbol("twofold");
    CHECK(std::abs(two.phi.eval(0.25) - (4.0 + 0.75)) < 1e-14);
    CHECK(code_of("twofold", {{"a", 3.0}, {"b", 1.0}}) == ErrorCode::ParamInvalid);
}

TEST_CASE("Example 3 symbol matches its defining formula")
{
    for (int n : {2, 3, 5}) {
        for (double eps : {0.005, 0.02}) {
            const Fixture f = example_symbol("ex3", {{"n", n}, {"eps", eps}});
            CHECK(f.phi.degree() == n);
            for (const cplx z : {cplx(0.3, 0.1), cplx(-0.6, 0.2), cplx(0.0, 0.9)}) {
                // lambda + 1 / (z^n (1 + eps z)) with Psi = z.
                const cplx want = 0.5 + 1.0 / (ipow(z, n) * (1.0 + eps * z));
                CHECK(std::abs(f.phi.eval(z) - want) < 1e-10 * std::abs(want));
            }
        }
    }
}

TEST_CASE("Example 1 mvc fixture")
{
    const Fixture f = example_symbol("ex1");
    CHECK(f.phi.degree() == 2);
    CHECK(f.phi.analytic_radius() > 1.0);
    CHECK(conditions::check_mvc(f.phi).verdict == conditions::Tri::Pass);
    // Degree-one Blaschke factor: a simple boundary curve.
    const Fixture g = example_symbol("ex1", {{"zeros", {0.3}}});
    CHECK(g.phi.degree() == 1);
    const valence::BoundaryCurve c = valence::build_curve(g.phi, 1.0);
    CHECK(valence::general_position(g.phi, c).ok());
}

TEST_CASE("Example 2 closed form for a linear Psi")
{
    const Fixture f = example_symbol("ex2");
    CHECK(f.phi.degree() == 3);
    // Psi = z / 2 gives Phi = (2 / z)^3.
    for (const cplx z : {cplx(0.4, 0.2), cplx(-0.7, 0.1)}) {
        CHECK(std::abs(f.phi.eval(z) - ipow(2.0 / z, 3)) < 1e-12 * std::abs(ipow(2.0 / z, 3)));
    }
}

TEST_CASE("every preset satisfies the symbol invariants")
{
    for (const std::string &id : example_ids()) {
        const Fixture f = example_symbol(id);
        CHECK_NOTHROW(f.phi.rational().validate());
        CHECK(f.phi.pole_count(1.0) == f.phi.degree());
        const json j = f.to_json();
        CHECK(j.at("id") == id);
        // Round trip through JSON keeps values.
        const Symbol back = Symbol::from_json(j.at("symbol"));
        for (const cplx z : {cplx(0.31, 0.17), cplx(-0.42, -0.5)}) {
            CHECK(std::abs(back.eval(z) - f.phi.eval(z)) <= 1e-12 * (1.0 + std::abs(f.phi.eval(z))));
        }
    }
}

TEST_CASE("sector fixtures carry h with Phi = 1/h")
{
    for (const char *id : {"fig1", "fig2"}) {
        const Fixture f = example_symbol(id);
        REQUIRE(f.h.has_value());
        CHECK(f.phi.degree() == 2);
        const conformal::SectorAnnulusParams p =
            conformal::SectorAnnulusParams::from_json(f.params, conformal::SectorAnnulusParams{});
        const Expr psi = conformal::sector_annulus_map(p).forward;
        for (const cplx z : {cplx(0.2, 0.3), cplx(-0.5, 0.4), cplx(0.7, -0.1)}) {
            const cplx hv = f.h->eval(z);
            const cplx g = psi(p.rho * z);
            const cplx want = (1.0 + p.eps * g) * g * g - p.beta * cplx(1.0, 1.0);
            CHECK(std::abs(hv - want * want) < 1e-9 * std::abs(hv));
            CHECK(std::abs(f.phi.eval(z) - 1.0 / hv) < 1e-8 * std::abs(1.0 / hv));
        }
    }
}

TEST_CASE("classify verdicts of the light presets")
{
    using conditions::Verdict;
    CHECK(conditions::classify(example_symbol("rolewicz").phi).verdict == Verdict::CertifiedMVC);
    CHECK(conditions::classify(example_symbol("tridiagonal").phi).verdict == Verdict::CertifiedMVC);
    CHECK(conditions::classify(example_symbol("ex2").phi).verdict == Verdict::CertifiedMVC);
    CHECK(conditions::classify(example_symbol("twofold").phi).verdict == Verdict::NecessaryFailed);
}
