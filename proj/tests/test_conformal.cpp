#include "toeplitz_hc/conformal.hpp"
#include "toeplitz_hc/error.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace toeplitz_hc;
using namespace toeplitz_hc::conformal;

TEST_CASE("rectangle map: center, corners and inverse")
{
    for (auto [w, h] : {std::pair{1.0, 1.0}, std::pair{3.0, 0.5}, std::pair{0.4, 2.0}}) {
        const MapExpr m = rectangle_to_disk(w, h);
        CHECK(std::abs(m.forward(0.0)) < 1e-12);
        for (int sx : {-1, 1}) {
            for (int sy : {-1, 1}) {
                const cplx corner(0.5 * w * sx * (1 - 1e-9), 0.5 * h * sy * (1 - 1e-9));
                CHECK(std::abs(std::abs(m.forward(corner)) - 1.0) < 1e-6);
            }
        }
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(-0.49, 0.49);
        double worst = 0.0;
        for (int i = 0; i < 256; ++i) {
            const cplx z(u(rng) * w, u(rng) * h);
            const cplx d = m.forward(z);
            CHECK(std::abs(d) < 1.0);
            worst = std::max(worst, std::abs((*m.inverse)(d) - z));
        }
        CHECK(worst < 1e-8);
    }
    CHECK_THROWS_AS((void)rectangle_to_disk(1.0, 1e4), Error);
    try {
        (void)rectangle_to_disk(2000.0, 1.0);
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::AspectOverflow);
    }
}

TEST_CASE("Blaschke products")
{
    const MapExpr b1 = blaschke({0.0}, 1.0);
    const MapExpr b2 = blaschke({0.0, 0.0}, 1.0);
    const cplx z(0.3, -0.2);
    CHECK(std::abs(b1.forward(z) - z) < 1e-16);
    CHECK(std::abs(b2.forward(z) - z * z) < 1e-16);
    const MapExpr b = blaschke({0.5}, 1.0);
    for (int i = 0; i < 1024; ++i) {
        CHECK(std::abs(std::abs(b.forward(std::polar(1.0, kTwoPi * i / 1024))) - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS((void)blaschke({1.2}, 1.0), Error);
}

TEST_CASE("sector parameters")
{
    SectorAnnulusParams p;
    p.validate();
    SectorAnnulusParams bad = p;
    bad.R = 1.9 * bad.r;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = p;
    bad.alpha = 0.5;
    CHECK_THROWS_AS(bad.validate(), Error);
    const cplx g = p.gamma();
    CHECK(std::abs((1.0 + p.eps * g) * g * g - p.beta * cplx(1.0, 1.0)) < 1e-14);
    const SectorAnnulusParams q = SectorAnnulusParams::from_json(p.to_json(), {});
    CHECK(q.to_json() == p.to_json());
}

TEST_CASE("sector annulus map lands on the sector")
{
    SectorAnnulusParams p;
    p.beta = 0.1;
    const MapExpr psi = sector_annulus_map(p);
    CHECK(std::abs(psi.forward(0.0) - p.gamma()) < 1e-12);
    double worst = 0.0;
    for (int i = 0; i < 4096; ++i) {
        const cplx w = psi.forward(std::polar(1.0, kTwoPi * (i + 0.5) / 4096));
        worst = std::max(worst, oracle::sector_edge_distance(w, p.r, p.R, p.theta_min(), p.theta_max()));
    }
    CHECK(worst <= 1e-6);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1024; ++i) {
        const cplx z = std::polar(std::sqrt(u(rng)) * 0.999, kTwoPi * u(rng));
        const cplx w = psi.forward(z);
        CHECK(std::abs(w) > p.r);
        CHECK(std::abs(w) < p.R);
        CHECK(std::arg(w) > p.theta_min());
        CHECK(std::arg(w) < p.theta_max());
        CHECK(std::abs((*psi.inverse)(w) - z) < 1e-8);
    }
    CHECK(univalence_evidence(psi.forward).ok());
    CHECK(std::abs(sector_boundary_distance(cplx(0.4, 0.0), p.r, p.R, p.theta_min(), p.theta_max()) -
                   oracle::sector_edge_distance(cplx(0.4, 0.0), p.r, p.R, p.theta_min(), p.theta_max())) < 1e-15);
}

TEST_CASE("companion-matrix roots and clustering")
{
    // (z - 1)(z - 2i)(z + 0.5)^2
    const CVec roots_in{1.0, cplx(0.0, 2.0), -0.5, -0.5};
    CVec c{1.0};
    for (const cplx &r : roots_in) {
        CVec next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= r * c[i];
        }
        c = next;
    }
    const CVec found = polynomial_roots(c);
    REQUIRE(found.size() == 4);
    const auto clusters = cluster_roots(found, 1e-4);
    REQUIRE(clusters.size() == 3);
    int total = 0;
    for (const PoleGuess &g : clusters) {
        total += g.order;
        const bool known = std::abs(g.location - 1.0) < 1e-10 || std::abs(g.location - cplx(0.0, 2.0)) < 1e-10 ||
                           (std::abs(g.location + 0.5) < 1e-6 && g.order == 2);
        CHECK(known);
    }
    CHECK(total == 4);
}

TEST_CASE("peeling principal parts recovers the rational data")
{
    // 3 / (z - 0.5)^2 + (1 + i) / z + exp(z)
    const Expr z = Expr::identity();
    const Expr phi = Expr::add({Expr::affine(3.0, 0.0, Expr::power(Expr::affine(1.0, -0.5), -2)),
                                Expr::affine(cplx(1.0, 1.0), 0.0, Expr::reciprocal(z)), Expr::exp(z)});
    const Symbol s = peel_principal_parts(phi, {{0.0, 1}, {0.5, 2}}, 2.0);
    CHECK(s.n1() == 1);
    CHECK(s.n2() == 2);
    REQUIRE(s.rational().poles.size() == 1);
    CHECK(std::abs(s.rational().poles[0].eta - 2.0) < 1e-10);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // The tail differs from exp(z) by the constants of the rational part.
    const cplx offset = s.tail()(0.9) - std::exp(0.9);
    for (int i = 0; i < 64; ++i) {
        const cplx w = std::polar(0.1 + 0.85 * u(rng), kTwoPi * u(rng));
        if (std::abs(w - 0.5) < 0.05) {
            continue;
        }
        CHECK(std::abs(s.eval(w) - phi(w)) < 1e-9 * std::max(1.0, std::abs(phi(w))));
        CHECK(std::abs(s.tail()(w) - std::exp(w) - offset) < 1e-9);
    }
    try {
        (void)peel_principal_parts(phi, {{0.0, 1}, {0.5, 1}}, 2.0);
        FAIL("expected PeelFailure");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::PeelFailure);
    }
}
