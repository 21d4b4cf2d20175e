#include "toeplitz_hc/error.hpp"
#include "toeplitz_hc/valence.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace toeplitz_hc;
using namespace toeplitz_hc::valence;

namespace {

Symbol inv_power(cplx a, int n)
{
    CVec poly(static_cast<std::size_t>(n) + 1, 0.0);
    poly.back() = a;
    return Symbol(RationalPart{poly, {}}, Expr::constant(0.0));
}

} // namespace

TEST_CASE("preimage counts for the Rolewicz symbol")
{
    const Symbol s = inv_power(2.0, 1);
    CHECK(preimage_count(s, 5.0, 1.0) == 1);
    CHECK(preimage_count(s, 1.0, 1.0) == 0);
    CHECK(preimage_count(s, cplx(0.0, -3.0), 1.0) == 1);
    try {
        (void)preimage_count(s, 2.0, 1.0);
        FAIL("expected TooCloseToCurve");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::TooCloseToCurve);
    }
}

TEST_CASE("preimage counts agree with companion-matrix roots")
{
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        const auto rr = oracle::random_rational(rng, 5);
        const BoundaryCurve curve = build_curve(rr.symbol, 1.0);
        const PreimageCounter counter(rr.symbol, curve);
        const auto [lo, hi] = curve.bbox();
        const cplx mid = 0.5 * (lo + hi);
        const double ext = std::abs(hi - lo);
        int checked = 0;
        for (int i = 0; i < 200; ++i) {
            const cplx w = mid + 0.75 * ext * cplx(u(rng), u(rng));
            if (curve.distance(w) <= curve.band()) {
                continue;
            }
            ++checked;
            CHECK(counter.count(w) == oracle::root_count(rr.rational, rr.tail, w, 1.0));
        }
        CHECK(checked > 100);
    }
}

TEST_CASE("boundary curves of simple symbols")
{
    const BoundaryCurve c = build_curve(inv_power(2.0, 1), 1.0);
    CHECK(c.self_intersections.empty());
    CHECK(c.multiplicity == 1);
    for (std::size_t i = 0; i < c.size(); i += 97) {
        CHECK(std::abs(std::abs(c.value[i]) - 2.0) < 1e-14);
    }
    CHECK(c.max_spacing <= 1e-3 * c.diameter * (1 + 1e-9));

    // 2 e^{-it} + e^{it} = 3 cos t - i sin t.
    const Symbol tri(RationalPart{{0.0, 2.0}, {}}, Expr::identity());
    const BoundaryCurve e = build_curve(tri, 1.0);
    CHECK(e.self_intersections.empty());
    const auto [lo, hi] = e.bbox();
    CHECK(std::abs(hi.real() - lo.real() - 6.0) < 1e-6);
    CHECK(std::abs(hi.imag() - lo.imag() - 2.0) < 1e-6);

    const BoundaryCurve triple = build_curve(inv_power(8.0, 3), 1.0);
    CHECK(triple.multiplicity == 3);
}

TEST_CASE("general position diagnostics")
{
    const Symbol s = inv_power(2.0, 1);
    const auto ok = general_position(s, build_curve(s, 1.0));
    CHECK(ok.ok());

    const Symbol joukowski(RationalPart{{0.0, 1.0}, {}}, Expr::identity());
    const auto bad = general_position(joukowski, build_curve(joukowski, 1.0));
    CHECK_FALSE(bad.derivative_nonzero);
    CHECK_FALSE(bad.ok());
    CHECK(std::abs(std::abs(bad.derivative_witness.real()) - 1.0) < 1e-3);
    CHECK(std::abs(bad.derivative_witness.imag()) < 1e-3);

    const Symbol triple = inv_power(8.0, 3);
    CHECK_FALSE(general_position(triple, build_curve(triple, 1.0)).ok());
}

TEST_CASE("region map of the Rolewicz symbol")
{
    RegionOptions opt;
    opt.grid_n = 256;
    const RegionMap m = region_map(inv_power(2.0, 1), 1.0, opt);
    REQUIRE(m.components.size() == 2);
    const Component &outer = m.component(m.unbounded);
    CHECK(outer.k == 1);
    CHECK(m.holes().size() == 1);
    CHECK(m.component(m.holes()[0]).k == 0);
    REQUIRE(m.edges.size() == 1);
    CHECK(m.component_at(0.0) == m.holes()[0]);
    CHECK(m.warnings.empty());
}

TEST_CASE("region map of a multiply traced curve")
{
    RegionOptions opt;
    opt.grid_n = 256;
    const RegionMap m = region_map(inv_power(8.0, 3), 1.0, opt);
    REQUIRE(m.components.size() == 2);
    CHECK(m.component(m.unbounded).k == 3);
    CHECK(m.component(m.component_at(0.0)).k == 0);
    CHECK(m.edges.size() == 1);
    CHECK_FALSE(m.warnings.empty());
}

TEST_CASE("component invariants on a three-region symbol")
{
    // 2/z + 0.9 z^2 has a curve with self-intersections.
    const Symbol s(RationalPart{{0.0, 2.0}, {}}, Expr::affine(0.9, 0.0, Expr::power(Expr::identity(), 2)));
    RegionOptions opt;
    opt.grid_n = 384;
    const RegionMap m = region_map(s, 1.0, opt);
    const PreimageCounter counter(s, m.curve);
    std::mt19937_64 rng(12);
    for (const Component &c : m.components) {
        std::vector<std::size_t> cells;
        for (std::size_t i = 0; i < m.grid.size(); ++i) {
            if (m.grid[i] == c.id) {
                cells.push_back(i);
            }
        }
        for (int s32 = 0; s32 < 32; ++s32) {
            const std::size_t i = cells[rng() % cells.size()];
            const cplx w = m.cell_center(int(i % m.grid_n), int(i / m.grid_n));
            if (m.curve.distance(w) > m.curve.band()) {
                CHECK(counter.count(w) == c.k);
            }
        }
    }
    double sup = 0.0;
    for (const cplx &v : m.curve.value) {
        sup = std::max(sup, std::abs(v));
    }
    CHECK(counter.count(10.0 * sup) == s.degree());
    CHECK(m.component(m.unbounded).k == s.degree());

    // Halving the mesh leaves every k unchanged.
    CurveOptions fine;
    fine.mesh = 5e-4;
    const BoundaryCurve c2 = build_curve(s, 1.0, fine);
    const PreimageCounter counter2(s, c2);
    for (const Component &c : m.components) {
        CHECK(counter2.count(c.representative) == c.k);
    }
    for (const AdjacencyEdge &e : m.edges) {
        CHECK(std::abs(m.component(e.a).k - m.component(e.b).k) == 1);
    }
}

TEST_CASE("region map serialization")
{
    RegionOptions opt;
    opt.grid_n = 64;
    const RegionMap m = region_map(inv_power(2.0, 1), 1.0, opt);
    const json j = m.to_json();
    CHECK(json::parse(j.dump()) == j);
    const std::string csv = m.to_csv();
    CHECK(csv.rfind("x,y,component_id,k", 0) == 0);
    CHECK(fmt17(0.1) == "0.10000000000000001");
}
