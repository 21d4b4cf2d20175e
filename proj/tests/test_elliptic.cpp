#include "toeplitz_hc/elliptic.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace toeplitz_hc;
using namespace toeplitz_hc::elliptic;

namespace {

// K(m) = pi / (2 agm(1, sqrt(1 - m))), independent of the library's Carlson path.
double k_by_agm(double m1)
{
    double a = 1.0, b = std::sqrt(m1);
    for (int i = 0; i < 60 && std::abs(a - b) > 1e-16 * a; ++i) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return kPi / (2.0 * a);
}

// Incomplete F(phi | m) by composite Gauss-Legendre quadrature.
double incomplete_f(double phi, double m)
{
    static const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
    static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                                0.2369268850561891};
    const int panels = 200;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = phi * p / panels, b = phi * (p + 1) / panels;
        for (int i = 0; i < 5; ++i) {
            const double th = 0.5 * (a + b) + 0.5 * (b - a) * x[i];
            s += 0.5 * (b - a) * w[i] / std::sqrt(1.0 - m * std::sin(th) * std::sin(th));
        }
    }
    return s;
}

} // namespace

TEST_CASE("complete integral agrees with the AGM")
{
    for (double m : {0.0, 0.1, 0.5, 0.9, 0.999, 1.0 - 1e-10}) {
        const Modulus mod{m, 1.0 - m};
        CHECK(complete_k(mod) == doctest::Approx(k_by_agm(1.0 - m)).epsilon(1e-13));
    }
}

TEST_CASE("Carlson RF reduces to known forms")
{
    CHECK(std::abs(carlson_rf(4.0, 4.0, 4.0) - 0.5) < 1e-15);
    const cplx a = carlson_rf(cplx(0.3, 0.2), cplx(1.1, -0.4), 2.0);
    const cplx b = carlson_rf(cplx(1.2, 0.8), cplx(4.4, -1.6), 8.0);
    CHECK(std::abs(a - 2.0 * b) < 1e-14);
}

TEST_CASE("sn inverts the incomplete integral")
{
    for (double m : {0.2, 0.7, 0.99}) {
        const Modulus mod{m, 1.0 - m};
        for (double phi : {0.1, 0.6, 1.2, 1.5}) {
            const double u = incomplete_f(phi, m);
            const JacobiReal j = jacobi(u, mod);
            CHECK(j.sn == doctest::Approx(std::sin(phi)).epsilon(1e-12));
            CHECK(j.cn == doctest::Approx(std::cos(phi)).epsilon(1e-12));
            CHECK(j.dn == doctest::Approx(std::sqrt(1.0 - m * std::sin(phi) * std::sin(phi))).epsilon(1e-12));
        }
    }
}

TEST_CASE("quarter period and degenerate moduli")
{
    const Modulus mod{0.4, 0.6};
    const JacobiReal j = jacobi(complete_k(mod), mod);
    CHECK(j.sn == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(j.cn) < 1e-7);
    CHECK(j.dn == doctest::Approx(std::sqrt(0.6)).epsilon(1e-7));
    CHECK(jacobi(0.7, Modulus{0.0, 1.0}).sn == doctest::Approx(std::sin(0.7)));
    CHECK(jacobi(0.7, Modulus{1.0, 0.0}).sn == doctest::Approx(std::tanh(0.7)));
}

TEST_CASE("complex sn obeys the imaginary transformation and periods")
{
    const Modulus mod{0.3, 0.7};
    const Modulus comp{0.7, 0.3};
    for (double y : {0.2, 0.9, 1.4}) {
        const JacobiComplex j = jacobi(cplx(0.0, y), mod);
        const JacobiReal p = jacobi(y, comp);
        CHECK(std::abs(j.sn - cplx(0.0, p.sn / p.cn)) < 1e-13);
        CHECK(std::abs(j.cn - 1.0 / p.cn) < 1e-13);
    }
    const double k = complete_k(mod), kp = complete_k(comp);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-k, k), uy(0.05, kp - 0.05);
    for (int i = 0; i < 50; ++i) {
        const cplx u(ux(rng), uy(rng));
        const JacobiComplex a = jacobi(u, mod);
        CHECK(std::abs(jacobi(u + cplx(0.0, 2.0 * kp), mod).sn - a.sn) < 1e-11 * std::max(1.0, std::abs(a.sn)));
        CHECK(std::abs(jacobi(u + 2.0 * k, mod).sn + a.sn) < 1e-11 * std::max(1.0, std::abs(a.sn)));
        CHECK(std::abs(a.sn * a.sn + a.cn * a.cn - 1.0) < 1e-11 * std::max(1.0, std::norm(a.sn)));
        CHECK(std::abs(a.dn * a.dn + mod.m * a.sn * a.sn - 1.0) < 1e-11 * std::max(1.0, std::norm(a.sn)));
        // Principal inverse recovers points of the period rectangle.
        CHECK(std::abs(inverse_sn(a.sn, mod) - u) < 1e-10);
    }
}

TEST_CASE("modulus from period ratio")
{
    for (double ratio : {0.01, 0.2, 0.5, 1.0, 3.0, 40.0}) {
        const Modulus mod = modulus_from_period_ratio(ratio);
        CHECK(mod.m + mod.m1 == doctest::Approx(1.0).epsilon(1e-14));
        const double k = k_by_agm(mod.m1), kp = k_by_agm(mod.m);
        CHECK(kp / k == doctest::Approx(ratio).epsilon(1e-12));
    }
}
