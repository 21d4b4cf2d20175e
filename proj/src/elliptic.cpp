#include "toeplitz_hc/elliptic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace toeplitz_hc::elliptic {

namespace {

constexpr double kAgmTol = 1e-14;
constexpr int kAgmMaxIter = 64;

struct Theta {
    double t2, t3, t4;
};

// Jacobi theta constants at nome q in [0, e^-pi].
Theta theta_constants(double q)
{
    double t2 = 0.0, t3 = 1.0, t4 = 1.0;
    if (q <= 0.0) {
        return {0.0, 1.0, 1.0};
    }
    const double q4 = std::pow(q, 0.25);
    for (int n = 0; n < 40; ++n) {
        const double term = std::pow(q, double(n) * (n + 1));
        t2 += term;
        if (term < 1e-300) {
            break;
        }
    }
    t2 *= 2.0 * q4;
    for (int n = 1; n < 40; ++n) {
        const double term = std::pow(q, double(n) * n);
        t3 += 2.0 * term;
        t4 += (n % 2 == 0 ? 2.0 : -2.0) * term;
        if (term < 1e-300) {
            break;
        }
    }
    return {t2, t3, t4};
}

} // namespace

JacobiReal jacobi(double u, Modulus mod)
{
    if (mod.m <= 0.0) {
        return {std::sin(u), std::cos(u), 1.0};
    }
    if (mod.m1 <= 0.0) {
        const double s = 1.0 / std::cosh(u);
        return {std::tanh(u), s, s};
    }
    std::array<double, kAgmMaxIter + 1> a{}, c{};
    a[0] = 1.0;
    double b = std::sqrt(mod.m1);
    c[0] = std::sqrt(mod.m);
    int n = 0;
    while (std::abs(c[n]) > kAgmTol && n < kAgmMaxIter) {
        const double an = a[n];
        a[n + 1] = 0.5 * (an + b);
        c[n + 1] = 0.5 * (an - b);
        b = std::sqrt(an * b);
        ++n;
    }
    double phi = std::ldexp(a[n] * u, n);
    for (int j = n; j > 0; --j) {
        phi = 0.5 * (phi + std::asin(c[j] * std::sin(phi) / a[j]));
    }
    const double sn = std::sin(phi);
    const double cn = std::cos(phi);
    const double dn = std::sqrt(mod.m1 + mod.m * cn * cn);
    return {sn, cn, dn};
}

JacobiComplex jacobi(cplx u, Modulus mod)
{
    const JacobiReal r = jacobi(u.real(), mod);
    if (u.imag() == 0.0) {
        return {cplx(r.sn), cplx(r.cn), cplx(r.dn)};
    }
    const JacobiReal p = jacobi(u.imag(), Modulus{mod.m1, mod.m});
    const double den = p.cn * p.cn + mod.m * r.sn * r.sn * p.sn * p.sn;
    const cplx sn(r.sn * p.dn, r.cn * r.dn * p.sn * p.cn);
    const cplx cn(r.cn * p.cn, -r.sn * r.dn * p.sn * p.dn);
    const cplx dn(r.dn * p.cn * p.dn, -mod.m * r.sn * r.cn * p.sn);
    return {sn / den, cn / den, dn / den};
}

cplx carlson_rf(cplx x, cplx y, cplx z)
{
    constexpr double kTol = 1e-3;
    constexpr double c1 = 1.0 / 24.0, c2 = 0.1, c3 = 3.0 / 44.0, c4 = 1.0 / 14.0;
    for (int iter = 0; iter < 200; ++iter) {
        const cplx sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
        const cplx lam = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        const cplx ave = (x + y + z) / 3.0;
        const cplx dx = (ave - x) / ave, dy = (ave - y) / ave, dz = (ave - z) / ave;
        if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) < kTol) {
            const cplx e2 = dx * dy - dz * dz;
            const cplx e3 = dx * dy * dz;
            return (1.0 + (c1 * e2 - c2 - c3 * e3) * e2 + c4 * e3) / std::sqrt(ave);
        }
    }
    return {std::nan(""), std::nan("")};
}

double complete_k(Modulus mod)
{
    return carlson_rf(0.0, cplx(mod.m1), 1.0).real();
}

cplx inverse_sn(cplx s, Modulus mod)
{
    if (std::abs(s) < 1e-300) {
        return s;
    }
    // Points on or numerically below the real axis are read as limits from
    // the upper half plane, which selects the correct side of the branch cuts.
    if (s.imag() < 1e-300) {
        s.imag(1e-300);
    }
    const cplx s2 = s * s;
    return s * carlson_rf(1.0 - s2, 1.0 - mod.m * s2, 1.0);
}

Modulus modulus_from_period_ratio(double ratio)
{
    if (ratio >= 1.0) {
        const Theta th = theta_constants(std::exp(-kPi * ratio));
        const double a = th.t2 / th.t3, b = th.t4 / th.t3;
        return {a * a * a * a, b * b * b * b};
    }
    const Theta th = theta_constants(std::exp(-kPi / ratio));
    const double a = th.t2 / th.t3, b = th.t4 / th.t3;
    return {b * b * b * b, a * a * a * a};
}

} // namespace toeplitz_hc::elliptic
