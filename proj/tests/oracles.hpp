#pragma once

// Reference computations shared by the unit and acceptance tests. They are
// written against plain polynomial arithmetic so they stay independent of the
// library's argument-principle and FFT paths.

#include "toeplitz_hc/symbol.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>

namespace oracle {

using toeplitz_hc::cplx;
using toeplitz_hc::CVec;

inline CVec poly_mul(const CVec &a, const CVec &b)
{
    if (a.empty() || b.empty()) {
        return {};
    }
    CVec out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

inline void poly_add_into(CVec &acc, const CVec &b)
{
    if (acc.size() < b.size()) {
        acc.resize(b.size(), 0.0);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        acc[i] += b[i];
    }
}

inline CVec poly_pow(const CVec &a, int n)
{
    CVec out{1.0};
    for (int i = 0; i < n; ++i) {
        out = poly_mul(out, a);
    }
    return out;
}

inline cplx poly_eval(const CVec &c, cplx z)
{
    cplx acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * z + *it;
    }
    return acc;
}

inline CVec monomial(int k, cplx c = 1.0)
{
    CVec out(static_cast<std::size_t>(k) + 1, 0.0);
    out.back() = c;
    return out;
}

inline CVec roots(CVec c)
{
    while (c.size() > 1 && std::abs(c.back()) < 1e-300) {
        c.pop_back();
    }
    const int n = static_cast<int>(c.size()) - 1;
    if (n < 1) {
        return {};
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        m(i, i - 1) = 1.0;
    }
    for (int i = 0; i < n; ++i) {
        m(i, n - 1) = -c[static_cast<std::size_t>(i)] / c.back();
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    CVec out(es.eigenvalues().data(), es.eigenvalues().data() + n);
    return out;
}

/// Numerator of z^{N1} Q(z) (Phi(z) - w) for Phi = R(1/z) + tail, where the
/// tail is the polynomial `tail` (lowest degree first).
inline CVec cleared_numerator(const toeplitz_hc::RationalPart &rp, const CVec &tail, cplx w)
{
    const int n1 = rp.n1();
    CVec q{1.0};
    for (const auto &p : rp.poles) {
        q = poly_mul(q, poly_pow({1.0, -p.eta}, p.order()));
    }
    CVec num;
    for (int k = 0; k < static_cast<int>(rp.poly.size()); ++k) {
        poly_add_into(num, poly_mul(monomial(n1 - k, rp.poly[static_cast<std::size_t>(k)]), q));
    }
    for (std::size_t l = 0; l < rp.poles.size(); ++l) {
        const auto &p = rp.poles[l];
        CVec rest{1.0};
        for (std::size_t m = 0; m < rp.poles.size(); ++m) {
            if (m != l) {
                rest = poly_mul(rest, poly_pow({1.0, -rp.poles[m].eta}, rp.poles[m].order()));
            }
        }
        for (int j = 1; j <= p.order(); ++j) {
            // (1/z - eta)^{-j} = z^j (1 - eta z)^{-j}.
            CVec term = poly_mul(monomial(n1 + j, p.alphas[static_cast<std::size_t>(j - 1)]),
                                 poly_pow({1.0, -p.eta}, p.order() - j));
            poly_add_into(num, poly_mul(term, rest));
        }
    }
    CVec t = tail;
    if (t.empty()) {
        t = {0.0};
    }
    t[0] -= w;
    poly_add_into(num, poly_mul(poly_mul(monomial(n1), q), t));
    return num;
}

/// Number of solutions of Phi(z) = w in |z| < rho from the companion matrix.
inline int root_count(const toeplitz_hc::RationalPart &rp, const CVec &tail, cplx w, double rho)
{
    int c = 0;
    for (const cplx &r : roots(cleared_numerator(rp, tail, w))) {
        if (std::abs(r) < rho) {
            ++c;
        }
    }
    return c;
}

/// Tail expression for a polynomial, lowest degree first.
inline toeplitz_hc::Expr poly_expr(const CVec &c)
{
    std::vector<toeplitz_hc::Expr> terms;
    for (std::size_t k = 0; k < c.size(); ++k) {
        terms.push_back(toeplitz_hc::Expr::affine(c[k], 0.0, toeplitz_hc::Expr::power(toeplitz_hc::Expr::identity(), static_cast<int>(k))));
    }
    return terms.empty() ? toeplitz_hc::Expr::constant(0.0) : toeplitz_hc::Expr::add(terms);
}

struct RandomRational {
    toeplitz_hc::RationalPart rational;
    CVec tail;
    toeplitz_hc::Symbol symbol;
};

/// Random all-rational symbol with total degree N between 1 and max_n and a
/// polynomial tail of degree at most 2.
inline RandomRational random_rational(std::mt19937_64 &rng, int max_n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * toeplitz_hc::kPi);
    RandomRational out;
    const int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_n));
    const int n1 = static_cast<int>(rng() % static_cast<unsigned>(n + 1));
    int left = n - n1;
    if (n1 > 0) {
        for (int k = 0; k <= n1; ++k) {
            out.rational.poly.emplace_back(u(rng), u(rng));
        }
        out.rational.poly.back() = std::polar(0.5 + std::abs(u(rng)), ang(rng));
    }
    while (left > 0) {
        const int order = 1 + static_cast<int>(rng() % static_cast<unsigned>(std::min(left, 2)));
        toeplitz_hc::PoleTerm p;
        p.eta = std::polar(1.2 + 1.5 * std::abs(u(rng)), ang(rng));
        for (int j = 0; j < order; ++j) {
            p.alphas.emplace_back(u(rng), u(rng));
        }
        p.alphas.back() = std::polar(0.5 + std::abs(u(rng)), ang(rng));
        out.rational.poles.push_back(p);
        left -= order;
    }
    const int td = static_cast<int>(rng() % 3);
    for (int k = 0; k <= td; ++k) {
        out.tail.emplace_back(0.5 * u(rng), 0.5 * u(rng));
    }
    out.symbol = toeplitz_hc::Symbol(out.rational, poly_expr(out.tail));
    return out;
}

/// Distance to the boundary of an annular sector, computed from its four edges.
inline double sector_edge_distance(cplx w, double r, double R, double a, double b)
{
    const double rad = std::abs(w);
    const double th = std::arg(w);
    auto arc = [&](double radius) {
        if (th >= a && th <= b) {
            return std::abs(rad - radius);
        }
        return std::min(std::abs(w - std::polar(radius, a)), std::abs(w - std::polar(radius, b)));
    };
    auto ray = [&](double angle) {
        const cplx d = std::polar(1.0, angle);
        const double s = std::clamp((std::conj(d) * w).real(), r, R);
        return std::abs(w - s * d);
    };
    return std::min({arc(r), arc(R), ray(a), ray(b)});
}

} // namespace oracle
