#include "toeplitz_hc/conformal.hpp"
#include "toeplitz_hc/fft.hpp"

#include "toeplitz_hc/elliptic.hpp"
#include "toeplitz_hc/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

namespace toeplitz_hc::conformal {

MapExpr rectangle_to_disk(double width, double height)
{
    THC_FAIL_IF(!(width > 0.0) || !(height > 0.0), ParamInvalid, "rectangle sides must be positive");
    const double aspect = width / height;
    THC_FAIL_IF(aspect < 1e-3 || aspect > 1e3, AspectOverflow, "rectangle aspect ratio outside [1e-3, 1e3]");

    // Work with the long side horizontal; rot maps the given rectangle onto it.
    const bool wide = width >= height;
    const cplx rot = wide ? cplx(1.0) : cplx(0.0, -1.0);
    const double w = wide ? width : height;
    const double h = wide ? height : width;

    // sn maps [-K, K] x [0, K'] onto the upper half plane, so K'/K = 2h/w.
    const elliptic::Modulus mod = elliptic::modulus_from_period_ratio(2.0 * h / w);
    const double k = elliptic::complete_k(mod);
    const double kp = elliptic::complete_k({mod.m1, mod.m});
    const double s = 2.0 * k / w;
    const cplx shift(0.0, 0.5 * kp);
    const cplx s0 = elliptic::jacobi(shift, mod).sn;

    Expr fwd = Expr::mobius(1.0, -s0, 1.0, -std::conj(s0),
                            Expr::sn(mod, Expr::affine(s * rot, shift)));
    Expr inv = Expr::affine(1.0 / (s * rot), -shift / (s * rot),
                            Expr::asn(mod, Expr::mobius(std::conj(s0), -s0, 1.0, -1.0)));
    return {std::move(fwd), std::move(inv)};
}

MapExpr blaschke(CVec zeros, cplx unimodular)
{
    return {Expr::blaschke(std::move(zeros), unimodular), std::nullopt};
}

void SectorAnnulusParams::validate() const
{
    THC_FAIL_IF(!(r > 0.0 && R > r), ParamInvalid, "sector radii need 0 < r < R");
    THC_FAIL_IF(!(R < (2.0 * std::sqrt(2.0) - 1.0) * r), ParamInvalid,
                "sector radii need R < (2 sqrt 2 - 1) r");
    THC_FAIL_IF(!(alpha > 0.0 && alpha < kPi / 8), ParamInvalid, "alpha must lie in (0, pi/8)");
    THC_FAIL_IF(!(rho > 0.0 && rho < 1.0), ParamInvalid, "rho must lie in (0, 1)");
    THC_FAIL_IF(!(eps >= 0.0), ParamInvalid, "eps must be nonnegative");
    THC_FAIL_IF(!(beta > 0.0), ParamInvalid, "beta must be positive");
}

cplx SectorAnnulusParams::gamma() const
{
    const cplx target = beta * cplx(1.0, 1.0);
    cplx g = std::sqrt(target);
    for (int it = 0; it < 100; ++it) {
        const cplx f = (1.0 + eps * g) * g * g - target;
        const cplx df = 2.0 * g + 3.0 * eps * g * g;
        const cplx step = f / df;
        g -= step;
        if (std::abs(step) < 1e-16 * std::abs(g)) {
            break;
        }
    }
    const double a = std::arg(g);
    THC_FAIL_IF(!(std::abs(g) > r && std::abs(g) < R && a > theta_min() && a < theta_max()), ParamInvalid,
                "beta puts the zero of g outside the sector");
    return g;
}

json SectorAnnulusParams::to_json() const
{
    return {{"r", r}, {"R", R}, {"alpha", alpha}, {"eps", eps}, {"beta", beta}, {"rho", rho}};
}

SectorAnnulusParams SectorAnnulusParams::from_json(const json &j, SectorAnnulusParams d)
{
    d.r = j.value("r", d.r);
    d.R = j.value("R", d.R);
    d.alpha = j.value("alpha", d.alpha);
    d.eps = j.value("eps", d.eps);
    d.beta = j.value("beta", d.beta);
    d.rho = j.value("rho", d.rho);
    return d;
}

namespace {

double arc_distance(cplx w, double radius, double a, double b)
{
    const double t = std::arg(w);
    if (t >= a && t <= b) {
        return std::abs(std::abs(w) - radius);
    }
    return std::min(std::abs(w - std::polar(radius, a)), std::abs(w - std::polar(radius, b)));
}

double ray_distance(cplx w, double r, double R, double a)
{
    const cplx dir = std::polar(1.0, a);
    const double t = std::clamp((w * std::conj(dir)).real(), r, R);
    return std::abs(w - t * dir);
}

} // namespace

double sector_boundary_distance(cplx w, double r, double R, double a, double b)
{
    return std::min({arc_distance(w, r, a, b), arc_distance(w, R, a, b), ray_distance(w, r, R, a),
                     ray_distance(w, r, R, b)});
}

MapExpr sector_annulus_map(const SectorAnnulusParams &p)
{
    p.validate();
    const double lr = std::log(p.r), lR = std::log(p.R);
    const double a = p.theta_min(), b = p.theta_max();
    const cplx center(0.5 * (lr + lR), 0.5 * (a + b));
    const MapExpr rect = rectangle_to_disk(lR - lr, b - a);

    // Disk automorphism placing gamma at Psi(0).
    const cplx g = p.gamma();
    const cplx d0 = rect.forward(std::log(g) - center);
    Expr mob = Expr::mobius(1.0, d0, std::conj(d0), 1.0);
    Expr fwd = Expr::exp(Expr::affine(1.0, center, Expr::compose(*rect.inverse, mob)));

    Expr mob_inv = Expr::mobius(1.0, -d0, -std::conj(d0), 1.0);
    Expr inv = Expr::compose(mob_inv, Expr::compose(rect.forward, Expr::affine(1.0, -center, Expr::log(Expr::identity()))));
    return {std::move(fwd), std::move(inv)};
}

UnivalenceEvidence univalence_evidence(const Expr &f, std::uint64_t seed)
{
    UnivalenceEvidence ev;
    constexpr int kBoundary = 2048;
    CVec img(kBoundary);
    for (int i = 0; i < kBoundary; ++i) {
        img[static_cast<std::size_t>(i)] = f(std::polar(1.0, kTwoPi * i / kBoundary));
    }
    // Sort by real part; near pairs appear within a sliding window of the
    // sorted order once the window exceeds the current minimum.
    std::vector<cplx> sorted = img;
    std::sort(sorted.begin(), sorted.end(), [](cplx x, cplx y) { return x.real() < y.real(); });
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        for (std::size_t j = i + 1; j < sorted.size() && sorted[j].real() - sorted[i].real() < best; ++j) {
            best = std::min(best, std::abs(sorted[j] - sorted[i]));
        }
    }
    ev.min_boundary_spacing = best;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 512; ++i) {
        const double rad = std::sqrt(unit(rng)) * (1.0 - 1e-6);
        const cplx z = std::polar(rad, kTwoPi * unit(rng));
        dmin = std::min(dmin, std::abs(f.jet(z).deriv));
    }
    ev.min_derivative = dmin;
    return ev;
}

Expr rational_expr(const RationalPart &rp)
{
    std::vector<Expr> terms;
    for (std::size_t k = 0; k < rp.poly.size(); ++k) {
        if (rp.poly[k] == cplx(0.0)) {
            continue;
        }
        terms.push_back(k == 0 ? Expr::constant(rp.poly[0])
                               : Expr::affine(rp.poly[k], 0.0, Expr::power(Expr::identity(), -int(k))));
    }
    for (const PoleTerm &p : rp.poles) {
        const Expr u = Expr::mobius(1.0, 0.0, -p.eta, 1.0);
        for (int j = 1; j <= p.order(); ++j) {
            const cplx a = p.alphas[static_cast<std::size_t>(j - 1)];
            if (a != cplx(0.0)) {
                terms.push_back(Expr::affine(a, 0.0, j == 1 ? u : Expr::power(u, j)));
            }
        }
    }
    if (terms.empty()) {
        return Expr::constant(0.0);
    }
    return terms.size() == 1 ? terms[0] : Expr::add(std::move(terms));
}

CVec polynomial_roots(const CVec &coeffs)
{
    std::size_t deg = coeffs.size();
    while (deg > 0 && coeffs[deg - 1] == cplx(0.0)) {
        --deg;
    }
    THC_FAIL_IF(deg == 0, ParamInvalid, "zero polynomial has no finite root set");
    const std::size_t n = deg - 1;
    if (n == 0) {
        return {};
    }
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const cplx lead = coeffs[n];
    for (std::size_t i = 0; i < n; ++i) {
        c(0, static_cast<Eigen::Index>(i)) = -coeffs[n - 1 - i] / lead;
        if (i + 1 < n) {
            c(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = 1.0;
        }
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(c, false);
    CVec out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
    }
    return out;
}

std::vector<PoleGuess> cluster_roots(const CVec &roots, double tol)
{
    std::vector<PoleGuess> out;
    std::vector<int> count;
    std::vector<cplx> sum;
    for (const cplx &z : roots) {
        bool placed = false;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (std::abs(z - out[i].location) < tol) {
                sum[i] += z;
                ++count[i];
                out[i].location = sum[i] / double(count[i]);
                placed = true;
                break;
            }
        }
        if (!placed) {
            out.push_back({z, 1});
            sum.push_back(z);
            count.push_back(1);
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].order = count[i];
    }
    return out;
}

Symbol peel_principal_parts(const Expr &phi, const std::vector<PoleGuess> &poles, double analytic_radius)
{
    RationalPart rp;
    for (std::size_t i = 0; i < poles.size(); ++i) {
        const PoleGuess &pg = poles[i];
        THC_FAIL_IF(pg.order < 1, PeelFailure, "pole order must be positive");
        THC_FAIL_IF(!(std::abs(pg.location) < 1.0), PeelFailure, "pole outside the disk");
        double gap = 1.0 - std::abs(pg.location);
        for (std::size_t j = 0; j < poles.size(); ++j) {
            if (j != i) {
                gap = std::min(gap, std::abs(pg.location - poles[j].location));
            }
        }
        const double delta = 0.5 * gap;
        const int extra = 3;
        const CVec lc = circle_laurent([&](cplx z) { return phi(pg.location + z); }, delta, pg.order + extra, 0,
                                       1024);
        // lc[i] holds index i - (order + extra).
        double lead = std::abs(lc[static_cast<std::size_t>(extra)]);
        double spill = 0.0;
        for (int e = 0; e < extra; ++e) {
            spill = std::max(spill, std::abs(lc[static_cast<std::size_t>(e)]) *
                                        std::pow(delta, -(pg.order + extra - e)));
        }
        THC_FAIL_IF(!(lead > 0.0) || spill > 1e-8 * lead * std::pow(delta, -pg.order), PeelFailure,
                    "pole order does not match the Laurent expansion");
        // a[i] multiplies (z - p)^{-i}.
        CVec a(static_cast<std::size_t>(pg.order) + 1, 0.0);
        for (int k = 1; k <= pg.order; ++k) {
            a[static_cast<std::size_t>(k)] = lc[static_cast<std::size_t>(pg.order + extra - k)];
        }
        if (std::abs(pg.location) < 1e-14) {
            rp.poly.assign(static_cast<std::size_t>(pg.order) + 1, 0.0);
            for (int k = 1; k <= pg.order; ++k) {
                rp.poly[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)];
            }
            continue;
        }
        // (1/z - eta)^{-j} = (-p)^j sum_i C(j, i) p^i (z - p)^{-i} with eta = 1/p;
        // solve the triangular system from the top order down.
        const cplx p = pg.location;
        const int k = pg.order;
        CVec alpha(static_cast<std::size_t>(k), 0.0);
        for (int i = k; i >= 1; --i) {
            cplx rhs = a[static_cast<std::size_t>(i)];
            for (int j = i + 1; j <= k; ++j) {
                double binom = 1.0;
                for (int t = 0; t < i; ++t) {
                    binom = binom * double(j - t) / double(t + 1);
                }
                rhs -= alpha[static_cast<std::size_t>(j - 1)] * ipow(-p, j) * binom * ipow(p, i);
            }
            alpha[static_cast<std::size_t>(i - 1)] = rhs / (ipow(-p, i) * ipow(p, i));
        }
        rp.poles.push_back({1.0 / p, std::move(alpha)});
    }
    rp.validate();
    Expr tail = Expr::add({phi, Expr::affine(-1.0, 0.0, rational_expr(rp))});

    // The tail must be free of negative Fourier modes just inside the circle.
    constexpr double kR = 1.0 - 1e-3;
    // Aliasing from the singularities near analytic_radius decays like
    // (kR / analytic_radius)^size; size the transform so it drops below 1e-17.
    std::size_t size = 4096;
    if (std::isfinite(analytic_radius)) {
        const double need = 40.0 / std::log(analytic_radius / kR);
        size = std::clamp(fft::next_pow2(static_cast<std::size_t>(need)), std::size_t{4096}, std::size_t{1} << 18);
    }
    const CVec tc = circle_laurent([&](cplx z) { return tail(z); }, kR, 16, 16, size);
    double scale = 0.0;
    for (const cplx &c : tc) {
        scale = std::max(scale, std::abs(c));
    }
    double neg = 0.0;
    for (int i = 1; i <= 16; ++i) {
        neg = std::max(neg, std::abs(tc[static_cast<std::size_t>(16 - i)]) * std::pow(kR, -i));
    }
    THC_FAIL_IF(neg > 1e-8 * std::max(1.0, scale), PeelFailure,
                "residual tail still has negative Fourier modes inside the disk");
    return Symbol(std::move(rp), std::move(tail), analytic_radius);
}

} // namespace toeplitz_hc::conformal
