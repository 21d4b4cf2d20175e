#include "toeplitz_hc/conditions.hpp"
#include "toeplitz_hc/error.hpp"
#include "toeplitz_hc/examples.hpp"
#include "toeplitz_hc/operator.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace toeplitz_hc;
using namespace toeplitz_hc::op;

namespace {

Symbol rational_only(CVec poly, std::vector<PoleTerm> poles = {}, Expr tail = Expr::constant(0.0))
{
    return Symbol(RationalPart{std::move(poly), std::move(poles)}, std::move(tail));
}

double norm2(const CVec &v)
{
    double s = 0.0;
    for (const cplx &c : v) {
        s += std::norm(c);
    }
    return std::sqrt(s);
}

CVec random_vector(std::mt19937_64 &rng, std::size_t n)
{
    std::normal_distribution<double> g;
    CVec v(n);
    for (cplx &c : v) {
        c = cplx(g(rng), g(rng));
    }
    return v;
}

template <class F>
ErrorCode code_of(F &&f)
{
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::SchemaError;
}

// 2/z + (1/z - 1.2)^{-1} + 0.2 (1/z - 1.2)^{-2} + 0.1 z: N1 = 1, N2 = 2, with
// a hole around 0.3.
Symbol mixed_symbol()
{
    return rational_only({0.0, 2.0}, {PoleTerm{1.2, {1.0, 0.2}}}, Expr::affine(0.1, 0.0));
}

// Same shape with R(w) + 4.8 = 2 w^3 / (w - 1.2)^2, so lambda = -4.8 has its
// cleared zeros far outside the disk and eigenvectors decay fast.
Symbol fast_symbol()
{
    return rational_only({0.0, 2.0}, {PoleTerm{1.2, {8.64, 3.456}}}, Expr::affine(0.1, 0.0));
}

} // namespace

TEST_CASE("sections of the shift symbols")
{
    const ToeplitzSection s = ToeplitzSection::from_symbol(rational_only({0.0, 2.0}), 3);
    const Eigen::MatrixXcd m = s.dense();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(std::abs(m(i, j) - (j == i + 1 ? cplx(2.0) : cplx(0.0))) < 1e-14);
        }
    }
    const ToeplitzSection t = ToeplitzSection::from_symbol(examples::example_symbol("tridiagonal").phi, 3);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const cplx want = j == i + 1 ? cplx(2.0) : (i == j + 1 ? cplx(1.0) : cplx(0.0));
            CHECK(std::abs(t.entry(i, j) - want) < 1e-14);
        }
    }
}

TEST_CASE("FFT apply matches dense apply on random symbols")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 8; ++trial) {
        const auto rr = oracle::random_rational(rng, 6);
        for (int n : {1, 5, 64, 300}) {
            const ToeplitzSection s = ToeplitzSection::from_symbol(rr.symbol, n);
            const CVec x = random_vector(rng, static_cast<std::size_t>(n));
            const CVec a = s.apply_dense(x), b = s.apply_fft(x);
            CVec d(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                d[i] = a[i] - b[i];
            }
            CHECK(norm2(d) <= 1e-12 * std::max(norm2(a), 1e-300));
        }
    }
}

TEST_CASE("entries equal the Fourier coefficients and the conjugate section is the adjoint")
{
    std::mt19937_64 rng(8);
    const auto rr = oracle::random_rational(rng, 5);
    const int n = 17;
    const ToeplitzSection s = ToeplitzSection::from_symbol(rr.symbol, n);
    const FourierCoefficients fc = fourier_coefficients(rr.symbol, n - 1, n - 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            CHECK(std::abs(s.entry(i, j) - fc.at(i - j)) <= 1e-15 * (1.0 + std::abs(fc.at(i - j))));
        }
    }
    const Eigen::MatrixXcd adj = s.conjugate().dense();
    CHECK(adj == s.dense().adjoint());
}

TEST_CASE("backward shift drops leading coefficients")
{
    const CVec f{1.0, 2.0, 3.0};
    CHECK(backward_shift_apply(f, 1) == CVec{2.0, 3.0});
    CHECK(backward_shift_apply(f, 3).empty());
    CHECK(backward_shift_apply(f, 0) == f);
    CHECK(code_of([&] { (void)backward_shift_apply(f, -1); }) == ErrorCode::ParamInvalid);
}

TEST_CASE("(S* - eta)^k g equals the shifted product with (1 - eta z)^k")
{
    std::mt19937_64 rng(9);
    for (int k = 1; k <= 4; ++k) {
        const cplx eta(0.7, -0.4);
        const CVec g = random_vector(rng, 40);
        // Repeated application of S* - eta.
        CVec lhs = g;
        for (int r = 0; r < k; ++r) {
            CVec sh = backward_shift_apply(lhs, 1);
            lhs.resize(sh.size());
            for (std::size_t i = 0; i < sh.size(); ++i) {
                lhs[i] = sh[i] - eta * lhs[i];
            }
        }
        // (1 - eta z)^k g with its partial sum of degree < k removed, over z^k.
        const CVec prod = oracle::poly_mul(oracle::poly_pow({1.0, -eta}, k), g);
        const CVec rhs(prod.begin() + k, prod.begin() + k + static_cast<long>(lhs.size()));
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            CHECK(std::abs(lhs[i] - rhs[i]) < 1e-12 * (1.0 + std::abs(rhs[i])));
        }
    }
}

TEST_CASE("section of R(1/z) equals the backward-shift operator sum")
{
    // sum_k c_k (S*)^k + sum alpha_{l,j} ((S* - eta_l)^j)^{-1}, finite sections
    // of upper-triangular operators being exact.
    const int n = 24;
    const RationalPart rp{{0.5, 2.0, cplx(0.0, 0.3)}, {PoleTerm{cplx(1.5, 0.5), {0.4, cplx(0.1, 0.2)}}, PoleTerm{-2.0, {0.7}}}};
    const Symbol sym(rp, Expr::constant(0.0));
    const ToeplitzSection s = ToeplitzSection::from_symbol(sym, n);
    Eigen::MatrixXcd sstar = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        sstar(i, i + 1) = 1.0;
    }
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(n, n), pw = id;
    for (const cplx &c : rp.poly) {
        op += c * pw;
        pw = pw * sstar;
    }
    for (const PoleTerm &p : rp.poles) {
        Eigen::MatrixXcd base = id;
        for (int j = 1; j <= p.order(); ++j) {
            base = base * (sstar - p.eta * id);
            // Banded upper-triangular solve for every column.
            const Eigen::MatrixXcd inv = base.triangularView<Eigen::Upper>().solve(id);
            op += p.alphas[static_cast<std::size_t>(j - 1)] * inv;
        }
    }
    CHECK((op - s.dense()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Taylor coefficients of analytic tails")
{
    const CVec e = taylor_coefficients(Expr::exp(Expr::identity()), 12);
    double fact = 1.0;
    for (int k = 0; k < 12; ++k) {
        if (k > 0) {
            fact *= k;
        }
        CHECK(std::abs(e[static_cast<std::size_t>(k)] - 1.0 / fact) < 1e-14);
    }
    const CVec c = taylor_coefficients(Expr::constant(cplx(2.0, 1.0)), 4);
    CHECK(c == CVec{cplx(2.0, 1.0), 0.0, 0.0, 0.0});
}

TEST_CASE("eigenvectors of twice the backward shift")
{
    const Symbol s = rational_only({0.0, 2.0});
    const auto specs = monomial_specs(s, 0.0);
    REQUIRE(specs.size() == 1);
    const EigenvectorResult r0 = eigenvector(s, specs[0], 16);
    CHECK(std::abs(r0.coeffs[0] - 0.5) < 1e-15);
    for (int k = 1; k < 16; ++k) {
        CHECK(std::abs(r0.coeffs[static_cast<std::size_t>(k)]) < 1e-15);
    }
    const EigenvectorResult r1 = eigenvector(s, monomial_specs(s, 1.0)[0], 64);
    for (int k = 0; k < 64; ++k) {
        CHECK(std::abs(r1.coeffs[static_cast<std::size_t>(k)] - std::ldexp(1.0, -(k + 1))) < 1e-15);
    }
    CHECK(r1.residual < 1e-15);
}

TEST_CASE("eigenvector coefficients agree with pointwise evaluation of the closed form")
{
    const Symbol sym = mixed_symbol();
    const RationalPart &rp = sym.rational();
    const CVec q = rp.q_polynomial();
    for (const cplx lam : {cplx(0.2, 0.0), cplx(0.3, 0.0), cplx(0.3, 0.1)}) {
        const auto specs = monomial_specs(sym, lam);
        REQUIRE(specs.size() == 3);
        for (const EigenvectorSpec &spec : specs) {
            const EigenvectorResult r = eigenvector(sym, spec, 256);
            CHECK(r.cancellation_gap < 1e-12);
            for (const cplx z : {cplx(0.3, 0.2), cplx(-0.5, 0.1), cplx(0.0, -0.6)}) {
                cplx series = 0.0, pw = 1.0;
                for (const cplx &c : r.coeffs) {
                    series += c * pw;
                    pw *= z;
                }
                const cplx num = (spec.p.empty() ? cplx(0.0) : oracle::poly_eval(spec.p, z)) * z +
                                 oracle::poly_eval(q, z) * (spec.q.empty() ? cplx(0.0) : oracle::poly_eval(spec.q, z));
                const cplx den = z * oracle::poly_eval(q, z) * (sym.eval(z) - lam);
                CHECK(std::abs(series - num / den) < 1e-11 * (1.0 + std::abs(num / den)));
            }
        }
    }
}

TEST_CASE("eigenvector rejects bad inputs")
{
    const Symbol s = rational_only({0.0, 2.0});
    EigenvectorSpec bad;
    bad.lambda = 0.0;
    bad.q = {1.0, 1.0};
    CHECK(code_of([&] { (void)eigenvector(s, bad, 8); }) == ErrorCode::ParamInvalid);
    bad.q = {1.0};
    bad.p = {1.0};
    CHECK(code_of([&] { (void)eigenvector(s, bad, 8); }) == ErrorCode::ParamInvalid);
    CHECK(code_of([&] { (void)eigenvector(s, monomial_specs(s, 3.0)[0], 8); }) == ErrorCode::LambdaInRange);
    CHECK(code_of([&] { (void)eigenvector(s, monomial_specs(s, 2.0)[0], 8); }) == ErrorCode::LambdaInRange);
}

TEST_CASE("eigenvector is linear in (p, q)")
{
    const Symbol sym = fast_symbol();
    const cplx lam = -4.8;
    EigenvectorSpec a, b, ab;
    a.lambda = b.lambda = ab.lambda = lam;
    a.p = {cplx(1.0, 0.5), -0.25};
    a.q = {0.3};
    b.p = {0.5, cplx(0.0, 2.0)};
    b.q = {cplx(-1.0, 0.1)};
    ab.p = {a.p[0] + b.p[0], a.p[1] + b.p[1]};
    ab.q = {a.q[0] + b.q[0]};
    const EigenvectorResult fa = eigenvector(sym, a, 128), fb = eigenvector(sym, b, 128), fab = eigenvector(sym, ab, 128);
    for (std::size_t k = 0; k < fa.coeffs.size(); ++k) {
        const cplx sum = fa.coeffs[k] + fb.coeffs[k];
        CHECK(std::abs(fab.coeffs[k] - sum) <= 1e-13 * (1.0 + std::abs(sum)));
    }
}

TEST_CASE("eigenvector residuals decay under n doubling")
{
    const Symbol sym = fast_symbol();
    for (const EigenvectorSpec &spec : monomial_specs(sym, cplx(-4.8, 0.0))) {
        double prev = -1.0;
        for (int n = 8; n <= 256; n *= 2) {
            const double r = eigenvector(sym, spec, n).residual;
            if (prev >= 0.0 && prev > 1e-10) {
                CHECK(r <= 0.5 * prev);
            }
            prev = r;
        }
        CHECK(prev < 1e-10);
    }
}

TEST_CASE("span solve reproduces every monomial below N")
{
    std::mt19937_64 rng(10);
    std::vector<Symbol> syms{mixed_symbol(), rational_only({0.0, 0.0, 0.0, 8.0}),
                             examples::example_symbol("tridiagonal").phi};
    for (int i = 0; i < 6; ++i) {
        syms.push_back(oracle::random_rational(rng, 6).symbol);
    }
    for (const Symbol &s : syms) {
        const SpanSolve sp = span_solve(s);
        CHECK(sp.n == s.degree());
        CHECK(sp.max_residual <= 1e-10);
        CHECK(std::isfinite(sp.condition));
        const CVec q = s.rational().q_polynomial();
        for (int j = 0; j < sp.n; ++j) {
            // Rebuild z^{N1} p + Q q independently and compare with z^j.
            CVec got(static_cast<std::size_t>(sp.n) + 1, 0.0);
            for (std::size_t i = 0; i < sp.p[j].size(); ++i) {
                got[i + static_cast<std::size_t>(s.n1())] += sp.p[j][i];
            }
            oracle::poly_add_into(got, oracle::poly_mul(q, sp.q[j]));
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(std::abs(got[i] - (i == static_cast<std::size_t>(j) ? cplx(1.0) : cplx(0.0))) < 1e-10);
            }
        }
    }
}

TEST_CASE("adjoint eigenvector of the twofold symbol")
{
    const Symbol s = examples::example_symbol("twofold").phi;
    const AdjointEigenSpec a = adjoint_eigenvector(s, 0.0);
    CHECK(a.preimages.size() == 2);
    CHECK(a.max_value_gap <= 1e-10);
    CHECK(a.min_separation >= 1e-6);
    for (const cplx &z : a.preimages) {
        CHECK(std::abs(z) < 1.0);
    }
    CHECK(a.residual <= 1e-6);
    CHECK(a.n == 4096);

    // <T x, f> = mu <x, f> for x supported on the first few coordinates.
    AdjointOptions small;
    small.n = 256;
    const cplx mu(0.4, 0.3);
    const AdjointEigenSpec b = adjoint_eigenvector(s, mu, small);
    CVec f(256, 0.0);
    for (std::size_t m = 0; m < b.preimages.size(); ++m) {
        cplx pw = b.betas[m];
        for (cplx &x : f) {
            x += pw;
            pw *= std::conj(b.preimages[m]);
        }
    }
    std::mt19937_64 rng(11);
    CVec x = random_vector(rng, 256);
    std::fill(x.begin() + 8, x.end(), cplx(0.0));
    const CVec tx = ToeplitzSection::from_symbol(s, 256).apply_dense(x);
    cplx lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lhs += tx[i] * std::conj(f[i]);
        rhs += mu * x[i] * std::conj(f[i]);
    }
    CHECK(std::abs(lhs - rhs) < 1e-10 * norm2(x) * norm2(f));
}

TEST_CASE("adjoint eigenvector error paths")
{
    const Symbol s = examples::example_symbol("twofold").phi;
    AdjointOptions opt;
    opt.n = 64;
    // 3 z^2 - 2 sqrt(3) z + 1 has the double root 1/sqrt(3).
    CHECK(code_of([&] { (void)adjoint_eigenvector(s, 2.0 * std::sqrt(3.0), opt); }) ==
          ErrorCode::MultiplePreimagesCollide);
    // Only the small root of 3 z^2 - 100 z + 1 lies in the disk.
    CHECK(code_of([&] { (void)adjoint_eigenvector(s, 100.0, opt); }) == ErrorCode::PreimageSearchFailed);
}

TEST_CASE("Cauchy kernels are eigenvectors of co-analytic sections")
{
    // Phi = R(1/z) is the conjugate of R* on the circle, so T_Phi k_l = conj(R*(l)) k_l.
    const RationalPart rp{{0.3, cplx(1.0, -0.5), 0.25}, {PoleTerm{cplx(0.0, 1.8), {0.6, 0.2}}}};
    const Symbol s(rp, Expr::constant(0.0));
    const int n = 1024;
    const ToeplitzSection sec = ToeplitzSection::from_symbol(s, n);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 32; ++t) {
        const cplx lam = std::polar(0.9 * std::sqrt(u(rng)), kTwoPi * u(rng));
        CVec k(static_cast<std::size_t>(n));
        cplx pw = 1.0;
        for (cplx &c : k) {
            c = pw;
            pw *= std::conj(lam);
        }
        const CVec tk = sec.apply_fft(k);
        const cplx ev = std::conj(rp.conjugate_eval(lam));
        CVec d(k.size());
        for (std::size_t i = 0; i < k.size(); ++i) {
            d[i] = tk[i] - ev * k[i];
        }
        CHECK(norm2(d) <= 1e-10 * norm2(k));
    }
}

TEST_CASE("density evidence for twice the backward shift")
{
    const Symbol s = rational_only({0.0, 2.0});
    const auto rep = conditions::classify(s);
    GsOptions opt;
    const GsEvidence ev = gs_evidence(s, rep, opt);
    REQUIRE(ev.residual.size() == opt.m_values.size());
    for (double r : ev.residual.back()) {
        CHECK(r < 1e-6);
    }
    for (std::size_t j = 0; j < 8; ++j) {
        CHECK(ev.residual[2][j] <= ev.residual[0][j]);
    }
    const Symbol half = rational_only({0.0, 0.5});
    CHECK(code_of([&] { (void)gs_evidence(half, conditions::classify(half)); }) == ErrorCode::ParamInvalid);
}

TEST_CASE("orbit statistics")
{
    const ToeplitzSection contraction = ToeplitzSection::from_symbol(rational_only({0.0, 0.5}), 256);
    const OrbitStats c = orbit_simulate(contraction);
    CHECK(c.steps.back().coverage == 0);
    CHECK(c.steps.back().log_norm < -50.0);

    const ToeplitzSection rolewicz = ToeplitzSection::from_symbol(rational_only({0.0, 2.0}), 512);
    const OrbitStats r = orbit_simulate(rolewicz);
    CHECK_FALSE(r.died);
    for (std::size_t i = 1; i < r.steps.size(); ++i) {
        CHECK(r.steps[i].coverage >= r.steps[i - 1].coverage);
    }
    CHECK(r.steps[49].coverage < r.steps.back().coverage);
    CHECK(r.steps.back().coverage >= 20);

    const OrbitStats again = orbit_simulate(rolewicz);
    CHECK(again.to_csv() == r.to_csv());
    OrbitOptions other;
    other.seed = 2;
    CHECK(orbit_simulate(rolewicz, other).to_csv() != r.to_csv());

    // 2 S* is nilpotent on a section of size 16.
    const OrbitStats dead = orbit_simulate(ToeplitzSection::from_symbol(rational_only({0.0, 2.0}), 16));
    CHECK(dead.died);
    CHECK(dead.steps.size() == 16);

    const ToeplitzSection huge = ToeplitzSection::from_symbol(rational_only({1e13}), 8);
    CHECK(code_of([&] { (void)orbit_simulate(huge); }) == ErrorCode::Overflow);
}
