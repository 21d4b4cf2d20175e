#include "toeplitz_hc/operator.hpp"

#include "toeplitz_hc/error.hpp"
#include "toeplitz_hc/parallel.hpp"
#include "toeplitz_hc/valence.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <tuple>

namespace toeplitz_hc::op {

namespace {

double norm2(const CVec &v)
{
    double s = 0.0;
    for (const cplx &c : v) {
        s += std::norm(c);
    }
    return std::sqrt(s);
}

CVec poly_mul(const CVec &a, const CVec &b)
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

void add_into(CVec &acc, const CVec &term, std::size_t shift = 0)
{
    if (acc.size() < term.size() + shift) {
        acc.resize(term.size() + shift, 0.0);
    }
    for (std::size_t i = 0; i < term.size(); ++i) {
        acc[i + shift] += term[i];
    }
}

// prod (1 - eta z)^{k} with one factor's exponent lowered by `drop`.
CVec q_except(const RationalPart &rp, std::size_t l, int drop)
{
    CVec out{1.0};
    for (std::size_t m = 0; m < rp.poles.size(); ++m) {
        const int e = rp.poles[m].order() - (m == l ? drop : 0);
        for (int i = 0; i < e; ++i) {
            out = poly_mul(out, {1.0, -rp.poles[m].eta});
        }
    }
    return out;
}

json cvec_json(const CVec &v)
{
    json a = json::array();
    for (const cplx &c : v) {
        a.push_back(complex_to_json(c));
    }
    return a;
}

} // namespace

// ---------------------------------------------------------------------------
// Sections

ToeplitzSection ToeplitzSection::from_symbol(const Symbol &sym, int n)
{
    THC_FAIL_IF(n < 1, ParamInvalid, "section size must be positive");
    FourierCoefficients fc = fourier_coefficients(sym, n - 1, n - 1);
    // Entries below FFT resolution are rounding noise; exact zeros keep
    // banded symbols banded.
    double top = 0.0;
    for (const cplx &c : fc.values) {
        top = std::max(top, std::abs(c));
    }
    for (cplx &c : fc.values) {
        if (std::abs(c) <= 1e-15 * top) {
            c = 0.0;
        }
    }
    return from_coefficients(std::move(fc.values), n);
}

ToeplitzSection ToeplitzSection::from_coefficients(CVec coeffs, int n)
{
    THC_FAIL_IF(n < 1, ParamInvalid, "section size must be positive");
    THC_FAIL_IF(coeffs.size() != static_cast<std::size_t>(2 * n - 1), ParamInvalid,
                "a section of size n needs 2n - 1 coefficients");
    ToeplitzSection s;
    s.n_ = n;
    s.coeffs_ = std::move(coeffs);
    s.m_ = fft::next_pow2(static_cast<std::size_t>(2 * n));
    s.fwd_ = std::make_shared<const fft::Plan>(s.m_, fft::Direction::Forward);
    s.bwd_ = std::make_shared<const fft::Plan>(s.m_, fft::Direction::Backward);
    // First column of the circulant: c_0 .. c_{n-1}, zeros, c_{-(n-1)} .. c_{-1}.
    CVec col(s.m_, 0.0);
    for (int k = 0; k < n; ++k) {
        col[static_cast<std::size_t>(k)] = s.coefficient(k);
    }
    for (int k = 1; k < n; ++k) {
        col[s.m_ - static_cast<std::size_t>(k)] = s.coefficient(-k);
    }
    s.spectrum_.resize(s.m_);
    s.fwd_->execute(col, s.spectrum_);
    return s;
}

CVec ToeplitzSection::apply_dense(const CVec &x) const
{
    THC_FAIL_IF(x.size() != static_cast<std::size_t>(n_), ParamInvalid, "vector length must match the section");
    CVec y(x.size(), 0.0);
    parallel_for(x.size(), [&](std::size_t i) {
        cplx acc = 0.0;
        for (int j = 0; j < n_; ++j) {
            acc += coefficient(static_cast<int>(i) - j) * x[static_cast<std::size_t>(j)];
        }
        y[i] = acc;
    });
    return y;
}

CVec ToeplitzSection::apply_fft(const CVec &x) const
{
    THC_FAIL_IF(x.size() != static_cast<std::size_t>(n_), ParamInvalid, "vector length must match the section");
    CVec buf(m_, 0.0);
    std::copy(x.begin(), x.end(), buf.begin());
    fwd_->execute_inplace(buf);
    for (std::size_t i = 0; i < m_; ++i) {
        buf[i] *= spectrum_[i];
    }
    bwd_->execute_inplace(buf);
    const double inv = 1.0 / double(m_);
    CVec y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = buf[i] * inv;
    }
    return y;
}

Eigen::MatrixXcd ToeplitzSection::dense() const
{
    Eigen::MatrixXcd m(n_, n_);
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            m(i, j) = entry(i, j);
        }
    }
    return m;
}

ToeplitzSection ToeplitzSection::conjugate() const
{
    CVec c(coeffs_.size());
    for (int k = -(n_ - 1); k <= n_ - 1; ++k) {
        c[static_cast<std::size_t>(k + n_ - 1)] = std::conj(coefficient(-k));
    }
    return from_coefficients(std::move(c), n_);
}

CVec backward_shift_apply(const CVec &f, int k)
{
    THC_FAIL_IF(k < 0, ParamInvalid, "shift must be nonnegative");
    if (static_cast<std::size_t>(k) >= f.size()) {
        return {};
    }
    return CVec(f.begin() + k, f.end());
}

CVec taylor_coefficients(const Expr &e, int n)
{
    THC_FAIL_IF(n < 1, ParamInvalid, "need at least one coefficient");
    if (e.op() == ExprOp::Constant) {
        CVec out(static_cast<std::size_t>(n), 0.0);
        out[0] = e(0.0);
        return out;
    }
    const auto f = [&e](cplx z) { return e(z); };
    std::size_t m = std::max<std::size_t>(64, fft::next_pow2(2 * static_cast<std::size_t>(n)));
    CVec prev = circle_laurent(f, 1.0, 0, n - 1, m);
    constexpr std::size_t kMax = std::size_t{1} << 20;
    for (;;) {
        THC_FAIL_IF(2 * m > kMax, NonConvergence, "Taylor coefficients did not settle before 2^20 samples");
        m *= 2;
        CVec cur = circle_laurent(f, 1.0, 0, n - 1, m);
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            diff = std::max(diff, std::abs(cur[i] - prev[i]));
            scale = std::max(scale, std::abs(cur[i]));
        }
        prev = std::move(cur);
        if (diff <= 1e-13 * std::max(scale, 1e-300)) {
            return prev;
        }
    }
}

// ---------------------------------------------------------------------------
// Eigenvectors

json EigenvectorSpec::to_json() const
{
    return {{"lambda", complex_to_json(lambda)}, {"p", cvec_json(p)}, {"q", cvec_json(q)}};
}

std::vector<EigenvectorSpec> monomial_specs(const Symbol &sym, cplx lambda)
{
    std::vector<EigenvectorSpec> out;
    for (int i = 0; i < sym.n2(); ++i) {
        EigenvectorSpec s;
        s.lambda = lambda;
        s.p.assign(static_cast<std::size_t>(i) + 1, 0.0);
        s.p.back() = 1.0;
        out.push_back(std::move(s));
    }
    for (int i = 0; i < sym.n1(); ++i) {
        EigenvectorSpec s;
        s.lambda = lambda;
        s.q.assign(static_cast<std::size_t>(i) + 1, 0.0);
        s.q.back() = 1.0;
        out.push_back(std::move(s));
    }
    return out;
}

json EigenvectorResult::to_json() const
{
    return {{"lambda", complex_to_json(lambda)},
            {"n", n},
            {"residual", residual},
            {"tail_bound", tail_bound},
            {"cancellation_gap", cancellation_gap}};
}

void validate_lambda(const Symbol &sym, cplx lambda)
{
    std::vector<double> radii{1.0};
    if (sym.analytic_radius() > 1.0) {
        radii.push_back(valence::rho_plus(sym));
    }
    for (double rho : radii) {
        const valence::BoundaryCurve c = valence::build_curve(sym, rho);
        int k = -1;
        try {
            k = valence::PreimageCounter(sym, c).count(lambda, 2.0 * c.band());
        } catch (const Error &e) {
            throw Error(ErrorCode::LambdaInRange, std::string("lambda is too close to the boundary curve: ") + e.what());
        }
        THC_FAIL_IF(k != 0, LambdaInRange,
                    "lambda has " + std::to_string(k) + " preimages in |z| < " + std::to_string(rho));
    }
}

namespace {

struct Denominator {
    CVec poly;   // z^{N1} Q R(1/z), exact
    CVec weight; // z^{N1} Q
    double gap = 0.0;
};

Denominator rational_denominator(const RationalPart &rp)
{
    const int n1 = rp.n1();
    Denominator d;
    const CVec q = rp.q_polynomial();
    d.weight.assign(static_cast<std::size_t>(n1), 0.0);
    d.weight.insert(d.weight.end(), q.begin(), q.end());

    // Polynomial part: Q * sum_k c_k z^{N1 - k}.
    CVec pz(static_cast<std::size_t>(n1) + 1, 0.0);
    for (int k = 0; k <= n1 && k < static_cast<int>(rp.poly.size()); ++k) {
        pz[static_cast<std::size_t>(n1 - k)] = rp.poly[static_cast<std::size_t>(k)];
    }
    d.poly = poly_mul(q, pz);
    // alpha (1/z - eta)^{-j} = alpha z^j / (1 - eta z)^j, times z^{N1} Q.
    for (std::size_t l = 0; l < rp.poles.size(); ++l) {
        for (int j = 1; j <= rp.poles[l].order(); ++j) {
            CVec t = q_except(rp, l, j);
            for (cplx &c : t) {
                c *= rp.poles[l].alphas[static_cast<std::size_t>(j - 1)];
            }
            add_into(d.poly, t, static_cast<std::size_t>(n1 + j));
        }
    }

    // Cross-check against the Fourier series of R(1/z): the product with
    // z^{N1} Q must have no negative modes and reproduce the polynomial.
    const int deg = static_cast<int>(d.weight.size()) - 1;
    const int kneg = deg + 48;
    const CVec r = rp.circle_coefficients(kneg); // r[i] holds index -i
    double scale = 0.0;
    for (const cplx &c : d.poly) {
        scale = std::max(scale, std::abs(c));
    }
    for (int idx = -(kneg - deg); idx <= deg; ++idx) {
        cplx acc = 0.0;
        for (int s = 0; s <= deg; ++s) {
            const int need = idx - s; // index of r
            if (need <= 0 && -need <= kneg) {
                acc += d.weight[static_cast<std::size_t>(s)] * r[static_cast<std::size_t>(-need)];
            }
        }
        const cplx want =
            idx >= 0 && idx < static_cast<int>(d.poly.size()) ? d.poly[static_cast<std::size_t>(idx)] : cplx(0.0);
        d.gap = std::max(d.gap, std::abs(acc - want));
    }
    THC_FAIL_IF(d.gap > 1e-10 * std::max(1.0, scale), CancellationFailure,
                "z^{N1} Q R(1/z) keeps negative Fourier modes (gap " + std::to_string(d.gap) + ")");
    return d;
}

} // namespace

EigenvectorResult eigenvector(const Symbol &sym, const EigenvectorSpec &spec, const ToeplitzSection &section)
{
    const RationalPart &rp = sym.rational();
    const int n1 = rp.n1(), n2 = rp.n2();
    THC_FAIL_IF(static_cast<int>(spec.p.size()) > std::max(n2, 0), ParamInvalid, "deg p must be at most N2 - 1");
    THC_FAIL_IF(static_cast<int>(spec.q.size()) > std::max(n1, 0), ParamInvalid, "deg q must be at most N1 - 1");
    validate_lambda(sym, spec.lambda);

    const int n = section.n();
    const std::size_t len = 2 * static_cast<std::size_t>(n);
    const Denominator den = rational_denominator(rp);

    CVec t = taylor_coefficients(sym.tail(), static_cast<int>(len));
    t[0] -= spec.lambda;
    CVec d(len, 0.0);
    for (std::size_t s = 0; s < den.weight.size(); ++s) {
        if (den.weight[s] == cplx(0.0)) {
            continue;
        }
        for (std::size_t i = 0; i + s < len; ++i) {
            d[i + s] += den.weight[s] * t[i];
        }
    }
    for (std::size_t i = 0; i < den.poly.size() && i < len; ++i) {
        d[i] += den.poly[i];
    }

    CVec num(len, 0.0);
    for (std::size_t i = 0; i < spec.p.size(); ++i) {
        num[i + static_cast<std::size_t>(n1)] += spec.p[i];
    }
    const CVec qq = poly_mul(rp.q_polynomial(), spec.q.empty() ? CVec{} : spec.q);
    for (std::size_t i = 0; i < qq.size() && i < len; ++i) {
        num[i] += qq[i];
    }
    THC_FAIL_IF(std::abs(d[0]) == 0.0, LambdaInRange, "denominator vanishes at 0");

    // Power-series division num / d.
    std::size_t dlen = len;
    while (dlen > 1 && d[dlen - 1] == cplx(0.0)) {
        --dlen;
    }
    CVec f(len, 0.0);
    const cplx inv0 = 1.0 / d[0];
    for (std::size_t k = 0; k < len; ++k) {
        cplx acc = num[k];
        const std::size_t top = std::min(k, dlen - 1);
        for (std::size_t j = 1; j <= top; ++j) {
            acc -= d[j] * f[k - j];
        }
        f[k] = acc * inv0;
    }

    EigenvectorResult r;
    r.lambda = spec.lambda;
    r.n = n;
    r.cancellation_gap = den.gap;
    r.coeffs.assign(f.begin(), f.begin() + n);
    const double fn = norm2(r.coeffs);
    THC_FAIL_IF(!(fn > 0.0), ParamInvalid, "eigenvector vanishes; p and q are both zero");
    CVec tail(f.begin() + n, f.end());
    r.tail_bound = norm2(tail) / fn;
    CVec tf = section.apply_fft(r.coeffs);
    for (int i = 0; i < n; ++i) {
        tf[static_cast<std::size_t>(i)] -= spec.lambda * r.coeffs[static_cast<std::size_t>(i)];
    }
    r.residual = norm2(tf) / fn;
    return r;
}

EigenvectorResult eigenvector(const Symbol &sym, const EigenvectorSpec &spec, int n)
{
    return eigenvector(sym, spec, ToeplitzSection::from_symbol(sym, n));
}

// ---------------------------------------------------------------------------
// Span of z^{N1} p + Q q

json SpanSolve::to_json() const
{
    json ps = json::array(), qs = json::array();
    for (std::size_t j = 0; j < p.size(); ++j) {
        ps.push_back(cvec_json(p[j]));
        qs.push_back(cvec_json(q[j]));
    }
    return {{"N", n}, {"condition", condition}, {"max_residual", max_residual}, {"p", ps}, {"q", qs}};
}

SpanSolve span_solve(const Symbol &sym)
{
    const RationalPart &rp = sym.rational();
    const int n1 = rp.n1(), n2 = rp.n2(), n = n1 + n2;
    THC_FAIL_IF(n < 1, ParamInvalid, "symbol has no poles in the disk");
    SpanSolve s;
    s.n = n;
    s.matrix = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n2; ++i) {
        s.matrix(n1 + i, i) = 1.0;
    }
    const CVec q = rp.q_polynomial();
    for (int i = 0; i < n1; ++i) {
        for (std::size_t k = 0; k < q.size(); ++k) {
            s.matrix(static_cast<int>(k) + i, n2 + i) = q[k];
        }
    }
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s.matrix);
    const auto &sv = svd.singularValues();
    s.condition = sv(0) / sv(n - 1);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(s.matrix);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
        e(j) = 1.0;
        const Eigen::VectorXcd x = qr.solve(e);
        s.max_residual = std::max(s.max_residual, (s.matrix * x - e).norm());
        CVec pj(static_cast<std::size_t>(n2)), qj(static_cast<std::size_t>(n1));
        for (int i = 0; i < n2; ++i) {
            pj[static_cast<std::size_t>(i)] = x(i);
        }
        for (int i = 0; i < n1; ++i) {
            qj[static_cast<std::size_t>(i)] = x(n2 + i);
        }
        s.p.push_back(std::move(pj));
        s.q.push_back(std::move(qj));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Adjoint eigenvectors

json AdjointEigenSpec::to_json() const
{
    return {{"mu", complex_to_json(mu)},
            {"preimages", cvec_json(preimages)},
            {"betas", cvec_json(betas)},
            {"n", n},
            {"residual", residual},
            {"max_value_gap", max_value_gap},
            {"min_separation", min_separation},
            {"null_residual", null_residual}};
}

CVec find_preimages(const Symbol &sym, cplx mu, int seeds_per_axis, double separation)
{
    THC_FAIL_IF(seeds_per_axis < 2, ParamInvalid, "need at least two seeds per axis");
    constexpr double kLimit = 1.0 - 1e-4;
    const std::size_t s = static_cast<std::size_t>(seeds_per_axis);
    std::vector<std::optional<cplx>> found(s * s);
    parallel_for(s * s, [&](std::size_t idx) {
        const double x = -1.0 + 2.0 * (double(idx % s) + 0.5) / double(s);
        const double y = -1.0 + 2.0 * (double(idx / s) + 0.5) / double(s);
        cplx z(x, y);
        if (!(std::abs(z) < kLimit)) {
            return;
        }
        try {
            for (int it = 0; it < 80; ++it) {
                const Jet j = sym.jet(z);
                if (std::abs(j.deriv) == 0.0) {
                    return;
                }
                const cplx step = (j.value - mu) / j.deriv;
                z -= step;
                if (!(std::abs(z) < kLimit)) {
                    return;
                }
                if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) {
                    break;
                }
            }
            const double scale = std::max(1.0, std::abs(mu));
            if (std::abs(sym.eval(z) - mu) <= 1e-10 * scale) {
                found[idx] = z;
            }
        } catch (const Error &) {
        }
    });
    CVec roots;
    for (const auto &f : found) {
        if (!f) {
            continue;
        }
        bool dup = false;
        for (const cplx &r : roots) {
            if (std::abs(r - *f) < separation) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            roots.push_back(*f);
        }
    }
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        return std::make_tuple(a.real(), a.imag()) < std::make_tuple(b.real(), b.imag());
    });
    return roots;
}

AdjointEigenSpec adjoint_eigenvector(const Symbol &sym, cplx mu, const AdjointOptions &opt)
{
    const RationalPart &rp = sym.rational();
    const int n1 = rp.n1(), big_n = sym.degree();
    const CVec roots = find_preimages(sym, mu, opt.seeds, opt.separation);
    const double dscale = std::max(1.0, std::abs(mu));
    for (const cplx &z : roots) {
        THC_FAIL_IF(std::abs(sym.derivative(z)) < 1e-6 * dscale, MultiplePreimagesCollide,
                    "a preimage of mu is critical; the preimages are not distinct");
    }
    THC_FAIL_IF(static_cast<int>(roots.size()) < big_n + 1, PreimageSearchFailed,
                "found " + std::to_string(roots.size()) + " preimages of mu, need N + 1 = " +
                    std::to_string(big_n + 1));

    AdjointEigenSpec out;
    out.mu = mu;
    out.n = opt.n;
    out.preimages.assign(roots.begin(), roots.begin() + big_n + 1);
    out.min_separation = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < out.preimages.size(); ++a) {
        out.max_value_gap = std::max(out.max_value_gap, std::abs(sym.eval(out.preimages[a]) - mu));
        for (std::size_t b = a + 1; b < out.preimages.size(); ++b) {
            out.min_separation = std::min(out.min_separation, std::abs(out.preimages[a] - out.preimages[b]));
        }
    }
    THC_FAIL_IF(out.min_separation < opt.separation, MultiplePreimagesCollide, "two preimages coincide");

    // Coordinates of (R*(z) - R*(w)) / (1 - z / w), w = 1 / conj(z_m), in the
    // basis z^i (i < N1), (z - conj(eta_l))^{-i} (1 <= i <= k_l).
    const int cols = big_n + 1;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(big_n, cols);
    Eigen::VectorXd colscale(cols);
    for (int m = 0; m < cols; ++m) {
        const cplx w = 1.0 / std::conj(out.preimages[static_cast<std::size_t>(m)]);
        int row = 0;
        for (int i = 0; i < n1; ++i, ++row) {
            cplx acc = 0.0;
            for (int k = i + 1; k <= n1; ++k) {
                acc += std::conj(rp.poly[static_cast<std::size_t>(k)]) * ipow(w, k - 1 - i);
            }
            a(row, m) = -w * acc;
        }
        for (const PoleTerm &pt : rp.poles) {
            const cplx v = w - std::conj(pt.eta);
            for (int i = 1; i <= pt.order(); ++i, ++row) {
                cplx acc = 0.0;
                for (int j = i; j <= pt.order(); ++j) {
                    acc += std::conj(pt.alphas[static_cast<std::size_t>(j - 1)]) * ipow(v, -(j + 1 - i));
                }
                a(row, m) = w * acc;
            }
        }
        const double cn = a.col(m).norm();
        colscale(m) = cn > 0.0 ? cn : 1.0;
        a.col(m) /= colscale(m);
    }
    Eigen::VectorXcd beta;
    if (big_n == 0) {
        beta = Eigen::VectorXcd::Ones(1);
    } else {
        const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
        beta = svd.matrixV().col(cols - 1);
    }
    out.null_residual = (a * beta).norm() / beta.norm();
    out.betas.resize(static_cast<std::size_t>(cols));
    for (int m = 0; m < cols; ++m) {
        out.betas[static_cast<std::size_t>(m)] = beta(m) / colscale(m);
    }

    // f_j = sum_m beta_m conj(z_m)^j.
    const std::size_t n = static_cast<std::size_t>(opt.n);
    CVec f(n, 0.0);
    for (int m = 0; m < cols; ++m) {
        const cplx zb = std::conj(out.preimages[static_cast<std::size_t>(m)]);
        cplx pw = out.betas[static_cast<std::size_t>(m)];
        for (std::size_t j = 0; j < n; ++j) {
            f[j] += pw;
            pw *= zb;
        }
    }
    const ToeplitzSection adj = ToeplitzSection::from_symbol(sym, opt.n).conjugate();
    CVec r = adj.apply_fft(f);
    for (std::size_t j = 0; j < n; ++j) {
        r[j] -= std::conj(mu) * f[j];
    }
    out.residual = norm2(r) / norm2(f);
    return out;
}

// ---------------------------------------------------------------------------
// Godefroy-Shapiro evidence

json GsEvidence::to_json() const
{
    return {{"lambda0", complex_to_json(lambda0)},
            {"lambda1", complex_to_json(lambda1)},
            {"radius0", radius0},
            {"radius1", radius1},
            {"m_values", m_values},
            {"residual", residual},
            {"family_residual", family_residual},
            {"notes", notes}};
}

GsEvidence gs_evidence(const Symbol &sym, const conditions::ConditionReport &report, const GsOptions &opt)
{
    THC_FAIL_IF(!report.spe.ok, ParamInvalid,
                "no eigenvalue witnesses on both sides of the circle; the density test does not apply");
    THC_FAIL_IF(opt.n < 8 || opt.monomials < 1 || opt.monomials > opt.n, ParamInvalid, "bad gs_evidence sizes");
    GsEvidence ev;
    ev.lambda0 = *report.spe.lambda0;
    ev.lambda1 = *report.spe.lambda1;
    ev.m_values = opt.m_values;
    ev.notes.emplace_back("least-squares residuals are evidence of density only, not a certificate");

    // Safe radius: distance to the sampled curve and to the unit circle.
    std::vector<cplx> samples(4096);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = sym.eval(std::polar(1.0, kTwoPi * double(i) / double(samples.size())));
    }
    const auto safe = [&](cplx c) {
        double d = std::abs(std::abs(c) - 1.0);
        for (const cplx &s : samples) {
            d = std::min(d, std::abs(s - c));
        }
        return opt.sample_fraction * d;
    };
    ev.radius0 = safe(ev.lambda0);
    ev.radius1 = safe(ev.lambda1);

    const ToeplitzSection section = ToeplitzSection::from_symbol(sym, opt.n);
    const auto columns = [&](cplx c, double rad, int m) {
        std::vector<CVec> cols;
        for (int s = 0; s < m; ++s) {
            const cplx lam = c + std::polar(rad, kTwoPi * (double(s) + 0.5) / double(m));
            try {
                for (const EigenvectorSpec &spec : monomial_specs(sym, lam)) {
                    EigenvectorResult r = eigenvector(sym, spec, section);
                    const double nr = norm2(r.coeffs);
                    for (cplx &x : r.coeffs) {
                        x /= nr;
                    }
                    cols.push_back(std::move(r.coeffs));
                }
            } catch (const Error &e) {
                ev.notes.push_back("skipped node " + complex_to_json(lam).dump() + ": " + e.what());
            }
        }
        return cols;
    };
    const auto residuals = [&](const std::vector<CVec> &cols) {
        std::vector<double> res(static_cast<std::size_t>(opt.monomials), 1.0);
        if (cols.empty()) {
            return res;
        }
        Eigen::MatrixXcd a(opt.n, static_cast<int>(cols.size()));
        for (int j = 0; j < a.cols(); ++j) {
            for (int i = 0; i < opt.n; ++i) {
                a(i, j) = cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            }
        }
        const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(a);
        for (int j = 0; j < opt.monomials; ++j) {
            Eigen::VectorXcd e = Eigen::VectorXcd::Zero(opt.n);
            e(j) = 1.0;
            res[static_cast<std::size_t>(j)] = (a * cod.solve(e) - e).norm();
        }
        return res;
    };

    ev.family_residual.resize(2);
    for (int m : opt.m_values) {
        const std::vector<CVec> c0 = columns(ev.lambda0, ev.radius0, m);
        const std::vector<CVec> c1 = columns(ev.lambda1, ev.radius1, m);
        std::vector<CVec> both = c0;
        both.insert(both.end(), c1.begin(), c1.end());
        ev.family_residual[0].push_back(residuals(c0));
        ev.family_residual[1].push_back(residuals(c1));
        ev.residual.push_back(residuals(both));
    }
    return ev;
}

// ---------------------------------------------------------------------------
// Orbits

json OrbitStats::to_json() const
{
    const OrbitStep last = steps.empty() ? OrbitStep{} : steps.back();
    return {{"n", n},
            {"steps", steps.size()},
            {"net_cells", net_cells},
            {"final_coverage", last.coverage},
            {"final_log_norm", last.log_norm},
            {"coordinate_spread", coordinate_spread},
            {"died", died}};
}

std::string OrbitStats::to_csv() const
{
    std::string out = "step,log_norm_growth,coverage\n";
    for (const OrbitStep &s : steps) {
        out += std::to_string(s.step) + ',' + valence::fmt17(s.log_norm_growth) + ',' + std::to_string(s.coverage) +
               '\n';
    }
    return out;
}

OrbitStats orbit_simulate(const ToeplitzSection &section, const OrbitOptions &opt)
{
    THC_FAIL_IF(section.n() < 2, ParamInvalid, "orbit needs a section of size at least 2");
    THC_FAIL_IF(!(opt.eps > 0.0 && opt.eps <= 1.0), ParamInvalid, "eps must lie in (0, 1]");
    THC_FAIL_IF(opt.burn_in < 0, ParamInvalid, "burn_in must be nonnegative");
    const int n = section.n();
    OrbitStats st;
    st.n = n;

    const int lim = static_cast<int>(std::floor(1.0 / opt.eps + 0.5));
    for (int a = -lim; a <= lim; ++a) {
        for (int b = -lim; b <= lim; ++b) {
            for (int c = -lim; c <= lim; ++c) {
                for (int d = -lim; d <= lim; ++d) {
                    const double r2 = opt.eps * opt.eps * double(a * a + b * b + c * c + d * d);
                    if (r2 <= 1.0 && (a | b | c | d) != 0) {
                        ++st.net_cells;
                    }
                }
            }
        }
    }

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    CVec x(static_cast<std::size_t>(n));
    double w = 1.0;
    for (cplx &v : x) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v = cplx(re, im) * w;
        w *= opt.start_decay;
    }
    double nx = norm2(x);
    double log_norm = std::log(nx);
    for (cplx &v : x) {
        v /= nx;
    }

    std::set<std::tuple<int, int, int, int>> visited;
    std::vector<double> lead_logs;
    for (int step = 1; step <= opt.steps; ++step) {
        CVec y = section.apply_dense(x);
        const double ny = norm2(y);
        OrbitStep rec;
        rec.step = step;
        if (!(ny > 1e-300)) {
            st.died = true;
            rec.log_norm_growth = -std::numeric_limits<double>::infinity();
            rec.log_norm = -std::numeric_limits<double>::infinity();
            rec.coverage = visited.size();
            st.steps.push_back(rec);
            break;
        }
        THC_FAIL_IF(ny > 1e12, Overflow, "norm grew by more than 1e12 in one step");
        rec.log_norm_growth = std::log(ny);
        log_norm += rec.log_norm_growth;
        rec.log_norm = log_norm;
        for (cplx &v : y) {
            v /= ny;
        }
        x = std::move(y);
        if (log_norm < 700.0) {
            const double scale = std::exp(log_norm);
            const cplx a = scale * x[0], b = scale * x[1];
            const double r2 = std::norm(a) + std::norm(b);
            if (r2 > 0.0) {
                lead_logs.push_back(0.5 * std::log10(r2));
            }
            if (r2 <= 1.0 && step > opt.burn_in) {
                const auto idx = [&](double v) { return static_cast<int>(std::lround(v / opt.eps)); };
                const auto cell = std::make_tuple(idx(a.real()), idx(a.imag()), idx(b.real()), idx(b.imag()));
                if (cell != std::make_tuple(0, 0, 0, 0)) {
                    visited.insert(cell);
                }
            }
        }
        rec.coverage = visited.size();
        st.steps.push_back(rec);
    }
    if (lead_logs.size() > 1) {
        double mean = 0.0;
        for (double v : lead_logs) {
            mean += v;
        }
        mean /= double(lead_logs.size());
        double var = 0.0;
        for (double v : lead_logs) {
            var += (v - mean) * (v - mean);
        }
        st.coordinate_spread = std::sqrt(var / double(lead_logs.size() - 1));
    }
    return st;
}

} // namespace toeplitz_hc::op
