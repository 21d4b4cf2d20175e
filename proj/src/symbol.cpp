#include "toeplitz_hc/symbol.hpp"

#include "toeplitz_hc/error.hpp"
#include "toeplitz_hc/fft.hpp"
#include "toeplitz_hc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace toeplitz_hc {

int RationalPart::n1() const noexcept
{
    return poly.empty() ? 0 : static_cast<int>(poly.size()) - 1;
}

int RationalPart::n2() const noexcept
{
    int s = 0;
    for (const PoleTerm &p : poles) {
        s += p.order();
    }
    return s;
}

void RationalPart::validate() const
{
    THC_FAIL_IF(n1() > 0 && poly.back() == cplx(0.0), ParamInvalid,
                "leading polynomial coefficient must be nonzero");
    for (std::size_t l = 0; l < poles.size(); ++l) {
        const PoleTerm &p = poles[l];
        THC_FAIL_IF(!(std::abs(p.eta) > 1.0), ParamInvalid, "pole eta must satisfy |eta| > 1");
        THC_FAIL_IF(p.alphas.empty() || p.alphas.back() == cplx(0.0), ParamInvalid,
                    "leading principal-part coefficient must be nonzero");
        for (std::size_t m = 0; m < l; ++m) {
            THC_FAIL_IF(p.eta == poles[m].eta, ParamInvalid, "poles must be pairwise distinct");
        }
    }
}

Jet RationalPart::jet(cplx z) const
{
    Jet out{0.0, 0.0};
    if (!poly.empty()) {
        // Horner in w = 1/z, then dw/dz = -w^2.
        const cplx w = 1.0 / z;
        cplx v = 0.0, dv = 0.0;
        for (auto it = poly.rbegin(); it != poly.rend(); ++it) {
            dv = dv * w + v;
            v = v * w + *it;
        }
        out.value += v;
        out.deriv += -dv * w * w;
    }
    for (const PoleTerm &p : poles) {
        // alpha (1/z - eta)^{-j} = alpha u^j with u = z / (1 - eta z).
        const cplx den = 1.0 - p.eta * z;
        const cplx u = z / den;
        const cplx du = 1.0 / (den * den);
        cplx v = 0.0, dv = 0.0;
        for (auto it = p.alphas.rbegin(); it != p.alphas.rend(); ++it) {
            dv = dv * u + v;
            v = v * u + *it;
        }
        // v currently holds sum alpha_j u^{j-1}; multiply by u.
        out.value += v * u;
        out.deriv += (dv * u + v) * du;
    }
    return out;
}

CVec RationalPart::q_polynomial() const
{
    CVec q{1.0};
    for (const PoleTerm &p : poles) {
        for (int r = 0; r < p.order(); ++r) {
            CVec next(q.size() + 1, 0.0);
            for (std::size_t i = 0; i < q.size(); ++i) {
                next[i] += q[i];
                next[i + 1] -= p.eta * q[i];
            }
            q = std::move(next);
        }
    }
    return q;
}

CVec RationalPart::circle_coefficients(int n_neg) const
{
    CVec out(static_cast<std::size_t>(n_neg) + 1, 0.0);
    for (int k = 0; k < static_cast<int>(poly.size()) && k <= n_neg; ++k) {
        out[static_cast<std::size_t>(k)] += poly[static_cast<std::size_t>(k)];
    }
    for (const PoleTerm &p : poles) {
        // (w - eta)^{-j} = (-eta)^{-j} sum_m C(m+j-1, j-1) (w/eta)^m, w = 1/z.
        const cplx inv_eta = 1.0 / p.eta;
        for (int j = 1; j <= p.order(); ++j) {
            cplx term = p.alphas[static_cast<std::size_t>(j - 1)] * ipow(-inv_eta, j);
            for (int m = 0; m <= n_neg; ++m) {
                if (m > 0) {
                    term *= double(m + j - 1) / double(m) * inv_eta;
                }
                out[static_cast<std::size_t>(m)] += term;
            }
        }
    }
    return out;
}

cplx RationalPart::conjugate_eval(cplx z) const
{
    cplx v = 0.0;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) {
        v = v * z + std::conj(*it);
    }
    for (const PoleTerm &p : poles) {
        const cplx inv = 1.0 / (z - std::conj(p.eta));
        cplx pw = inv;
        for (const cplx &a : p.alphas) {
            v += std::conj(a) * pw;
            pw *= inv;
        }
    }
    return v;
}

Symbol::Symbol(RationalPart rational, Expr tail, double analytic_radius)
    : rational_(std::move(rational)), tail_(std::move(tail)), analytic_radius_(analytic_radius)
{
    rational_.validate();
    THC_FAIL_IF(!(analytic_radius_ >= 1.0), ParamInvalid, "analytic_radius must be >= 1");
}

Jet Symbol::jet(cplx z) const
{
    THC_FAIL_IF(rational_.n1() > 0 && std::abs(z) < cutoff::kPoleProximity, PoleHit,
                "evaluation at the pole z = 0");
    for (const PoleTerm &p : rational_.poles) {
        THC_FAIL_IF(std::abs(z - 1.0 / p.eta) < cutoff::kPoleProximity, PoleHit,
                    "evaluation at a pole 1/eta");
    }
    THC_FAIL_IF(std::abs(z) > analytic_radius_ * (1.0 + 1e-12), DomainViolation,
                "|z| exceeds the analytic radius of the tail");
    const Jet r = rational_.jet(z);
    const Jet t = tail_.jet(z);
    return {r.value + t.value, r.deriv + t.deriv};
}

std::vector<PoleSite> Symbol::poles() const
{
    std::vector<PoleSite> out;
    if (rational_.n1() > 0) {
        out.push_back({0.0, rational_.n1()});
    }
    for (const PoleTerm &p : rational_.poles) {
        out.push_back({1.0 / p.eta, p.order()});
    }
    return out;
}

int Symbol::pole_count(double rho) const
{
    int c = 0;
    for (const PoleSite &p : poles()) {
        if (std::abs(p.location) < rho) {
            c += p.order;
        }
    }
    return c;
}

namespace {

json cvec_to_json(const CVec &v)
{
    json a = json::array();
    for (const cplx &c : v) {
        a.push_back(complex_to_json(c));
    }
    return a;
}

CVec cvec_from_json(const json &j, const char *what)
{
    THC_FAIL_IF(!j.is_array(), SchemaError, std::string(what) + " must be an array");
    CVec v;
    for (const json &e : j) {
        v.push_back(complex_from_json(e));
    }
    return v;
}

} // namespace

json Symbol::to_json() const
{
    json j;
    j["poly"] = cvec_to_json(rational_.poly);
    json poles = json::array();
    for (const PoleTerm &p : rational_.poles) {
        poles.push_back({{"eta", complex_to_json(p.eta)}, {"alphas", cvec_to_json(p.alphas)}});
    }
    j["poles"] = std::move(poles);
    j["tail"] = tail_.to_json();
    if (std::isinf(analytic_radius_)) {
        j["analytic_radius"] = "inf";
    } else {
        j["analytic_radius"] = analytic_radius_;
    }
    return j;
}

Symbol Symbol::from_json(const json &j)
{
    THC_FAIL_IF(!j.is_object(), SchemaError, "symbol must be a JSON object");
    RationalPart rp;
    if (j.contains("poly")) {
        rp.poly = cvec_from_json(j.at("poly"), "poly");
    }
    if (j.contains("poles")) {
        for (const json &p : j.at("poles")) {
            THC_FAIL_IF(!p.contains("eta") || !p.contains("alphas"), SchemaError,
                        "pole entries need 'eta' and 'alphas'");
            rp.poles.push_back({complex_from_json(p.at("eta")), cvec_from_json(p.at("alphas"), "alphas")});
        }
    }
    Expr tail = j.contains("tail") ? Expr::from_json(j.at("tail")) : Expr::constant(0.0);
    double radius = kInfiniteRadius;
    if (j.contains("analytic_radius")) {
        const json &r = j.at("analytic_radius");
        if (r.is_string()) {
            THC_FAIL_IF(r.get<std::string>() != "inf", SchemaError, "analytic_radius must be a number or \"inf\"");
        } else {
            THC_FAIL_IF(!r.is_number(), SchemaError, "analytic_radius must be a number or \"inf\"");
            radius = r.get<double>();
        }
    }
    return Symbol(std::move(rp), std::move(tail), radius);
}

CVec circle_laurent(const std::function<cplx(cplx)> &f, double radius, int n_neg, int n_pos,
                    std::size_t size)
{
    THC_FAIL_IF(!fft::is_pow2(size) || size < static_cast<std::size_t>(n_neg + n_pos + 1), ParamInvalid,
                "circle_laurent needs a power-of-two size covering the index range");
    CVec samples(size);
    parallel_for(size, [&](std::size_t i) {
        const double theta = kTwoPi * double(i) / double(size);
        samples[i] = f(std::polar(radius, theta));
    });
    const CVec spec = fft::forward(samples);
    CVec out(static_cast<std::size_t>(n_neg + n_pos + 1));
    const double inv = 1.0 / double(size);
    for (int k = -n_neg; k <= n_pos; ++k) {
        const std::size_t idx = static_cast<std::size_t>((k % long(size) + long(size)) % long(size));
        out[static_cast<std::size_t>(k + n_neg)] = spec[idx] * inv * std::pow(radius, -k);
    }
    return out;
}

FourierCoefficients fourier_coefficients(const Symbol &sym, int n_neg, int n_pos)
{
    THC_FAIL_IF(n_neg < 0 || n_pos < 0, ParamInvalid, "index range must be nonnegative");
    const auto f = [&sym](cplx z) { return sym.eval(z); };
    const std::size_t count = static_cast<std::size_t>(n_neg + n_pos + 1);
    std::size_t m = std::max<std::size_t>(64, fft::next_pow2(2 * count));
    CVec prev = circle_laurent(f, 1.0, n_neg, n_pos, m);
    constexpr std::size_t kMax = std::size_t{1} << 20;
    while (true) {
        THC_FAIL_IF(2 * m > kMax, NonConvergence,
                    "Fourier coefficients did not settle before 2^20 samples");
        m *= 2;
        CVec cur = circle_laurent(f, 1.0, n_neg, n_pos, m);
        double scale = 1.0, diff = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            diff = std::max(diff, std::abs(cur[i] - prev[i]));
            scale = std::max(scale, std::abs(cur[i]));
        }
        prev = std::move(cur);
        if (diff <= 1e-10 * scale) {
            break;
        }
    }
    FourierCoefficients out;
    out.n_neg = n_neg;
    out.n_pos = n_pos;
    out.values = std::move(prev);
    out.fft_log2 = static_cast<int>(std::lround(std::log2(double(m))));
    const CVec closed = sym.rational().circle_coefficients(n_neg);
    double scale = 1.0;
    for (const cplx &c : out.values) {
        scale = std::max(scale, std::abs(c));
    }
    for (int i = 1; i <= n_neg; ++i) {
        cplx &v = out.values[static_cast<std::size_t>(n_neg - i)];
        out.closed_form_gap = std::max(out.closed_form_gap, std::abs(v - closed[static_cast<std::size_t>(i)]));
        v = closed[static_cast<std::size_t>(i)];
    }
    THC_FAIL_IF(out.closed_form_gap > 1e-10 * scale, NonConvergence,
                "FFT and closed-form negative coefficients disagree (gap " +
                    std::to_string(out.closed_form_gap) + "); is the tail singular in the disk?");
    return out;
}

ResolventSymbol::ResolventSymbol(const Symbol &base, cplx lambda) : base_(&base), lambda_(lambda) {}

Jet ResolventSymbol::jet(cplx z) const
{
    const Jet p = base_->jet(z);
    const cplx v = p.value - lambda_;
    THC_FAIL_IF(std::abs(v) < cutoff::kResolvent, LambdaInRange, "Phi(z) - lambda vanishes numerically");
    const cplx inv = 1.0 / v;
    return {inv, -p.deriv * inv * inv};
}

ResolventSymbol resolvent(const Symbol &sym, cplx lambda)
{
    constexpr int kBoundary = 1 << 12;
    constexpr int kRadii = 32;
    constexpr int kAngles = 256;
    std::vector<double> dist(kBoundary + kRadii * kAngles, std::numeric_limits<double>::infinity());
    parallel_for(dist.size(), [&](std::size_t i) {
        cplx z;
        if (i < kBoundary) {
            z = std::polar(1.0, kTwoPi * double(i) / kBoundary);
        } else {
            const std::size_t j = i - kBoundary;
            const double r = double(j / kAngles + 1) / double(kRadii + 1);
            z = std::polar(r, kTwoPi * (double(j % kAngles) + 0.5) / kAngles);
        }
        try {
            dist[i] = std::abs(sym.eval(z) - lambda);
        } catch (const Error &e) {
            if (e.code() != ErrorCode::PoleHit) {
                throw;
            }
        }
    });
    const double dmin = *std::min_element(dist.begin(), dist.end());
    THC_FAIL_IF(dmin < cutoff::kResolvent, LambdaInRange, "lambda is attained by a sampled Phi(z)");
    return ResolventSymbol(sym, lambda);
}

} // namespace toeplitz_hc
