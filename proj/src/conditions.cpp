#include "toeplitz_hc/conditions.hpp"

#include "toeplitz_hc/error.hpp"
#include "toeplitz_hc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace toeplitz_hc::conditions {

using valence::RegionMap;

std::string_view to_string(Tri t) noexcept
{
    switch (t) {
    case Tri::Pass:
        return "pass";
    case Tri::Fail:
        return "fail";
    case Tri::Inconclusive:
        return "inconclusive";
    }
    return "inconclusive";
}

std::string_view to_string(Verdict v) noexcept
{
    switch (v) {
    case Verdict::CertifiedMVC:
        return "certified_MVC";
    case Verdict::CertifiedIAC:
        return "certified_IAC";
    case Verdict::CertifiedDVC:
        return "certified_DVC";
    case Verdict::NecessaryFailed:
        return "necessary_failed";
    case Verdict::Inconclusive:
        return "inconclusive";
    }
    return "inconclusive";
}

namespace {

json opt_complex(const std::optional<cplx> &c)
{
    return c ? complex_to_json(*c) : json(nullptr);
}

std::vector<cplx> boundary_samples(const Symbol &sym, double rho, int n)
{
    std::vector<cplx> v(static_cast<std::size_t>(n));
    parallel_for(v.size(), [&](std::size_t i) { v[i] = sym.eval(std::polar(rho, kTwoPi * double(i) / n)); });
    return v;
}

} // namespace

// ---------------------------------------------------------------------------
// Plane

namespace {

// Grid geometry of a region map without component labels.
valence::RegionMap unlabeled_map(const Symbol &sym, double rho, const valence::RegionOptions &opt)
{
    valence::RegionMap m;
    m.rho = rho;
    m.grid_n = opt.grid_n;
    m.degree = sym.degree();
    m.curve = valence::build_curve(sym, rho, opt.curve);
    auto [lo, hi] = m.curve.bbox();
    if (opt.cover_radius > 0.0) {
        lo = cplx(std::min(lo.real(), -opt.cover_radius), std::min(lo.imag(), -opt.cover_radius));
        hi = cplx(std::max(hi.real(), opt.cover_radius), std::max(hi.imag(), opt.cover_radius));
    }
    const cplx mid = 0.5 * (lo + hi);
    const double side = 1.25 * std::max(hi.real() - lo.real(), hi.imag() - lo.imag());
    m.lo = mid - cplx(0.5 * side, 0.5 * side);
    m.hi = mid + cplx(0.5 * side, 0.5 * side);
    m.cell = side / opt.grid_n;
    m.band = m.curve.band();
    return m;
}

} // namespace

Plane Plane::build(const Symbol &phi, double rho, const PlaneOptions &opt)
{
    Plane p;
    p.degree_ = phi.degree();
    bool invert = opt.mode == PlaneMode::Inverted;
    if (opt.mode == PlaneMode::Auto) {
        const std::vector<cplx> s = boundary_samples(phi, rho, 4096);
        double x0 = s[0].real(), x1 = x0, y0 = s[0].imag(), y1 = y0, dmin = std::numeric_limits<double>::infinity();
        for (const cplx &v : s) {
            x0 = std::min(x0, v.real());
            x1 = std::max(x1, v.real());
            y0 = std::min(y0, v.imag());
            y1 = std::max(y1, v.imag());
            dmin = std::min(dmin, std::abs(v - opt.mu));
        }
        const double diam = std::hypot(x1 - x0, y1 - y0);
        if (diam > opt.inversion_ratio * dmin) {
            const valence::BoundaryCurve c = valence::build_curve(phi, rho, opt.region.curve);
            try {
                invert = valence::PreimageCounter(phi, c).count(opt.mu) == 0;
            } catch (const Error &) {
                invert = false;
            }
        }
    }
    p.inverted_ = invert;
    p.mu_ = opt.mu;
    valence::RegionOptions ro = opt.region;
    if (invert) {
        p.plane_sym_ = valence::resolvent_symbol(phi, opt.mu);
    } else {
        p.plane_sym_ = phi;
        ro.cover_radius = std::max(ro.cover_radius, 1.5);
    }
    try {
        p.map_ = valence::region_map(p.plane_sym_, rho, ro);
    } catch (const Error &e) {
        if (e.code() != ErrorCode::GridTooCoarse) {
            throw;
        }
        p.labeled_ = false;
        p.notes_.push_back(std::string("component labeling failed (") + e.what() +
                           "); valences are read from per-cell counts and adjacency is unavailable");
        // Per-cell counting costs a full winding sum per cell, so keep the grid modest.
        ro.grid_n = std::min(ro.grid_n, 128);
        p.map_ = unlabeled_map(p.plane_sym_, rho, ro);
    }
    const valence::RegionMap &m = p.map_;
    const std::size_t cells = static_cast<std::size_t>(m.grid_n) * static_cast<std::size_t>(m.grid_n);
    p.cell_k_.assign(cells, -1);
    if (p.labeled_) {
        for (std::size_t i = 0; i < cells; ++i) {
            p.cell_k_[i] = m.grid[i] < 0 ? -1 : m.component(m.grid[i]).k;
        }
    } else {
        const valence::PreimageCounter counter(p.plane_sym_, m.curve);
        parallel_for(cells, [&](std::size_t i) {
            const cplx u = p.cell_center(i);
            if (m.curve.distance(u) <= m.curve.band()) {
                return;
            }
            try {
                p.cell_k_[i] = counter.count(u);
            } catch (const Error &) {
            }
        });
    }
    return p;
}

int Plane::cell_k(std::size_t cell) const
{
    return cell_k_[cell];
}

cplx Plane::cell_center(std::size_t cell) const
{
    const std::size_t gn = static_cast<std::size_t>(map_.grid_n);
    return map_.cell_center(static_cast<int>(cell % gn), static_cast<int>(cell / gn));
}

std::optional<int> Plane::k_of(cplx lambda) const
{
    if (inverted_ && lambda == mu_) {
        return 0;
    }
    const cplx u = to_plane(lambda);
    if (!(map_.curve.distance(u) > map_.curve.band())) {
        return std::nullopt;
    }
    if (labeled_) {
        const int id = map_.component_at(u);
        return id < 0 ? std::nullopt : std::optional<int>(map_.component(id).k);
    }
    try {
        return valence::PreimageCounter(plane_sym_, map_.curve).count(u);
    } catch (const Error &) {
        return std::nullopt;
    }
}

cplx Plane::to_plane(cplx lambda) const
{
    return inverted_ ? 1.0 / (lambda - mu_) : lambda;
}

cplx Plane::from_plane(cplx u) const
{
    return inverted_ ? mu_ + 1.0 / u : u;
}

int Plane::component_of(cplx lambda) const
{
    if (!labeled_) {
        return -1;
    }
    if (inverted_ && lambda == mu_) {
        return map_.unbounded;
    }
    return map_.component_at(to_plane(lambda));
}

int Plane::phi_unbounded() const
{
    if (!labeled_) {
        return -1;
    }
    return inverted_ ? map_.component_at(0.0) : map_.unbounded;
}

std::vector<int> Plane::phi_holes() const
{
    std::vector<int> out;
    const int u = phi_unbounded();
    for (const valence::Component &c : map_.components) {
        if (c.k == 0 && c.id != u) {
            out.push_back(c.id);
        }
    }
    return out;
}

std::optional<cplx> Plane::phi_representative(int id) const
{
    const cplx r = map_.component(id).representative;
    if (inverted_ && std::abs(r) == 0.0) {
        return std::nullopt;
    }
    return from_plane(r);
}

int Plane::count(cplx lambda, double margin) const
{
    if (inverted_ && lambda == mu_) {
        return 0;
    }
    return valence::PreimageCounter(plane_sym_, map_.curve).count(to_plane(lambda), margin * map_.curve.band());
}

double Plane::plane_distance(cplx lambda) const
{
    if (inverted_ && lambda == mu_) {
        return std::numeric_limits<double>::infinity();
    }
    return map_.curve.distance(to_plane(lambda));
}

json Plane::to_json() const
{
    return {{"inverted", inverted_}, {"labeled", labeled_}, {"mu", complex_to_json(mu_)},
            {"phi_unbounded", phi_unbounded()}, {"phi_holes", phi_holes()}, {"notes", notes_}};
}

// ---------------------------------------------------------------------------
// Necessary condition and (spe)

json NecessaryResult::to_json() const
{
    return {{"ok", ok}, {"N", n}, {"max_count", max_count}, {"sampled", sampled},
            {"witness", witness ? json(*witness) : json(nullptr)}, {"witness_point", opt_complex(witness_point)}};
}

NecessaryResult check_necessary(const Plane &plane, int n)
{
    NecessaryResult r;
    r.n = n;
    if (plane.labeled()) {
        r.max_count = plane.map().max_k();
        for (const valence::Component &c : plane.map().components) {
            if (c.k > n) {
                r.witness = c.id;
                r.witness_point = plane.phi_representative(c.id);
                break;
            }
        }
    } else {
        r.sampled = true;
        std::optional<std::size_t> at;
        for (std::size_t i = 0; i < plane.cell_count(); ++i) {
            if (plane.cell_k(i) > r.max_count) {
                r.max_count = plane.cell_k(i);
                at = i;
            }
        }
        if (at && r.max_count > n) {
            const cplx u = plane.cell_center(*at);
            if (!(plane.inverted() && std::abs(u) == 0.0)) {
                r.witness_point = plane.from_plane(u);
            }
        }
    }
    r.ok = r.max_count <= n;
    return r;
}

json SpeResult::to_json() const
{
    return {{"ok", ok}, {"lambda0", opt_complex(lambda0)}, {"lambda1", opt_complex(lambda1)}};
}

namespace {

bool free_point(const Plane &plane, cplx lambda)
{
    const std::optional<int> k = plane.k_of(lambda);
    if (!k || *k != 0) {
        return false;
    }
    if (!(plane.plane_distance(lambda) > 2.0 * plane.map().curve.band())) {
        return false;
    }
    try {
        return plane.count(lambda, 2.0) == 0;
    } catch (const Error &) {
        return false;
    }
}

template <class Pred>
std::optional<cplx> find_free_point(const Plane &plane, const std::vector<cplx> &preferred, Pred inside)
{
    for (const cplx &c : preferred) {
        if (inside(c) && free_point(plane, c)) {
            return c;
        }
    }
    // Fall back to the k = 0 cell farthest from the curve among a strided sample.
    const RegionMap &m = plane.map();
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < plane.cell_count(); ++i) {
        if (plane.cell_k(i) == 0) {
            cells.push_back(i);
        }
    }
    const std::size_t stride = std::max<std::size_t>(1, cells.size() / 2048);
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < cells.size(); i += stride) {
        picked.push_back(cells[i]);
    }
    std::vector<double> dist(picked.size(), -1.0);
    std::vector<cplx> lam(picked.size());
    parallel_for(picked.size(), [&](std::size_t j) {
        const cplx u = plane.cell_center(picked[j]);
        if (plane.inverted() && std::abs(u) == 0.0) {
            return;
        }
        lam[j] = plane.from_plane(u);
        if (inside(lam[j])) {
            dist[j] = m.curve.distance(u);
        }
    });
    std::size_t best = picked.size();
    for (std::size_t j = 0; j < picked.size(); ++j) {
        if (dist[j] > 2.0 * m.curve.band() && (best == picked.size() || dist[j] > dist[best])) {
            best = j;
        }
    }
    for (std::size_t tries = 0; best < picked.size() && tries < 8; ++tries) {
        if (free_point(plane, lam[best])) {
            return lam[best];
        }
        dist[best] = -1.0;
        best = picked.size();
        for (std::size_t j = 0; j < picked.size(); ++j) {
            if (dist[j] > 2.0 * m.curve.band() && (best == picked.size() || dist[j] > dist[best])) {
                best = j;
            }
        }
    }
    return std::nullopt;
}

constexpr double kDiskMargin = 1e-3;

} // namespace

SpeResult check_spe(const Plane &plane)
{
    SpeResult r;
    const std::vector<cplx> in{0.0, 0.5, -0.5, cplx(0, 0.5), cplx(0, -0.5), 0.9, -0.9, cplx(0, 0.9), cplx(0, -0.9)};
    const std::vector<cplx> out{1.5, -1.5, cplx(0, 1.5), cplx(0, -1.5), 2.0, -2.0, cplx(0, 2.0), cplx(0, -2.0),
                                3.0, 5.0, 10.0};
    r.lambda0 = find_free_point(plane, in, [](cplx c) { return std::abs(c) < 1.0 - kDiskMargin; });
    r.lambda1 = find_free_point(plane, out, [](cplx c) { return std::abs(c) > 1.0 + kDiskMargin; });
    r.ok = r.lambda0.has_value() && r.lambda1.has_value();
    return r;
}

// ---------------------------------------------------------------------------
// MVC

json MvcResult::to_json() const
{
    return {{"verdict", to_string(verdict)}, {"rho", rho}, {"k_values", k_values},
            {"counterexample", opt_complex(counterexample)}, {"reason", reason}};
}

MvcResult check_mvc(const Plane &plane, int n)
{
    MvcResult r;
    r.rho = plane.rho();
    std::set<int> ks;
    if (plane.labeled()) {
        for (const valence::Component &c : plane.map().components) {
            ks.insert(c.k);
            if (c.k >= 1 && c.k != n && r.reason.empty()) {
                r.counterexample = plane.phi_representative(c.id);
                r.reason = "component " + std::to_string(c.id) + " has " + std::to_string(c.k) +
                           " preimages, N = " + std::to_string(n);
            }
        }
    } else {
        for (std::size_t i = 0; i < plane.cell_count(); ++i) {
            const int k = plane.cell_k(i);
            if (k < 0) {
                continue;
            }
            ks.insert(k);
            if (k >= 1 && k != n && r.reason.empty()) {
                const cplx u = plane.cell_center(i);
                if (!(plane.inverted() && std::abs(u) == 0.0)) {
                    r.counterexample = plane.from_plane(u);
                }
                r.reason = "a sampled cell has " + std::to_string(k) + " preimages, N = " + std::to_string(n);
            }
        }
    }
    r.k_values.assign(ks.begin(), ks.end());
    r.verdict = r.reason.empty() ? Tri::Pass : Tri::Fail;
    return r;
}

MvcResult check_mvc(const Symbol &sym, const PlaneOptions &opt)
{
    if (!(sym.analytic_radius() > 1.0)) {
        MvcResult r;
        r.reason = "tail only claimed in A(D); closed-disk counts need analyticity across the circle";
        return r;
    }
    return check_mvc(Plane::build(sym, valence::rho_plus(sym), opt), sym.degree());
}

// ---------------------------------------------------------------------------
// IAC

json IacResult::to_json() const
{
    return {{"verdict", to_string(verdict)}, {"lambda", complex_to_json(lambda)},
            {"min_derivative", min_derivative}, {"total_turns", total_turns},
            {"zero_count", zero_count}, {"max_curvature", max_curvature}, {"notes", notes}};
}

namespace {

// Phase increment of h = 1/(Phi - lambda) over [ta, tb], subdividing while a
// single step exceeds pi/4. Tracks the smallest sub-increment.
double phase_step(const Symbol &sym, cplx lambda, double ta, double tb, cplx ha, cplx hb, int depth, double &min_inc)
{
    const double d = std::arg(hb / ha);
    if (std::abs(d) <= kPi / 4 || depth >= 30) {
        min_inc = std::min(min_inc, d);
        return d;
    }
    const double tm = 0.5 * (ta + tb);
    const cplx hm = 1.0 / (sym.eval(std::polar(1.0, tm)) - lambda);
    return phase_step(sym, lambda, ta, tm, ha, hm, depth + 1, min_inc) +
           phase_step(sym, lambda, tm, tb, hm, hb, depth + 1, min_inc);
}

} // namespace

IacResult check_iac(const Symbol &sym, cplx lambda, int samples)
{
    (void)resolvent(sym, lambda);
    IacResult r;
    r.lambda = lambda;
    const std::size_t m = static_cast<std::size_t>(samples);
    std::vector<double> deriv(m);
    CVec h(m);
    parallel_for(m, [&](std::size_t i) {
        const cplx z = std::polar(1.0, kTwoPi * double(i) / double(m));
        const Jet j = sym.jet(z);
        const cplx v = j.value - lambda;
        h[i] = 1.0 / v;
        deriv[i] = -(z * j.deriv / v).real();
    });
    r.min_derivative = *std::min_element(deriv.begin(), deriv.end());

    std::vector<double> inc(m), min_inc(m, std::numeric_limits<double>::infinity());
    parallel_for(m, [&](std::size_t i) {
        const std::size_t j = (i + 1) % m;
        const double ta = kTwoPi * double(i) / double(m);
        inc[i] = phase_step(sym, lambda, ta, ta + kTwoPi / double(m), h[i], h[j], 0, min_inc[i]);
    });
    double total = 0.0, smallest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        total += inc[i];
        smallest = std::min(smallest, min_inc[i]);
    }
    r.total_turns = total / kTwoPi;
    const long turns = std::lround(r.total_turns);
    r.zero_count = static_cast<int>(turns);

    double x0 = h[0].real(), x1 = x0, y0 = h[0].imag(), y1 = y0;
    for (const cplx &v : h) {
        x0 = std::min(x0, v.real());
        x1 = std::max(x1, v.real());
        y0 = std::min(y0, v.imag());
        y1 = std::max(y1, v.imag());
    }
    const double diam = std::hypot(x1 - x0, y1 - y0);
    for (std::size_t i = 0; i < m; ++i) {
        const cplx a = h[(i + m - 1) % m], b = h[i], c = h[(i + 1) % m];
        const double den = std::abs(b - a) * std::abs(c - b) * std::abs(c - a);
        if (den > 0.0) {
            const double cr = ((b - a).real() * (c - a).imag() - (b - a).imag() * (c - a).real());
            r.max_curvature = std::max(r.max_curvature, 2.0 * std::abs(cr) / den * diam);
        }
    }
    r.notes.emplace_back("C2 smoothness of the arcs is only sampled through discrete curvature");

    const bool integral = std::abs(r.total_turns - double(turns)) < 1e-6;
    if (!integral) {
        r.notes.emplace_back("total phase increment is not a multiple of 2 pi");
        r.verdict = Tri::Inconclusive;
        return r;
    }
    // Winding of h = (poles of Phi in D) - (preimages of lambda in D).
    const int preimages = sym.pole_count(1.0) - r.zero_count;
    THC_FAIL_IF(preimages != 0, LambdaInRange,
                "lambda has " + std::to_string(preimages) + " preimages in the disk by the boundary phase");
    const bool increasing = r.min_derivative > 0.0 && smallest > 0.0;
    r.verdict = increasing && turns > 0 ? Tri::Pass : Tri::Fail;
    return r;
}

// ---------------------------------------------------------------------------
// DVC

json ChainCertificate::to_json() const
{
    return {{"component", component}, {"chain", chain}};
}

json DvcResult::to_json() const
{
    json ch = json::array();
    for (const ChainCertificate &c : chains) {
        ch.push_back(c.to_json());
    }
    return {{"verdict", to_string(verdict)}, {"targets", targets}, {"chains", std::move(ch)},
            {"blocked", blocked}, {"notes", notes}};
}

DvcResult descending_chains(const RegionMap &map, int target)
{
    DvcResult r;
    r.targets = {target};
    const std::size_t nc = map.components.size();
    std::vector<int> next(nc, -2); // -2: unreached
    int max_k = map.max_k();
    for (int k = 1; k <= max_k; ++k) {
        for (const valence::Component &c : map.components) {
            if (c.k != k) {
                continue;
            }
            for (int nb : map.neighbors(c.id)) {
                const bool ok_step = k == 1 ? nb == target
                                            : map.component(nb).k == k - 1 && next[static_cast<std::size_t>(nb)] != -2;
                if (ok_step) {
                    next[static_cast<std::size_t>(c.id)] = nb;
                    break;
                }
            }
        }
    }
    for (const valence::Component &c : map.components) {
        if (c.k < 1) {
            continue;
        }
        if (next[static_cast<std::size_t>(c.id)] == -2) {
            r.blocked.push_back(c.id);
            continue;
        }
        ChainCertificate cert;
        cert.component = c.id;
        int cur = c.id;
        cert.chain.push_back(cur);
        while (cur != target) {
            cur = next[static_cast<std::size_t>(cur)];
            cert.chain.push_back(cur);
        }
        r.chains.push_back(std::move(cert));
    }
    r.verdict = r.blocked.empty() ? Tri::Pass : Tri::Fail;
    return r;
}

namespace {

void apply_general_position(DvcResult &r, const valence::GeneralPositionReport &gp)
{
    if (!gp.ok()) {
        r.notes.emplace_back("symbol is not of general position; adjacency chains are not conclusive");
        for (const std::string &n : gp.notes) {
            r.notes.push_back(n);
        }
        r.verdict = Tri::Inconclusive;
    }
}

} // namespace

DvcResult check_dvc(const Plane &plane, const valence::GeneralPositionReport &gp, cplx lambda0, cplx lambda1)
{
    THC_FAIL_IF(!(std::abs(lambda0) < 1.0), ParamInvalid, "lambda0 must lie in the open unit disk");
    THC_FAIL_IF(!(std::abs(lambda1) > 1.0), ParamInvalid, "lambda1 must lie outside the closed unit disk");
    if (!plane.labeled()) {
        DvcResult r;
        r.notes.emplace_back("no labeled region map, so adjacency chains cannot be built");
        return r;
    }
    const RegionMap &m = plane.map();
    std::vector<int> targets;
    for (cplx l : {lambda0, lambda1}) {
        const int id = plane.component_of(l);
        THC_FAIL_IF(id < 0 || m.component(id).k != 0, LambdaNotInHole,
                    "lambda does not lie in a component without preimages");
        targets.push_back(id);
    }
    DvcResult r = descending_chains(m, targets[0]);
    std::set<int> blocked(r.blocked.begin(), r.blocked.end());
    if (targets[1] != targets[0]) {
        DvcResult r1 = descending_chains(m, targets[1]);
        blocked.insert(r1.blocked.begin(), r1.blocked.end());
        for (ChainCertificate &c : r1.chains) {
            r.chains.push_back(std::move(c));
        }
    }
    r.targets = targets;
    r.blocked.assign(blocked.begin(), blocked.end());
    r.verdict = r.blocked.empty() ? Tri::Pass : Tri::Fail;
    apply_general_position(r, gp);
    return r;
}

DvcResult check_dvc_prime(const RegionMap &map, const valence::GeneralPositionReport &gp)
{
    THC_FAIL_IF(map.component(map.unbounded).k != 0, LambdaNotInHole,
                "the unbounded component has preimages; the map is not of an analytic function");
    DvcResult r = descending_chains(map, map.unbounded);
    apply_general_position(r, gp);
    return r;
}

// ---------------------------------------------------------------------------
// Spectrum

std::size_t SpectrumMask::count() const
{
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

std::string SpectrumMask::to_csv() const
{
    std::string out = "x,y,in_spectrum\n";
    for (int iy = 0; iy < grid_n; ++iy) {
        for (int ix = 0; ix < grid_n; ++ix) {
            const cplx c = lo + cplx((ix + 0.5) * cell, (iy + 0.5) * cell);
            out += valence::fmt17(c.real());
            out += ',';
            out += valence::fmt17(c.imag());
            out += mask[static_cast<std::size_t>(iy) * static_cast<std::size_t>(grid_n) + static_cast<std::size_t>(ix)]
                       ? ",1\n"
                       : ",0\n";
        }
    }
    return out;
}

json SpectrumMask::to_json() const
{
    return {{"grid_n", grid_n}, {"lo", complex_to_json(lo)}, {"cell", cell}, {"inverted", inverted},
            {"mu", complex_to_json(mu)}, {"cells_in_spectrum", count()}};
}

SpectrumMask spectrum_estimate(const Plane &plane, int n)
{
    const RegionMap &m = plane.map();
    SpectrumMask s;
    s.grid_n = m.grid_n;
    s.lo = m.lo;
    s.cell = m.cell;
    s.inverted = plane.inverted();
    s.mu = plane.mu();
    s.mask.resize(plane.cell_count());
    for (std::size_t i = 0; i < plane.cell_count(); ++i) {
        s.mask[i] = plane.cell_k(i) < n ? 1 : 0;
    }
    return s;
}

// ---------------------------------------------------------------------------
// classify

json ClassifyOptions::to_json() const
{
    return {{"grid_n", plane.region.grid_n},
            {"mesh", plane.region.curve.mesh},
            {"auto_refine", plane.region.auto_refine},
            {"max_grid", plane.region.max_grid},
            {"plane_mode", plane.mode == PlaneMode::Auto ? "auto" : plane.mode == PlaneMode::Direct ? "direct" : "inverted"},
            {"mu", complex_to_json(plane.mu)},
            {"lambda_iac", opt_complex(lambda_iac)},
            {"lambda0", opt_complex(lambda0)},
            {"lambda1", opt_complex(lambda1)},
            {"iac_probes", iac_probes}};
}

json ConditionReport::to_json() const
{
    return {{"N", n},
            {"verdict", to_string(verdict)},
            {"n_valent", necessary.to_json()},
            {"spe", spe.to_json()},
            {"mvc", mvc.to_json()},
            {"iac", iac.to_json()},
            {"dvc", dvc.to_json()},
            {"general_position", general_position.to_json()},
            {"plane", {{"inverted", plane_inverted}, {"mu", complex_to_json(plane_mu)}}},
            {"sup_boundary", sup_boundary},
            {"notes", notes}};
}

std::vector<cplx> lambda_lattice(const Plane &plane, const SpeResult &spe, int probes)
{
    std::vector<cplx> out;
    if (spe.lambda0) {
        out.push_back(*spe.lambda0);
    }
    if (spe.lambda1) {
        out.push_back(*spe.lambda1);
    }
    const RegionMap &m = plane.map();
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < plane.cell_count(); ++i) {
        if (plane.cell_k(i) == 0) {
            cells.push_back(i);
        }
    }
    const int want = std::max(0, probes - static_cast<int>(out.size()));
    for (int j = 0; j < want && !cells.empty(); ++j) {
        const std::size_t i = cells[(cells.size() * (2 * std::size_t(j) + 1)) / (2 * std::size_t(want))];
        const cplx u = plane.cell_center(i);
        if (plane.inverted() && std::abs(u) == 0.0) {
            continue;
        }
        if (m.curve.distance(u) > 2.0 * m.curve.band()) {
            out.push_back(plane.from_plane(u));
        }
    }
    return out;
}

ConditionReport classify(const Symbol &sym, const ClassifyOptions &opt)
{
    ConditionReport rep;
    rep.n = sym.degree();
    const Plane plane = Plane::build(sym, 1.0, opt.plane);
    rep.plane_inverted = plane.inverted();
    rep.plane_mu = plane.mu();
    const valence::BoundaryCurve &curve = plane.map().curve;
    rep.general_position = valence::general_position(plane.plane_symbol(), curve);
    rep.necessary = check_necessary(plane, rep.n);
    for (const std::string &w : plane.map().warnings) {
        rep.notes.push_back("region map: " + w);
    }
    for (const std::string &w : plane.notes()) {
        rep.notes.push_back(w);
    }

    if (opt.lambda0 || opt.lambda1) {
        SpeResult s = check_spe(plane);
        if (opt.lambda0) {
            s.lambda0 = free_point(plane, *opt.lambda0) && std::abs(*opt.lambda0) < 1.0 ? opt.lambda0 : std::nullopt;
        }
        if (opt.lambda1) {
            s.lambda1 = free_point(plane, *opt.lambda1) && std::abs(*opt.lambda1) > 1.0 ? opt.lambda1 : std::nullopt;
        }
        s.ok = s.lambda0 && s.lambda1;
        rep.spe = s;
    } else {
        rep.spe = check_spe(plane);
    }

    if (sym.analytic_radius() > 1.0) {
        PlaneOptions po = opt.plane;
        po.mode = plane.inverted() ? PlaneMode::Inverted : PlaneMode::Direct;
        po.mu = plane.mu();
        try {
            rep.mvc = check_mvc(Plane::build(sym, valence::rho_plus(sym), po), rep.n);
        } catch (const Error &e) {
            rep.mvc.reason = e.what();
        }
    } else {
        rep.mvc = check_mvc(sym, opt.plane);
    }

    {
        const std::vector<cplx> lams = opt.lambda_iac ? std::vector<cplx>{*opt.lambda_iac}
                                                      : lambda_lattice(plane, rep.spe, opt.iac_probes);
        std::vector<std::optional<IacResult>> res(lams.size());
        parallel_for(lams.size(), [&](std::size_t i) {
            try {
                res[i] = check_iac(sym, lams[i]);
            } catch (const Error &) {
            }
        });
        std::optional<IacResult> best;
        for (const auto &r : res) {
            if (!r) {
                continue;
            }
            if (r->verdict == Tri::Pass) {
                best = r;
                break;
            }
            if (!best || r->min_derivative > best->min_derivative) {
                best = r;
            }
        }
        if (best) {
            rep.iac = *best;
            if (!opt.lambda_iac && rep.iac.verdict == Tri::Fail) {
                rep.iac.notes.push_back("no lambda on the " + std::to_string(lams.size()) +
                                        "-point probe set has increasing argument");
            }
        } else {
            rep.iac.notes.emplace_back("no admissible lambda for the argument test");
        }
    }

    if (rep.spe.ok) {
        try {
            rep.dvc = check_dvc(plane, rep.general_position, *rep.spe.lambda0, *rep.spe.lambda1);
        } catch (const Error &e) {
            rep.dvc.notes.emplace_back(e.what());
        }
    } else {
        rep.dvc.notes.emplace_back("no witnesses lambda0, lambda1 without preimages");
    }

    const std::vector<cplx> s = boundary_samples(sym, 1.0, 4096);
    for (const cplx &v : s) {
        rep.sup_boundary = std::max(rep.sup_boundary, std::abs(v));
    }
    if (rep.sup_boundary < 1.0) {
        rep.notes.emplace_back("sup |Phi| on the circle is below 1, so ||T_Phi|| < 1 and T_Phi is not hypercyclic");
    }

    if (!rep.necessary.ok) {
        rep.verdict = Verdict::NecessaryFailed;
    } else if (!rep.spe.ok) {
        rep.verdict = Verdict::Inconclusive;
    } else if (rep.mvc.verdict == Tri::Pass) {
        rep.verdict = Verdict::CertifiedMVC;
    } else if (rep.iac.verdict == Tri::Pass) {
        rep.verdict = Verdict::CertifiedIAC;
    } else if (rep.dvc.verdict == Tri::Pass) {
        rep.verdict = Verdict::CertifiedDVC;
    } else {
        rep.verdict = Verdict::Inconclusive;
    }
    return rep;
}

} // namespace toeplitz_hc::conditions
