#include "toeplitz_hc/valence.hpp"

#include "toeplitz_hc/conformal.hpp"
#include "toeplitz_hc/error.hpp"
#include "toeplitz_hc/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace toeplitz_hc::valence {

namespace {

struct CurvePoint {
    cplx value;
    cplx tangent;
};

CurvePoint curve_point(const Symbol &sym, double rho, double t)
{
    const cplx z = std::polar(rho, t);
    const Jet j = sym.jet(z);
    return {j.value, j.deriv * cplx(0.0, 1.0) * z};
}

double segment_distance(cplx w, cplx a, cplx b)
{
    const cplx d = b - a;
    const double len2 = std::norm(d);
    double u = 0.0;
    if (len2 > 0.0) {
        u = std::clamp(((w - a) * std::conj(d)).real() / len2, 0.0, 1.0);
    }
    return std::abs(w - (a + u * d));
}

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

/// Proper intersection of segments [p, p2] and [q, q2] with half-open
/// parameters u, v in [0, 1).
bool segments_cross(cplx p, cplx p2, cplx q, cplx q2, double &u, double &v)
{
    const cplx r = p2 - p, s = q2 - q;
    const double den = cross(r, s);
    if (std::abs(den) <= 1e-14 * std::abs(r) * std::abs(s)) {
        return false;
    }
    u = cross(q - p, s) / den;
    v = cross(q - p, r) / den;
    return u >= 0.0 && u < 1.0 && v >= 0.0 && v < 1.0;
}

double wrap_2pi(double t)
{
    t = std::fmod(t, kTwoPi);
    return t < 0.0 ? t + kTwoPi : t;
}

double acute_angle_deg(cplx a, cplx b)
{
    const double c = std::abs((a * std::conj(b)).real()) / (std::abs(a) * std::abs(b));
    return std::acos(std::clamp(c, 0.0, 1.0)) * 180.0 / kPi;
}

void find_self_intersections(const Symbol &sym, BoundaryCurve &c, const CurveOptions &opt)
{
    const std::size_t n = c.size();
    const double cell = std::max(2.0 * c.max_spacing, 1e-300);
    std::unordered_map<std::int64_t, std::vector<std::uint32_t>> buckets;
    const auto key = [](std::int64_t ix, std::int64_t iy) { return ix * 4000037LL + iy; };
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = c.value[i], b = c.value[(i + 1) % n];
        const auto x0 = static_cast<std::int64_t>(std::floor(std::min(a.real(), b.real()) / cell));
        const auto x1 = static_cast<std::int64_t>(std::floor(std::max(a.real(), b.real()) / cell));
        const auto y0 = static_cast<std::int64_t>(std::floor(std::min(a.imag(), b.imag()) / cell));
        const auto y1 = static_cast<std::int64_t>(std::floor(std::max(a.imag(), b.imag()) / cell));
        for (auto ix = x0; ix <= x1; ++ix) {
            for (auto iy = y0; iy <= y1; ++iy) {
                buckets[key(ix, iy)].push_back(static_cast<std::uint32_t>(i));
            }
        }
    }
    std::set<std::pair<std::uint32_t, std::uint32_t>> tested;
    struct Raw {
        std::uint32_t i, j;
        double u, v;
    };
    std::vector<Raw> raw;
    for (const auto &[k, segs] : buckets) {
        for (std::size_t x = 0; x < segs.size(); ++x) {
            for (std::size_t y = x + 1; y < segs.size(); ++y) {
                std::uint32_t i = std::min(segs[x], segs[y]), j = std::max(segs[x], segs[y]);
                if (j == i + 1 || (i == 0 && j == n - 1)) {
                    continue;
                }
                if (!tested.insert({i, j}).second) {
                    continue;
                }
                double u = 0.0, v = 0.0;
                if (segments_cross(c.value[i], c.value[(i + 1) % n], c.value[j], c.value[(j + 1) % n], u, v)) {
                    raw.push_back({i, j, u, v});
                }
            }
        }
    }
    std::sort(raw.begin(), raw.end(), [](const Raw &a, const Raw &b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });

    const auto t_at = [&](std::uint32_t i, double u) {
        const double ta = c.t[i];
        const double tb = i + 1 < n ? c.t[i + 1] : kTwoPi;
        return ta + u * (tb - ta);
    };
    std::vector<SelfIntersection> out;
    for (const Raw &r : raw) {
        if (out.size() >= opt.max_intersections) {
            c.intersections_truncated = true;
            break;
        }
        double t1 = t_at(r.i, r.u), t2 = t_at(r.j, r.v);
        const double span1 = (r.i + 1 < n ? c.t[r.i + 1] : kTwoPi) - c.t[r.i];
        const double span2 = (r.j + 1 < n ? c.t[r.j + 1] : kTwoPi) - c.t[r.j];
        const double lin1 = t1, lin2 = t2;
        bool converged = false;
        for (int it = 0; it < 40; ++it) {
            const CurvePoint p1 = curve_point(sym, c.radius, t1);
            const CurvePoint p2 = curve_point(sym, c.radius, t2);
            const cplx f = p1.value - p2.value;
            // Solve Re/Im of  T1 d1 - T2 d2 = -f.
            const double a11 = p1.tangent.real(), a12 = -p2.tangent.real();
            const double a21 = p1.tangent.imag(), a22 = -p2.tangent.imag();
            const double det = a11 * a22 - a12 * a21;
            if (det == 0.0) {
                break;
            }
            const double d1 = (-f.real() * a22 + f.imag() * a12) / det;
            const double d2 = (-f.imag() * a11 + f.real() * a21) / det;
            t1 += d1;
            t2 += d2;
            if (std::abs(t1 - lin1) > 4 * span1 + 1e-12 || std::abs(t2 - lin2) > 4 * span2 + 1e-12) {
                break;
            }
            if (std::abs(d1) + std::abs(d2) < 1e-13) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            t1 = lin1;
            t2 = lin2;
        }
        t1 = wrap_2pi(t1);
        t2 = wrap_2pi(t2);
        if (t1 > t2) {
            std::swap(t1, t2);
        }
        const CurvePoint p1 = curve_point(sym, c.radius, t1);
        const CurvePoint p2 = curve_point(sym, c.radius, t2);
        out.push_back({t1, t2, 0.5 * (p1.value + p2.value), acute_angle_deg(p1.tangent, p2.tangent)});
    }
    std::sort(out.begin(), out.end(), [](const SelfIntersection &a, const SelfIntersection &b) {
        return std::tie(a.t1, a.t2) < std::tie(b.t1, b.t2);
    });
    std::vector<SelfIntersection> dedup;
    for (const SelfIntersection &s : out) {
        bool dup = false;
        for (const SelfIntersection &d : dedup) {
            if (std::abs(d.t1 - s.t1) < 1e-9 && std::abs(d.t2 - s.t2) < 1e-9) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            dedup.push_back(s);
        }
    }
    c.self_intersections = std::move(dedup);
}

int detect_multiplicity(const Symbol &sym, const BoundaryCurve &c)
{
    const double tol = 1e-9 * std::max(c.diameter, 1e-300);
    for (int p = 8; p >= 2; --p) {
        bool periodic = true;
        for (int s = 0; s < 12 && periodic; ++s) {
            const double t = 0.37 + 0.513 * s;
            const cplx a = sym.eval(std::polar(c.radius, t));
            const cplx b = sym.eval(std::polar(c.radius, t + kTwoPi / p));
            periodic = std::abs(a - b) <= tol;
        }
        if (periodic) {
            return p;
        }
    }
    return 1;
}

} // namespace

std::pair<cplx, cplx> BoundaryCurve::bbox() const
{
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const cplx &v : value) {
        x0 = std::min(x0, v.real());
        x1 = std::max(x1, v.real());
        y0 = std::min(y0, v.imag());
        y1 = std::max(y1, v.imag());
    }
    return {cplx(x0, y0), cplx(x1, y1)};
}

double BoundaryCurve::distance(cplx w) const
{
    double d = std::numeric_limits<double>::infinity();
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        d = std::min(d, segment_distance(w, value[i], value[(i + 1) % n]));
    }
    return d;
}

BoundaryCurve build_curve(const Symbol &sym, double rho, const CurveOptions &opt)
{
    THC_FAIL_IF(!(rho > 0.0) || rho > sym.analytic_radius(), DomainViolation,
                "curve radius must lie in (0, analytic_radius]");
    for (const PoleSite &p : sym.poles()) {
        THC_FAIL_IF(std::abs(std::abs(p.location) - rho) < 1e-12, PoleHit, "a pole lies on the curve circle");
    }
    BoundaryCurve c;
    c.radius = rho;
    const std::size_t n0 = static_cast<std::size_t>(std::max(opt.initial_samples, 16));
    c.t.resize(n0);
    c.value.resize(n0);
    c.tangent.resize(n0);
    parallel_for(n0, [&](std::size_t i) {
        c.t[i] = kTwoPi * double(i) / double(n0);
        const CurvePoint p = curve_point(sym, rho, c.t[i]);
        c.value[i] = p.value;
        c.tangent[i] = p.tangent;
    });
    {
        const auto [lo, hi] = c.bbox();
        c.diameter = std::abs(hi - lo);
    }
    THC_FAIL_IF(!std::isfinite(c.diameter), Overflow, "boundary curve is not finite");
    c.mesh_abs = opt.mesh * std::max(c.diameter, 1e-300);

    for (;;) {
        const std::size_t n = c.size();
        std::vector<std::size_t> split;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = (i + 1) % n;
            const double dt = (j == 0 ? kTwoPi : c.t[j]) - c.t[i];
            const double chord = std::abs(c.value[j] - c.value[i]);
            const double arc = 0.5 * (std::abs(c.tangent[i]) + std::abs(c.tangent[j])) * dt;
            const double turn = acute_angle_deg(c.tangent[i], c.tangent[j]);
            const bool turning = (c.tangent[i] * std::conj(c.tangent[j])).real() < 0.0 || turn > 20.0;
            if (std::max(chord, arc) > c.mesh_abs || (turning && chord > 1e-3 * c.mesh_abs)) {
                split.push_back(i);
            }
        }
        if (split.empty()) {
            break;
        }
        THC_FAIL_IF(n + split.size() > opt.max_samples, MeshOverflow, "boundary curve needs more than 2^22 samples");
        std::vector<CurvePoint> mids(split.size());
        std::vector<double> tm(split.size());
        parallel_for(split.size(), [&](std::size_t s) {
            const std::size_t i = split[s];
            const std::size_t j = (i + 1) % n;
            tm[s] = 0.5 * (c.t[i] + (j == 0 ? kTwoPi : c.t[j]));
            mids[s] = curve_point(sym, rho, tm[s]);
        });
        BoundaryCurve next;
        next.t.reserve(n + split.size());
        next.value.reserve(n + split.size());
        next.tangent.reserve(n + split.size());
        std::size_t s = 0;
        for (std::size_t i = 0; i < n; ++i) {
            next.t.push_back(c.t[i]);
            next.value.push_back(c.value[i]);
            next.tangent.push_back(c.tangent[i]);
            if (s < split.size() && split[s] == i) {
                next.t.push_back(tm[s]);
                next.value.push_back(mids[s].value);
                next.tangent.push_back(mids[s].tangent);
                ++s;
            }
        }
        c.t = std::move(next.t);
        c.value = std::move(next.value);
        c.tangent = std::move(next.tangent);
    }
    const std::size_t n = c.size();
    for (std::size_t i = 0; i < n; ++i) {
        c.max_spacing = std::max(c.max_spacing, std::abs(c.value[(i + 1) % n] - c.value[i]));
    }
    c.multiplicity = detect_multiplicity(sym, c);
    if (c.multiplicity == 1) {
        find_self_intersections(sym, c, opt);
    }
    return c;
}

PreimageCounter::PreimageCounter(const Symbol &sym, const BoundaryCurve &curve)
    : sym_(&sym), curve_(&curve), poles_inside_(sym.pole_count(curve.radius))
{
}

double PreimageCounter::bisect(double ta, double tb, cplx a, cplx b, cplx w, int depth) const
{
    THC_FAIL_IF(depth > 40, PhaseUnresolved, "phase bisection exceeded depth 40");
    const double tm = 0.5 * (ta + tb);
    const cplx m = sym_->eval(std::polar(curve_->radius, tm)) - w;
    THC_FAIL_IF(m == cplx(0.0), TooCloseToCurve, "probe point lies on the curve");
    double total = 0.0;
    const double d1 = std::arg(m / a);
    total += std::abs(d1) > kPi / 2 ? bisect(ta, tm, a, m, w, depth + 1) : d1;
    const double d2 = std::arg(b / m);
    total += std::abs(d2) > kPi / 2 ? bisect(tm, tb, m, b, w, depth + 1) : d2;
    return total;
}

int PreimageCounter::winding(cplx w, double min_distance) const
{
    const BoundaryCurve &c = *curve_;
    const std::size_t n = c.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const cplx a = c.value[i] - w, b = c.value[j] - w;
        THC_FAIL_IF(segment_distance(w, c.value[i], c.value[j]) <= min_distance || a == cplx(0.0), TooCloseToCurve,
                    "probe point is within the curve band");
        const double d = std::arg(b / a);
        if (std::abs(d) > kPi / 2) {
            total += bisect(c.t[i], j == 0 ? kTwoPi : c.t[j], a, b, w, 0);
        } else {
            total += d;
        }
    }
    const double turns = total / kTwoPi;
    const long r = std::lround(turns);
    THC_FAIL_IF(std::abs(turns - double(r)) > 1e-3, PhaseUnresolved, "winding sum is not an integer");
    return static_cast<int>(r);
}

int PreimageCounter::count(cplx w, std::optional<double> min_distance) const
{
    return winding(w, min_distance.value_or(curve_->band())) + poles_inside_;
}

int preimage_count(const Symbol &sym, cplx w, double rho)
{
    const BoundaryCurve c = build_curve(sym, rho);
    return PreimageCounter(sym, c).count(w);
}

json GeneralPositionReport::to_json() const
{
    return {{"ok", ok()},
            {"precondition_ok", precondition_ok},
            {"simple_crossings", simple_crossings},
            {"derivative_nonzero", derivative_nonzero},
            {"multiplicity", multiplicity},
            {"intersection_count", intersection_count},
            {"min_angle_deg", min_angle_deg},
            {"min_derivative", min_derivative},
            {"derivative_witness", complex_to_json(derivative_witness)},
            {"notes", notes}};
}

GeneralPositionReport general_position(const Symbol &sym, const BoundaryCurve &curve, double derivative_min,
                                       double transversality_min_deg)
{
    GeneralPositionReport r;
    if (std::abs(curve.radius - 1.0) > 1e-12) {
        r.precondition_ok = false;
        r.notes.emplace_back("curve not built on the unit circle");
    }
    if (!(sym.analytic_radius() > 1.0)) {
        r.precondition_ok = false;
        r.notes.emplace_back("symbol is not claimed analytic across the unit circle");
    }
    r.multiplicity = curve.multiplicity;
    if (curve.multiplicity > 1) {
        r.simple_crossings = false;
        r.notes.push_back("curve retraces itself " + std::to_string(curve.multiplicity) + " times");
    }
    if (curve.intersections_truncated) {
        r.simple_crossings = false;
        r.notes.emplace_back("self-intersection list truncated");
    }
    r.intersection_count = curve.self_intersections.size();
    for (const SelfIntersection &s : curve.self_intersections) {
        r.min_angle_deg = std::min(r.min_angle_deg, s.angle_deg);
    }
    if (r.min_angle_deg < transversality_min_deg) {
        r.simple_crossings = false;
        r.notes.emplace_back("a self-intersection is not transversal");
    }
    const double ptol = 1e-9 * std::max(curve.diameter, 1e-300);
    const auto &si = curve.self_intersections;
    for (std::size_t i = 0; i < si.size() && r.simple_crossings; ++i) {
        for (std::size_t j = i + 1; j < si.size(); ++j) {
            if (std::abs(si[i].point - si[j].point) < ptol) {
                r.simple_crossings = false;
                r.notes.emplace_back("a self-intersection point is shared by three or more parameters");
                break;
            }
        }
    }

    // |Phi'| on the circle equals |d/dt Phi| / rho; refine sampled local minima.
    const std::size_t n = curve.size();
    const auto dnorm = [&](double t) {
        return std::abs(sym.derivative(std::polar(curve.radius, t)));
    };
    double best = std::numeric_limits<double>::infinity();
    double best_t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::abs(curve.tangent[i]) / curve.radius;
        const double vp = std::abs(curve.tangent[(i + n - 1) % n]) / curve.radius;
        const double vn = std::abs(curve.tangent[(i + 1) % n]) / curve.radius;
        if (v < best) {
            best = v;
            best_t = curve.t[i];
        }
        if (v <= vp && v <= vn) {
            double lo = i == 0 ? curve.t[n - 1] - kTwoPi : curve.t[i - 1];
            double hi = i + 1 < n ? curve.t[i + 1] : kTwoPi;
            const double g = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
            double f1 = dnorm(x1), f2 = dnorm(x2);
            for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
                if (f1 < f2) {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - g * (hi - lo);
                    f1 = dnorm(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + g * (hi - lo);
                    f2 = dnorm(x2);
                }
            }
            const double tb = f1 < f2 ? x1 : x2;
            const double fb = std::min(f1, f2);
            if (fb < best) {
                best = fb;
                best_t = wrap_2pi(tb);
            }
        }
    }
    r.min_derivative = best;
    r.derivative_witness = std::polar(curve.radius, best_t);
    if (best < derivative_min) {
        r.derivative_nonzero = false;
        r.notes.emplace_back("Phi' vanishes on the circle");
    }
    return r;
}

std::string fmt17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

cplx RegionMap::cell_center(int ix, int iy) const
{
    return lo + cplx((ix + 0.5) * cell, (iy + 0.5) * cell);
}

int RegionMap::component_at(cplx w) const
{
    const cplx d = (w - lo) / cell;
    const int ix = static_cast<int>(std::floor(d.real()));
    const int iy = static_cast<int>(std::floor(d.imag()));
    if (ix < 0 || iy < 0 || ix >= grid_n || iy >= grid_n) {
        return unbounded;
    }
    return grid[static_cast<std::size_t>(iy) * static_cast<std::size_t>(grid_n) + static_cast<std::size_t>(ix)];
}

int RegionMap::max_k() const
{
    int m = 0;
    for (const Component &c : components) {
        m = std::max(m, c.k);
    }
    return m;
}

std::vector<int> RegionMap::neighbors(int id) const
{
    std::vector<int> out;
    for (const AdjacencyEdge &e : edges) {
        if (e.a == id) {
            out.push_back(e.b);
        } else if (e.b == id) {
            out.push_back(e.a);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool RegionMap::adjacent(int a, int b) const
{
    const auto [x, y] = std::minmax(a, b);
    return std::any_of(edges.begin(), edges.end(), [&](const AdjacencyEdge &e) { return e.a == x && e.b == y; });
}

std::vector<int> RegionMap::holes() const
{
    std::vector<int> out;
    for (const Component &c : components) {
        if (c.bounded && c.k == 0) {
            out.push_back(c.id);
        }
    }
    return out;
}

json RegionMap::to_json() const
{
    json comps = json::array();
    std::map<int, std::size_t> legend;
    for (const Component &c : components) {
        comps.push_back({{"id", c.id},
                         {"k", c.k},
                         {"representative", complex_to_json(c.representative)},
                         {"bounded", c.bounded},
                         {"cells", c.cells}});
        legend[c.k] += c.cells;
    }
    json leg = json::object();
    for (const auto &[k, n] : legend) {
        leg[std::to_string(k)] = n;
    }
    json adj = json::array();
    for (const AdjacencyEdge &e : edges) {
        adj.push_back({{"a", e.a}, {"b", e.b}, {"arc", {e.t0, e.t1}}, {"point", complex_to_json(e.point)}});
    }
    json si = json::array();
    for (const SelfIntersection &s : curve.self_intersections) {
        si.push_back({{"t1", s.t1}, {"t2", s.t2}, {"point", complex_to_json(s.point)}, {"angle_deg", s.angle_deg}});
    }
    return {{"rho", rho},
            {"bbox", {complex_to_json(lo), complex_to_json(hi)}},
            {"grid_n", grid_n},
            {"cell", cell},
            {"band", band},
            {"degree", degree},
            {"unbounded", unbounded},
            {"holes", holes()},
            {"components", std::move(comps)},
            {"adjacency", std::move(adj)},
            {"legend", std::move(leg)},
            {"self_intersections", std::move(si)},
            {"curve_samples", curve.size()},
            {"warnings", warnings}};
}

std::string RegionMap::to_csv() const
{
    std::string out = "x,y,component_id,k\n";
    out.reserve(static_cast<std::size_t>(grid_n) * static_cast<std::size_t>(grid_n) * 48);
    for (int iy = 0; iy < grid_n; ++iy) {
        for (int ix = 0; ix < grid_n; ++ix) {
            const cplx c = cell_center(ix, iy);
            const int id = grid[static_cast<std::size_t>(iy) * static_cast<std::size_t>(grid_n) + static_cast<std::size_t>(ix)];
            out += fmt17(c.real());
            out += ',';
            out += fmt17(c.imag());
            out += ',';
            out += std::to_string(id);
            out += ',';
            out += id >= 0 ? std::to_string(components[static_cast<std::size_t>(id)].k) : std::string("-1");
            out += '\n';
        }
    }
    return out;
}

namespace {

RegionMap build_map(const Symbol &sym, const BoundaryCurve &curve, int grid_n, const RegionOptions &opt)
{
    THC_FAIL_IF(grid_n < 8 || grid_n > 4096, ParamInvalid, "grid_n must lie in [8, 4096]");
    RegionMap m;
    m.rho = curve.radius;
    m.grid_n = grid_n;
    m.degree = sym.degree();
    m.curve = curve;
    auto [lo, hi] = curve.bbox();
    if (opt.cover_radius > 0.0) {
        lo = cplx(std::min(lo.real(), -opt.cover_radius), std::min(lo.imag(), -opt.cover_radius));
        hi = cplx(std::max(hi.real(), opt.cover_radius), std::max(hi.imag(), opt.cover_radius));
    }
    const cplx mid = 0.5 * (lo + hi);
    const double side = 1.25 * std::max(hi.real() - lo.real(), hi.imag() - lo.imag());
    m.lo = mid - cplx(0.5 * side, 0.5 * side);
    m.hi = mid + cplx(0.5 * side, 0.5 * side);
    m.cell = side / grid_n;
    m.band = curve.band();
    const double r_mark = std::max(m.band, 1.01 * m.cell * std::sqrt(0.5));

    const std::size_t gn = static_cast<std::size_t>(grid_n);
    std::vector<int> g(gn * gn, -2);
    const std::size_t n = curve.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = curve.value[i], b = curve.value[(i + 1) % n];
        const auto lo_idx = [&](double v, double base) {
            return std::max(0, static_cast<int>(std::floor((v - base) / m.cell - 0.5)));
        };
        const auto hi_idx = [&](double v, double base) {
            return std::min(grid_n - 1, static_cast<int>(std::ceil((v - base) / m.cell - 0.5)));
        };
        const int x0 = lo_idx(std::min(a.real(), b.real()) - r_mark, m.lo.real());
        const int x1 = hi_idx(std::max(a.real(), b.real()) + r_mark, m.lo.real());
        const int y0 = lo_idx(std::min(a.imag(), b.imag()) - r_mark, m.lo.imag());
        const int y1 = hi_idx(std::max(a.imag(), b.imag()) + r_mark, m.lo.imag());
        for (int iy = y0; iy <= y1; ++iy) {
            for (int ix = x0; ix <= x1; ++ix) {
                int &slot = g[static_cast<std::size_t>(iy) * gn + static_cast<std::size_t>(ix)];
                if (slot != -1 && segment_distance(m.cell_center(ix, iy), a, b) <= r_mark) {
                    slot = -1;
                }
            }
        }
    }

    // Depth: 4-connected distance from the marked band.
    std::vector<int> depth(gn * gn, -1);
    std::deque<std::size_t> q;
    for (std::size_t c = 0; c < gn * gn; ++c) {
        if (g[c] == -1) {
            depth[c] = 0;
            q.push_back(c);
        }
    }
    const auto for_neighbors = [&](std::size_t c, auto &&fn) {
        const std::size_t ix = c % gn, iy = c / gn;
        if (ix > 0) fn(c - 1);
        if (ix + 1 < gn) fn(c + 1);
        if (iy > 0) fn(c - gn);
        if (iy + 1 < gn) fn(c + gn);
    };
    while (!q.empty()) {
        const std::size_t c = q.front();
        q.pop_front();
        for_neighbors(c, [&](std::size_t d) {
            if (depth[d] < 0) {
                depth[d] = depth[c] + 1;
                q.push_back(d);
            }
        });
    }

    struct Info {
        std::size_t cells = 0;
        bool border = false;
        std::size_t deepest = 0;
    };
    std::vector<Info> info;
    for (std::size_t start = 0; start < gn * gn; ++start) {
        if (g[start] != -2) {
            continue;
        }
        const int id = static_cast<int>(info.size());
        Info inf;
        inf.deepest = start;
        g[start] = id;
        q.push_back(start);
        while (!q.empty()) {
            const std::size_t c = q.front();
            q.pop_front();
            ++inf.cells;
            const std::size_t ix = c % gn, iy = c / gn;
            if (ix == 0 || iy == 0 || ix + 1 == gn || iy + 1 == gn) {
                inf.border = true;
            }
            if (depth[c] > depth[inf.deepest] || (depth[c] == depth[inf.deepest] && c < inf.deepest)) {
                inf.deepest = c;
            }
            for_neighbors(c, [&](std::size_t d) {
                if (g[d] == -2) {
                    g[d] = id;
                    q.push_back(d);
                }
            });
        }
        info.push_back(inf);
    }
    m.grid = std::move(g);

    const PreimageCounter counter(sym, curve);
    m.components.resize(info.size());
    parallel_for(info.size(), [&](std::size_t i) {
        Component &c = m.components[i];
        c.id = static_cast<int>(i);
        c.cells = info[i].cells;
        c.bounded = !info[i].border;
        const std::size_t d = info[i].deepest;
        c.representative = m.cell_center(static_cast<int>(d % gn), static_cast<int>(d / gn));
        c.k = counter.count(c.representative);
    });
    int border_count = 0;
    for (const Component &c : m.components) {
        if (!c.bounded) {
            ++border_count;
            if (m.unbounded < 0) {
                m.unbounded = c.id;
            }
        }
        if (c.cells < 4) {
            throw Error(ErrorCode::GridTooCoarse, "component " + std::to_string(c.id) + " has fewer than 4 cells");
        }
    }
    if (border_count != 1) {
        m.warnings.push_back("expected one border component, found " + std::to_string(border_count));
    }
    const bool simple_curve = curve.multiplicity == 1 && !curve.intersections_truncated;
    if (opt.check_face_count && simple_curve) {
        const std::size_t expected = curve.self_intersections.size() + 2;
        if (m.components.size() != expected) {
            throw Error(ErrorCode::GridTooCoarse, "found " + std::to_string(m.components.size()) +
                                                      " components, curve topology implies " +
                                                      std::to_string(expected));
        }
    }

    // Adjacency from probes on either side of each arc between crossings.
    std::vector<double> cuts;
    for (const SelfIntersection &s : curve.self_intersections) {
        cuts.push_back(s.t1);
        cuts.push_back(s.t2);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::pair<double, double>> arcs;
    if (cuts.empty()) {
        arcs.emplace_back(0.0, kTwoPi);
    } else {
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            arcs.emplace_back(cuts[i], cuts[i + 1]);
        }
        arcs.emplace_back(cuts.back(), cuts.front() + kTwoPi);
    }
    const double step0 = std::max(2.0 * m.band, r_mark + m.cell);
    const auto crosses_curve = [&](cplx p, cplx q2, double tp) {
        // Ignore the segments around the probe parameter itself.
        for (std::size_t i = 0; i < n; ++i) {
            const double ta = curve.t[i];
            const double tb = i + 1 < n ? curve.t[i + 1] : kTwoPi;
            double dt = std::abs(wrap_2pi(0.5 * (ta + tb) - tp + kPi) - kPi);
            if (dt <= (tb - ta) * 2.0 + 1e-15) {
                continue;
            }
            double u = 0.0, v = 0.0;
            if (segments_cross(p, q2, curve.value[i], curve.value[(i + 1) % n], u, v)) {
                return true;
            }
        }
        return false;
    };
    std::map<std::pair<int, int>, AdjacencyEdge> found;
    for (const auto &[a0, a1] : arcs) {
        bool done = false;
        for (double frac : {0.5, 0.3, 0.7, 0.15, 0.85}) {
            if (done) {
                break;
            }
            const double tp = wrap_2pi(a0 + frac * (a1 - a0));
            const CurvePoint cp = curve_point(sym, curve.radius, tp);
            if (std::abs(cp.tangent) == 0.0) {
                continue;
            }
            const cplx nrm = cplx(0.0, 1.0) * cp.tangent / std::abs(cp.tangent);
            std::array<int, 2> side{-1, -1};
            for (int sgn = 0; sgn < 2; ++sgn) {
                const cplx dir = sgn == 0 ? nrm : -nrm;
                for (int s = 0; s < 12 && side[static_cast<std::size_t>(sgn)] < 0; ++s) {
                    const cplx probe = cp.value + (step0 + 0.5 * s * m.cell) * dir;
                    const int id = m.component_at(probe);
                    if (id >= 0) {
                        if (curve.multiplicity > 1 || !crosses_curve(cp.value + 1e-9 * m.cell * dir, probe, tp)) {
                            side[static_cast<std::size_t>(sgn)] = id;
                        }
                        break;
                    }
                }
            }
            if (side[0] >= 0 && side[1] >= 0 && side[0] != side[1]) {
                const auto [x, y] = std::minmax(side[0], side[1]);
                if (!found.count({x, y})) {
                    found[{x, y}] = AdjacencyEdge{x, y, a0, a1, cp.value};
                }
                done = true;
            }
        }
        if (!done) {
            m.warnings.push_back("no adjacency witness for arc starting at t = " + fmt17(a0));
        }
    }
    for (const auto &[key, e] : found) {
        m.edges.push_back(e);
        const int dk = std::abs(m.components[static_cast<std::size_t>(e.a)].k -
                                m.components[static_cast<std::size_t>(e.b)].k);
        if (dk != 1) {
            m.warnings.push_back("adjacent components " + std::to_string(e.a) + " and " + std::to_string(e.b) +
                                 " differ in valence by " + std::to_string(dk));
        }
    }
    return m;
}

} // namespace

RegionMap region_map(const Symbol &sym, double rho, const RegionOptions &opt)
{
    const BoundaryCurve curve = build_curve(sym, rho, opt.curve);
    int grid_n = opt.grid_n;
    for (;;) {
        try {
            return build_map(sym, curve, grid_n, opt);
        } catch (const Error &e) {
            if (e.code() != ErrorCode::GridTooCoarse || !opt.auto_refine || 2 * grid_n > opt.max_grid) {
                throw;
            }
            grid_n *= 2;
        }
    }
}

double rho_plus(const Symbol &sym)
{
    return std::min(1.01, 0.5 * (1.0 + sym.analytic_radius()));
}

Symbol resolvent_symbol(const Symbol &sym, cplx lambda)
{
    Expr phi = Expr::add({conformal::rational_expr(sym.rational()), sym.tail(), Expr::constant(-lambda)});
    return Symbol(RationalPart{}, Expr::reciprocal(std::move(phi)), sym.analytic_radius());
}

} // namespace toeplitz_hc::valence
