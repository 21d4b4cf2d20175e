#pragma once

#include "toeplitz_hc/symbol.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toeplitz_hc::valence {

struct CurveOptions {
    double mesh = 1e-3;          // max image spacing as a fraction of the curve diameter
    int initial_samples = 8192;  // uniform seeding before adaptive refinement
    double transversality_min_deg = 5.0;
    std::size_t max_samples = std::size_t{1} << 22;
    std::size_t max_intersections = 4096;
};

struct SelfIntersection {
    double t1, t2; // t1 < t2, both in [0, 2 pi)
    cplx point;
    double angle_deg; // acute crossing angle
};

/// Dense sampling of t -> Phi(rho e^{it}) with tangent data and the located
/// self-intersections.
struct BoundaryCurve {
    double radius = 1.0;
    std::vector<double> t;
    CVec value;
    CVec tangent; // d/dt Phi(rho e^{it})
    double mesh_abs = 0.0;
    double max_spacing = 0.0;
    double diameter = 0.0;
    int multiplicity = 1; // > 1 when the curve retraces itself with period 2 pi / multiplicity
    bool intersections_truncated = false;
    std::vector<SelfIntersection> self_intersections;

    [[nodiscard]] std::size_t size() const noexcept { return t.size(); }
    /// Default ambiguity band: twice the largest adjacent-sample spacing.
    [[nodiscard]] double band() const noexcept { return 2.0 * max_spacing; }
    [[nodiscard]] std::pair<cplx, cplx> bbox() const;
    /// Distance from w to the sampled polyline.
    [[nodiscard]] double distance(cplx w) const;
};

BoundaryCurve build_curve(const Symbol &sym, double rho, const CurveOptions &opt = {});

/// Preimage counts against one prebuilt curve. The curve must have been built
/// from the same symbol and radius.
class PreimageCounter {
public:
    PreimageCounter(const Symbol &sym, const BoundaryCurve &curve);

    /// Number of solutions of Phi(z) = w in |z| < rho with multiplicity.
    /// Throws TooCloseToCurve when w is within `min_distance` of the curve
    /// (default: the curve band) and PhaseUnresolved on bisection overrun.
    [[nodiscard]] int count(cplx w, std::optional<double> min_distance = std::nullopt) const;

    /// Winding number of the curve around w (no distance guard beyond the
    /// exact hit test).
    [[nodiscard]] int winding(cplx w, double min_distance) const;

private:
    double bisect(double ta, double tb, cplx a, cplx b, cplx w, int depth) const;

    const Symbol *sym_;
    const BoundaryCurve *curve_;
    int poles_inside_;
};

/// One-shot count that builds the curve internally.
int preimage_count(const Symbol &sym, cplx w, double rho);

struct GeneralPositionReport {
    bool precondition_ok = true; // curve at rho = 1 and analytic_radius > 1
    bool simple_crossings = true;
    bool derivative_nonzero = true;
    int multiplicity = 1;
    std::size_t intersection_count = 0;
    double min_angle_deg = 90.0;
    double min_derivative = 0.0;
    cplx derivative_witness = 0.0;
    std::vector<std::string> notes;

    [[nodiscard]] bool ok() const noexcept
    {
        return precondition_ok && simple_crossings && derivative_nonzero;
    }
    [[nodiscard]] json to_json() const;
};

GeneralPositionReport general_position(const Symbol &sym, const BoundaryCurve &curve,
                                       double derivative_min = 1e-8,
                                       double transversality_min_deg = 5.0);

struct RegionOptions {
    int grid_n = 512;
    CurveOptions curve;
    /// Extra region the bounding box must cover, as a radius about 0 (0 = none).
    double cover_radius = 0.0;
    /// Double grid_n (up to max_grid) when faces are missing or too small.
    bool auto_refine = false;
    int max_grid = 4096;
    /// Require the face count to match intersections + 2 for simple curves.
    bool check_face_count = true;
};

struct Component {
    int id = 0;
    int k = 0;
    cplx representative;
    bool bounded = true;
    std::size_t cells = 0;
};

struct AdjacencyEdge {
    int a = 0, b = 0;   // component ids, a < b
    double t0 = 0.0;    // witness arc [t0, t1] of the boundary parameter
    double t1 = 0.0;
    cplx point;         // curve point at the probe
};

struct RegionMap {
    double rho = 1.0;
    cplx lo, hi; // bbox corners
    int grid_n = 0;
    double cell = 0.0;
    double band = 0.0;
    std::vector<int> grid; // row-major, iy * grid_n + ix; -1 = curve band
    std::vector<Component> components;
    std::vector<AdjacencyEdge> edges;
    int unbounded = -1;
    int degree = 0;
    BoundaryCurve curve;
    std::vector<std::string> warnings;

    [[nodiscard]] cplx cell_center(int ix, int iy) const;
    [[nodiscard]] int component_at(cplx w) const;
    [[nodiscard]] const Component &component(int id) const { return components[static_cast<std::size_t>(id)]; }
    [[nodiscard]] int max_k() const;
    [[nodiscard]] std::vector<int> neighbors(int id) const;
    [[nodiscard]] bool adjacent(int a, int b) const;
    /// Bounded components with k = 0.
    [[nodiscard]] std::vector<int> holes() const;

    [[nodiscard]] json to_json() const;
    /// x, y, component_id, k per cell with 17 significant digits.
    [[nodiscard]] std::string to_csv() const;
};

RegionMap region_map(const Symbol &sym, double rho, const RegionOptions &opt = {});

/// Radius slightly above 1 used for closed-disk counts.
double rho_plus(const Symbol &sym);

/// The resolvent 1/(Phi - lambda) as an analytic Symbol (empty rational part).
Symbol resolvent_symbol(const Symbol &sym, cplx lambda);

/// Format a double with 17 significant digits.
std::string fmt17(double x);

} // namespace toeplitz_hc::valence
