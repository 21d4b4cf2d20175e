#pragma once

#include "toeplitz_hc/expr.hpp"
#include "toeplitz_hc/symbol.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace toeplitz_hc::conformal {

/// A holomorphic map given as an expression, with an optional inverse.
struct MapExpr {
    Expr forward;
    std::optional<Expr> inverse;
};

/// Conformal bijection of the rectangle (-w/2, w/2) x (-h/2, h/2) onto the
/// unit disk sending 0 to 0, built as an affine scaling onto an sn period
/// rectangle, sn itself, and a Mobius map of the upper half plane onto the
/// disk. The long side is always laid along the real period. Throws
/// AspectOverflow for w/h outside [1e-3, 1e3].
MapExpr rectangle_to_disk(double width, double height);

/// Finite Blaschke product u * prod (z - a) / (1 - conj(a) z).
MapExpr blaschke(CVec zeros, cplx unimodular);

struct SectorAnnulusParams {
    double r = 0.3;
    double R = 0.54;
    double alpha = 0.05;
    double eps = 0.01;
    double beta = 0.1;
    double rho = 0.995;

    /// Throws ParamInvalid unless r < R < (2 sqrt 2 - 1) r, 0 < alpha < pi/8,
    /// 0 < rho < 1 and eps >= 0.
    void validate() const;

    [[nodiscard]] double theta_min() const noexcept { return -kPi / 4 + alpha; }
    [[nodiscard]] double theta_max() const noexcept { return kPi - alpha; }

    /// The root gamma of (1 + eps g) g^2 = beta (1 + i) inside the sector.
    [[nodiscard]] cplx gamma() const;

    [[nodiscard]] json to_json() const;
    static SectorAnnulusParams from_json(const json &j, SectorAnnulusParams defaults);
};

/// Distance from w to the boundary of {r < |z| < R, a < arg z < b}.
double sector_boundary_distance(cplx w, double r, double R, double a, double b);

/// Psi: D -> {r < |z| < R, -pi/4 + alpha < arg z < pi - alpha} with Psi(0) = gamma,
/// realized as exp of the inverse rectangle map precomposed with a disk
/// automorphism.
MapExpr sector_annulus_map(const SectorAnnulusParams &p);

/// Boundary and interior diagnostics for a map declared univalent.
struct UnivalenceEvidence {
    double min_boundary_spacing = 0.0; // over 2048 boundary images
    double min_derivative = 0.0;       // |f'| over 512 interior points
    [[nodiscard]] bool ok() const noexcept { return min_boundary_spacing > 0.0 && min_derivative > 0.0; }
};
UnivalenceEvidence univalence_evidence(const Expr &f, std::uint64_t seed = 7);

/// A pole of a meromorphic function in the disk, known by location and order.
struct PoleGuess {
    cplx location;
    int order;
};

/// Splits a function meromorphic in the disk, with the listed poles, into
/// R(1/z) + tail. Laurent coefficients come from Cauchy integrals on small
/// circles; the tail is the expression minus the recovered rational part.
/// Throws PeelFailure when a pole order is wrong or the tail still carries
/// negative Fourier modes on |z| = 1 - 1e-3.
Symbol peel_principal_parts(const Expr &phi, const std::vector<PoleGuess> &poles, double analytic_radius);

/// R(1/z) as an expression tree.
Expr rational_expr(const RationalPart &rp);

/// Roots of the polynomial sum c_k z^k (lowest degree first), via the
/// eigenvalues of the companion matrix.
CVec polynomial_roots(const CVec &coeffs);

/// Groups nearly equal roots into (location, multiplicity) clusters.
std::vector<PoleGuess> cluster_roots(const CVec &roots, double tol);

} // namespace toeplitz_hc::conformal
