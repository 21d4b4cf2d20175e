#pragma once

#include "toeplitz_hc/valence.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toeplitz_hc::conditions {

enum class Tri { Pass, Fail, Inconclusive };
std::string_view to_string(Tri t) noexcept;

enum class PlaneMode { Auto, Direct, Inverted };

struct PlaneOptions {
    valence::RegionOptions region;
    PlaneMode mode = PlaneMode::Auto;
    /// Auto mode inverts when diameter(curve) / dist(mu, curve) exceeds this.
    double inversion_ratio = 20.0;
    cplx mu = 0.0;
};

/**
 * Region map used to read off valences of Phi. In the direct plane it is the
 * map of Phi itself; in the inverted plane it is the map of the resolvent
 * 1/(Phi - mu) for a point mu with no preimage, so that component k-values
 * carry over unchanged under w = mu + 1/u.
 */
class Plane {
public:
    static Plane build(const Symbol &phi, double rho, const PlaneOptions &opt = {});

    [[nodiscard]] bool inverted() const noexcept { return inverted_; }
    [[nodiscard]] cplx mu() const noexcept { return mu_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] double rho() const noexcept { return map_.rho; }
    [[nodiscard]] const Symbol &plane_symbol() const noexcept { return plane_sym_; }
    [[nodiscard]] const valence::RegionMap &map() const noexcept { return map_; }
    [[nodiscard]] const valence::BoundaryCurve &curve() const noexcept { return map_.curve; }

    /// False when component labeling failed and only per-cell counts exist;
    /// the map then carries the curve and grid geometry but no components.
    [[nodiscard]] bool labeled() const noexcept { return labeled_; }
    /// Preimage count of the cell center, or -1 inside the curve band.
    [[nodiscard]] int cell_k(std::size_t cell) const;
    [[nodiscard]] std::size_t cell_count() const noexcept { return cell_k_.size(); }
    [[nodiscard]] cplx cell_center(std::size_t cell) const;
    [[nodiscard]] const std::vector<std::string> &notes() const noexcept { return notes_; }
    /// Preimage count of lambda when it is clear of the band, read from the
    /// labeled map or counted directly otherwise.
    [[nodiscard]] std::optional<int> k_of(cplx lambda) const;

    [[nodiscard]] cplx to_plane(cplx lambda) const;
    [[nodiscard]] cplx from_plane(cplx u) const;

    /// Component containing lambda, or -1 inside the curve band (always -1
    /// for an unlabeled plane).
    [[nodiscard]] int component_of(cplx lambda) const;
    /// Component that is unbounded in the Phi plane.
    [[nodiscard]] int phi_unbounded() const;
    [[nodiscard]] bool phi_bounded(int id) const { return id != phi_unbounded(); }
    /// Bounded components of the Phi plane with k = 0.
    [[nodiscard]] std::vector<int> phi_holes() const;
    /// Component representative expressed in the Phi plane (none for the
    /// component holding mu + 1/0).
    [[nodiscard]] std::optional<cplx> phi_representative(int id) const;

    /// Exact preimage count of lambda; throws TooCloseToCurve when lambda is
    /// within `margin` curve bands of the curve in plane coordinates.
    [[nodiscard]] int count(cplx lambda, double margin = 1.0) const;
    [[nodiscard]] double plane_distance(cplx lambda) const;

    [[nodiscard]] json to_json() const;

private:
    Symbol plane_sym_;
    valence::RegionMap map_;
    std::vector<int> cell_k_;
    std::vector<std::string> notes_;
    bool labeled_ = true;
    bool inverted_ = false;
    cplx mu_ = 0.0;
    int degree_ = 0;
};

struct NecessaryResult {
    bool ok = true;
    int n = 0;
    int max_count = 0;
    std::optional<int> witness;
    std::optional<cplx> witness_point;
    bool sampled = false; // counts read from cells, not from labeled components
    [[nodiscard]] json to_json() const;
};
NecessaryResult check_necessary(const Plane &plane, int n);

struct SpeResult {
    bool ok = false;
    std::optional<cplx> lambda0; // in D with no preimage
    std::optional<cplx> lambda1; // outside the closed disk with no preimage
    [[nodiscard]] json to_json() const;
};
SpeResult check_spe(const Plane &plane);

struct MvcResult {
    Tri verdict = Tri::Inconclusive;
    double rho = 1.0;
    std::vector<int> k_values;
    std::optional<cplx> counterexample;
    std::string reason;
    [[nodiscard]] json to_json() const;
};
/// Maximal valence on the closed disk, read from a plane built at rho_plus.
MvcResult check_mvc(const Plane &plane_at_rho_plus, int n);
MvcResult check_mvc(const Symbol &sym, const PlaneOptions &opt = {});

struct IacResult {
    Tri verdict = Tri::Inconclusive;
    cplx lambda = 0.0;
    double min_derivative = 0.0;
    double total_turns = 0.0;
    int zero_count = 0;        // zeros of the resolvent in D, from the boundary phase
    double max_curvature = 0.0; // discrete curvature of the resolvent curve times its diameter
    std::vector<std::string> notes;
    [[nodiscard]] json to_json() const;
};
/// Monotonicity of t -> arg h(e^{it}) for h = 1/(Phi - lambda).
IacResult check_iac(const Symbol &sym, cplx lambda, int samples = 1 << 14);

struct ChainCertificate {
    int component = 0;
    std::vector<int> chain; // component, k - 1, ..., 1, target
    [[nodiscard]] json to_json() const;
};

struct DvcResult {
    Tri verdict = Tri::Inconclusive;
    std::vector<int> targets;
    std::vector<ChainCertificate> chains;
    std::vector<int> blocked; // components with no descending chain
    std::vector<std::string> notes;
    [[nodiscard]] json to_json() const;
};

/// Components with k >= 1 that reach `target` through a chain of adjacent
/// components whose valence drops by one at each step.
DvcResult descending_chains(const valence::RegionMap &map, int target);

/// Throws LambdaNotInHole when a lambda does not sit in a k = 0 component.
DvcResult check_dvc(const Plane &plane, const valence::GeneralPositionReport &gp, cplx lambda0, cplx lambda1);

/// Chains towards the unbounded k = 0 component of an analytic symbol's map.
DvcResult check_dvc_prime(const valence::RegionMap &map, const valence::GeneralPositionReport &gp);

struct SpectrumMask {
    int grid_n = 0;
    cplx lo;
    double cell = 0.0;
    bool inverted = false;
    cplx mu = 0.0;
    std::vector<unsigned char> mask; // row-major like RegionMap::grid

    [[nodiscard]] std::size_t count() const;
    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] json to_json() const;
};
/// Cells whose values have fewer than n preimages, together with the curve band.
SpectrumMask spectrum_estimate(const Plane &plane, int n);

/// Up to `count` points without preimages, two bands off the curve: the spe
/// witnesses first, then k = 0 cells spread over the grid.
std::vector<cplx> lambda_lattice(const Plane &plane, const SpeResult &spe, int count);

enum class Verdict { CertifiedMVC, CertifiedIAC, CertifiedDVC, NecessaryFailed, Inconclusive };
std::string_view to_string(Verdict v) noexcept;

struct ClassifyOptions {
    PlaneOptions plane;
    std::optional<cplx> lambda_iac;
    std::optional<cplx> lambda0;
    std::optional<cplx> lambda1;
    int iac_probes = 16;
    [[nodiscard]] json to_json() const;
};

struct ConditionReport {
    int n = 0;
    NecessaryResult necessary;
    SpeResult spe;
    MvcResult mvc;
    IacResult iac;
    DvcResult dvc;
    valence::GeneralPositionReport general_position;
    Verdict verdict = Verdict::Inconclusive;
    bool plane_inverted = false;
    cplx plane_mu = 0.0;
    double sup_boundary = 0.0;
    std::vector<std::string> notes;
    [[nodiscard]] json to_json() const;
};

ConditionReport classify(const Symbol &sym, const ClassifyOptions &opt = {});

} // namespace toeplitz_hc::conditions
