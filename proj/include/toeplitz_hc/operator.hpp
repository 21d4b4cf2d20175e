#pragma once

#include "toeplitz_hc/conditions.hpp"
#include "toeplitz_hc/fft.hpp"
#include "toeplitz_hc/symbol.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace toeplitz_hc::op {

/**
 * n x n section of a Toeplitz operator, entry (i, j) = c_{i - j}.
 *
 * Holds the coefficients c_{-(n-1)} .. c_{n-1} and the spectrum of their
 * circulant embedding of size next_pow2(2n) for the FFT apply.
 */
class ToeplitzSection {
public:
    /// Coefficients of Phi restricted to the circle, with entries below
    /// 1e-15 of the largest set to zero; propagates NonConvergence.
    static ToeplitzSection from_symbol(const Symbol &sym, int n);
    /// `coeffs[k + n - 1]` holds c_k for k in [-(n-1), n-1].
    static ToeplitzSection from_coefficients(CVec coeffs, int n);

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] cplx coefficient(int k) const { return coeffs_[static_cast<std::size_t>(k + n_ - 1)]; }
    [[nodiscard]] cplx entry(int i, int j) const { return coefficient(i - j); }
    [[nodiscard]] const CVec &coefficients() const noexcept { return coeffs_; }

    [[nodiscard]] CVec apply_dense(const CVec &x) const;
    [[nodiscard]] CVec apply_fft(const CVec &x) const;
    [[nodiscard]] CVec apply(const CVec &x) const { return apply_fft(x); }
    [[nodiscard]] Eigen::MatrixXcd dense() const;

    /// Section of the conjugate symbol: c_k -> conj(c_{-k}).
    [[nodiscard]] ToeplitzSection conjugate() const;

private:
    int n_ = 0;
    CVec coeffs_;
    std::size_t m_ = 0;
    CVec spectrum_;
    std::shared_ptr<const fft::Plan> fwd_, bwd_;
};

/// (S*)^k on Taylor coefficients: drops the first k entries.
CVec backward_shift_apply(const CVec &f, int k);

/// Taylor coefficients 0 .. n-1 of an expression analytic in the disk, from
/// boundary FFTs doubled until they settle to 1e-13 relative; throws
/// NonConvergence past 2^20 samples.
CVec taylor_coefficients(const Expr &e, int n);

struct EigenvectorSpec {
    cplx lambda = 0.0;
    CVec p; // degree <= N2 - 1
    CVec q; // degree <= N1 - 1
    [[nodiscard]] json to_json() const;
};

/// The N monomial basis choices: p = z^i (i < N2) then q = z^i (i < N1).
std::vector<EigenvectorSpec> monomial_specs(const Symbol &sym, cplx lambda);

struct EigenvectorResult {
    cplx lambda = 0.0;
    int n = 0;
    CVec coeffs;             // f_0 .. f_{n-1}
    double residual = 0.0;   // ||T_n f - lambda f|| / ||f||
    double tail_bound = 0.0; // ||(f_n .. f_{2n-1})|| / ||f||
    double cancellation_gap = 0.0;
    [[nodiscard]] json to_json() const; // coefficients omitted
};

/// Rejects lambda unless it has no preimage in the closed disk, staying two
/// curve bands off the boundary curve (and off the rho_plus curve when the
/// symbol is analytic past the circle). Throws LambdaInRange.
void validate_lambda(const Symbol &sym, cplx lambda);

/// f = (z^{N1} p + Q q) / (z^{N1} Q (Phi - lambda)) to n Taylor terms, with
/// the denominator assembled as an exact polynomial from R plus the series
/// z^{N1} Q (phi - lambda). Throws LambdaInRange, ParamInvalid on degree
/// violations, CancellationFailure when z^{N1} Q R(1/z) keeps negative modes.
EigenvectorResult eigenvector(const Symbol &sym, const EigenvectorSpec &spec, int n);

/// Same, reusing a prebuilt section of size n for the residual.
EigenvectorResult eigenvector(const Symbol &sym, const EigenvectorSpec &spec, const ToeplitzSection &section);

struct SpanSolve {
    int n = 0;
    Eigen::MatrixXcd matrix; // columns z^{N1} z^i (i < N2), then Q z^i (i < N1)
    double condition = 0.0;
    double max_residual = 0.0; // over the monomials z^j, j < N
    std::vector<CVec> p, q;    // solution per monomial
    [[nodiscard]] json to_json() const;
};

/// Solves z^{N1} p + Q q = z^j for every j < N.
SpanSolve span_solve(const Symbol &sym);

struct AdjointEigenSpec {
    cplx mu = 0.0;
    CVec preimages;
    CVec betas;
    int n = 0;
    double residual = 0.0;      // ||T_conj(Phi),n f - conj(mu) f|| / ||f||
    double max_value_gap = 0.0; // max |Phi(z_m) - mu|
    double min_separation = 0.0;
    double null_residual = 0.0; // ||A beta|| for the correction system
    [[nodiscard]] json to_json() const;
};

struct AdjointOptions {
    int n = 4096;
    int seeds = 64; // per axis
    double separation = 1e-6;
};

/// Builds f = sum beta_m k_{z_m} over N + 1 preimages of mu with the
/// correction terms cancelled. Throws PreimageSearchFailed when fewer than
/// N + 1 roots are found and MultiplePreimagesCollide when two coincide or
/// a root is critical.
AdjointEigenSpec adjoint_eigenvector(const Symbol &sym, cplx mu, const AdjointOptions &opt = {});

/// Preimages of mu in |z| < 1 - 1e-4 from a grid of Newton seeds, polished
/// to 1e-12 and deduplicated to `separation`.
CVec find_preimages(const Symbol &sym, cplx mu, int seeds_per_axis = 64, double separation = 1e-6);

struct GsOptions {
    std::vector<int> m_values{4, 8, 12};
    int n = 512;
    int monomials = 8;            // e_0 .. e_{J-1}
    double sample_fraction = 0.5; // node circle radius as a fraction of the safe radius
};

struct GsEvidence {
    cplx lambda0, lambda1;
    double radius0 = 0.0, radius1 = 0.0;
    std::vector<int> m_values;
    // residual[m index][j] against the span of both families
    std::vector<std::vector<double>> residual;
    // family_residual[family][m index][j]; family 0 inside the disk, 1 outside
    std::vector<std::vector<std::vector<double>>> family_residual;
    std::vector<std::string> notes;
    [[nodiscard]] json to_json() const;
};

/// Least-squares distance from each e_j to the span of eigenvectors sampled
/// on circles about lambda0 and lambda1. Evidence of density, never proof.
/// Throws ParamInvalid when the report has no spe witnesses.
GsEvidence gs_evidence(const Symbol &sym, const conditions::ConditionReport &report, const GsOptions &opt = {});

struct OrbitOptions {
    int steps = 200;
    std::uint64_t seed = 1;
    double eps = 0.25;        // net spacing in each real coordinate
    double start_decay = 0.5; // start vector x_k = xi_k * decay^k, xi complex normal
    int burn_in = 10;         // steps before net visits are counted
};

struct OrbitStep {
    int step = 0;
    double log_norm_growth = 0.0; // log ||T x_k|| - log ||x_k||
    double log_norm = 0.0;        // log ||T^k x||
    std::size_t coverage = 0;     // net cells of the unit ball in the leading coordinates hit so far
};

struct OrbitStats {
    int n = 0;
    std::vector<OrbitStep> steps;
    std::size_t net_cells = 0; // cells of the net inside the ball, origin cell excluded
    double coordinate_spread = 0.0;
    bool died = false; // orbit reached the zero vector
    [[nodiscard]] json to_json() const;
    [[nodiscard]] std::string to_csv() const;
};

/// Iterates x -> T x with renormalization, using the dense row-wise apply so
/// that rounding stays relative to each row rather than to the whole vector. The unnormalized leading two
/// coordinates exp(log_norm) * y_{0,1} are binned on an eps-net of the unit
/// ball of C^2. Throws Overflow when one step grows the norm past 1e12.
OrbitStats orbit_simulate(const ToeplitzSection &section, const OrbitOptions &opt = {});

} // namespace toeplitz_hc::op
