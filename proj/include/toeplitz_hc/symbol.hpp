#pragma once

#include "toeplitz_hc/expr.hpp"
#include "toeplitz_hc/types.hpp"

#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace toeplitz_hc {

/// One pole eta of R (|eta| > 1) with principal-part coefficients
/// alphas[j - 1] multiplying (w - eta)^{-j}.
struct PoleTerm {
    cplx eta;
    CVec alphas;

    [[nodiscard]] int order() const noexcept { return static_cast<int>(alphas.size()); }
};

/**
 * Rational function R(w) = P(w) + sum_l sum_j alpha_{l,j} (w - eta_l)^{-j}
 * with all poles outside the closed unit disk. Evaluated as R(1/z), it
 * contributes a pole of order N1 = deg P at z = 0 and poles of order k_l at
 * z = 1/eta_l.
 */
struct RationalPart {
    CVec poly; // c_0 .. c_{N1}
    std::vector<PoleTerm> poles;

    [[nodiscard]] int n1() const noexcept;
    [[nodiscard]] int n2() const noexcept;
    [[nodiscard]] int degree() const noexcept { return n1() + n2(); }

    /// Throws ParamInvalid when an invariant fails.
    void validate() const;

    /// R(1/z) and its z-derivative.
    [[nodiscard]] Jet jet(cplx z) const;

    /// Coefficients of Q(z) = prod_l (1 - eta_l z)^{k_l}, lowest degree first.
    [[nodiscard]] CVec q_polynomial() const;

    /// Fourier coefficients of R(1/z) on the unit circle for indices
    /// -n_neg .. 0 from the geometric-series expansion; entry i holds index -i.
    [[nodiscard]] CVec circle_coefficients(int n_neg) const;

    /// R*(z) = sum conj(c_k) z^k + sum conj(alpha_{l,j}) (z - conj(eta_l))^{-j},
    /// analytic in the closed disk.
    [[nodiscard]] cplx conjugate_eval(cplx z) const;
};

struct PoleSite {
    cplx location;
    int order;
};

/**
 * Symbol Phi(z) = R(1/z) + phi(z) with an analytic tail phi given as an
 * expression tree. `analytic_radius` is the claimed radius up to which the
 * tail can be evaluated; it is 1 for disk-algebra tails and may be infinite.
 */
class Symbol {
public:
    Symbol() = default;
    Symbol(RationalPart rational, Expr tail, double analytic_radius = kInfiniteRadius);

    static constexpr double kInfiniteRadius = std::numeric_limits<double>::infinity();

    [[nodiscard]] const RationalPart &rational() const noexcept { return rational_; }
    [[nodiscard]] const Expr &tail() const noexcept { return tail_; }
    [[nodiscard]] double analytic_radius() const noexcept { return analytic_radius_; }

    [[nodiscard]] int n1() const noexcept { return rational_.n1(); }
    [[nodiscard]] int n2() const noexcept { return rational_.n2(); }
    [[nodiscard]] int degree() const noexcept { return rational_.degree(); }

    /// Pole-hit and domain checks followed by evaluation.
    [[nodiscard]] Jet jet(cplx z) const;
    [[nodiscard]] cplx eval(cplx z) const { return jet(z).value; }
    [[nodiscard]] cplx derivative(cplx z) const { return jet(z).deriv; }

    /// Poles of Phi inside the disk (0 of order N1, 1/eta_l of order k_l).
    [[nodiscard]] std::vector<PoleSite> poles() const;
    /// Number of poles, with multiplicity, strictly inside |z| < rho.
    [[nodiscard]] int pole_count(double rho) const;

    [[nodiscard]] json to_json() const;
    static Symbol from_json(const json &j);

private:
    RationalPart rational_;
    Expr tail_ = Expr::constant(0.0);
    double analytic_radius_ = kInfiniteRadius;
};

/// Fourier coefficients of Phi restricted to the unit circle, indices
/// -n_neg .. n_pos (entry i holds index i - n_neg).
struct FourierCoefficients {
    int n_neg = 0;
    int n_pos = 0;
    CVec values;
    int fft_log2 = 0;             // size of the accepted transform
    double closed_form_gap = 0.0; // max |FFT - closed form| over negative indices

    [[nodiscard]] cplx at(int index) const { return values[static_cast<std::size_t>(index + n_neg)]; }
};

/// FFT of boundary samples with doubling-based convergence control; negative
/// indices are cross-checked against the closed form of the rational part and
/// reported from the closed form. Throws NonConvergence past 2^20 points.
FourierCoefficients fourier_coefficients(const Symbol &sym, int n_neg, int n_pos);

/// Raw FFT Laurent coefficients of an arbitrary function on |z| = radius,
/// indices -n_neg .. n_pos, using `size` samples.
CVec circle_laurent(const std::function<cplx(cplx)> &f, double radius, int n_neg, int n_pos,
                    std::size_t size);

/// h(z) = 1 / (Phi(z) - lambda).
class ResolventSymbol {
public:
    ResolventSymbol(const Symbol &base, cplx lambda);

    [[nodiscard]] const Symbol &base() const noexcept { return *base_; }
    [[nodiscard]] cplx lambda() const noexcept { return lambda_; }

    /// Throws LambdaInRange when |Phi(z) - lambda| < 1e-8 at z.
    [[nodiscard]] Jet jet(cplx z) const;
    [[nodiscard]] cplx eval(cplx z) const { return jet(z).value; }

private:
    const Symbol *base_;
    cplx lambda_;
};

/// Builds the resolvent after a sampling check of |Phi - lambda| over a polar
/// grid of the closed disk (2^12 boundary points); throws LambdaInRange.
ResolventSymbol resolvent(const Symbol &sym, cplx lambda);

} // namespace toeplitz_hc
