#pragma once

#include "toeplitz_hc/types.hpp"

/// Jacobi elliptic functions and Carlson's symmetric integral.
///
/// The parameter is carried as the pair (m, 1 - m) so that moduli extremely
/// close to 0 or 1, which appear for elongated rectangles, keep full relative
/// precision in both halves.
namespace toeplitz_hc::elliptic {

struct Modulus {
    double m = 0.0;  // k^2
    double m1 = 1.0; // 1 - k^2
};

struct JacobiReal {
    double sn, cn, dn;
};

struct JacobiComplex {
    cplx sn, cn, dn;
};

/// sn, cn, dn for real argument by the arithmetic-geometric mean.
JacobiReal jacobi(double u, Modulus mod);

/// sn, cn, dn for complex argument via the imaginary addition formulas.
JacobiComplex jacobi(cplx u, Modulus mod);

/// Carlson R_F for complex arguments off the negative real axis.
cplx carlson_rf(cplx x, cplx y, cplx z);

/// Complete integral K(m).
double complete_k(Modulus mod);

/// Principal inverse of sn on the upper half plane: the Schwarz-Christoffel map
/// onto the rectangle [-K, K] x [0, K'].
cplx inverse_sn(cplx s, Modulus mod);

/// Modulus whose period ratio K'/K equals `ratio`, computed from theta series
/// at whichever of the two nomes is smaller.
Modulus modulus_from_period_ratio(double ratio);

} // namespace toeplitz_hc::elliptic
