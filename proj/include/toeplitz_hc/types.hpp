#pragma once

#include <complex>
#include <numbers>
#include <vector>

namespace toeplitz_hc {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Value of a holomorphic function together with its complex derivative.
struct Jet {
    cplx value;
    cplx deriv;
};

/// Fixed numerical cutoffs shared by all modules.
namespace cutoff {
inline constexpr double kPoleProximity = 1e-14;
inline constexpr double kResolvent = 1e-8;
} // namespace cutoff

} // namespace toeplitz_hc

namespace toeplitz_hc {

/// Integer power by repeated squaring; exact for small exponents unlike the
/// std::pow(complex, int) overload, which goes through exp/log.
inline cplx ipow(cplx x, int n)
{
    if (n < 0) {
        return 1.0 / ipow(x, -n);
    }
    cplx r = 1.0;
    while (n > 0) {
        if (n & 1) {
            r *= x;
        }
        x *= x;
        n >>= 1;
    }
    return r;
}

} // namespace toeplitz_hc
