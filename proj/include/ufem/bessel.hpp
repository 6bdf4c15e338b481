#pragma once

namespace ufem {

// Modified Bessel functions of the second kind, orders 0 and 1, for x > 0.
// Power series for x <= 2; for 2 < x <= 512 the scaled factor
// R(x) = sqrt(x) e^x K(x) is evaluated from per-octave Chebyshev interpolants
// seeded once at startup from the integral representation
//   e^x K_nu(x) = \int_0^inf e^{-x(cosh t - 1)} cosh(nu t) dt
// (trapezoid rule, exponentially convergent); beyond 512 the truncated
// asymptotic series. Relative accuracy better than 1e-13 throughout.
// x <= 0 is rejected (logarithmic singularity at 0).
double bessel_k0(double x);
double bessel_k1(double x);
double bessel_k(int order, double x);

}  // namespace ufem
