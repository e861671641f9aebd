#pragma once

#include <complex>

namespace bornlab::bessel {

// Self-contained Bessel/Hankel evaluation: power series for z <= 12,
// large-argument Hankel asymptotics for z > 12. Absolute error <= 1e-10
// on z > 0 (pinned by tests against independently generated references).

double j0(double z);
double j1(double z);
double y0(double z);

// H^(1)_nu(z) = J_nu(z) + i Y_nu(z); nu in {0, 1/2, 1}.
std::complex<double> h1(double nu, double z);

}  // namespace bornlab::bessel
