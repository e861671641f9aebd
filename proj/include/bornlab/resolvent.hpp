#pragma once

#include <vector>

#include "bornlab/spectral_core.hpp"

namespace bornlab::resolvent {

using spectral_core::cd;
using spectral_core::Grid;
using spectral_core::SampledField;

// Outgoing Helmholtz resolvent (Delta + k^2 + i0)^{-1} as a regularized
// Fourier multiplier 1/(k^2 - |xi|^2 + i eps), Richardson-extrapolated over
// the absorption ladder eps, eps/2, ..., eps/2^{levels-1} toward eps -> 0+.
struct ResolventParams {
  double k = 8.0;
  double epsilon = -1.0;  // < 0: default k * (2pi/L); exactly 0 is rejected
  int extrapolation_levels = 3;
};

double default_epsilon(const Grid& g, double k);

// Lagrange weights that extrapolate samples at eps/2^l (l = 0..levels-1)
// to eps = 0. levels = 1 gives {1}; 3 gives {1/3, -2, 8/3}.
std::vector<double> extrapolation_weights(int levels);

SampledField apply_resolvent(const SampledField& f, const ResolventParams& p);

// Outgoing fundamental solution, the (solfund) convention:
//   C_n k^{(n-2)/2} H^{(1)}_{(n-2)/2}(kr) / r^{(n-2)/2},
//   C_n = 1/(2i (2pi)^{(n-2)/2}).
// n=2: -(i/2) H_0^{(1)}(kr); n=3: -e^{ikr}/(2 pi r). The Fourier multiplier
// above inverts to exactly HALF of this kernel in both dimensions (the two
// representations in the source differ by that constant; the multiplier is
// normative here and the factor is pinned by tests).
cd fundamental_solution(int n_dim, double k, double r);

// Ratio (multiplier kernel) / (fundamental_solution); pinned to 0.5.
inline constexpr double kKernelOverSolfund = 0.5;

}  // namespace bornlab::resolvent
