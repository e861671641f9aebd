#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "bornlab/spectral_core.hpp"

namespace bornlab::singular_quadrature {

using spectral_core::cd;

// Evaluates a Fourier transform q_hat at a frequency point (first n_dim
// entries are read). Must be evaluable everywhere; backed by
// potentials::analytic_transform in practice.
using transform_fn = std::function<cd(const double*)>;

// Quadrature rule on Gamma(eta) = { x : |x - eta/2| = |eta|/2 }.
// Weights sum to the measure: pi|eta| (n=2), pi|eta|^2 (n=3).
struct SphereRule {
  int n_dim = 2;
  std::array<double, 3> eta{0, 0, 0};
  std::vector<std::array<double, 3>> nodes;
  std::vector<double> weights;
  int order = 0;
};
SphereRule sphere_rule(const double* eta, int order, int n_dim);

// Principal value of integral_0^{r_max} g(r)/(rho^2 - r^2) dr.
// Mirror pairs r = rho +- t cancel the singularity explicitly; the innermost
// exclusion is Richardson-extrapolated to zero over `extrap_levels` dyadic
// levels. Throws compute_error when the extrapolation is not Cauchy at 1%.
cd pv_radial(const std::function<cd(double)>& g, double rho, double r_max,
             int order, int extrap_levels = 4);

// Pure spherical quartic term:
//   (1/|eta|^3) * triple integral over Gamma(eta)^3 of
//   q(xi) q(eta - tau) q(tau - phi) q(phi - xi) dsigma(xi,tau,phi).
cd pure_spherical_q4(const transform_fn& qhat, const double* eta, int order,
                     int n_dim);

// Same integrand with the phi sphere thickened to the tube
// ||phi - eta/2| - |eta|/2| <= delta|eta|, normalized by 1/|eta|^4 and gated
// by the indicator |eta| > 1/delta.
struct TubeResult {
  cd value{0, 0};
  bool indicator_zero = false;  // |eta| <= 1/delta: exact zero
};
TubeResult tube_term(const transform_fn& qhat, const double* eta, double delta,
                     int order, int n_dim);
// per-slot variant (slots follow the chain order q(xi) q(eta-tau) q(tau-phi)
// q(phi-xi)); the single-oracle form passes the same function four times
TubeResult tube_term(const std::array<transform_fn, 4>& slots,
                     const double* eta, double delta, int order, int n_dim);

// Two-factor Sokhotski decomposition of the second Born term:
//   Qhat_2(eta) = (2pi)^{-n} [ p.v. integral q(xi)q(eta-xi)/(xi.(eta-xi)) dxi
//                              - (i pi/|eta|) integral_Gamma q q dsigma ].
// The sphere-term sign follows 1/(x + i0) = p.v. - i pi delta for the
// transform convention used here; it is pinned against the iterated-resolvent
// route by tests. n=3 requires radial qhat (the reduction assumes it).
struct SokhotskiResult {
  cd pv_part{0, 0};      // includes the (2pi)^{-n} prefactor
  cd sphere_part{0, 0};  // includes prefactor and the -(i pi/|eta|) weight
  cd total{0, 0};
};
SokhotskiResult sokhotski_q2(const transform_fn& qhat, const double* eta,
                             int n_dim, int order, int extrap_levels = 4);

// Full fourth-order decomposition in 2D: the three denominators each split
// into p.v. + sphere parts, giving eight pieces grouped into six terms by the
// eta - w mirror symmetry. Every term includes its coefficient
// (-i pi/|eta|)^{#spheres} and the global (2pi)^{-2(j-1)} normalization, so
// total = sum of the six.
struct Q4Breakdown {
  cd pure_pv{0, 0};          // no sphere slots (QMC; has a standard error)
  cd single_end{0, 0};       // sphere in slot 1 or 3 (equal by symmetry; sum)
  cd single_middle{0, 0};    // sphere in slot 2
  cd double_adjacent{0, 0};  // spheres in slots {1,2} or {2,3} (sum)
  cd double_end{0, 0};       // spheres in slots {1,3}
  cd triple_sphere{0, 0};    // all three spheres
  cd total{0, 0};
  double mc_standard_error = 0.0;  // on |pure_pv|, via 16 randomizations
  bool inconclusive = false;       // SE > 5% of |total|
};
Q4Breakdown q4_decomposition_2d(const transform_fn& qhat, const double* eta,
                                uint64_t mc_budget, uint64_t seed);

}  // namespace bornlab::singular_quadrature
