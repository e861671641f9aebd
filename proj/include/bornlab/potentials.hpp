#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bornlab/spectral_core.hpp"

namespace bornlab::potentials {

using spectral_core::Grid;
using spectral_core::SampledField;
using cd = std::complex<double>;

enum class kind {
  ball_indicator,
  radial_cusp,    // amplitude * (1 - |x/R|^2)_+^gamma
  smooth_bump,    // amplitude * exp(1 - 1/(1 - (|x|/R)^2)) inside R
  translate_sum,  // weighted sum of translated simple kinds
  rough_random,   // frequency-synthesized field with target critical exponent
};

struct PotentialSpec;

struct translate_term {
  kind child_kind = kind::ball_indicator;
  double radius = 0.5;
  double gamma = 1.0;
  std::array<double, 3> center{0, 0, 0};
  double weight = 1.0;
};

// All built-ins keep their support inside the open unit ball; that constraint
// is validated on construction of every operation input.
struct PotentialSpec {
  kind k = kind::ball_indicator;
  int n_dim = 2;
  double amplitude = 1.0;
  double radius = 1.0;
  double gamma = 1.0;
  uint64_t seed = 1;
  double target_exponent = 0.5;
  std::vector<translate_term> terms;

  std::string serialize() const;  // one-line text record for manifests
};
PotentialSpec parse_potential(const std::string& record);

void validate(const PotentialSpec& spec);

// Pointwise sampling on the grid (real-valued output). Requires the grid to
// resolve the support: >= 16 cells across the diameter.
SampledField sample(const PotentialSpec& spec, const Grid& grid);

// Band-limited realization: inverse transform of the closed-form transform
// restricted to the grid's frequency lattice. Free of alias images, so it is
// the right input when a discrete pipeline is compared against a continuum
// value at a single frequency. rough_random is rejected (use sample()).
SampledField sample_band_limited(const PotentialSpec& spec, const Grid& grid);

// Closed-form / 1D-radial-quadrature transform oracle. rough_random has no
// closed form and is rejected.
cd analytic_transform(const PotentialSpec& spec, const double* xi);

// Analytic critical Sobolev exponent; nullopt means "smooth" (estimator
// ceiling expected).
std::optional<double> known_exponent(const PotentialSpec& spec);

}  // namespace bornlab::potentials
