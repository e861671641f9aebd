#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bornlab/born_dt.hpp"
#include "bornlab/potentials.hpp"
#include "bornlab/resolvent.hpp"

namespace bornlab::born_terms {

using spectral_core::cd;
using spectral_core::Grid;
using spectral_core::SampledField;

struct TermParams {
  // Resolvent absorption. Negative values mean |epsilon| times the k-scaled
  // default (so -1 is the plain default); a report sweeping many k keeps the
  // damping-to-bias ratio uniform that way. Positive values pass through.
  double epsilon = -1.0;
  int extrapolation_levels = 3;
};

// Multilinear scattering-term chain at frequency eta, with k = |eta|/2 and
// incident direction theta = -eta/|eta|:
//   start g = f_j . planewave, then g <- f_m . R_k g for m = j-1 .. 1,
//   finally integrate g against e^{ik theta . y}. j = fields.size().
// j = 1 reduces to the discrete Fourier transform of f_1 at eta.
cd q_term_at(const std::vector<const SampledField*>& fields, const double* eta,
             const TermParams& p = {});
// all slots filled with the same field
cd q_term_at(const SampledField& q, int j, const double* eta,
             const TermParams& p = {});

struct BornTermReport {
  int j = 2;
  std::vector<std::array<double, 3>> eta;
  std::vector<cd> values;             // chi*-weighted samples
  std::vector<uint8_t> flags;         // 1 = excluded (non-contracting)
  std::vector<double> term_ratios;    // contraction evidence per sample
  std::vector<std::pair<int, double>> shells;  // estimated from the samples
};

// chi*(|eta|/2)-weighted samples of Qhat_j over eta_samples, with dyadic
// shell energies estimated from the polar samples.
BornTermReport q_tilde_report(const SampledField& q, int j,
                              const born_dt::CutoffSpec& cutoff,
                              const std::vector<std::array<double, 3>>& etas,
                              const TermParams& p = {});

// Shell energies from scattered samples: E_j ~ mean |v|^2 over samples in
// the dyadic shell, times the shell volume. Shells holding fewer than
// min_per_shell samples are dropped.
std::vector<std::pair<int, double>> shells_from_samples(
    const std::vector<std::array<double, 3>>& etas,
    const std::vector<cd>& values, int n_dim, double base_scale = 1.0,
    int min_per_shell = 4);

// Max over eta samples of the relative Leibniz defect
//   |(i eta)^alpha Qhat_j(q) - sum over beta_1+..+beta_j = alpha of
//    multinomial(alpha; beta) Qhat_j(D^{beta_1} q, ..., D^{beta_j} q)|
// normalized by the max magnitude of either side. Derivatives are spectral.
// Rough q (known exponent < |alpha| + n/2) is rejected.
double leibniz_residual(const potentials::PotentialSpec& q_spec, const Grid& g,
                        int j, const std::array<int, 3>& alpha,
                        const std::vector<std::array<double, 3>>& etas,
                        const TermParams& p = {});

// Partial remainder R_l = sum_{j=l}^{J_max} Qtilde_j with a geometric tail
// bound from the last measured term ratio. Non-contracting samples are
// flagged and excluded.
struct RemainderReport {
  int l = 4;
  int j_max = 6;
  std::vector<std::array<double, 3>> eta;
  std::vector<cd> partial;
  std::vector<double> tail_bound;
  std::vector<uint8_t> flags;
  std::vector<std::pair<int, double>> shells;
};
RemainderReport remainder_partial(const SampledField& q, int l, int j_max,
                                  const std::vector<std::array<double, 3>>& etas,
                                  const born_dt::CutoffSpec& cutoff,
                                  const TermParams& p = {});

// The two exponent formulas from the high-frequency estimate, evaluated
// independently and checked against each other: beta from the piecewise
// table, gamma from the closed form, with beta = -n/2 - gamma.
struct BetaGamma {
  double beta = 0;
  double gamma = 0;
};
BetaGamma beta_gamma_exponents(int n, double alpha, int j);

std::string report_csv(const BornTermReport& r);

}  // namespace bornlab::born_terms
