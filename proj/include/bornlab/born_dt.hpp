#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bornlab/lippmann_schwinger.hpp"

namespace bornlab::born_dt {

using lippmann_schwinger::FarFieldDataset;
using spectral_core::Grid;
using spectral_core::RegularityEstimate;
using spectral_core::SampledField;

// Low-frequency cutoff chi*: 0 below C0, 1 above 2C0, quintic smoothstep
// (C^2) across [C0, 2C0].
struct CutoffSpec {
  double c0 = 2.0;
};
double chi_star(double t, const CutoffSpec& spec);

// Theoretical floor max{ (2 ||q||_{W^{alpha,2}})^4, 1 }. Experiments may
// override downward; reports record both values and the observed contraction
// at the value actually used.
double min_c0(const SampledField& q, double alpha);

enum class interp_kind { nearest, linear };

// Cartesian frequency field of the high-frequency Born approximation:
// node xi <- chi*(|xi|/2) * A interpolated at (k = |xi|/2, theta = -xi/|xi|).
// Nodes with |xi| < 2 C0 or outside dataset coverage are zero; `mask` marks
// nodes that carry data (1) vs zeroed ones (0). Diverged dataset cells punch
// holes in the mask.
struct AssembleResult {
  SampledField field;
  std::vector<uint8_t> mask;
};
AssembleResult assemble(const FarFieldDataset& ds, const Grid& g,
                        const CutoffSpec& spec,
                        interp_kind interp = interp_kind::linear);

// Regularity comparison of q against q - q_{B,H}, both restricted to the
// identical coverage mask: shells of chi*.qhat vs shells of
// chi*.qhat - qhat_{B,H}. The smooth low-frequency part is excluded by
// construction.
struct BornErrorReport {
  RegularityEstimate q_estimate;
  RegularityEstimate diff_estimate;
  std::vector<std::pair<int, double>> q_shells;
  std::vector<std::pair<int, double>> diff_shells;
  SampledField difference_physical;
  double c0_theoretical = 0;
  double c0_used = 0;
  double coverage_fraction = 0;  // masked-in fraction of the annulus
};
BornErrorReport born_error_report(const potentials::PotentialSpec& q_spec,
                                  const FarFieldDataset& ds, const Grid& g,
                                  const CutoffSpec& spec, double alpha = 0.0);

// CSV emission: shell index, E_j(q), E_j(difference); 17-digit values.
std::string shells_csv(const BornErrorReport& r);

}  // namespace bornlab::born_dt
