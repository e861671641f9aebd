#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bornlab/potentials.hpp"

namespace bornlab::analytic_checks {

using spectral_core::Grid;

enum class check_status { pass, fail, inconclusive };

struct CheckReport {
  std::string id;
  check_status status = check_status::inconclusive;
  double statistic = 0;
  double tolerance = 0;
  uint64_t samples_used = 0;
  std::string detail;

  std::string serialize() const;
};
CheckReport parse_report(const std::string& line);

// f(eta, xi): smooth, rapidly decaying test integrand on R^n x R^n.
using integrand2n = std::function<double(const double*, const double*)>;

// Surface-measure interchange: integrates f two ways,
//   outer eta in R^n, inner xi on Gamma(eta)   vs
//   outer xi in R^n, inner eta on the plane xi.(x - xi) = 0, weight |eta|/|xi|,
// and compares. Statistic = relative difference; tolerance =
// max(1%, 3 combined standard errors).
CheckReport measure_interchange_check(const integrand2n& f, int n_dim,
                                      uint64_t mc_budget, uint64_t seed);

// Unit-ball support bounds: (2) has the explicit Cauchy-Schwarz constant
// (statistic = ||qhat||_inf / (|B1|^{1/2} ||q||_2), tolerance 1); (1) and (3)
// are measured constants whose stability under N doubling is the criterion.
std::vector<CheckReport> support_bound_check(
    const potentials::PotentialSpec& q_spec, const Grid& g);

// Fits the decay of |u - incident| along rays; statistic =
// |fitted exponent - (1-n)/2|, tolerance 0.15. Radii spanning less than half
// a decade, or q = 0, give inconclusive.
CheckReport farfield_decay_check(const potentials::PotentialSpec& q_spec,
                                 const Grid& g, double k, const double* theta,
                                 const std::vector<double>& radii);

// The default battery used by the CLI: three interchange families plus
// support bounds plus far-field decay on a small 2D problem.
std::vector<CheckReport> run_default_checks(uint64_t seed, int threads);

std::string reports_csv(const std::vector<CheckReport>& reports);

}  // namespace bornlab::analytic_checks
