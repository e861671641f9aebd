#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bornlab/potentials.hpp"
#include "bornlab/resolvent.hpp"

namespace bornlab::lippmann_schwinger {

using spectral_core::cd;
using spectral_core::Grid;
using spectral_core::SampledField;

struct SolveParams {
  int max_terms = 64;
  double tol = 1e-8;
  double epsilon = -1.0;  // forwarded to the resolvent; < 0 = default
  int extrapolation_levels = 3;
};

// u = sum of Neumann terms: term_0 = incident plane wave, term_{m+1} =
// R_k(q . term_m). Stops when the latest term norm drops below
// tol * ||term_0 restricted to supp q||.
struct ScatteringSolution {
  SampledField u;
  double k = 0;
  std::array<double, 3> theta{1, 0, 0};
  std::vector<double> term_norms;
  bool converged = false;
  double contraction_ratio = 0.0;  // max ratio of consecutive term norms
};

// Throws compute_error (diverged, carrying the ratio) when three consecutive
// term ratios are >= 1.
ScatteringSolution solve(const SampledField& q, double k, const double* theta,
                         const SolveParams& p = {});

// A(theta_out, theta, k) = h^n sum over supp q of e^{-ik theta_out . y} q u.
cd far_field(const SampledField& q, const ScatteringSolution& sol,
             const double* theta_out);

struct FarFieldDataset {
  int n_dim = 2;
  std::vector<double> k_samples;                     // increasing
  std::vector<std::array<double, 3>> theta_samples;  // unit vectors
  std::vector<cd> values;   // backscatter A(-theta,theta,k), k-major layout
  std::vector<uint8_t> flags;  // 0 = ok, 1 = diverged (value zeroed)
  std::vector<std::pair<std::string, std::string>> meta;

  std::size_t index(std::size_t ik, std::size_t it) const {
    return ik * theta_samples.size() + it;
  }
};

// Geometric ladder of 48 wavenumbers in [c0_floor, 0.8 * pi N / (2L)].
std::vector<double> default_k_samples(const Grid& g, double c0_floor,
                                      int count = 48);
// 64 uniform angles (n=2) or the 26-point lattice-direction shell (n=3),
// refinable by `level` subdivisions of the angular step.
std::vector<std::array<double, 3>> default_theta_samples(int n_dim,
                                                         int count = 64);

struct SweepParams {
  SolveParams solve;
  std::string cache_dir;  // empty: no caching
  int threads = 0;        // 0: hardware default
};

// One backscatter value per (k, theta). Diverged cells are flagged and
// zeroed; more than 10% diverged fails the sweep with a summary.
FarFieldDataset sweep(const potentials::PotentialSpec& q_spec, const Grid& g,
                      const std::vector<double>& k_samples,
                      const std::vector<std::array<double, 3>>& theta_samples,
                      const SweepParams& p = {});

// Directory layout: manifest.txt + values.c128 + flags.u8 (little endian).
void save_dataset(const std::string& dir, const FarFieldDataset& ds);
FarFieldDataset load_dataset(const std::string& dir);

// Hash of everything that determines sweep output; keys the cache.
uint64_t sweep_config_hash(const potentials::PotentialSpec& q_spec,
                           const Grid& g, const std::vector<double>& k_samples,
                           const std::vector<std::array<double, 3>>& thetas,
                           const SolveParams& sp);

}  // namespace bornlab::lippmann_schwinger
