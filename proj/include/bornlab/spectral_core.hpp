#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bornlab/util.hpp"

namespace bornlab::spectral_core {

using cd = std::complex<double>;

// Cube [-L/2, L/2)^n sampled at N points per axis. Frequency nodes are
// 2*pi*m/L for m in [-N/2, N/2). Storage is row-major with the x1 index
// fastest: flat = i1 + N*i2 (+ N^2*i3).
struct Grid {
  int n_dim = 2;
  int points_per_dim = 0;
  double box_extent = 0.0;

  double spacing() const { return box_extent / points_per_dim; }
  std::size_t size() const {
    std::size_t s = 1;
    for (int d = 0; d < n_dim; ++d) s *= std::size_t(points_per_dim);
    return s;
  }
  double coord(int i) const { return -0.5 * box_extent + i * spacing(); }
  // signed integer frequency index for storage index i
  int freq_index(int i) const {
    return i < points_per_dim / 2 ? i : i - points_per_dim;
  }
  double freq(int i) const {
    return 2.0 * M_PI * freq_index(i) / box_extent;
  }
  double max_axis_freq() const {
    return M_PI * points_per_dim / box_extent;
  }
  void axis_indices(std::size_t flat, int idx[3]) const {
    int N = points_per_dim;
    idx[0] = int(flat % N);
    idx[1] = int((flat / N) % N);
    idx[2] = n_dim == 3 ? int(flat / (std::size_t(N) * N)) : 0;
  }
  bool operator==(const Grid& o) const {
    return n_dim == o.n_dim && points_per_dim == o.points_per_dim &&
           box_extent == o.box_extent;
  }
};

Grid make_grid(int n_dim, int points_per_dim, double box_extent);

enum class space_tag { physical, frequency };

struct SampledField {
  Grid grid;
  space_tag tag = space_tag::physical;
  std::vector<cd> values;
};

SampledField make_field(const Grid& g, space_tag tag);

// Discrete approximation of f̂(xi) = ∫ f(x) e^{-i x·xi} dx (forward) and
// f(x) = (2pi)^{-n} ∫ f̂(xi) e^{i x·xi} dxi (inverse). Round trip is exact to
// 1e-12 relative. Forward rejects non-finite input.
SampledField forward_transform(const SampledField& f);
SampledField inverse_transform(const SampledField& f);

// Dyadic shell energies: E_j = sum over base*2^{j-1} < |xi| <= base*2^j of
// |f̂|^2 * (2pi/L)^n. "central" collects |xi| <= base/2. Empty shells are
// reported as zeros, never omitted.
struct ShellEnergies {
  double base_scale = 1.0;
  double central = 0.0;
  std::vector<double> energy;  // index j, starting at j = 0
};
ShellEnergies shell_energies(const SampledField& f, double base_scale = 1.0);

// sqrt( sum w(xi)^{2s} |f̂|^2 (2pi/L)^n ), w = |xi| (homogeneous) or
// (1+|xi|^2)^{1/2}. Homogeneous weight at xi = 0: s = 0 contributes weight 1,
// s > 0 weight 0, s < 0 excludes the node.
double sobolev_norm(const SampledField& f, double s, bool homogeneous);

struct RegularityEstimate {
  std::vector<std::pair<int, double>> shells;
  double fitted_exponent = 0.0;
  std::pair<int, int> fit_window{0, 0};
  double fit_residual = 0.0;
  bool ceiling_flag = false;
};

// Least-squares fit of log2 E_j vs j over the window; fitted_exponent is
// -slope/2. points_per_dim feeds the measurable-decay ceiling rule
// (fitted_exponent >= log2(N)/2 - 1). Needs >= 4 usable shells.
RegularityEstimate estimate_regularity(
    const std::vector<std::pair<int, double>>& shells,
    std::pair<int, int> window, int points_per_dim);

std::pair<int, int> default_fit_window(const ShellEnergies& se);
std::vector<std::pair<int, double>> shell_list(const ShellEnergies& se);

// Serialization: directory with manifest.txt plus values.c128 (raw
// little-endian complex128, x1 fastest). Writes are atomic (temp + rename).
void save_field(const std::string& dir, const SampledField& f,
                const std::vector<std::pair<std::string, std::string>>&
                    extra_manifest = {});
SampledField load_field(const std::string& dir);

uint64_t field_content_hash(const SampledField& f);

}  // namespace bornlab::spectral_core
