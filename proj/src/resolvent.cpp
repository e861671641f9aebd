#include "bornlab/resolvent.hpp"

#include <cmath>

#include "bornlab/bessel.hpp"
#include "bornlab/util.hpp"

namespace bornlab::resolvent {

using util::input_error;

double default_epsilon(const Grid& g, double k) {
  return k * (2.0 * M_PI / g.box_extent);
}

std::vector<double> extrapolation_weights(int levels) {
  if (levels < 1)
    throw input_error("resolvent: extrapolation_levels must be >= 1");
  // Lagrange basis evaluated at 0 over the nodes x_l = 2^{-l}
  std::vector<double> w(levels, 1.0);
  for (int l = 0; l < levels; ++l) {
    double xl = std::ldexp(1.0, -l);
    for (int m = 0; m < levels; ++m) {
      if (m == l) continue;
      double xm = std::ldexp(1.0, -m);
      w[l] *= -xm / (xl - xm);
    }
  }
  return w;
}

SampledField apply_resolvent(const SampledField& f, const ResolventParams& p) {
  const Grid& g = f.grid;
  if (f.tag != spectral_core::space_tag::physical)
    throw input_error("resolvent: input must be a physical-space field");
  if (!(p.k > 0)) throw input_error("resolvent: k must be positive");
  if (p.epsilon == 0.0)
    throw input_error(
        "resolvent: epsilon = 0 is the limit itself; reach it through "
        "extrapolation");
  double eps = p.epsilon < 0 ? default_epsilon(g, p.k) : p.epsilon;
  if (eps > p.k * p.k)
    throw input_error("resolvent: epsilon must not exceed k^2");
  if (p.k * g.box_extent / M_PI > g.points_per_dim * (1.0 + 1e-12))
    throw input_error("resolvent: k beyond the grid's Nyquist range");

  std::vector<double> w = extrapolation_weights(p.extrapolation_levels);
  SampledField hat = spectral_core::forward_transform(f);
  double k2 = p.k * p.k;
  int idx[3];
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.axis_indices(flat, idx);
    double s2 = 0;
    for (int d = 0; d < g.n_dim; ++d) {
      double x = g.freq(idx[d]);
      s2 += x * x;
    }
    cd m{0, 0};
    double el = eps;
    for (int l = 0; l < p.extrapolation_levels; ++l, el *= 0.5)
      m += w[l] / cd{k2 - s2, el};
    hat.values[flat] *= m;
  }
  return spectral_core::inverse_transform(hat);
}

cd fundamental_solution(int n_dim, double k, double r) {
  if (!(r > 0)) throw input_error("fundamental_solution: r must be positive");
  if (!(k > 0)) throw input_error("fundamental_solution: k must be positive");
  if (n_dim == 2) return cd{0, -0.5} * bessel::h1(0.0, k * r);
  if (n_dim == 3)
    return -std::exp(cd{0, k * r}) / (2.0 * M_PI * r);
  throw input_error("fundamental_solution: n_dim must be 2 or 3");
}

}  // namespace bornlab::resolvent
