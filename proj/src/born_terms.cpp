#include "bornlab/born_terms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "bornlab/util.hpp"

namespace bornlab::born_terms {

using spectral_core::space_tag;
using util::input_error;

namespace {

// e^{-i (eta/2) . x}, factored per axis so one chain never evaluates more
// than n*N complex exponentials. eta/2 on the frequency lattice makes the
// wave exactly periodic; off-lattice eta is accepted too (the fields are
// compactly supported, so the transforms stay leakage-free), but the
// identity-grade tests below 1e-10 all assume admissible eta.
std::vector<std::vector<cd>> half_wave_axes(const spectral_core::Grid& g,
                                            const double* eta) {
  std::vector<std::vector<cd>> ax(g.n_dim);
  for (int d = 0; d < g.n_dim; ++d) {
    ax[d].resize(g.points_per_dim);
    for (int i = 0; i < g.points_per_dim; ++i)
      ax[d][i] = std::polar(1.0, -0.5 * eta[d] * g.coord(i));
  }
  return ax;
}

cd integrate_against_wave(const SampledField& f,
                          const std::vector<std::vector<cd>>& ax) {
  const spectral_core::Grid& g = f.grid;
  util::ksum_c acc;
  int idx[3];
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.axis_indices(flat, idx);
    cd w = ax[0][idx[0]] * ax[1][idx[1]];
    if (g.n_dim == 3) w *= ax[2][idx[2]];
    acc.add(f.values[flat] * w);
  }
  double cell = std::pow(f.grid.spacing(), f.grid.n_dim);
  return acc.value() * cell;
}

void multiply_pointwise(SampledField& g, const SampledField& f) {
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] *= f.values[i];
}

// Runs the iterated chain and records every prefix: out[m-1] is the m-slot
// value over the trailing fields (f_{j-m+1}, ..., f_j). With all slots equal
// that is Qhat_m(q) for m = 1..j, so one chain serves a whole Born series.
std::vector<cd> chain_values(const std::vector<const SampledField*>& fields,
                             const double* eta, const TermParams& p) {
  if (fields.empty()) throw input_error("q_term_at: no fields");
  for (const SampledField* f : fields) {
    if (!f) throw input_error("q_term_at: null field");
    if (!(f->grid == fields[0]->grid))
      throw input_error("q_term_at: fields live on mismatched grids");
    if (f->tag != space_tag::physical)
      throw input_error("q_term_at: fields must be physical-space");
  }
  const spectral_core::Grid& g = fields[0]->grid;
  double len2 = 0;
  for (int d = 0; d < g.n_dim; ++d) {
    if (!std::isfinite(eta[d])) throw input_error("q_term_at: non-finite eta");
    len2 += eta[d] * eta[d];
  }
  if (!(len2 > 0)) throw input_error("q_term_at: eta must be nonzero");
  for (int d = 0; d < g.n_dim; ++d)
    if (0.5 * std::abs(eta[d]) > g.max_axis_freq() * (1.0 + 1e-12))
      throw input_error("q_term_at: eta/2 beyond the grid's Nyquist range");

  int j = int(fields.size());
  auto ax = half_wave_axes(g, eta);
  SampledField work = *fields[j - 1];
  int idx[3];
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.axis_indices(flat, idx);
    cd w = ax[0][idx[0]] * ax[1][idx[1]];
    if (g.n_dim == 3) w *= ax[2][idx[2]];
    work.values[flat] *= w;
  }

  std::vector<cd> out;
  out.reserve(j);
  out.push_back(integrate_against_wave(work, ax));
  resolvent::ResolventParams rp;
  rp.k = 0.5 * std::sqrt(len2);
  rp.epsilon = p.epsilon < 0
                   ? -p.epsilon * resolvent::default_epsilon(g, rp.k)
                   : p.epsilon;
  rp.extrapolation_levels = p.extrapolation_levels;
  for (int m = j - 1; m >= 1; --m) {
    work = resolvent::apply_resolvent(work, rp);
    multiply_pointwise(work, *fields[m - 1]);
    out.push_back(integrate_against_wave(work, ax));
  }
  return out;
}

double eta_len(const std::array<double, 3>& e) {
  return std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
}

constexpr int kCentralShell = std::numeric_limits<int>::min();

// Dyadic shell index under the spectral_core convention: shell s covers
// base*2^{s-1} < r <= base*2^s, everything at or below base/2 is "central".
int shell_index(double r, double base) {
  if (!(r > 0.5 * base)) return kCentralShell;
  return int(std::ceil(std::log2(r / base) - 1e-12));
}

double ratio_of(double num, double den) {
  if (den > 0) return num / den;
  return num > 0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

cd q_term_at(const std::vector<const SampledField*>& fields, const double* eta,
             const TermParams& p) {
  return chain_values(fields, eta, p).back();
}

cd q_term_at(const SampledField& q, int j, const double* eta,
             const TermParams& p) {
  if (j < 1) throw input_error("q_term_at: j must be >= 1");
  std::vector<const SampledField*> fields(std::size_t(j), &q);
  return chain_values(fields, eta, p).back();
}

std::vector<std::pair<int, double>> shells_from_samples(
    const std::vector<std::array<double, 3>>& etas,
    const std::vector<cd>& values, int n_dim, double base_scale,
    int min_per_shell) {
  if (etas.size() != values.size())
    throw input_error("shells_from_samples: eta/value size mismatch");
  if (n_dim != 2 && n_dim != 3)
    throw input_error("shells_from_samples: n_dim must be 2 or 3");
  if (!(base_scale > 0))
    throw input_error("shells_from_samples: base_scale must be positive");
  if (min_per_shell < 1)
    throw input_error("shells_from_samples: min_per_shell must be >= 1");

  std::map<int, std::pair<util::ksum, int>> acc;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    int s = shell_index(eta_len(etas[i]), base_scale);
    if (s == kCentralShell) continue;
    acc[s].first.add(std::norm(values[i]));
    acc[s].second += 1;
  }
  std::vector<std::pair<int, double>> out;
  for (const auto& [s, sum_count] : acc) {
    if (sum_count.second < min_per_shell) continue;
    double b = base_scale * std::ldexp(1.0, s);
    double a = 0.5 * b;
    double vol = n_dim == 2 ? M_PI * (b * b - a * a)
                            : (4.0 * M_PI / 3.0) * (b * b * b - a * a * a);
    out.emplace_back(s, sum_count.first.value() / sum_count.second * vol);
  }
  return out;
}

BornTermReport q_tilde_report(const SampledField& q, int j,
                              const born_dt::CutoffSpec& cutoff,
                              const std::vector<std::array<double, 3>>& etas,
                              const TermParams& p) {
  if (j < 2)
    throw input_error(
        "q_tilde_report: j must be >= 2 (the j = 1 term is the transform "
        "itself)");
  BornTermReport r;
  r.j = j;
  r.eta = etas;
  r.values.resize(etas.size());
  r.flags.resize(etas.size());
  r.term_ratios.resize(etas.size());
  std::vector<const SampledField*> fields(std::size_t(j), &q);
  util::parallel_for(etas.size(), util::default_threads(), [&](std::size_t i) {
    double w = born_dt::chi_star(0.5 * eta_len(r.eta[i]), cutoff);
    if (w == 0.0) {
      // cutoff-dead sample: Qtilde_j is exactly zero there and the resolvent
      // ladder may not even be evaluable at the tiny k, so skip the chain
      r.values[i] = cd{0, 0};
      r.term_ratios[i] = 0.0;
      r.flags[i] = 0;
      return;
    }
    std::vector<cd> vs = chain_values(fields, r.eta[i].data(), p);
    r.values[i] = w * vs[j - 1];
    r.term_ratios[i] = ratio_of(std::abs(vs[j - 1]), std::abs(vs[j - 2]));
    r.flags[i] = r.term_ratios[i] < 1.0 ? 0 : 1;
  });
  std::vector<std::array<double, 3>> kept_eta;
  std::vector<cd> kept_val;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (r.flags[i]) continue;
    kept_eta.push_back(etas[i]);
    kept_val.push_back(r.values[i]);
  }
  r.shells = shells_from_samples(kept_eta, kept_val, q.grid.n_dim);
  return r;
}

RemainderReport remainder_partial(const SampledField& q, int l, int j_max,
                                  const std::vector<std::array<double, 3>>& etas,
                                  const born_dt::CutoffSpec& cutoff,
                                  const TermParams& p) {
  if (l < 2) throw input_error("remainder_partial: l must be >= 2");
  if (j_max < l)
    throw input_error("remainder_partial: j_max must be >= l");
  RemainderReport r;
  r.l = l;
  r.j_max = j_max;
  r.eta = etas;
  r.partial.resize(etas.size());
  r.tail_bound.resize(etas.size());
  r.flags.resize(etas.size());
  std::vector<const SampledField*> fields(std::size_t(j_max), &q);
  util::parallel_for(etas.size(), util::default_threads(), [&](std::size_t i) {
    double w = born_dt::chi_star(0.5 * eta_len(r.eta[i]), cutoff);
    if (w == 0.0) {
      r.partial[i] = cd{0, 0};
      r.tail_bound[i] = 0.0;
      r.flags[i] = 0;
      return;
    }
    std::vector<cd> vs = chain_values(fields, r.eta[i].data(), p);
    util::ksum_c sum;
    for (int m = l; m <= j_max; ++m) sum.add(vs[m - 1]);
    r.partial[i] = w * sum.value();
    double ratio =
        ratio_of(std::abs(vs[j_max - 1]), std::abs(vs[j_max - 2]));
    if (ratio < 1.0) {
      r.flags[i] = 0;
      r.tail_bound[i] = w * std::abs(vs[j_max - 1]) * ratio / (1.0 - ratio);
    } else {
      r.flags[i] = 1;
      r.tail_bound[i] = std::numeric_limits<double>::infinity();
    }
  });
  std::vector<std::array<double, 3>> kept_eta;
  std::vector<cd> kept_val;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (r.flags[i]) continue;
    kept_eta.push_back(etas[i]);
    kept_val.push_back(r.partial[i]);
  }
  r.shells = shells_from_samples(kept_eta, kept_val, q.grid.n_dim);
  return r;
}

namespace {

struct Split {
  std::array<std::array<int, 3>, 3> beta{};  // slots beyond j unused
  double coeff = 1.0;
};

double multinomial(const std::array<int, 3>& alpha,
                   const std::array<std::array<int, 3>, 3>& beta, int j) {
  static const double fact[3] = {1.0, 1.0, 2.0};
  double c = 1.0;
  for (int d = 0; d < 3; ++d) {
    double den = 1.0;
    for (int s = 0; s < j; ++s) den *= fact[beta[s][d]];
    c *= fact[alpha[d]] / den;
  }
  return c;
}

// all multi-indices b with 0 <= b <= a componentwise
std::vector<std::array<int, 3>> sub_indices(const std::array<int, 3>& a) {
  std::vector<std::array<int, 3>> out;
  for (int b0 = 0; b0 <= a[0]; ++b0)
    for (int b1 = 0; b1 <= a[1]; ++b1)
      for (int b2 = 0; b2 <= a[2]; ++b2) out.push_back({b0, b1, b2});
  return out;
}

std::array<int, 3> minus_idx(const std::array<int, 3>& a,
                             const std::array<int, 3>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

std::vector<Split> alpha_splits(const std::array<int, 3>& alpha, int j) {
  std::vector<Split> out;
  for (const auto& b1 : sub_indices(alpha)) {
    if (j == 2) {
      Split s;
      s.beta[0] = b1;
      s.beta[1] = minus_idx(alpha, b1);
      s.coeff = multinomial(alpha, s.beta, 2);
      out.push_back(s);
      continue;
    }
    for (const auto& b2 : sub_indices(minus_idx(alpha, b1))) {
      Split s;
      s.beta[0] = b1;
      s.beta[1] = b2;
      s.beta[2] = minus_idx(minus_idx(alpha, b1), b2);
      s.coeff = multinomial(alpha, s.beta, 3);
      out.push_back(s);
    }
  }
  return out;
}

cd ipow_eta(const std::array<double, 3>& eta, const std::array<int, 3>& alpha) {
  cd z{1, 0};
  for (int d = 0; d < 3; ++d)
    for (int t = 0; t < alpha[d]; ++t) z *= cd{0, eta[d]};
  return z;
}

}  // namespace

double leibniz_residual(const potentials::PotentialSpec& q_spec, const Grid& g,
                        int j, const std::array<int, 3>& alpha,
                        const std::vector<std::array<double, 3>>& etas,
                        const TermParams& p) {
  if (j < 2 || j > 3) throw input_error("leibniz_residual: j must be 2 or 3");
  int order = 0;
  for (int d = 0; d < 3; ++d) {
    if (alpha[d] < 0)
      throw input_error("leibniz_residual: negative multi-index");
    if (d >= g.n_dim && alpha[d] > 0)
      throw input_error("leibniz_residual: alpha component beyond n_dim");
    order += alpha[d];
  }
  if (order > 2) throw input_error("leibniz_residual: |alpha| must be <= 2");
  if (etas.empty()) throw input_error("leibniz_residual: no eta samples");
  std::optional<double> ke = potentials::known_exponent(q_spec);
  if (ke && *ke < order + 0.5 * g.n_dim)
    throw input_error(
        "leibniz_residual: potential too rough for |alpha| spectral "
        "derivatives");

  SampledField q = potentials::sample(q_spec, g);
  // D^beta q for every beta <= alpha. beta = 0 keeps the untouched samples
  // so the alpha = 0 case stays a bitwise identity.
  std::map<std::array<int, 3>, SampledField> dq;
  dq.emplace(std::array<int, 3>{0, 0, 0}, q);
  if (order > 0) {
    SampledField qhat = spectral_core::forward_transform(q);
    for (const auto& b : sub_indices(alpha)) {
      if (b == std::array<int, 3>{0, 0, 0}) continue;
      SampledField bh = qhat;
      int idx[3];
      for (std::size_t flat = 0; flat < g.size(); ++flat) {
        g.axis_indices(flat, idx);
        cd f{1, 0};
        for (int d = 0; d < g.n_dim; ++d)
          for (int t = 0; t < b[d]; ++t) f *= cd{0, g.freq(idx[d])};
        bh.values[flat] *= f;
      }
      dq.emplace(b, spectral_core::inverse_transform(bh));
    }
  }

  std::vector<Split> splits = alpha_splits(alpha, j);
  std::vector<double> defect(etas.size()), mag(etas.size());
  util::parallel_for(etas.size(), util::default_threads(), [&](std::size_t i) {
    std::vector<const SampledField*> plain(std::size_t(j), &q);
    cd left = ipow_eta(etas[i], alpha) *
              chain_values(plain, etas[i].data(), p).back();
    util::ksum_c right;
    for (const Split& s : splits) {
      std::vector<const SampledField*> fields(std::size_t(j), nullptr);
      for (int slot = 0; slot < j; ++slot)
        fields[slot] = &dq.at(s.beta[slot]);
      right.add(s.coeff * chain_values(fields, etas[i].data(), p).back());
    }
    defect[i] = std::abs(left - right.value());
    mag[i] = std::max(std::abs(left), std::abs(right.value()));
  });
  double dmax = 0, mmax = 0;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    dmax = std::max(dmax, defect[i]);
    mmax = std::max(mmax, mag[i]);
  }
  // normalized by the peak magnitude over the sample set, so transform zeros
  // do not divide noise by noise
  if (mmax == 0.0) return 0.0;
  return dmax / mmax;
}

BetaGamma beta_gamma_exponents(int n, double alpha, int j) {
  if (n != 2 && n != 3)
    throw input_error("beta_gamma_exponents: n must be 2 or 3");
  if (!(alpha >= 0.0) || !(alpha < 0.5 * n))
    throw input_error("beta_gamma_exponents: alpha must lie in [0, n/2)");
  if (j < (n == 2 ? 4 : 5))
    throw input_error(
        "beta_gamma_exponents: j must be >= 4 (n = 2) or >= 5 (n = 3)");
  BetaGamma bg;
  bg.gamma = -(j - 1.0) + 0.5 * (n - 1.0) * (j - 3.0) * (0.5 - alpha / n) +
             0.5 * (n - 1.0) * std::max(0.0, 0.5 - 2.0 * alpha / n);
  if (n == 2) {
    bg.beta = alpha <= 0.5 ? 0.75 * (j - 2.0) + 0.25 * alpha * (j - 1.0)
                           : (j - 3.0) * (0.75 + 0.25 * alpha) + 1.0;
  } else {
    bg.beta = alpha <= 0.75
                  ? 0.5 * (j - 2.0) + alpha * (j - 1.0) / 3.0 - 0.5
                  : (j - 3.0) * (0.5 + alpha / 3.0) + 0.5;
  }
  double dual = -0.5 * n - bg.gamma;
  if (std::abs(bg.beta - dual) > 1e-12 * std::max(1.0, std::abs(bg.beta)))
    throw util::compute_error(
        "beta_gamma_exponents: piecewise table disagrees with -n/2 - gamma");
  return bg;
}

std::string report_csv(const BornTermReport& r) {
  std::string s = "j,abs_eta,re,im,shell\n";
  int flagged = 0;
  for (std::size_t i = 0; i < r.eta.size(); ++i) {
    double len = eta_len(r.eta[i]);
    int sh = shell_index(len, 1.0);
    s += std::to_string(r.j);
    s += ',';
    s += util::format_g17(len);
    s += ',';
    s += util::format_g17(r.values[i].real());
    s += ',';
    s += util::format_g17(r.values[i].imag());
    s += ',';
    s += std::to_string(sh == kCentralShell ? -1 : sh);
    s += '\n';
    if (i < r.flags.size() && r.flags[i]) ++flagged;
  }
  s += "# samples," + std::to_string(r.eta.size()) + '\n';
  s += "# flagged," + std::to_string(flagged) + '\n';
  for (const auto& [id, e] : r.shells)
    s += "# shell," + std::to_string(id) + ',' + util::format_g17(e) + '\n';
  return s;
}

}  // namespace bornlab::born_terms
