#include "bornlab/singular_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bornlab/qmc.hpp"
#include "bornlab/resolvent.hpp"
#include "bornlab/util.hpp"

namespace bornlab::singular_quadrature {

namespace {

double norm2(const double* v, int n) {
  double s = 0;
  for (int d = 0; d < n; ++d) s += v[d] * v[d];
  return std::sqrt(s);
}

// orthonormal frame with e[2] = eta/|eta| (n=3) or absolute axes (n=2)
struct Frame {
  double e1[3], e2[3], e3[3];
};

Frame frame_for(const double* eta, int n_dim) {
  Frame f{};
  if (n_dim == 2) {
    f.e1[0] = 1;
    f.e2[1] = 1;
    return f;
  }
  double len = norm2(eta, 3);
  for (int d = 0; d < 3; ++d) f.e3[d] = eta[d] / len;
  // pick the axis least aligned with e3 to seed e1
  int least = 0;
  for (int d = 1; d < 3; ++d)
    if (std::abs(f.e3[d]) < std::abs(f.e3[least])) least = d;
  double dot = f.e3[least];
  double nrm = 0;
  for (int d = 0; d < 3; ++d) {
    f.e1[d] = (d == least ? 1.0 : 0.0) - dot * f.e3[d];
    nrm += f.e1[d] * f.e1[d];
  }
  nrm = std::sqrt(nrm);
  for (int d = 0; d < 3; ++d) f.e1[d] /= nrm;
  f.e2[0] = f.e3[1] * f.e1[2] - f.e3[2] * f.e1[1];
  f.e2[1] = f.e3[2] * f.e1[0] - f.e3[0] * f.e1[2];
  f.e2[2] = f.e3[0] * f.e1[1] - f.e3[1] * f.e1[0];
  return f;
}

}  // namespace

SphereRule sphere_rule(const double* eta, int order, int n_dim) {
  if (n_dim != 2 && n_dim != 3)
    throw util::input_error("sphere_rule: n_dim must be 2 or 3");
  if (order < 1) throw util::input_error("sphere_rule: order must be >= 1");
  double len = norm2(eta, n_dim);
  if (len == 0.0) throw util::input_error("sphere_rule: eta must be nonzero");
  double rho = 0.5 * len;
  SphereRule rule;
  rule.n_dim = n_dim;
  rule.order = order;
  for (int d = 0; d < n_dim; ++d) rule.eta[d] = eta[d];

  if (n_dim == 2) {
    int m = std::max(4, order);
    if (m % 2) ++m;  // keep the node set symmetric under x -> eta - x
    double w = rho * 2.0 * M_PI / m;
    rule.nodes.resize(m);
    rule.weights.assign(m, w);
    for (int a = 0; a < m; ++a) {
      double th = 2.0 * M_PI * a / m;
      rule.nodes[a] = {0.5 * eta[0] + rho * std::cos(th),
                       0.5 * eta[1] + rho * std::sin(th), 0.0};
    }
    return rule;
  }

  Frame fr = frame_for(eta, 3);
  int npol = (order + 2) / 2;  // Gauss-Legendre exact through degree order
  int naz = order + 1;
  if (naz % 2) ++naz;
  std::vector<double> gx, gw;
  util::gauss_legendre(npol, gx, gw);
  rule.nodes.reserve(std::size_t(npol) * naz);
  rule.weights.reserve(std::size_t(npol) * naz);
  for (int i = 0; i < npol; ++i) {
    double mu = gx[i], st = std::sqrt(1.0 - mu * mu);
    for (int a = 0; a < naz; ++a) {
      double ph = 2.0 * M_PI * a / naz;
      std::array<double, 3> p{};
      for (int d = 0; d < 3; ++d)
        p[d] = 0.5 * eta[d] + rho * (st * (std::cos(ph) * fr.e1[d] +
                                           std::sin(ph) * fr.e2[d]) +
                                     mu * fr.e3[d]);
      rule.nodes.push_back(p);
      rule.weights.push_back(rho * rho * gw[i] * 2.0 * M_PI / naz);
    }
  }
  return rule;
}

cd pv_radial(const std::function<cd(double)>& g, double rho, double r_max,
             int order, int extrap_levels) {
  if (!(rho > 0)) throw util::input_error("pv_radial: rho must be positive");
  if (!(r_max > rho))
    throw util::input_error("pv_radial: r_max must exceed rho");
  if (order < 2) throw util::input_error("pv_radial: order must be >= 2");
  if (extrap_levels < 2 || extrap_levels > 8)
    throw util::input_error("pv_radial: extrap_levels must be in [2,8]");

  std::vector<double> gx, gw;
  util::gauss_legendre(order, gx, gw);
  double a = std::min(rho, r_max - rho);  // symmetric band half-width

  util::ksum_c total;
  // scale reference for the Cauchy diagnostic: integral of |g|/|D|, which
  // stays honest when the signed value cancels to roundoff
  util::ksum mag;

  auto plain_panel = [&](double lo, double hi) {
    double c = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
    util::ksum_c acc;
    for (int i = 0; i < order; ++i) {
      double r = c + hw * gx[i];
      cd v = g(r) / (rho * rho - r * r);
      acc.add(gw[i] * hw * v);
      mag.add(gw[i] * hw * std::abs(v));
    }
    total.add(acc.value());
  };
  // leftover [0, rho - a] and tail [rho + a, r_max], in panels growing
  // geometrically away from the band edge
  if (a < rho) {
    double hi = rho - a, w = a;
    while (hi > 1e-14 * rho) {
      double lo = std::max(0.0, hi - w);
      plain_panel(lo, hi);
      hi = lo;
      w *= 2.0;
    }
  }
  if (rho + a < r_max) {
    double lo = rho + a, w = a;
    while (lo < r_max - 1e-14 * rho) {
      double hi = std::min(r_max, lo + w);
      plain_panel(lo, hi);
      lo = hi;
      w *= 2.0;
    }
  }

  // symmetric band: pairs r = rho -+ t cancel the pole,
  //   [g(rho-t)/(2rho-t) - g(rho+t)/(2rho+t)] / t,
  // integrated over dyadic shells in t down to an exclusion delta, then
  // Richardson-extrapolated in delta -> 0 (the excluded mass is ~ psi(0).delta)
  const int kFirstLevel = 5;  // first estimate excludes t < a/2^6
  int shells = kFirstLevel + extrap_levels;
  std::vector<cd> cumulative(shells + 1);
  util::ksum_c band;
  for (int m = 0; m < shells; ++m) {
    double hi = a / double(1 << m), lo = 0.5 * hi;
    util::ksum_c acc;
    for (int i = 0; i < order; ++i) {
      double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[i];
      double wt = gw[i] * 0.5 * (hi - lo);
      cd lo_v = g(rho - t) / (2.0 * rho - t), hi_v = g(rho + t) / (2.0 * rho + t);
      acc.add(wt * (lo_v - hi_v) / t);
      mag.add(wt * (std::abs(lo_v) + std::abs(hi_v)) / t);
    }
    band.add(acc.value());
    cumulative[m + 1] = band.value();
  }
  // I(delta_l) with delta_l = a/2^(kFirstLevel+l): partial sums of the shells
  std::vector<cd> estimates(extrap_levels);
  for (int l = 0; l < extrap_levels; ++l)
    estimates[l] = cumulative[kFirstLevel + l + 1];
  cd prev{0, 0}, best{0, 0};
  for (int use = 2; use <= extrap_levels; ++use) {
    auto w = resolvent::extrapolation_weights(use);
    cd acc{0, 0};
    for (int l = 0; l < use; ++l) acc += w[l] * estimates[l];
    prev = best;
    best = acc;
    if (use == 2) prev = acc;  // seed so the check below uses real pairs
  }
  if (extrap_levels > 2) {
    // heavily cancelling integrals are judged against a tenth of their
    // |g|/|D| mass, not the cancelled value
    double scale = std::max(std::abs(best), 1e-1 * mag.value()) + 1e-300;
    if (std::abs(best - prev) > 0.01 * scale) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "pv_radial: extrapolation not Cauchy at 1%% "
                    "(|d|=%.3e scale=%.3e rho=%.3g)",
                    std::abs(best - prev), scale, rho);
      throw util::compute_error(buf);
    }
  }
  return total.value() + best;
}

namespace {

// p.v. integral over the plane of F(w) / (rho^2 - |w - eta/2|^2), in polar
// coordinates around eta/2 (2D only)
cd pv_plane(const std::function<cd(const double*)>& F, const double* eta,
            int n_ang, int rad_order, int levels, double r_max) {
  double rho = 0.5 * norm2(eta, 2);
  util::ksum_c acc;
  for (int a = 0; a < n_ang; ++a) {
    double th = 2.0 * M_PI * a / n_ang;
    double ux = std::cos(th), uy = std::sin(th);
    auto g = [&](double r) -> cd {
      double p[3] = {0.5 * eta[0] + r * ux, 0.5 * eta[1] + r * uy, 0.0};
      return F(p) * r;
    };
    acc.add(pv_radial(g, rho, r_max, rad_order, levels) * (2.0 * M_PI / n_ang));
  }
  return acc.value();
}

double pv_rmax(double rho) { return 2.0 * rho + 24.0; }

}  // namespace

SokhotskiResult sokhotski_q2(const transform_fn& qhat, const double* eta,
                             int n_dim, int order, int extrap_levels) {
  if (n_dim != 2 && n_dim != 3)
    throw util::input_error("sokhotski_q2: n_dim must be 2 or 3");
  double len = norm2(eta, n_dim);
  if (len == 0.0) throw util::input_error("sokhotski_q2: eta must be nonzero");
  if (order < 8) throw util::input_error("sokhotski_q2: order must be >= 8");
  double rho = 0.5 * len, rmax = pv_rmax(rho);
  double pref = std::pow(2.0 * M_PI, -n_dim);
  SokhotskiResult out;

  if (n_dim == 2) {
    int n_ang = std::max(32, order);
    auto F = [&](const double* w) -> cd {
      double m[3] = {eta[0] - w[0], eta[1] - w[1], 0.0};
      return qhat(w) * qhat(m);
    };
    out.pv_part = pref * pv_plane(F, eta, n_ang, std::max(12, order / 4),
                                  extrap_levels, rmax);
    util::ksum_c sph;
    for (int a = 0; a < n_ang; ++a) {
      double th = 2.0 * M_PI * a / n_ang;
      double p[3] = {0.5 * eta[0] + rho * std::cos(th),
                     0.5 * eta[1] + rho * std::sin(th), 0.0};
      double m[3] = {eta[0] - p[0], eta[1] - p[1], 0.0};
      sph.add(qhat(p) * qhat(m) * rho * (2.0 * M_PI / n_ang));
    }
    out.sphere_part = pref * cd{0, -M_PI / len} * sph.value();
  } else {
    // radial reduction: w = eta/2 + r(mu e3 + sqrt(1-mu^2) e1); the mirror
    // argument eta - w = eta/2 - r(...) comes along for free
    Frame fr = frame_for(eta, 3);
    int n_mu = std::max(24, order / 2);
    std::vector<double> mx, mw;
    util::gauss_legendre(n_mu, mx, mw);
    int rad_order = std::max(12, order / 4);
    util::ksum_c pv, sph;
    for (int i = 0; i < n_mu; ++i) {
      double mu = mx[i], st = std::sqrt(1.0 - mu * mu);
      double v[3];
      for (int d = 0; d < 3; ++d) v[d] = mu * fr.e3[d] + st * fr.e1[d];
      auto g = [&](double r) -> cd {
        double p[3], m[3];
        for (int d = 0; d < 3; ++d) {
          p[d] = 0.5 * eta[d] + r * v[d];
          m[d] = 0.5 * eta[d] - r * v[d];
        }
        return qhat(p) * qhat(m) * r * r;
      };
      pv.add(mw[i] * 2.0 * M_PI *
             pv_radial(g, rho, rmax, rad_order, extrap_levels));
      double p[3], m[3];
      for (int d = 0; d < 3; ++d) {
        p[d] = 0.5 * eta[d] + rho * v[d];
        m[d] = 0.5 * eta[d] - rho * v[d];
      }
      sph.add(mw[i] * 2.0 * M_PI * rho * rho * qhat(p) * qhat(m));
    }
    out.pv_part = pref * pv.value();
    out.sphere_part = pref * cd{0, -M_PI / len} * sph.value();
  }
  out.total = out.pv_part + out.sphere_part;
  return out;
}

namespace {

// ring convolution R(psi) = sum_a w_a q1(xi_a) q2(psi - xi_a) over Gamma(eta);
// the reflection identity R[q(.), q(eta - .)] (psi) = R(eta - psi) lets every
// quartic term route through this one kernel
struct RingConv {
  const SphereRule* rule;
  const transform_fn* q_node;  // factor evaluated at the node
  const transform_fn* q_diff;  // factor evaluated at psi - node
  std::vector<cd> node_vals;

  RingConv(const SphereRule& r, const transform_fn& qn, const transform_fn& qd)
      : rule(&r), q_node(&qn), q_diff(&qd) {
    node_vals.resize(r.nodes.size());
    for (std::size_t a = 0; a < r.nodes.size(); ++a)
      node_vals[a] = (*q_node)(r.nodes[a].data());
  }
  cd operator()(const double* psi) const {
    util::ksum_c acc;
    for (std::size_t a = 0; a < rule->nodes.size(); ++a) {
      double d[3] = {psi[0] - rule->nodes[a][0], psi[1] - rule->nodes[a][1],
                     psi[2] - rule->nodes[a][2]};
      acc.add(rule->weights[a] * node_vals[a] * (*q_diff)(d));
    }
    return acc.value();
  }
};

}  // namespace

cd pure_spherical_q4(const transform_fn& qhat, const double* eta, int order,
                     int n_dim) {
  SphereRule rule = sphere_rule(eta, order, n_dim);
  double len = norm2(eta, n_dim);
  RingConv R(rule, qhat, qhat);
  // value = (1/|eta|^3) sum_b w_b R(phi_b) R(eta - phi_b)
  util::ksum_c acc;
  for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
    double refl[3] = {rule.eta[0] - rule.nodes[b][0],
                      rule.eta[1] - rule.nodes[b][1],
                      rule.eta[2] - rule.nodes[b][2]};
    acc.add(rule.weights[b] * R(rule.nodes[b].data()) * R(refl));
  }
  return acc.value() / (len * len * len);
}

TubeResult tube_term(const std::array<transform_fn, 4>& slots,
                     const double* eta, double delta, int order, int n_dim) {
  if (!(delta > 0.0 && delta <= 0.25))
    throw util::input_error("tube_term: delta must be in (0, 1/4]");
  double len = norm2(eta, n_dim);
  if (len == 0.0) throw util::input_error("tube_term: eta must be nonzero");
  TubeResult out;
  if (len <= 1.0 / delta) {
    out.indicator_zero = true;
    return out;
  }
  SphereRule rule = sphere_rule(eta, order, n_dim);
  double rho = 0.5 * len;
  // the xi ring gives R1(phi) = ring of q1(xi) q4(phi - xi); the tau ring,
  // after tau -> eta - tau, gives Rr(eta - phi) with Rr = ring of q2(.) q3(.)
  RingConv R1(rule, slots[0], slots[3]);
  RingConv Rr(rule, slots[1], slots[2]);

  int n_rad = std::max(8, std::min(64, order / 8));
  std::vector<double> gx, gw;
  util::gauss_legendre(n_rad, gx, gw);
  double half = delta * len;
  Frame fr = frame_for(eta, n_dim);
  util::ksum_c acc;
  int n_ang2 = std::max(32, order);
  for (int i = 0; i < n_rad; ++i) {
    double r = rho + half * gx[i], wr = gw[i] * half;
    if (n_dim == 2) {
      for (int a = 0; a < n_ang2; ++a) {
        double th = 2.0 * M_PI * a / n_ang2;
        double p[3] = {0.5 * eta[0] + r * std::cos(th),
                       0.5 * eta[1] + r * std::sin(th), 0.0};
        double refl[3] = {eta[0] - p[0], eta[1] - p[1], 0.0};
        acc.add(wr * r * (2.0 * M_PI / n_ang2) * R1(p) * Rr(refl));
      }
    } else {
      int npol = (order + 2) / 2, naz = order + 1 + ((order + 1) % 2);
      std::vector<double> mx, mw;
      util::gauss_legendre(npol, mx, mw);
      for (int ip = 0; ip < npol; ++ip) {
        double mu = mx[ip], st = std::sqrt(1.0 - mu * mu);
        for (int a = 0; a < naz; ++a) {
          double ph = 2.0 * M_PI * a / naz;
          double p[3], refl[3];
          for (int d = 0; d < 3; ++d) {
            p[d] = 0.5 * eta[d] +
                   r * (st * (std::cos(ph) * fr.e1[d] + std::sin(ph) * fr.e2[d]) +
                        mu * fr.e3[d]);
            refl[d] = eta[d] - p[d];
          }
          acc.add(wr * r * r * mw[ip] * (2.0 * M_PI / naz) * R1(p) * Rr(refl));
        }
      }
    }
  }
  out.value = acc.value() / (len * len * len * len);
  return out;
}

TubeResult tube_term(const transform_fn& qhat, const double* eta, double delta,
                     int order, int n_dim) {
  return tube_term(std::array<transform_fn, 4>{qhat, qhat, qhat, qhat}, eta,
                   delta, order, n_dim);
}

namespace {

// internal quadrature sizes for the quartic decomposition; chosen for the
// 5% cross-validation gate (the expensive piece is A(psi), a full p.v.
// integral per evaluation point). Angular counts track the circle radius:
// the integrands restricted to radius r have angular bandwidth ~ r times
// the support radius of q.
constexpr int kRingNodes = 256;
constexpr int kOuterRad = 16;
constexpr int kOuterLevels = 4;
constexpr int kInnerRad = 16;
constexpr int kInnerLevels = 4;

int ang_nodes(int base, double rho) {
  return std::max(base, int(2.5 * rho) + 16);
}

}  // namespace

Q4Breakdown q4_decomposition_2d(const transform_fn& qhat, const double* eta,
                                uint64_t mc_budget, uint64_t seed) {
  double len = norm2(eta, 2);
  if (len < 4.0)
    throw util::input_error("q4_decomposition_2d: |eta| must be >= 4");
  if (mc_budget < 1024)
    throw util::input_error("q4_decomposition_2d: mc_budget too small");
  double rho = 0.5 * len, rmax = pv_rmax(rho);
  cd s = cd{0, -M_PI / len};  // one factor per sphere slot
  double pref = std::pow(2.0 * M_PI, -6.0);
  int inner_ang = ang_nodes(32, rho), outer_ang = ang_nodes(48, rho);

  SphereRule rule = sphere_rule(eta, kRingNodes, 2);
  RingConv R(rule, qhat, qhat);
  auto Rrefl = [&](const double* p) -> cd {
    double m[3] = {eta[0] - p[0], eta[1] - p[1], 0.0};
    return R(m);
  };
  // p.v. convolution A(psi) = p.v. integral of q(w) q(psi-w)/(rho^2-|w-c|^2);
  // the factor pair q(eta-tau) q(tau-phi) integrates to A(eta - phi)
  auto A = [&](const double* psi) -> cd {
    auto F = [&](const double* w) -> cd {
      double d[3] = {psi[0] - w[0], psi[1] - w[1], 0.0};
      return qhat(w) * qhat(d);
    };
    return pv_plane(F, eta, inner_ang, kInnerRad, kInnerLevels, rmax);
  };

  Q4Breakdown out;

  // triple sphere: sum_b w_b R(phi_b) R(eta - phi_b), reflection is a node
  {
    util::ksum_c acc;
    std::size_t m = rule.nodes.size();
    std::vector<cd> Rb(m);
    for (std::size_t b = 0; b < m; ++b) Rb[b] = R(rule.nodes[b].data());
    for (std::size_t b = 0; b < m; ++b)
      acc.add(rule.weights[b] * Rb[b] * Rb[(b + m / 2) % m]);
    out.triple_sphere = pref * s * s * s * acc.value();
  }

  // middle single sphere (slot 2): sum_b w_b A(phi_b) A(eta - phi_b);
  // A is costly, and these ring values are smooth, so 64 nodes suffice
  {
    SphereRule mid = sphere_rule(eta, ang_nodes(64, rho), 2);
    std::size_t mm = mid.nodes.size();
    std::vector<cd> Ab(mm);
    for (std::size_t b = 0; b < mm; ++b) Ab[b] = A(mid.nodes[b].data());
    util::ksum_c acc;
    for (std::size_t b = 0; b < mm; ++b)
      acc.add(mid.weights[b] * Ab[b] * Ab[(b + mm / 2) % mm]);
    out.single_middle = pref * s * acc.value();
  }

  // end single spheres (slots 1 and 3, equal by the w -> eta - w involution):
  // 2 * p.v. integral over phi of R(phi) A(eta - phi) / D_phi
  {
    auto F = [&](const double* p) -> cd {
      double m[3] = {eta[0] - p[0], eta[1] - p[1], 0.0};
      return R(p) * A(m);
    };
    cd I = pv_plane(F, eta, outer_ang, kOuterRad, kOuterLevels, rmax);
    out.single_end = pref * 2.0 * s * I;
  }

  // adjacent double spheres (slots {1,2} and {2,3}):
  // 2 * p.v. integral over xi of q(xi) W(xi) / D_xi,
  // W(xi) = sum_b w_b q(phi_b - xi) R(eta - phi_b)
  {
    std::size_t m = rule.nodes.size();
    std::vector<cd> Rr(m);
    for (std::size_t b = 0; b < m; ++b)
      Rr[b] = R(rule.nodes[(b + m / 2) % m].data());
    auto F = [&](const double* xi) -> cd {
      util::ksum_c w;
      for (std::size_t b = 0; b < m; ++b) {
        double d[3] = {rule.nodes[b][0] - xi[0], rule.nodes[b][1] - xi[1], 0.0};
        w.add(rule.weights[b] * qhat(d) * Rr[b]);
      }
      return qhat(xi) * w.value();
    };
    cd I = pv_plane(F, eta, outer_ang, kOuterRad, kOuterLevels, rmax);
    out.double_adjacent = pref * 2.0 * s * s * I;
  }

  // end double spheres (slots {1,3}): p.v. integral of R(phi) R(eta-phi)/D_phi
  {
    auto F = [&](const double* p) -> cd { return R(p) * Rrefl(p); };
    cd I = pv_plane(F, eta, outer_ang, kOuterRad, kOuterLevels, rmax);
    out.double_end = pref * s * s * I;
  }

  // pure p.v.: 6-dim QMC in polar coordinates around eta/2 per slot, with the
  // radial variable mapped to mirror pairs r = rho -+ y (y < rho) so the three
  // poles cancel pairwise; y in (rho, rmax - rho) continues into the plain
  // tail r = rho + y. 16 digit-shifted replications give the standard error.
  {
    const int reps = 16;
    uint64_t per = std::max<uint64_t>(mc_budget / reps, 64);
    double ylen = rmax - rho;
    std::vector<cd> rep_vals(reps);
    for (int rep = 0; rep < reps; ++rep) {
      qmc::sobol seq(6, seed, rep);
      util::ksum_c acc;
      for (uint64_t ipt = 0; ipt < per; ++ipt) {
        double u[6];
        seq.point(ipt, u);
        double yv[3], th[3];
        for (int sdim = 0; sdim < 3; ++sdim) {
          yv[sdim] = u[2 * sdim] * ylen;
          th[sdim] = 2.0 * M_PI * u[2 * sdim + 1];
        }
        // image sets per slot: {rho - y, rho + y} in the band, {rho + y} tail
        cd slot_sum{0, 0};
        int n_img[3];
        double radii[3][2];
        for (int sdim = 0; sdim < 3; ++sdim) {
          if (yv[sdim] < rho) {
            n_img[sdim] = 2;
            radii[sdim][0] = rho - yv[sdim];
            radii[sdim][1] = rho + yv[sdim];
          } else {
            n_img[sdim] = 1;
            radii[sdim][0] = rho + yv[sdim];
          }
        }
        for (int i0 = 0; i0 < n_img[0]; ++i0)
          for (int i1 = 0; i1 < n_img[1]; ++i1)
            for (int i2 = 0; i2 < n_img[2]; ++i2) {
              double r[3] = {radii[0][i0], radii[1][i1], radii[2][i2]};
              double xi[3], tau[3], phi[3];
              xi[0] = 0.5 * eta[0] + r[0] * std::cos(th[0]);
              xi[1] = 0.5 * eta[1] + r[0] * std::sin(th[0]);
              tau[0] = 0.5 * eta[0] + r[1] * std::cos(th[1]);
              tau[1] = 0.5 * eta[1] + r[1] * std::sin(th[1]);
              phi[0] = 0.5 * eta[0] + r[2] * std::cos(th[2]);
              phi[1] = 0.5 * eta[1] + r[2] * std::sin(th[2]);
              xi[2] = tau[2] = phi[2] = 0.0;
              double d0 = rho * rho - r[0] * r[0];
              double d1 = rho * rho - r[1] * r[1];
              double d2 = rho * rho - r[2] * r[2];
              double emt[3] = {eta[0] - tau[0], eta[1] - tau[1], 0.0};
              double tmp[3] = {tau[0] - phi[0], tau[1] - phi[1], 0.0};
              double pmx[3] = {phi[0] - xi[0], phi[1] - xi[1], 0.0};
              cd num = qhat(xi) * qhat(emt) * qhat(tmp) * qhat(pmx);
              slot_sum += num * (r[0] / d0) * (r[1] / d1) * (r[2] / d2);
            }
        acc.add(slot_sum);
      }
      double jac = std::pow(ylen * 2.0 * M_PI, 3.0);
      rep_vals[rep] = acc.value() * jac / double(per);
    }
    cd mean{0, 0};
    for (cd v : rep_vals) mean += v;
    mean /= double(reps);
    double var = 0;
    for (cd v : rep_vals) var += std::norm(v - mean);
    var /= double(reps - 1);
    out.pure_pv = pref * mean;
    out.mc_standard_error = pref * std::sqrt(var / reps);
  }

  out.total = out.pure_pv + out.single_end + out.single_middle +
              out.double_adjacent + out.double_end + out.triple_sphere;
  out.inconclusive = out.mc_standard_error > 0.05 * std::abs(out.total);
  return out;
}

}  // namespace bornlab::singular_quadrature
