#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "bornlab/born_dt.hpp"
#include "bornlab/born_terms.hpp"
#include "bornlab/potentials.hpp"
#include "bornlab/singular_quadrature.hpp"
#include "bornlab/spectral_core.hpp"
#include "bornlab/util.hpp"

using namespace bornlab;
using born_terms::TermParams;
using potentials::kind;
using potentials::PotentialSpec;
using spectral_core::cd;
using spectral_core::Grid;
using spectral_core::make_grid;
using spectral_core::SampledField;
using spectral_core::space_tag;

namespace {

PotentialSpec ball2d(double amplitude, double radius) {
  PotentialSpec s;
  s.k = kind::ball_indicator;
  s.n_dim = 2;
  s.amplitude = amplitude;
  s.radius = radius;
  return s;
}

PotentialSpec bump2d(double amplitude, double radius) {
  PotentialSpec s;
  s.k = kind::smooth_bump;
  s.n_dim = 2;
  s.amplitude = amplitude;
  s.radius = radius;
  return s;
}

double rel_err(cd got, cd want) {
  return std::abs(got - want) / std::abs(want);
}

SampledField scaled(const SampledField& f, double lam) {
  SampledField out = f;
  for (cd& v : out.values) v *= lam;
  return out;
}

SampledField combined(const SampledField& a, double ca, const SampledField& b,
                      double cb) {
  SampledField out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = ca * a.values[i] + cb * b.values[i];
  return out;
}

}  // namespace

TEST_CASE("single-slot term is the Fourier transform") {
  PotentialSpec spec = ball2d(1.0, 0.9);
  Grid g = make_grid(2, 256, 24.0);
  SampledField q = potentials::sample_band_limited(spec, g);

  // on the frequency lattice the trig sum is the DFT, which reproduces the
  // transform the band-limited field was built from
  double step = 2.0 * M_PI / g.box_extent;
  double etas[3][3] = {{14 * step, 6 * step, 0},
                       {2 * step, -10 * step, 0},
                       {-22 * step, 17 * step, 0}};
  for (auto& eta : etas) {
    cd got = born_terms::q_term_at(q, 1, eta);
    cd want = potentials::analytic_transform(spec, eta);
    CHECK(rel_err(got, want) < 1e-12);
  }

  // off-lattice frequencies on a pointwise-sampled smooth profile. The sum
  // equals the transform plus its images at the sampling frequency, so the
  // floor here is the transform tail near 2*pi*N/L (about 2e-5 of the peak
  // at this resolution), not roundoff.
  PotentialSpec b = bump2d(1.0, 0.8);
  Grid g2 = make_grid(2, 128, 12.0);
  SampledField qb = potentials::sample(b, g2);
  double off[3] = {3.7, 1.3, 0};
  cd got = born_terms::q_term_at(qb, 1, off);
  cd want = potentials::analytic_transform(b, off);
  CHECK(std::abs(got - want) < 1e-4 * std::abs(potentials::analytic_transform(
                                          b, (const double[3]){0, 0, 0})));
}

TEST_CASE("two-slot term matches the singular frequency-domain oracle") {
  // the second term computed two independent ways: iterated resolvent chain
  // on the grid vs principal-value + sphere quadrature in frequency space
  PotentialSpec spec = ball2d(1.0, 0.9);
  Grid g = make_grid(2, 512, 48.0);
  SampledField q = potentials::sample_band_limited(spec, g);
  singular_quadrature::transform_fn qhat = [&](const double* xi) {
    return potentials::analytic_transform(spec, xi);
  };
  TermParams p;
  p.epsilon = -16.0;
  p.extrapolation_levels = 4;

  for (double mag : {8.0, 16.0}) {
    double eta[3] = {0.8 * mag, 0.6 * mag, 0};
    cd d1 = born_terms::q_term_at(q, 1, eta, p);
    CHECK(rel_err(d1, qhat(eta)) < 1e-3);

    cd chain = born_terms::q_term_at(q, 2, eta, p);
    auto sk = singular_quadrature::sokhotski_q2(qhat, eta, 2, 256, 4);
    CHECK(sk.total == sk.pv_part + sk.sphere_part);
    CHECK(rel_err(chain, sk.total) < 0.01);
  }
}

TEST_CASE("remainder partial sums reproduce the standalone terms") {
  PotentialSpec spec = bump2d(1.0, 0.8);
  Grid g = make_grid(2, 128, 12.0);
  SampledField q = potentials::sample(spec, g);
  TermParams p;
  p.epsilon = -4.0;
  p.extrapolation_levels = 3;
  born_dt::CutoffSpec cut;
  cut.c0 = 0.25;  // |eta|/2 >= 2*c0 below, so the cutoff weight is exactly 1

  std::vector<std::array<double, 3>> etas = {{4.2, 1.9, 0}};
  auto r24 = born_terms::remainder_partial(q, 2, 4, etas, cut, p);
  cd sum = 0;
  for (int j = 2; j <= 4; ++j)
    sum += born_terms::q_term_at(q, j, etas[0].data(), p);
  CHECK(rel_err(r24.partial[0], sum) < 1e-13);

  auto r25 = born_terms::remainder_partial(q, 2, 5, etas, cut, p);
  auto r35 = born_terms::remainder_partial(q, 3, 5, etas, cut, p);
  cd q2 = born_terms::q_term_at(q, 2, etas[0].data(), p);
  CHECK(rel_err(r35.partial[0], r25.partial[0] - q2) < 1e-13);

  CHECK_THROWS_AS(born_terms::remainder_partial(q, 1, 4, etas, cut, p),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::remainder_partial(q, 3, 2, etas, cut, p),
                  util::input_error);
}

TEST_CASE("remainder tail bounds and contraction flags") {
  PotentialSpec spec = bump2d(1.0, 0.8);
  Grid g = make_grid(2, 256, 24.0);
  SampledField q = potentials::sample(spec, g);
  TermParams p;
  p.epsilon = -16.0;
  p.extrapolation_levels = 4;
  born_dt::CutoffSpec cut;
  cut.c0 = 0.5;

  std::vector<std::array<double, 3>> etas = {
      {0.4, 0.0, 0},  // below the cutoff: exact zero, never flagged
      {0.8 * 12, 0.6 * 12, 0},
      {0.8 * 16, 0.6 * 16, 0}};
  auto r4 = born_terms::remainder_partial(q, 2, 4, etas, cut, p);
  auto r6 = born_terms::remainder_partial(q, 2, 6, etas, cut, p);

  CHECK(r4.partial[0] == cd{0, 0});
  CHECK(r4.tail_bound[0] == 0.0);
  CHECK(r4.flags[0] == 0);

  for (std::size_t i = 1; i < etas.size(); ++i) {
    CHECK(r4.flags[i] == 0);
    CHECK(std::isfinite(r4.tail_bound[i]));
    // the geometric bound at J = 4 must cover the terms added by J = 6
    CHECK(std::abs(r6.partial[i] - r4.partial[i]) <= r4.tail_bound[i]);
  }

  // at 40x amplitude the series stops contracting at |eta| = 12 but still
  // contracts at |eta| = 20; flagged samples drop out of the shell estimate
  SampledField strong = scaled(q, 40.0);
  std::vector<std::array<double, 3>> mix = {{0.8 * 12, 0.6 * 12, 0}};
  for (int a = 0; a < 4; ++a) {
    double th = 2 * M_PI * (a + 0.2) / 4.0;
    mix.push_back({20 * std::cos(th), 20 * std::sin(th), 0});
  }
  auto rs = born_terms::remainder_partial(strong, 2, 6, mix, cut, p);
  CHECK(rs.flags[0] == 1);
  CHECK(std::isinf(rs.tail_bound[0]));
  for (int i = 1; i <= 4; ++i) CHECK(rs.flags[i] == 0);
  REQUIRE(rs.shells.size() == 1);
  CHECK(rs.shells[0].first == 5);  // only the unflagged |eta| = 20 ring
}

TEST_CASE("term homogeneity and per-slot linearity") {
  Grid g = make_grid(2, 64, 6.0);
  SampledField a = potentials::sample(bump2d(1.0, 0.9), g);
  PotentialSpec cusp;
  cusp.k = kind::radial_cusp;
  cusp.n_dim = 2;
  cusp.radius = 0.85;
  cusp.gamma = 1.5;
  SampledField b = potentials::sample(cusp, g);
  SampledField c = potentials::sample(ball2d(1.0, 0.8), g);
  double eta[3] = {3.0, 2.0, 0};
  TermParams p;
  p.epsilon = 0.5;
  p.extrapolation_levels = 2;

  // scaling the field scales the j-slot term by lambda^j
  double lam = 1.7;
  SampledField al = scaled(a, lam);
  for (int j = 1; j <= 4; ++j) {
    cd base = born_terms::q_term_at(a, j, eta, p);
    cd got = born_terms::q_term_at(al, j, eta, p);
    CHECK(rel_err(got, std::pow(lam, j) * base) < 1e-12);
  }

  // each slot is linear in its own field
  SampledField mixed = combined(b, 0.6, c, -1.1);
  std::vector<const SampledField*> fm = {&a, &mixed, &a};
  std::vector<const SampledField*> fb = {&a, &b, &a};
  std::vector<const SampledField*> fc = {&a, &c, &a};
  cd vm = born_terms::q_term_at(fm, eta, p);
  cd vb = born_terms::q_term_at(fb, eta, p);
  cd vc = born_terms::q_term_at(fc, eta, p);
  CHECK(std::abs(vm - (0.6 * vb - 1.1 * vc)) <
        1e-10 * std::max(std::abs(vb), std::abs(vc)));
}

TEST_CASE("derivative Leibniz identity at admissible frequencies") {
  // eta/2 must sit on the frequency lattice: spacing 2*pi/12 = pi/6, so
  // eta = (pi/3) * (integer vector) qualifies. The identity is exact up to
  // circular wrap at the band edge, so the residual floor is the transform
  // tail there: ~3e-8 at N = 256, ~1e-5 at N = 128.
  PotentialSpec spec = bump2d(1.2, 0.9);
  Grid g = make_grid(2, 256, 12.0);
  double s = M_PI / 3.0;
  std::vector<std::array<double, 3>> etas = {
      {5 * s, 2 * s, 0}, {4 * s, 4 * s, 0}, {7 * s, 1 * s, 0}};
  TermParams p;
  p.epsilon = -4.0;
  p.extrapolation_levels = 3;

  CHECK(born_terms::leibniz_residual(spec, g, 2, {0, 0, 0}, etas, p) == 0.0);
  CHECK(born_terms::leibniz_residual(spec, g, 3, {0, 0, 0}, etas, p) == 0.0);

  std::array<int, 3> alphas[] = {
      {1, 0, 0}, {0, 1, 0}, {2, 0, 0}, {1, 1, 0}, {0, 2, 0}};
  for (const auto& al : alphas)
    for (int j : {2, 3})
      CHECK(born_terms::leibniz_residual(spec, g, j, al, etas, p) < 1e-6);

  // rejected inputs: term count, index shape, and fields too rough for the
  // requested spectral derivatives
  CHECK_THROWS_AS(born_terms::leibniz_residual(spec, g, 4, {1, 0, 0}, etas, p),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::leibniz_residual(spec, g, 2, {-1, 1, 0}, etas, p),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::leibniz_residual(spec, g, 2, {0, 0, 1}, etas, p),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::leibniz_residual(spec, g, 2, {2, 1, 0}, etas, p),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::leibniz_residual(spec, g, 2, {1, 0, 0}, {}, p),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::leibniz_residual(ball2d(1.0, 0.9), g, 2,
                                               {0, 0, 0}, etas, p),
                  util::input_error);
}

TEST_CASE("two-slot report: cutoff, contraction, and shell decay") {
  // indicator potential has critical exponent 1/2; the two-slot term should
  // fit markedly smoother on the same dyadic shells
  PotentialSpec spec = ball2d(0.2, 0.9);
  Grid g = make_grid(2, 512, 48.0);
  SampledField q = potentials::sample(spec, g);
  born_dt::CutoffSpec cut;
  cut.c0 = 0.5;
  TermParams p;
  p.epsilon = -8.0;
  p.extrapolation_levels = 4;

  std::vector<std::array<double, 3>> etas;
  etas.push_back({0.5, 0, 0});  // |eta|/2 = c0/2: inside the dead zone
  for (int s = 2; s <= 5; ++s) {
    for (double r : {0.55 * std::ldexp(1.0, s), 0.8 * std::ldexp(1.0, s)})
      for (int a = 0; a < 4; ++a) {
        double th = 2 * M_PI * (a + 0.37 * s) / 4.0;
        etas.push_back({r * std::cos(th), r * std::sin(th), 0});
      }
  }
  auto rep = born_terms::q_tilde_report(q, 2, cut, etas, p);

  CHECK(rep.values[0] == cd{0, 0});
  CHECK(rep.term_ratios[0] == 0.0);
  CHECK(rep.flags[0] == 0);
  for (std::size_t i = 1; i < etas.size(); ++i) {
    CHECK(rep.flags[i] == 0);
    CHECK(rep.term_ratios[i] > 0.0);
    CHECK(rep.term_ratios[i] < 0.7);
  }

  REQUIRE(rep.shells.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(rep.shells[i].first == int(i) + 2);
    if (i > 0) CHECK(rep.shells[i].second < rep.shells[i - 1].second);
  }
  auto est = spectral_core::estimate_regularity(rep.shells, {2, 5},
                                                g.points_per_dim);
  CHECK(!est.ceiling_flag);
  CHECK(est.fitted_exponent > 1.0);   // well above the 1/2 of q itself
  CHECK(est.fitted_exponent < 1.8);

  CHECK_THROWS_AS(born_terms::q_tilde_report(q, 1, cut, etas, p),
                  util::input_error);
}

TEST_CASE("shell energies from scattered samples") {
  // closed form: shell s holds mean |v|^2 times the annulus volume
  std::vector<std::array<double, 3>> etas = {
      {3, 0, 0}, {0, 3, 0}, {-2.5, 0, 0}, {0, -3.5, 0},  // shell 2: (2, 4]
      {0.4, 0, 0},                                       // central: dropped
      {5, 0, 0}, {0, 5, 0}, {6, 0, 0}};                  // shell 3: 3 < 4 kept?
  std::vector<cd> vals = {{1, 0}, {0, 2}, {-2, 0}, {0, -3},
                          {100, 0},
                          {1, 0}, {1, 0}, {1, 0}};
  auto shells = born_terms::shells_from_samples(etas, vals, 2);
  // shell 3 has only 3 samples, below the default floor, so only shell 2
  // survives
  REQUIRE(shells.size() == 1);
  CHECK(shells[0].first == 2);
  double want = (1.0 + 4.0 + 4.0 + 9.0) / 4.0 * M_PI * (16.0 - 4.0);
  CHECK(shells[0].second == doctest::Approx(want).epsilon(1e-13));

  auto loose = born_terms::shells_from_samples(etas, vals, 2, 1.0, 3);
  REQUIRE(loose.size() == 2);
  CHECK(loose[1].first == 3);
  CHECK(loose[1].second ==
        doctest::Approx(M_PI * (64.0 - 16.0)).epsilon(1e-13));

  // 3D volumes
  std::vector<std::array<double, 3>> e3 = {
      {3, 0, 0}, {0, 3, 0}, {0, 0, 3}, {-3, 0, 0}};
  std::vector<cd> v3 = {{2, 0}, {2, 0}, {2, 0}, {2, 0}};
  auto s3 = born_terms::shells_from_samples(e3, v3, 3);
  REQUIRE(s3.size() == 1);
  CHECK(s3[0].second ==
        doctest::Approx(4.0 * (4.0 * M_PI / 3.0) * (64.0 - 8.0))
            .epsilon(1e-13));

  // base_scale relabels the shells
  auto rescaled = born_terms::shells_from_samples(etas, vals, 2, 2.0, 4);
  REQUIRE(rescaled.size() == 1);
  CHECK(rescaled[0].first == 1);

  CHECK_THROWS_AS(born_terms::shells_from_samples(etas, v3, 2),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::shells_from_samples(etas, vals, 4),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::shells_from_samples(etas, vals, 2, 0.0),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::shells_from_samples(etas, vals, 2, 1.0, 0),
                  util::input_error);
}

TEST_CASE("high-frequency exponent table against its dual closed form") {
  // hand-evaluated entries
  auto bg = born_terms::beta_gamma_exponents(3, 0.0, 5);
  CHECK(bg.beta == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(bg.gamma == doctest::Approx(-2.5).epsilon(1e-14));
  bg = born_terms::beta_gamma_exponents(2, 0.0, 4);
  CHECK(bg.beta == doctest::Approx(1.5).epsilon(1e-14));
  bg = born_terms::beta_gamma_exponents(2, 0.5, 4);
  CHECK(bg.beta == doctest::Approx(1.875).epsilon(1e-14));

  // the piecewise table and -n/2 - gamma are checked against each other
  // inside the call; sweep both dimensions over the admissible range
  for (int n : {2, 3}) {
    int jmin = n == 2 ? 4 : 5;
    for (double al = 0.0; al < 0.5 * n - 1e-9; al += 0.05)
      for (int j = jmin; j <= 12; ++j) {
        auto e = born_terms::beta_gamma_exponents(n, al, j);
        CHECK(e.beta >= al + 1.0 - 1e-9);  // every kept term beats q_B's gain
        if (j > jmin) {
          auto prev = born_terms::beta_gamma_exponents(n, al, j - 1);
          CHECK(e.beta > prev.beta);  // smoothing improves with each order
        }
      }
    // continuity across the branch point of the piecewise table
    double knee = n == 2 ? 0.5 : 0.75;
    for (int j = jmin; j <= 8; ++j) {
      auto lo = born_terms::beta_gamma_exponents(n, knee - 1e-9, j);
      auto hi = born_terms::beta_gamma_exponents(n, knee + 1e-9, j);
      CHECK(std::abs(lo.beta - hi.beta) < 1e-6);
    }
  }

  CHECK_THROWS_AS(born_terms::beta_gamma_exponents(4, 0.2, 5),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::beta_gamma_exponents(2, -0.1, 5),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::beta_gamma_exponents(2, 1.0, 5),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::beta_gamma_exponents(2, 0.2, 3),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::beta_gamma_exponents(3, 0.2, 4),
                  util::input_error);
}

TEST_CASE("report serialization layout") {
  born_terms::BornTermReport r;
  r.j = 3;
  r.eta = {{4, 3, 0}, {0.3, 0, 0}, {12, 0, 0}};
  r.values = {cd{1, -2}, cd{0, 0}, cd{0.5, 0}};
  r.flags = {0, 0, 1};
  r.term_ratios = {0.4, 0.0, 1.2};
  r.shells = {{2, 0.125}, {3, 0.25}};
  std::string csv = born_terms::report_csv(r);

  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "j,abs_eta,re,im,shell");
  std::getline(in, line);
  CHECK(line.substr(0, 2) == "3,");
  CHECK(line.back() == '3');  // |eta| = 5 lands in shell (4, 8]
  std::getline(in, line);
  CHECK(line.back() == '1');  // central sample is reported as shell -1
  CHECK(line.find(",-1") != std::string::npos);
  std::getline(in, line);
  CHECK(line.back() == '4');  // |eta| = 12 in shell (8, 16]
  std::getline(in, line);
  CHECK(line == "# samples,3");
  std::getline(in, line);
  CHECK(line == "# flagged,1");
  std::getline(in, line);
  CHECK(line.substr(0, 10) == "# shell,2,");
  std::getline(in, line);
  CHECK(line.substr(0, 10) == "# shell,3,");
  CHECK(!std::getline(in, line));
}

TEST_CASE("chain input validation") {
  Grid g = make_grid(2, 64, 6.0);
  SampledField q = potentials::sample(bump2d(1.0, 0.9), g);
  double eta[3] = {3, 2, 0};

  CHECK_THROWS_AS(born_terms::q_term_at({}, eta), util::input_error);
  CHECK_THROWS_AS(born_terms::q_term_at({&q, nullptr}, eta),
                  util::input_error);
  CHECK_THROWS_AS(born_terms::q_term_at(q, 0, eta), util::input_error);

  Grid g2 = make_grid(2, 128, 6.0);
  SampledField q2 = potentials::sample(bump2d(1.0, 0.9), g2);
  CHECK_THROWS_AS(born_terms::q_term_at({&q, &q2}, eta), util::input_error);

  SampledField hat = spectral_core::forward_transform(q);
  CHECK_THROWS_AS(born_terms::q_term_at({&q, &hat}, eta), util::input_error);

  double zero[3] = {0, 0, 0};
  CHECK_THROWS_AS(born_terms::q_term_at(q, 2, zero), util::input_error);
  double nan_eta[3] = {std::nan(""), 1, 0};
  CHECK_THROWS_AS(born_terms::q_term_at(q, 2, nan_eta), util::input_error);
  // max axis frequency is pi*64/6, so eta/2 beyond that must be rejected
  double wild[3] = {2.0 * M_PI * 64 / 6.0 + 1.0, 0, 0};
  CHECK_THROWS_AS(born_terms::q_term_at(q, 2, wild), util::input_error);
}
