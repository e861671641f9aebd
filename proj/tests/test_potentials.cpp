#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bornlab/bessel.hpp"
#include "bornlab/potentials.hpp"
#include "bornlab/spectral_core.hpp"
#include "bornlab/util.hpp"

using namespace bornlab;
using potentials::cd;
using potentials::kind;
using potentials::PotentialSpec;
using spectral_core::Grid;
using spectral_core::make_field;
using spectral_core::make_grid;
using spectral_core::SampledField;
using spectral_core::space_tag;

namespace {

PotentialSpec ball2d(double amplitude = 1.0, double radius = 1.0) {
  PotentialSpec s;
  s.k = kind::ball_indicator;
  s.n_dim = 2;
  s.amplitude = amplitude;
  s.radius = radius;
  return s;
}

// fill a frequency-space field with the analytic transform at the nodes
SampledField analytic_field(const PotentialSpec& spec, const Grid& g) {
  SampledField f = make_field(g, space_tag::frequency);
  int idx[3];
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.axis_indices(i, idx);
    double xi[3] = {g.freq(idx[0]), g.freq(idx[1]),
                    g.n_dim == 3 ? g.freq(idx[2]) : 0.0};
    f.values[i] = potentials::analytic_transform(spec, xi);
  }
  return f;
}

double fitted_exponent(const PotentialSpec& spec, const Grid& g) {
  auto se = spectral_core::shell_energies(analytic_field(spec, g), 1.0);
  auto est = spectral_core::estimate_regularity(
      spectral_core::shell_list(se), spectral_core::default_fit_window(se),
      g.points_per_dim);
  return est.fitted_exponent;
}

}  // namespace

TEST_CASE("validation rejects out-of-contract specs") {
  PotentialSpec s = ball2d();
  s.radius = 0.0;
  CHECK_THROWS_AS(potentials::validate(s), util::input_error);
  s.radius = 1.2;
  CHECK_THROWS_AS(potentials::validate(s), util::input_error);
  s = ball2d();
  s.n_dim = 4;
  CHECK_THROWS_AS(potentials::validate(s), util::input_error);

  PotentialSpec cusp = ball2d();
  cusp.k = kind::radial_cusp;
  cusp.gamma = 0.0;
  CHECK_THROWS_AS(potentials::validate(cusp), util::input_error);

  PotentialSpec t;
  t.k = kind::translate_sum;
  t.n_dim = 2;
  CHECK_THROWS_AS(potentials::validate(t), util::input_error);  // no terms
  potentials::translate_term term;
  term.radius = 0.5;
  term.center = {0.7, 0.0, 0.0};  // 0.7 + 0.5 > 1: leaves the unit ball
  t.terms = {term};
  CHECK_THROWS_AS(potentials::validate(t), util::input_error);
  t.terms[0].center = {0.4, 0.2, 0.0};
  CHECK_NOTHROW(potentials::validate(t));

  PotentialSpec r;
  r.k = kind::rough_random;
  r.target_exponent = 0.0;
  CHECK_THROWS_AS(potentials::validate(r), util::input_error);
}

TEST_CASE("sample grid requirements") {
  PotentialSpec s = ball2d(1.0, 0.1);
  Grid coarse = make_grid(2, 16, 8.0);  // h = 0.5: 0.4 cells across 2R
  CHECK_THROWS_AS(potentials::sample(s, coarse), util::input_error);
  Grid small_box = make_grid(2, 64, 1.5);
  CHECK_THROWS_AS(potentials::sample(ball2d(), small_box), util::input_error);
  Grid ok = make_grid(2, 64, 2.0);
  CHECK_NOTHROW(potentials::sample(ball2d(), ok));
}

TEST_CASE("ball transform closed forms against test-local quadrature") {
  // independent route: plain Simpson on the radial integral
  auto simpson2d = [](double rho) {
    int n = 4000;
    double h = 1.0 / n, acc = 0;
    for (int i = 1; i <= n; ++i) {  // i = 0 term vanishes with the r factor
      double r = i * h;
      double w = (i == n) ? 1 : (i % 2 ? 4 : 2);
      acc += w * bessel::j0(rho * r) * r;
    }
    return 2.0 * M_PI * acc * h / 3.0;
  };
  auto simpson3d = [](double rho) {
    int n = 4000;
    double h = 1.0 / n, acc = 0;
    for (int i = 0; i <= n; ++i) {
      double r = i * h;
      double u = rho * r;
      double sinc = u < 1e-12 ? 1.0 : std::sin(u) / u;
      double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
      acc += w * sinc * r * r;
    }
    return 4.0 * M_PI * acc * h / 3.0;
  };
  PotentialSpec b2 = ball2d();
  PotentialSpec b3 = ball2d();
  b3.n_dim = 3;
  for (double rho : {0.3, 2.0, 7.7, 19.2}) {
    double xi2[3] = {rho, 0, 0};
    CHECK(potentials::analytic_transform(b2, xi2).real() ==
          doctest::Approx(simpson2d(rho)).epsilon(1e-9));
    CHECK(potentials::analytic_transform(b3, xi2).real() ==
          doctest::Approx(simpson3d(rho)).epsilon(1e-9));
  }
  // rho -> 0 limits: area and volume of the unit ball
  double zero[3] = {0, 0, 0};
  CHECK(potentials::analytic_transform(b2, zero).real() ==
        doctest::Approx(M_PI).epsilon(1e-12));
  CHECK(potentials::analytic_transform(b3, zero).real() ==
        doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-12));
}

TEST_CASE("cusp transform against frozen high-precision references") {
  struct Ref {
    int n;
    double gamma, rho, value;
  };
  // independent 30-digit quadrature of 2pi (n=2) / 4pi (n=3) radial integrals
  const Ref refs[] = {
      {2, 1.0, 0.7, 1.5076296534002986},
      {2, 1.0, 3.3, 0.55161830462302094},
      {2, 1.0, 11.2, 0.0096761844522065512},
      {2, 2.5, 7.3, -0.0095647292995292271},
      {2, 2.5, 35.5, -2.6366712875958461e-5},
      {3, 1.0, 0.9, 1.5807301100524018},
      {3, 1.0, 6.0, -0.026058262566562719},
      {3, 1.0, 21.0, -0.002042743035136617},
      {3, 3.0, 13.75, 0.0011875573885480765},
  };
  for (const Ref& r : refs) {
    PotentialSpec s;
    s.k = kind::radial_cusp;
    s.n_dim = r.n;
    s.gamma = r.gamma;
    double xi[3] = {r.rho, 0, 0};
    cd v = potentials::analytic_transform(s, xi);
    CHECK(v.imag() == doctest::Approx(0.0));
    CHECK(v.real() == doctest::Approx(r.value).epsilon(1e-9));
  }
  // second independent route for gamma = 1: 2 * 2pi * J2(rho)/rho^2
  PotentialSpec s;
  s.k = kind::radial_cusp;
  s.n_dim = 2;
  s.gamma = 1.0;
  for (double rho : {0.9, 4.2, 17.0}) {
    double xi[3] = {0, rho, 0};
    double j2 = 2.0 * bessel::j1(rho) / rho - bessel::j0(rho);
    CHECK(potentials::analytic_transform(s, xi).real() ==
          doctest::Approx(4.0 * M_PI * j2 / (rho * rho)).epsilon(1e-10));
  }
}

TEST_CASE("translate_sum carries the shift phase") {
  PotentialSpec t;
  t.k = kind::translate_sum;
  t.n_dim = 2;
  potentials::translate_term a;
  a.child_kind = kind::ball_indicator;
  a.radius = 0.3;
  a.center = {0.5, -0.2, 0.0};
  a.weight = 2.0;
  t.terms = {a};
  PotentialSpec centered = ball2d(2.0, 0.3);
  for (double rho : {1.3, 6.0}) {
    double xi[3] = {rho, 0.7, 0};
    double dot = a.center[0] * xi[0] + a.center[1] * xi[1];
    cd expect = potentials::analytic_transform(centered, xi) *
                cd{std::cos(dot), -std::sin(dot)};
    cd got = potentials::analytic_transform(t, xi);
    CHECK(std::abs(got - expect) < 1e-12 * (1.0 + std::abs(expect)));
  }
}

TEST_CASE("sampled transform converges to the analytic one") {
  // smooth bump: spectral accuracy well inside the Nyquist range
  PotentialSpec bump = ball2d();
  bump.k = kind::smooth_bump;
  bump.radius = 0.9;
  Grid g = make_grid(2, 256, 8.0);
  SampledField hat =
      spectral_core::forward_transform(potentials::sample(bump, g));
  double zero[3] = {0, 0, 0};
  double peak = std::abs(potentials::analytic_transform(bump, zero));
  int idx[3];
  double worst_bump = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.axis_indices(i, idx);
    double xi[3] = {g.freq(idx[0]), g.freq(idx[1]), 0};
    double r = std::hypot(xi[0], xi[1]);
    if (r > 0.5 * g.max_axis_freq()) continue;
    cd expect = potentials::analytic_transform(bump, xi);
    worst_bump = std::max(worst_bump, std::abs(hat.values[i] - expect));
  }
  // the bump's transform tail decays sub-exponentially (~e^{-c sqrt(rho)});
  // at N = 256 the alias floor sits near 1e-7 of the peak
  CHECK(worst_bump / peak < 1e-6);

  // ball indicator: midpoint sampling of a discontinuity; error shrinks
  auto ball_err = [&](int N) {
    Grid gg = make_grid(2, N, 8.0);
    SampledField bh =
        spectral_core::forward_transform(potentials::sample(ball2d(), gg));
    double worst = 0;
    int jdx[3];
    for (std::size_t i = 0; i < gg.size(); ++i) {
      gg.axis_indices(i, jdx);
      double xi[3] = {gg.freq(jdx[0]), gg.freq(jdx[1]), 0};
      if (std::hypot(xi[0], xi[1]) > 12.0) continue;
      cd expect = potentials::analytic_transform(ball2d(), xi);
      worst = std::max(worst, std::abs(bh.values[i] - expect));
    }
    return worst;
  };
  double e256 = ball_err(256), e512 = ball_err(512);
  CHECK(e256 / M_PI < 0.01);
  CHECK(e512 < e256);
}

TEST_CASE("critical exponents from shell decay") {
  Grid g = make_grid(2, 512, 8.0);
  CHECK(fitted_exponent(ball2d(), g) == doctest::Approx(0.5).epsilon(0.1));

  PotentialSpec cusp = ball2d();
  cusp.k = kind::radial_cusp;
  cusp.gamma = 1.0;
  CHECK(fitted_exponent(cusp, g) == doctest::Approx(1.5).epsilon(0.047));

  CHECK(*potentials::known_exponent(ball2d()) == 0.5);
  CHECK(*potentials::known_exponent(cusp) == 1.5);
  PotentialSpec bump = ball2d();
  bump.k = kind::smooth_bump;
  CHECK_FALSE(potentials::known_exponent(bump).has_value());
}

TEST_CASE("homogeneous norm divergence across the critical exponent") {
  // ball indicator: |qhat| ~ |xi|^{-3/2}, critical s = 1/2. s = 0.4 stays
  // bounded as resolution grows; s = 0.6 grows without bound.
  double low[3], high[3];
  int i = 0;
  for (int N : {256, 512, 1024}) {
    Grid g = make_grid(2, N, 8.0);
    SampledField f = analytic_field(ball2d(), g);
    low[i] = spectral_core::sobolev_norm(f, 0.4, true);
    high[i] = spectral_core::sobolev_norm(f, 0.6, true);
    ++i;
  }
  CHECK(high[1] / high[0] > 1.05);
  CHECK(high[2] / high[1] > 1.05);
  CHECK(low[2] / low[0] < 1.1 * low[1] / low[0]);  // saturating
  CHECK(low[2] - low[1] < low[1] - low[0]);
}

TEST_CASE("rough_random hits its target exponent and is deterministic") {
  PotentialSpec r;
  r.k = kind::rough_random;
  r.n_dim = 2;
  r.target_exponent = 0.6;
  r.seed = 11;
  r.amplitude = 1.0;
  Grid g = make_grid(2, 256, 4.0);
  SampledField a = potentials::sample(r, g);
  SampledField b = potentials::sample(r, g);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    REQUIRE(a.values[i] == b.values[i]);

  double peak = 0;
  int idx[3];
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    g.axis_indices(i, idx);
    double rr = std::hypot(g.coord(idx[0]), g.coord(idx[1]));
    peak = std::max(peak, std::abs(a.values[i]));
    if (rr >= 0.96) CHECK(a.values[i] == cd{0, 0});
    CHECK(a.values[i].imag() == 0.0);
  }
  CHECK(peak == doctest::Approx(1.0).epsilon(1e-12));

  auto se = spectral_core::shell_energies(spectral_core::forward_transform(a),
                                          1.0);
  auto est = spectral_core::estimate_regularity(
      spectral_core::shell_list(se), spectral_core::default_fit_window(se),
      g.points_per_dim);
  CHECK(est.fitted_exponent == doctest::Approx(0.6).epsilon(0.3));

  PotentialSpec r2 = r;
  r2.seed = 12;
  SampledField c = potentials::sample(r2, g);
  double diff = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    diff = std::max(diff, std::abs(a.values[i] - c.values[i]));
  CHECK(diff > 1e-3);
}

TEST_CASE("serialize/parse round trip") {
  PotentialSpec specs[4];
  specs[0] = ball2d(0.5, 0.875);
  specs[1] = ball2d();
  specs[1].k = kind::radial_cusp;
  specs[1].gamma = 2.25;
  specs[2].k = kind::rough_random;
  specs[2].n_dim = 3;
  specs[2].seed = 987654321;
  specs[2].target_exponent = 1.25;
  specs[3].k = kind::translate_sum;
  specs[3].n_dim = 2;
  potentials::translate_term t1, t2;
  t1.child_kind = kind::smooth_bump;
  t1.radius = 0.25;
  t1.center = {0.5, 0.125, 0.0};
  t1.weight = -1.5;
  t2.child_kind = kind::radial_cusp;
  t2.radius = 0.3;
  t2.gamma = 1.75;
  t2.center = {-0.25, -0.4375, 0.0};
  t2.weight = 0.625;
  specs[3].terms = {t1, t2};

  for (const PotentialSpec& s : specs) {
    std::string rec = s.serialize();
    PotentialSpec back = potentials::parse_potential(rec);
    CHECK(back.serialize() == rec);
    double xi[3] = {1.5, -0.75, 0.5};
    if (s.k != kind::rough_random) {
      cd a = potentials::analytic_transform(s, xi);
      cd b = potentials::analytic_transform(back, xi);
      CHECK(a == b);
    }
    CHECK(potentials::known_exponent(back) == potentials::known_exponent(s));
  }
  CHECK(*potentials::known_exponent(specs[3]) ==
        doctest::Approx(2.25));  // min(smooth -> none, cusp 1.75 + 0.5)
  CHECK_THROWS_AS(potentials::parse_potential("kind=nope;n=2"),
                  util::input_error);
}

TEST_CASE("analytic_transform rejects rough_random") {
  PotentialSpec r;
  r.k = kind::rough_random;
  r.n_dim = 2;
  double xi[3] = {1, 0, 0};
  CHECK_THROWS_AS(potentials::analytic_transform(r, xi), util::input_error);
}

TEST_CASE("sample_band_limited inverts the lattice transform") {
  PotentialSpec s = ball2d(2.0, 0.9);
  Grid g = make_grid(2, 64, 8.0);
  SampledField bl = potentials::sample_band_limited(s, g);
  REQUIRE(bl.tag == space_tag::physical);

  // forward transform must reproduce the analytic lattice values
  SampledField hat = spectral_core::forward_transform(bl);
  SampledField ref = analytic_field(s, g);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    num += std::norm(hat.values[i] - ref.values[i]);
    den += std::norm(ref.values[i]);
  }
  CHECK(std::sqrt(num / den) < 1e-12);

  // a real even profile stays essentially real after band limitation
  double max_im = 0, max_re = 0;
  for (const cd& v : bl.values) {
    max_im = std::max(max_im, std::abs(v.imag()));
    max_re = std::max(max_re, std::abs(v.real()));
  }
  CHECK(max_im < 1e-12 * max_re);

  // for a smooth bump the band-limited field is close to the pointwise one
  PotentialSpec b;
  b.k = kind::smooth_bump;
  b.n_dim = 2;
  b.radius = 0.8;
  Grid g2 = make_grid(2, 128, 12.0);
  SampledField p = potentials::sample(b, g2);
  SampledField q = potentials::sample_band_limited(b, g2);
  double d2 = 0, n2 = 0;
  for (std::size_t i = 0; i < g2.size(); ++i) {
    d2 += std::norm(p.values[i] - q.values[i]);
    n2 += std::norm(p.values[i]);
  }
  CHECK(std::sqrt(d2 / n2) < 1e-2);

  PotentialSpec r;
  r.k = kind::rough_random;
  r.n_dim = 2;
  CHECK_THROWS_AS(potentials::sample_band_limited(r, g), util::input_error);
}
