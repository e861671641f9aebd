#include "bornlab/bessel.hpp"

#include <cmath>

#include "bornlab/util.hpp"

namespace bornlab::bessel {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
constexpr double kSeriesCut = 12.0;
using cd = std::complex<double>;

double j0_series(double z) {
  double q = 0.25 * z * z;
  double t = 1.0, s = 1.0;
  for (int m = 1; m <= 80; ++m) {
    t *= -q / (double(m) * double(m));
    s += t;
    if (std::abs(t) < 1e-18 * (std::abs(s) + 1.0)) break;
  }
  return s;
}

double j1_series(double z) {
  double q = 0.25 * z * z;
  double t = 1.0, s = 1.0;
  for (int m = 1; m <= 80; ++m) {
    t *= -q / (double(m) * double(m + 1));
    s += t;
    if (std::abs(t) < 1e-18 * (std::abs(s) + 1.0)) break;
  }
  return 0.5 * z * s;
}

double y0_series(double z) {
  double q = 0.25 * z * z;
  // sum_{m>=1} (-1)^{m+1} H_m q^m / (m!)^2
  double t = 1.0, h = 0.0, s = 0.0;
  for (int m = 1; m <= 80; ++m) {
    t *= q / (double(m) * double(m));
    h += 1.0 / double(m);
    double term = (m % 2 ? 1.0 : -1.0) * h * t;
    s += term;
    if (std::abs(term) < 1e-18 * (std::abs(s) + 1.0)) break;
  }
  return (2.0 / M_PI) * ((std::log(0.5 * z) + kEulerGamma) * j0_series(z) + s);
}

double y1_series(double z) {
  double q = 0.25 * z * z;
  // sum_{m>=0} (-1)^m (H_m + H_{m+1}) q^m / (m!(m+1)!)
  double t = 1.0, hm = 0.0, s = 1.0;  // m=0: H_0 + H_1 = 1
  for (int m = 1; m <= 80; ++m) {
    t *= -q / (double(m) * double(m + 1));
    hm += 1.0 / double(m);
    double term = t * (2.0 * hm + 1.0 / double(m + 1));
    s += term;
    if (std::abs(term) < 1e-18 * (std::abs(s) + 1.0)) break;
  }
  return (2.0 / M_PI) * (std::log(0.5 * z) + kEulerGamma) * j1_series(z) -
         2.0 / (M_PI * z) - (z / (2.0 * M_PI)) * s;
}

// Large-argument expansion of H^(1)_nu, truncated at the smallest term.
cd h1_asymptotic(double nu, double z) {
  cd t{1.0, 0.0}, s{1.0, 0.0};
  double prev = 1.0;
  double fournu2 = 4.0 * nu * nu;
  for (int m = 0; m < 40; ++m) {
    double c = (fournu2 - double(2 * m + 1) * double(2 * m + 1)) /
               (8.0 * z * double(m + 1));
    t *= cd{0.0, c};
    double mag = std::abs(t);
    if (mag >= prev || mag < 1e-18) break;
    s += t;
    prev = mag;
  }
  double phase = z - nu * 0.5 * M_PI - 0.25 * M_PI;
  return std::sqrt(2.0 / (M_PI * z)) * cd{std::cos(phase), std::sin(phase)} *
         s;
}

void check_z(double z) {
  if (!(z > 0.0)) throw util::input_error("bessel: argument must be > 0");
}

}  // namespace

double j0(double z) {
  check_z(z);
  return z <= kSeriesCut ? j0_series(z) : h1_asymptotic(0.0, z).real();
}

double j1(double z) {
  check_z(z);
  return z <= kSeriesCut ? j1_series(z) : h1_asymptotic(1.0, z).real();
}

double y0(double z) {
  check_z(z);
  return z <= kSeriesCut ? y0_series(z) : h1_asymptotic(0.0, z).imag();
}

std::complex<double> h1(double nu, double z) {
  check_z(z);
  if (nu == 0.5) {
    return cd{0.0, -1.0} * std::sqrt(2.0 / (M_PI * z)) *
           cd{std::cos(z), std::sin(z)};
  }
  if (nu == 0.0) return {j0(z), y0(z)};
  if (nu == 1.0) {
    if (z <= kSeriesCut) return {j1_series(z), y1_series(z)};
    return h1_asymptotic(1.0, z);
  }
  throw util::input_error("bessel::h1: unsupported order");
}

}  // namespace bornlab::bessel
