#include "bornlab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bornlab/bessel.hpp"

namespace bornlab::potentials {

using util::input_error;
using spectral_core::make_field;
using spectral_core::space_tag;

namespace {

const char* kind_name(kind k) {
  switch (k) {
    case kind::ball_indicator: return "ball_indicator";
    case kind::radial_cusp: return "radial_cusp";
    case kind::smooth_bump: return "smooth_bump";
    case kind::translate_sum: return "translate_sum";
    case kind::rough_random: return "rough_random";
  }
  return "?";
}

kind kind_from_name(const std::string& s) {
  for (kind k : {kind::ball_indicator, kind::radial_cusp, kind::smooth_bump,
                 kind::translate_sum, kind::rough_random})
    if (s == kind_name(k)) return k;
  throw input_error("unknown potential kind: " + s);
}

// unit-amplitude radial profiles
double profile(kind k, double r, double R, double gamma) {
  if (r >= R) return 0.0;
  switch (k) {
    case kind::ball_indicator:
      return 1.0;
    case kind::radial_cusp: {
      double t = 1.0 - (r / R) * (r / R);
      return std::pow(t, gamma);
    }
    case kind::smooth_bump: {
      double t = 1.0 - (r / R) * (r / R);
      return std::exp(1.0 - 1.0 / t);
    }
    default:
      return 0.0;
  }
}

// radial Fourier transform of a unit-amplitude profile supported in [0, R]
cd radial_transform(kind k, double R, double gamma, int n, double rho) {
  if (k == kind::ball_indicator) {
    double u = rho * R;
    if (n == 2) {
      if (u < 1e-8) return M_PI * R * R;
      return 2.0 * M_PI * R * bessel::j1(u) / rho;
    }
    if (u < 1e-6) return 4.0 * M_PI * R * R * R / 3.0;
    return 4.0 * M_PI * (std::sin(u) - u * std::cos(u)) / (rho * rho * rho);
  }
  // 1D radial quadrature, panels sized to resolve the oscillation
  int panels = 8 + int(std::ceil(R * rho / 3.0));
  static thread_local std::vector<double> gx, gw;
  if (gx.empty()) util::gauss_legendre(12, gx, gw);
  util::ksum acc;
  for (int p = 0; p < panels; ++p) {
    double a = R * p / panels, b = R * (p + 1) / panels;
    double c = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      double r = c + hw * gx[i];
      double f = profile(k, r, R, gamma);
      double kernel;
      if (n == 2) {
        kernel = 2.0 * M_PI * (rho * r < 1e-12 ? 1.0 : bessel::j0(rho * r)) * r;
      } else {
        double u = rho * r;
        double sinc = u < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u;
        kernel = 4.0 * M_PI * sinc * r * r;
      }
      acc.add(gw[i] * hw * f * kernel);
    }
  }
  return acc.value();
}

double quintic_smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

// smooth radial window: 1 on r <= 0.8, 0 on r >= 0.95
double support_window(double r) {
  return 1.0 - quintic_smoothstep((r - 0.8) / 0.15);
}

void synthesize_rough(const PotentialSpec& spec, const Grid& g,
                      SampledField& out) {
  SampledField hat = make_field(g, space_tag::frequency);
  int N = g.points_per_dim;
  double expo = spec.target_exponent + 0.5 * g.n_dim;
  int idx[3];
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.axis_indices(flat, idx);
    int mirror[3] = {(N - idx[0]) % N, (N - idx[1]) % N,
                     g.n_dim == 3 ? (N - idx[2]) % N : 0};
    bool canonical =
        std::lexicographical_compare(idx, idx + 3, mirror, mirror + 3) ||
        std::equal(idx, idx + 3, mirror);
    double r2 = 0;
    for (int d = 0; d < g.n_dim; ++d) {
      double x = g.freq(idx[d]);
      r2 += x * x;
    }
    double amp = std::pow(1.0 + std::sqrt(r2), -expo);
    const int* key_idx = canonical ? idx : mirror;
    uint64_t key = util::mix(
        spec.seed, util::mix(uint64_t(key_idx[0]) + 1,
                             util::mix(uint64_t(key_idx[1]) + 1,
                                       uint64_t(key_idx[2]) + 1)));
    bool self_paired = std::equal(idx, idx + 3, mirror, mirror + 3);
    if (self_paired) {
      hat.values[flat] = amp * (util::u01(util::splitmix64(key)) < 0.5
                                    ? 1.0
                                    : -1.0);
    } else {
      double phase = 2.0 * M_PI * util::u01(util::splitmix64(key));
      cd v = amp * cd{std::cos(phase), std::sin(phase)};
      hat.values[flat] = canonical ? v : std::conj(v);
    }
  }
  SampledField phys = spectral_core::inverse_transform(hat);
  double peak = 0.0;
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.axis_indices(flat, idx);
    double r2 = 0;
    for (int d = 0; d < g.n_dim; ++d) {
      double x = g.coord(idx[d]);
      r2 += x * x;
    }
    double v = phys.values[flat].real() * support_window(std::sqrt(r2));
    phys.values[flat] = v;
    peak = std::max(peak, std::abs(v));
  }
  double scale = peak > 0 ? spec.amplitude / peak : 0.0;
  for (std::size_t flat = 0; flat < g.size(); ++flat)
    out.values[flat] = phys.values[flat].real() * scale;
}

double min_radius(const PotentialSpec& spec) {
  if (spec.k == kind::translate_sum) {
    double r = 1.0;
    for (const auto& t : spec.terms) r = std::min(r, t.radius);
    return r;
  }
  if (spec.k == kind::rough_random) return 0.95;
  return spec.radius;
}

}  // namespace

void validate(const PotentialSpec& spec) {
  if (spec.n_dim != 2 && spec.n_dim != 3)
    throw input_error("potential: n_dim must be 2 or 3");
  if (!std::isfinite(spec.amplitude))
    throw input_error("potential: amplitude must be finite");
  auto check_simple = [](kind k, double R, double gamma) {
    if (!(R > 0.0 && R <= 1.0))
      throw input_error("potential: radius must be in (0, 1]");
    if (k == kind::radial_cusp && !(gamma > 0.0))
      throw input_error("potential: cusp order must be positive");
  };
  switch (spec.k) {
    case kind::translate_sum: {
      if (spec.terms.empty())
        throw input_error("potential: translate_sum needs terms");
      for (const auto& t : spec.terms) {
        if (t.child_kind == kind::translate_sum ||
            t.child_kind == kind::rough_random)
          throw input_error(
              "potential: translate_sum children must be simple profiles");
        check_simple(t.child_kind, t.radius, t.gamma);
        double c = std::sqrt(t.center[0] * t.center[0] +
                             t.center[1] * t.center[1] +
                             t.center[2] * t.center[2]);
        if (c + t.radius > 1.0)
          throw input_error(
              "potential: translated support leaves the unit ball");
        if (!std::isfinite(t.weight))
          throw input_error("potential: weight must be finite");
      }
      break;
    }
    case kind::rough_random:
      if (!(spec.target_exponent > 0.0 && spec.target_exponent < 4.0))
        throw input_error("potential: target_exponent out of range");
      break;
    default:
      check_simple(spec.k, spec.radius, spec.gamma);
  }
}

SampledField sample(const PotentialSpec& spec, const Grid& grid) {
  validate(spec);
  if (grid.n_dim != spec.n_dim)
    throw input_error("sample: grid/potential dimension mismatch");
  if (grid.box_extent < 2.0)
    throw input_error("sample: support exceeds the box");
  double h = grid.spacing();
  if (2.0 * min_radius(spec) / h < 16.0)
    throw input_error("sample: grid does not resolve the support");
  SampledField out = make_field(grid, space_tag::physical);
  if (spec.k == kind::rough_random) {
    synthesize_rough(spec, grid, out);
    return out;
  }
  int idx[3];
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    grid.axis_indices(flat, idx);
    double x[3] = {grid.coord(idx[0]), grid.coord(idx[1]),
                   grid.n_dim == 3 ? grid.coord(idx[2]) : 0.0};
    double v = 0.0;
    if (spec.k == kind::translate_sum) {
      for (const auto& t : spec.terms) {
        double r2 = 0;
        for (int d = 0; d < grid.n_dim; ++d) {
          double dx = x[d] - t.center[d];
          r2 += dx * dx;
        }
        v += t.weight * profile(t.child_kind, std::sqrt(r2), t.radius, t.gamma);
      }
    } else {
      double r2 = 0;
      for (int d = 0; d < grid.n_dim; ++d) r2 += x[d] * x[d];
      v = profile(spec.k, std::sqrt(r2), spec.radius, spec.gamma);
    }
    out.values[flat] = spec.amplitude * v;
  }
  return out;
}

SampledField sample_band_limited(const PotentialSpec& spec, const Grid& grid) {
  validate(spec);
  if (grid.n_dim != spec.n_dim)
    throw input_error("sample_band_limited: grid/potential dimension mismatch");
  if (spec.k == kind::rough_random)
    throw input_error(
        "sample_band_limited: rough_random has no closed transform; it is "
        "already band limited by construction, use sample()");
  // Fill the frequency lattice from the closed-form transform and invert.
  // Unlike pointwise sampling this carries no alias images, which matters
  // when the result feeds single-frequency evaluations of a discontinuous
  // profile: the images sit at distance (2*pi*N/L - |xi|) and pollute the
  // transform pointwise long before they show up in shell energies.
  SampledField hat = make_field(grid, space_tag::frequency);
  int idx[3];
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    grid.axis_indices(flat, idx);
    double xi[3] = {grid.freq(idx[0]), grid.freq(idx[1]),
                    grid.n_dim == 3 ? grid.freq(idx[2]) : 0.0};
    hat.values[flat] = analytic_transform(spec, xi);
  }
  return inverse_transform(hat);
}

cd analytic_transform(const PotentialSpec& spec, const double* xi) {
  validate(spec);
  if (spec.k == kind::rough_random)
    throw input_error("analytic_transform: rough_random has no closed form");
  double r2 = 0;
  for (int d = 0; d < spec.n_dim; ++d) r2 += xi[d] * xi[d];
  double rho = std::sqrt(r2);
  if (spec.k == kind::translate_sum) {
    util::ksum_c acc;
    for (const auto& t : spec.terms) {
      double dot = 0;
      for (int d = 0; d < spec.n_dim; ++d) dot += t.center[d] * xi[d];
      cd phase{std::cos(dot), -std::sin(dot)};
      acc.add(t.weight * phase *
              radial_transform(t.child_kind, t.radius, t.gamma, spec.n_dim,
                               rho));
    }
    return spec.amplitude * acc.value();
  }
  return spec.amplitude *
         radial_transform(spec.k, spec.radius, spec.gamma, spec.n_dim, rho);
}

std::optional<double> known_exponent(const PotentialSpec& spec) {
  switch (spec.k) {
    case kind::ball_indicator:
      return 0.5;
    case kind::radial_cusp:
      return spec.gamma + 0.5;
    case kind::smooth_bump:
      return std::nullopt;
    case kind::rough_random:
      return spec.target_exponent;
    case kind::translate_sum: {
      std::optional<double> e;
      for (const auto& t : spec.terms) {
        PotentialSpec child;
        child.k = t.child_kind;
        child.n_dim = spec.n_dim;
        child.radius = t.radius;
        child.gamma = t.gamma;
        auto ce = known_exponent(child);
        if (ce && (!e || *ce < *e)) e = ce;
      }
      return e;
    }
  }
  return std::nullopt;
}

std::string PotentialSpec::serialize() const {
  std::ostringstream os;
  os << "kind=" << kind_name(k) << ";n=" << n_dim
     << ";amplitude=" << util::format_g17(amplitude);
  switch (k) {
    case kind::rough_random:
      os << ";seed=" << seed
         << ";target_exponent=" << util::format_g17(target_exponent);
      break;
    case kind::translate_sum:
      os << ";terms=";
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        if (i) os << "|";
        os << kind_name(t.child_kind) << ":" << util::format_g17(t.radius)
           << ":" << util::format_g17(t.gamma) << ":"
           << util::format_g17(t.center[0]) << ":"
           << util::format_g17(t.center[1]) << ":"
           << util::format_g17(t.center[2]) << ":"
           << util::format_g17(t.weight);
      }
      break;
    default:
      os << ";radius=" << util::format_g17(radius);
      if (k == kind::radial_cusp)
        os << ";gamma=" << util::format_g17(gamma);
  }
  return os.str();
}

PotentialSpec parse_potential(const std::string& record) {
  PotentialSpec spec;
  std::stringstream ss(record);
  std::string item;
  while (std::getline(ss, item, ';')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw input_error("potential record: malformed entry '" + item + "'");
    std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    if (key == "kind") {
      spec.k = kind_from_name(val);
    } else if (key == "n") {
      spec.n_dim = std::stoi(val);
    } else if (key == "amplitude") {
      spec.amplitude = std::stod(val);
    } else if (key == "radius") {
      spec.radius = std::stod(val);
    } else if (key == "gamma") {
      spec.gamma = std::stod(val);
    } else if (key == "seed") {
      spec.seed = std::stoull(val);
    } else if (key == "target_exponent") {
      spec.target_exponent = std::stod(val);
    } else if (key == "terms") {
      std::stringstream ts(val);
      std::string term;
      while (std::getline(ts, term, '|')) {
        std::stringstream fs(term);
        std::string f;
        std::vector<std::string> parts;
        while (std::getline(fs, f, ':')) parts.push_back(f);
        if (parts.size() != 7)
          throw input_error("potential record: malformed term '" + term + "'");
        translate_term t;
        t.child_kind = kind_from_name(parts[0]);
        t.radius = std::stod(parts[1]);
        t.gamma = std::stod(parts[2]);
        t.center = {std::stod(parts[3]), std::stod(parts[4]),
                    std::stod(parts[5])};
        t.weight = std::stod(parts[6]);
        spec.terms.push_back(t);
      }
    } else {
      throw input_error("potential record: unknown key '" + key + "'");
    }
  }
  validate(spec);
  return spec;
}

}  // namespace bornlab::potentials
