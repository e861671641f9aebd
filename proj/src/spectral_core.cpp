#include "bornlab/spectral_core.hpp"

#include <fftw3.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>

namespace bornlab::spectral_core {

namespace fs = std::filesystem;

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW access is serialized: plans are cached per (rank, N, sign) and
// executed on an engine-owned buffer. Plans use FFTW_ESTIMATE so the
// transform is deterministic run to run.
class fft_engine {
 public:
  static fft_engine& instance() {
    static fft_engine e;
    return e;
  }

  void execute(const Grid& g, int sign, std::vector<cd>& data) {
    std::lock_guard<std::mutex> lock(mu_);
    std::size_t n = g.size();
    if (buf_cap_ < n) {
      if (buf_) fftw_free(buf_);
      buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
      if (!buf_) throw util::compute_error("fft: allocation failed");
      buf_cap_ = n;
      plans_.clear_all();
    }
    fftw_plan p = plans_.get(g, sign, buf_);
    std::memcpy(static_cast<void*>(buf_),
                static_cast<const void*>(data.data()), sizeof(cd) * n);
    fftw_execute(p);
    std::memcpy(static_cast<void*>(data.data()),
                static_cast<const void*>(buf_), sizeof(cd) * n);
  }

 private:
  struct plan_cache {
    std::map<std::tuple<int, int, int>, fftw_plan> m;
    fftw_plan get(const Grid& g, int sign, fftw_complex* buf) {
      auto key = std::make_tuple(g.n_dim, g.points_per_dim, sign);
      auto it = m.find(key);
      if (it != m.end()) return it->second;
      int N = g.points_per_dim;
      fftw_plan p =
          g.n_dim == 2
              ? fftw_plan_dft_2d(N, N, buf, buf, sign, FFTW_ESTIMATE)
              : fftw_plan_dft_3d(N, N, N, buf, buf, sign, FFTW_ESTIMATE);
      if (!p) throw util::compute_error("fft: plan creation failed");
      m[key] = p;
      return p;
    }
    void clear_all() {
      for (auto& kv : m) fftw_destroy_plan(kv.second);
      m.clear();
    }
  };

  std::mutex mu_;
  fftw_complex* buf_ = nullptr;
  std::size_t buf_cap_ = 0;
  plan_cache plans_;
};

// (-1)^(i1+i2+i3) phase that re-centers the box at the origin
void apply_alternating_phase(const Grid& g, std::vector<cd>& v) {
  int N = g.points_per_dim;
  if (g.n_dim == 2) {
    std::size_t f = 0;
    for (int i2 = 0; i2 < N; ++i2)
      for (int i1 = 0; i1 < N; ++i1, ++f)
        if ((i1 + i2) & 1) v[f] = -v[f];
  } else {
    std::size_t f = 0;
    for (int i3 = 0; i3 < N; ++i3)
      for (int i2 = 0; i2 < N; ++i2)
        for (int i1 = 0; i1 < N; ++i1, ++f)
          if ((i1 + i2 + i3) & 1) v[f] = -v[f];
  }
}

void check_finite(const SampledField& f, const char* what) {
  for (const cd& z : f.values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw util::input_error(std::string(what) + ": non-finite input value");
}

double cell_measure_freq(const Grid& g) {
  return std::pow(2.0 * M_PI / g.box_extent, g.n_dim);
}

}  // namespace

Grid make_grid(int n_dim, int points_per_dim, double box_extent) {
  if (n_dim != 2 && n_dim != 3)
    throw util::input_error("grid: n_dim must be 2 or 3");
  if (points_per_dim < 8 || !is_pow2(points_per_dim))
    throw util::input_error("grid: points_per_dim must be a power of two >= 8");
  if (!(box_extent > 0.0))
    throw util::input_error("grid: box_extent must be positive");
  return Grid{n_dim, points_per_dim, box_extent};
}

SampledField make_field(const Grid& g, space_tag tag) {
  SampledField f;
  f.grid = g;
  f.tag = tag;
  f.values.assign(g.size(), cd{0.0, 0.0});
  return f;
}

SampledField forward_transform(const SampledField& f) {
  if (f.tag != space_tag::physical)
    throw util::input_error("forward_transform: field is not physical-space");
  check_finite(f, "forward_transform");
  SampledField out = f;
  out.tag = space_tag::frequency;
  fft_engine::instance().execute(f.grid, FFTW_FORWARD, out.values);
  apply_alternating_phase(f.grid, out.values);
  double hn = std::pow(f.grid.spacing(), f.grid.n_dim);
  for (cd& z : out.values) z *= hn;
  return out;
}

SampledField inverse_transform(const SampledField& f) {
  if (f.tag != space_tag::frequency)
    throw util::input_error("inverse_transform: field is not frequency-space");
  check_finite(f, "inverse_transform");
  SampledField out = f;
  out.tag = space_tag::physical;
  apply_alternating_phase(f.grid, out.values);
  fft_engine::instance().execute(f.grid, FFTW_BACKWARD, out.values);
  double scale = std::pow(1.0 / f.grid.box_extent, f.grid.n_dim);
  for (cd& z : out.values) z *= scale;
  return out;
}

ShellEnergies shell_energies(const SampledField& f, double base_scale) {
  if (f.tag != space_tag::frequency)
    throw util::input_error("shell_energies: field is not frequency-space");
  if (!(base_scale > 0.0))
    throw util::input_error("shell_energies: base_scale must be positive");
  check_finite(f, "shell_energies");
  const Grid& g = f.grid;
  double ximax = g.max_axis_freq() * std::sqrt(double(g.n_dim));
  int jmax = std::max(0, int(std::ceil(std::log2(ximax / base_scale))));
  std::vector<util::ksum> acc(jmax + 1);
  util::ksum central;
  int N = g.points_per_dim;
  std::size_t flat = 0;
  int i[3] = {0, 0, 0};
  std::size_t total = g.size();
  for (flat = 0; flat < total; ++flat) {
    g.axis_indices(flat, i);
    double x1 = g.freq(i[0]), x2 = g.freq(i[1]);
    double r2 = x1 * x1 + x2 * x2;
    if (g.n_dim == 3) {
      double x3 = g.freq(i[2]);
      r2 += x3 * x3;
    }
    double r = std::sqrt(r2);
    double e = std::norm(f.values[flat]);
    if (r <= 0.5 * base_scale) {
      central.add(e);
    } else {
      int j = std::max(0, int(std::ceil(std::log2(r / base_scale))));
      // guard against round-off at shell boundaries
      while (j > 0 && r <= base_scale * std::ldexp(1.0, j - 1)) --j;
      while (r > base_scale * std::ldexp(1.0, j)) ++j;
      if (j > jmax) j = jmax;
      acc[j].add(e);
    }
  }
  (void)N;
  ShellEnergies se;
  se.base_scale = base_scale;
  double mu = cell_measure_freq(g);
  se.central = central.value() * mu;
  se.energy.resize(jmax + 1);
  for (int j = 0; j <= jmax; ++j) se.energy[j] = acc[j].value() * mu;
  return se;
}

double sobolev_norm(const SampledField& f, double s, bool homogeneous) {
  if (f.tag != space_tag::frequency)
    throw util::input_error("sobolev_norm: field is not frequency-space");
  check_finite(f, "sobolev_norm");
  const Grid& g = f.grid;
  util::ksum acc;
  int i[3] = {0, 0, 0};
  std::size_t total = g.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    g.axis_indices(flat, i);
    double x1 = g.freq(i[0]), x2 = g.freq(i[1]);
    double r2 = x1 * x1 + x2 * x2;
    if (g.n_dim == 3) {
      double x3 = g.freq(i[2]);
      r2 += x3 * x3;
    }
    double w2s;
    if (homogeneous) {
      if (r2 == 0.0) {
        if (s == 0.0)
          w2s = 1.0;
        else if (s > 0.0)
          w2s = 0.0;
        else
          continue;  // negative smoothing excludes the origin node
      } else {
        w2s = std::pow(r2, s);
      }
    } else {
      w2s = std::pow(1.0 + r2, s);
    }
    acc.add(w2s * std::norm(f.values[flat]));
  }
  return std::sqrt(acc.value() * cell_measure_freq(g));
}

std::pair<int, int> default_fit_window(const ShellEnergies& se) {
  return {3, int(se.energy.size()) - 2};
}

std::vector<std::pair<int, double>> shell_list(const ShellEnergies& se) {
  std::vector<std::pair<int, double>> out;
  for (int j = 0; j < int(se.energy.size()); ++j)
    out.emplace_back(j, se.energy[j]);
  return out;
}

RegularityEstimate estimate_regularity(
    const std::vector<std::pair<int, double>>& shells,
    std::pair<int, int> window, int points_per_dim) {
  std::vector<double> xs, ys;
  for (const auto& [j, e] : shells) {
    if (j < window.first || j > window.second) continue;
    if (!(e > 0.0)) continue;
    xs.push_back(double(j));
    ys.push_back(std::log2(e));
  }
  if (xs.size() < 4)
    throw util::input_error(
        "estimate_regularity: fewer than 4 usable shells in window");
  auto fit = util::linfit(xs, ys);
  RegularityEstimate est;
  est.shells = shells;
  est.fit_window = window;
  est.fitted_exponent = -0.5 * fit.slope;
  est.fit_residual = fit.max_residual;
  double ceiling = 0.5 * std::log2(double(points_per_dim)) - 1.0;
  est.ceiling_flag = est.fitted_exponent >= ceiling;
  return est;
}

uint64_t field_content_hash(const SampledField& f) {
  uint64_t h = util::fnv1a_str("sampled_field.v1");
  int meta[3] = {f.grid.n_dim, f.grid.points_per_dim,
                 f.tag == space_tag::physical ? 0 : 1};
  h = util::fnv1a(meta, sizeof(meta), h);
  h = util::fnv1a(&f.grid.box_extent, sizeof(double), h);
  h = util::fnv1a(f.values.data(), f.values.size() * sizeof(cd), h);
  return h;
}

void save_field(const std::string& dir, const SampledField& f,
                const std::vector<std::pair<std::string, std::string>>& extra) {
  fs::path target(dir);
  fs::path parent = target.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  fs::path tmp = target;
  tmp += ".tmp." + util::format_hex64(util::mix(
             uint64_t(::getpid()), field_content_hash(f)));
  fs::create_directories(tmp);
  {
    std::ofstream vals(tmp / "values.c128", std::ios::binary);
    vals.write(reinterpret_cast<const char*>(f.values.data()),
               std::streamsize(f.values.size() * sizeof(cd)));
    if (!vals) throw util::compute_error("save_field: value write failed");
  }
  {
    std::ofstream man(tmp / "manifest.txt");
    man << "format = sampled_field.v1\n";
    man << "n_dim = " << f.grid.n_dim << "\n";
    man << "points_per_dim = " << f.grid.points_per_dim << "\n";
    man << "box_extent = " << util::format_g17(f.grid.box_extent) << "\n";
    man << "space_tag = "
        << (f.tag == space_tag::physical ? "physical" : "frequency") << "\n";
    man << "value_count = " << f.values.size() << "\n";
    man << "byte_order = little\n";
    man << "layout = x1_fastest\n";
    man << "content_hash = " << util::format_hex64(field_content_hash(f))
        << "\n";
    for (const auto& [k, v] : extra) man << k << " = " << v << "\n";
    if (!man) throw util::compute_error("save_field: manifest write failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    if (fs::exists(target)) {
      fs::remove_all(tmp);  // lost a benign race; keep the existing copy
    } else {
      throw util::compute_error("save_field: rename failed: " + ec.message());
    }
  }
}

namespace {
std::map<std::string, std::string> read_manifest(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw util::input_error("manifest missing: " + p.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t");
      std::size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}
}  // namespace

SampledField load_field(const std::string& dir) {
  fs::path d(dir);
  auto kv = read_manifest(d / "manifest.txt");
  if (kv["format"] != "sampled_field.v1")
    throw util::input_error("load_field: unknown format");
  Grid g = make_grid(std::stoi(kv.at("n_dim")),
                     std::stoi(kv.at("points_per_dim")),
                     std::stod(kv.at("box_extent")));
  SampledField f = make_field(
      g, kv.at("space_tag") == "physical" ? space_tag::physical
                                          : space_tag::frequency);
  std::size_t count = std::stoull(kv.at("value_count"));
  if (count != g.size())
    throw util::input_error("load_field: value_count mismatch");
  std::ifstream vals(d / "values.c128", std::ios::binary);
  if (!vals) throw util::input_error("load_field: values.c128 missing");
  vals.read(reinterpret_cast<char*>(f.values.data()),
            std::streamsize(count * sizeof(cd)));
  if (std::size_t(vals.gcount()) != count * sizeof(cd))
    throw util::input_error("load_field: short read");
  return f;
}

}  // namespace bornlab::spectral_core
