#include "bornlab/lippmann_schwinger.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>

#include "bornlab/util.hpp"

namespace bornlab::lippmann_schwinger {

namespace fs = std::filesystem;
using spectral_core::space_tag;
using util::compute_error;
using util::input_error;

namespace {

void check_direction(const Grid& g, const double* th, const char* who) {
  double n2 = 0;
  for (int d = 0; d < g.n_dim; ++d) {
    if (!std::isfinite(th[d]))
      throw input_error(std::string(who) + ": non-finite direction");
    n2 += th[d] * th[d];
  }
  if (std::abs(n2 - 1.0) > 1e-12)
    throw input_error(std::string(who) + ": direction must be unit length");
}

void check_wavenumber(const Grid& g, double k, const char* who) {
  if (!(k > 0) || !std::isfinite(k))
    throw input_error(std::string(who) + ": k must be positive");
  // backscattering probes the transform at |xi| = 2k, so the band must
  // cover twice the wavenumber
  if (2.0 * k > g.max_axis_freq() * (1.0 + 1e-12))
    throw input_error(std::string(who) +
                      ": 2k exceeds the grid's frequency band");
}

SampledField plane_wave(const Grid& g, double k, const double* th) {
  // separable phase: e^{ik theta . x} = prod_d e^{ik theta_d x_d}
  std::vector<std::vector<cd>> ax(g.n_dim);
  for (int d = 0; d < g.n_dim; ++d) {
    ax[d].resize(g.points_per_dim);
    for (int i = 0; i < g.points_per_dim; ++i)
      ax[d][i] = std::polar(1.0, k * th[d] * g.coord(i));
  }
  SampledField f = spectral_core::make_field(g, space_tag::physical);
  int idx[3];
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.axis_indices(flat, idx);
    cd w = ax[0][idx[0]];
    for (int d = 1; d < g.n_dim; ++d) w *= ax[d][idx[d]];
    f.values[flat] = w;
  }
  return f;
}

double grid_norm(const SampledField& f) {
  util::ksum s;
  for (const cd& v : f.values) s.add(std::norm(v));
  return std::sqrt(s.value() * std::pow(f.grid.spacing(), f.grid.n_dim));
}

std::string timestamp_utc() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::map<std::string, std::string> read_kv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw input_error("manifest missing: " + p.string());
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

ScatteringSolution solve(const SampledField& q, double k, const double* theta,
                         const SolveParams& p) {
  if (q.tag != space_tag::physical)
    throw input_error("solve: q must be physical-space");
  check_wavenumber(q.grid, k, "solve");
  check_direction(q.grid, theta, "solve");
  if (p.max_terms < 1) throw input_error("solve: max_terms must be >= 1");
  if (!(p.tol > 0)) throw input_error("solve: tol must be positive");

  const Grid& g = q.grid;
  ScatteringSolution sol;
  sol.k = k;
  for (int d = 0; d < g.n_dim; ++d) sol.theta[d] = theta[d];

  SampledField term = plane_wave(g, k, theta);
  sol.u = term;
  sol.term_norms.push_back(grid_norm(term));

  // the stopping reference: incident wave restricted to supp q
  util::ksum ref_acc;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (q.values[i] != cd{0, 0}) ref_acc.add(std::norm(term.values[i]));
  double ref = std::sqrt(ref_acc.value() * std::pow(g.spacing(), g.n_dim));

  resolvent::ResolventParams rp;
  rp.k = k;
  rp.epsilon = p.epsilon < 0 ? -p.epsilon * resolvent::default_epsilon(g, k)
                             : p.epsilon;
  rp.extrapolation_levels = p.extrapolation_levels;

  int growing = 0;
  for (int m = 1; m <= p.max_terms; ++m) {
    for (std::size_t i = 0; i < g.size(); ++i)
      term.values[i] *= q.values[i];
    term = resolvent::apply_resolvent(term, rp);
    double nrm = grid_norm(term);
    double ratio = nrm / sol.term_norms.back();
    sol.term_norms.push_back(nrm);
    sol.contraction_ratio = std::max(sol.contraction_ratio, ratio);
    growing = ratio >= 1.0 ? growing + 1 : 0;
    if (growing >= 3)
      throw compute_error(
          "solve: diverged, term ratio " + util::format_g17(ratio) +
          " >= 1 over 3 consecutive terms (k below the contraction "
          "threshold for this q)");
    for (std::size_t i = 0; i < g.size(); ++i)
      sol.u.values[i] += term.values[i];
    if (nrm <= p.tol * ref) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

cd far_field(const SampledField& q, const ScatteringSolution& sol,
             const double* theta_out) {
  if (!sol.converged)
    throw input_error("far_field: solution did not converge");
  if (!(q.grid == sol.u.grid))
    throw input_error("far_field: q and solution live on different grids");
  if (q.tag != space_tag::physical)
    throw input_error("far_field: q must be physical-space");
  const Grid& g = q.grid;
  check_direction(g, theta_out, "far_field");

  std::vector<std::vector<cd>> ax(g.n_dim);
  for (int d = 0; d < g.n_dim; ++d) {
    ax[d].resize(g.points_per_dim);
    for (int i = 0; i < g.points_per_dim; ++i)
      ax[d][i] = std::polar(1.0, -sol.k * theta_out[d] * g.coord(i));
  }
  util::ksum_c acc;
  int idx[3];
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    if (q.values[flat] == cd{0, 0}) continue;
    g.axis_indices(flat, idx);
    cd w = ax[0][idx[0]];
    for (int d = 1; d < g.n_dim; ++d) w *= ax[d][idx[d]];
    acc.add(w * q.values[flat] * sol.u.values[flat]);
  }
  return acc.value() * std::pow(g.spacing(), g.n_dim);
}

std::vector<double> default_k_samples(const Grid& g, double c0_floor,
                                      int count) {
  if (!(c0_floor > 0))
    throw input_error("default_k_samples: c0_floor must be positive");
  if (count < 2) throw input_error("default_k_samples: count must be >= 2");
  double k_max = 0.8 * g.max_axis_freq() / 2.0;
  if (!(k_max > c0_floor))
    throw input_error(
        "default_k_samples: grid band cannot fit a ladder above the floor");
  std::vector<double> ks(count);
  double r = std::pow(k_max / c0_floor, 1.0 / (count - 1));
  for (int i = 0; i < count; ++i) ks[i] = c0_floor * std::pow(r, i);
  ks.back() = k_max;  // guard the endpoint against pow roundoff
  return ks;
}

std::vector<std::array<double, 3>> default_theta_samples(int n_dim,
                                                         int count) {
  if (n_dim != 2 && n_dim != 3)
    throw input_error("default_theta_samples: n_dim must be 2 or 3");
  if (count < 1) throw input_error("default_theta_samples: count must be >= 1");
  std::vector<std::array<double, 3>> out;
  if (n_dim == 2) {
    out.resize(count);
    for (int i = 0; i < count; ++i) {
      double a = 2.0 * M_PI * i / count;
      out[i] = {std::cos(a), std::sin(a), 0.0};
    }
    return out;
  }
  if (count <= 26) {
    // the 26 lattice directions: all sign vectors in {-1,0,1}^3 minus origin
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        for (int c = -1; c <= 1; ++c) {
          if (a == 0 && b == 0 && c == 0) continue;
          double n = std::sqrt(double(a * a + b * b + c * c));
          out.push_back({a / n, b / n, c / n});
        }
    return out;
  }
  // refinement: Fibonacci spiral, asymptotically uniform
  double golden = M_PI * (3.0 - std::sqrt(5.0));
  out.resize(count);
  for (int i = 0; i < count; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / count;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double a = golden * i;
    std::array<double, 3> v{r * std::cos(a), r * std::sin(a), z};
    double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    out[i] = {v[0] / n, v[1] / n, v[2] / n};
  }
  return out;
}

uint64_t sweep_config_hash(const potentials::PotentialSpec& q_spec,
                           const Grid& g, const std::vector<double>& k_samples,
                           const std::vector<std::array<double, 3>>& thetas,
                           const SolveParams& sp) {
  uint64_t h = util::fnv1a_str(q_spec.serialize());
  auto add = [&h](const void* p, size_t n) { h = util::fnv1a(p, n, h); };
  add(&g.n_dim, sizeof g.n_dim);
  add(&g.points_per_dim, sizeof g.points_per_dim);
  add(&g.box_extent, sizeof g.box_extent);
  for (double k : k_samples) add(&k, sizeof k);
  for (const auto& t : thetas) add(t.data(), sizeof t);
  add(&sp.max_terms, sizeof sp.max_terms);
  add(&sp.tol, sizeof sp.tol);
  add(&sp.epsilon, sizeof sp.epsilon);
  add(&sp.extrapolation_levels, sizeof sp.extrapolation_levels);
  return h;
}

FarFieldDataset sweep(const potentials::PotentialSpec& q_spec, const Grid& g,
                      const std::vector<double>& k_samples,
                      const std::vector<std::array<double, 3>>& theta_samples,
                      const SweepParams& p) {
  if (k_samples.empty()) throw input_error("sweep: no wavenumbers");
  if (theta_samples.empty()) throw input_error("sweep: no directions");
  for (std::size_t i = 0; i < k_samples.size(); ++i) {
    check_wavenumber(g, k_samples[i], "sweep");
    if (i > 0 && !(k_samples[i] > k_samples[i - 1]))
      throw input_error("sweep: k_samples must be strictly increasing");
  }
  for (const auto& t : theta_samples) {
    check_direction(g, t.data(), "sweep");
    for (int d = g.n_dim; d < 3; ++d)
      if (t[d] != 0.0)
        throw input_error("sweep: direction has components beyond n_dim");
  }

  uint64_t h = sweep_config_hash(q_spec, g, k_samples, theta_samples, p.solve);
  std::string key = util::format_hex64(h);
  fs::path cache_entry;
  if (!p.cache_dir.empty()) {
    cache_entry = fs::path(p.cache_dir) / ("ffds_" + key);
    if (fs::exists(cache_entry / "manifest.txt")) {
      FarFieldDataset ds = load_dataset(cache_entry.string());
      for (const auto& [mk, mv] : ds.meta)
        if (mk == "config_hash" && mv == key) return ds;
      // stale or foreign entry: fall through and recompute
    }
  }

  SampledField q = potentials::sample(q_spec, g);
  FarFieldDataset ds;
  ds.n_dim = g.n_dim;
  ds.k_samples = k_samples;
  ds.theta_samples = theta_samples;
  ds.values.assign(k_samples.size() * theta_samples.size(), cd{0, 0});
  ds.flags.assign(ds.values.size(), 0);

  std::mutex reasons_mutex;
  std::vector<std::string> reasons;
  util::parallel_for(ds.values.size(), p.threads, [&](std::size_t cell) {
    std::size_t ik = cell / theta_samples.size();
    std::size_t it = cell % theta_samples.size();
    const auto& th = theta_samples[it];
    double back[3] = {-th[0], -th[1], -th[2]};
    try {
      ScatteringSolution sol = solve(q, k_samples[ik], th.data(), p.solve);
      if (!sol.converged)
        throw compute_error("solve: hit max_terms before tolerance");
      ds.values[cell] = far_field(q, sol, back);
    } catch (const compute_error& e) {
      ds.flags[cell] = 1;
      std::lock_guard<std::mutex> lock(reasons_mutex);
      reasons.push_back("k=" + util::format_g17(k_samples[ik]) + " theta[" +
                        std::to_string(it) + "]: " + e.what());
    }
  });

  std::size_t diverged = 0;
  for (uint8_t f : ds.flags) diverged += f;
  if (10 * diverged > ds.values.size()) {
    std::string msg = "sweep: " + std::to_string(diverged) + " of " +
                      std::to_string(ds.values.size()) +
                      " cells diverged (>10%)";
    if (!reasons.empty()) msg += "; first: " + reasons.front();
    throw compute_error(msg);
  }

  ds.meta.emplace_back("potential", q_spec.serialize());
  ds.meta.emplace_back("grid", std::to_string(g.n_dim) + "d N=" +
                                   std::to_string(g.points_per_dim) +
                                   " L=" + util::format_g17(g.box_extent));
  ds.meta.emplace_back("solver",
                       "max_terms=" + std::to_string(p.solve.max_terms) +
                           " tol=" + util::format_g17(p.solve.tol) +
                           " epsilon=" + util::format_g17(p.solve.epsilon) +
                           " levels=" +
                           std::to_string(p.solve.extrapolation_levels));
  ds.meta.emplace_back("config_hash", key);
  ds.meta.emplace_back("diverged", std::to_string(diverged));
  for (std::size_t i = 0; i < reasons.size() && i < 3; ++i)
    ds.meta.emplace_back("diverged_reason", reasons[i]);
  ds.meta.emplace_back("created", timestamp_utc());

  if (!p.cache_dir.empty()) save_dataset(cache_entry.string(), ds);
  return ds;
}

void save_dataset(const std::string& dir, const FarFieldDataset& ds) {
  if (ds.values.size() != ds.k_samples.size() * ds.theta_samples.size())
    throw input_error("save_dataset: value shape mismatch");
  if (ds.flags.size() != ds.values.size())
    throw input_error("save_dataset: flag shape mismatch");
  fs::path target(dir);
  fs::path parent = target.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  fs::path tmp = target;
  tmp += ".tmp." + util::format_hex64(util::mix(
             uint64_t(::getpid()),
             util::fnv1a(ds.values.data(), ds.values.size() * sizeof(cd))));
  fs::create_directories(tmp);
  {
    std::ofstream vals(tmp / "values.c128", std::ios::binary);
    vals.write(reinterpret_cast<const char*>(ds.values.data()),
               std::streamsize(ds.values.size() * sizeof(cd)));
    if (!vals) throw compute_error("save_dataset: value write failed");
  }
  {
    std::ofstream fl(tmp / "flags.u8", std::ios::binary);
    fl.write(reinterpret_cast<const char*>(ds.flags.data()),
             std::streamsize(ds.flags.size()));
    if (!fl) throw compute_error("save_dataset: flag write failed");
  }
  {
    std::ofstream man(tmp / "manifest.txt");
    man << "format = farfield_dataset.v1\n";
    man << "n_dim = " << ds.n_dim << "\n";
    man << "k_count = " << ds.k_samples.size() << "\n";
    man << "theta_count = " << ds.theta_samples.size() << "\n";
    man << "layout = k_major\n";
    man << "byte_order = little\n";
    for (std::size_t i = 0; i < ds.k_samples.size(); ++i)
      man << "k_" << i << " = " << util::format_g17(ds.k_samples[i]) << "\n";
    for (std::size_t i = 0; i < ds.theta_samples.size(); ++i)
      man << "theta_" << i << " = " << util::format_g17(ds.theta_samples[i][0])
          << " " << util::format_g17(ds.theta_samples[i][1]) << " "
          << util::format_g17(ds.theta_samples[i][2]) << "\n";
    for (const auto& [k, v] : ds.meta) man << "meta." << k << " = " << v
                                           << "\n";
    if (!man) throw compute_error("save_dataset: manifest write failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    if (fs::exists(target)) {
      fs::remove_all(tmp);
    } else {
      throw compute_error("save_dataset: rename failed: " + ec.message());
    }
  }
}

FarFieldDataset load_dataset(const std::string& dir) {
  fs::path d(dir);
  auto kv = read_kv(d / "manifest.txt");
  if (kv["format"] != "farfield_dataset.v1")
    throw input_error("load_dataset: unknown format");
  FarFieldDataset ds;
  ds.n_dim = std::stoi(kv.at("n_dim"));
  std::size_t nk = std::stoull(kv.at("k_count"));
  std::size_t nt = std::stoull(kv.at("theta_count"));
  ds.k_samples.resize(nk);
  for (std::size_t i = 0; i < nk; ++i)
    ds.k_samples[i] = std::stod(kv.at("k_" + std::to_string(i)));
  ds.theta_samples.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    std::istringstream in(kv.at("theta_" + std::to_string(i)));
    in >> ds.theta_samples[i][0] >> ds.theta_samples[i][1] >>
        ds.theta_samples[i][2];
    if (!in) throw input_error("load_dataset: bad direction record");
  }
  {
    std::ifstream in(d / "values.c128", std::ios::binary);
    if (!in) throw input_error("load_dataset: values.c128 missing");
    ds.values.resize(nk * nt);
    in.read(reinterpret_cast<char*>(ds.values.data()),
            std::streamsize(ds.values.size() * sizeof(cd)));
    if (std::size_t(in.gcount()) != ds.values.size() * sizeof(cd))
      throw input_error("load_dataset: truncated value block");
  }
  {
    std::ifstream in(d / "flags.u8", std::ios::binary);
    if (!in) throw input_error("load_dataset: flags.u8 missing");
    ds.flags.resize(nk * nt);
    in.read(reinterpret_cast<char*>(ds.flags.data()),
            std::streamsize(ds.flags.size()));
    if (std::size_t(in.gcount()) != ds.flags.size())
      throw input_error("load_dataset: truncated flag block");
  }
  // manifest order: meta lines preserve file order for reproducibility
  std::ifstream in(d / "manifest.txt");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("meta.", 0) != 0) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(5, eq - 5);
    std::string val = line.substr(eq + 1);
    auto strip = [](std::string& s) {
      std::size_t a = s.find_first_not_of(" \t");
      std::size_t b = s.find_last_not_of(" \t\r");
      s = a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    strip(key);
    strip(val);
    ds.meta.emplace_back(key, val);
  }
  return ds;
}

}  // namespace bornlab::lippmann_schwinger
