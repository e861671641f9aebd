#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bornlab::util {

// Error taxonomy, mapped to CLI exit codes:
// input_error -> 2, compute_error -> 1, inconclusive_error -> 3.
struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct compute_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct inconclusive_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Kahan-Babuska-Neumaier compensated accumulator. All norm/energy reductions
// go through this so results are independent of node enumeration order at
// the 1e-12 tolerances the tests pin.
class ksum {
 public:
  void add(double x) {
    double t = s_ + x;
    if (std::abs(s_) >= std::abs(x))
      c_ += (s_ - t) + x;
    else
      c_ += (x - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

class ksum_c {
 public:
  void add(std::complex<double> z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  std::complex<double> value() const { return {re_.value(), im_.value()}; }

 private:
  ksum re_, im_;
};

// Counter-based pseudorandomness: every random draw is a pure function of a
// 64-bit key, so experiments replay exactly regardless of evaluation order.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t mix(uint64_t a, uint64_t b) {
  return splitmix64(a ^ (0x9e3779b97f4a7c15ull + b + (a << 6) + (a >> 2)));
}

// uniform in [0,1) from 64 random bits
inline double u01(uint64_t bits) { return double(bits >> 11) * 0x1.0p-53; }

// FNV-1a 64-bit, used for config/dataset content hashes.
inline uint64_t fnv1a(const void* data, size_t len,
                      uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}
inline uint64_t fnv1a_str(const std::string& s,
                          uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a(s.data(), s.size(), h);
}

std::string format_g17(double x);
std::string format_hex64(uint64_t v);

// Chunked parallel map over [0,n). Output slots must be disjoint per index;
// the chunking never affects results.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& f);
int default_threads();

struct linfit_result {
  double intercept = 0, slope = 0, max_residual = 0;
};
linfit_result linfit(const std::vector<double>& x,
                     const std::vector<double>& y);

// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration.
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights);

}  // namespace bornlab::util
