#include "bornlab/qmc.hpp"

#include <algorithm>

#include "bornlab/util.hpp"

namespace bornlab::qmc {

namespace {

// Primitive-polynomial data for dimensions 2..8 (dimension 1 is the van der
// Corput sequence): degree s, coefficient bits a, initial direction values m.
struct dim_init {
  int s;
  uint32_t a;
  uint32_t m[8];
};

const dim_init kInit[7] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
};

constexpr int kBits = 63;

}  // namespace

sobol::sobol(int dim, uint64_t seed, int replicate) : dim_(dim) {
  if (dim < 1 || dim > 8)
    throw util::input_error("sobol: dimension must be in 1..8");
  // dimension 0: m_k = 1 for all k
  for (int k = 1; k <= kBits; ++k) v_[0][k - 1] = 1ull << (64 - k);
  for (int d = 1; d < dim; ++d) {
    const dim_init& di = kInit[d - 1];
    uint64_t m[64];
    for (int k = 1; k <= di.s; ++k) m[k] = di.m[k - 1];
    for (int k = di.s + 1; k <= kBits; ++k) {
      uint64_t mk = m[k - di.s] ^ (m[k - di.s] << di.s);
      for (int i = 1; i < di.s; ++i) {
        uint32_t ai = (di.a >> (di.s - 1 - i)) & 1u;
        if (ai) mk ^= m[k - i] << i;
      }
      m[k] = mk;
    }
    for (int k = 1; k <= kBits; ++k) v_[d][k - 1] = m[k] << (64 - k);
  }
  for (int d = 0; d < dim; ++d) {
    shift_[d] = replicate < 0
                    ? 0
                    : util::splitmix64(util::mix(
                          seed, (uint64_t(replicate) << 8) | uint64_t(d)));
  }
}

void sobol::point(uint64_t index, double* out) const {
  uint64_t gray = index ^ (index >> 1);
  for (int d = 0; d < dim_; ++d) {
    uint64_t x = 0;
    uint64_t g = gray;
    int k = 0;
    while (g) {
      if (g & 1ull) x ^= v_[d][k];
      g >>= 1;
      ++k;
    }
    x ^= shift_[d];
    double u = util::u01(x);
    out[d] = std::clamp(u, 0x1.0p-53, 1.0 - 0x1.0p-53);
  }
}

}  // namespace bornlab::qmc
