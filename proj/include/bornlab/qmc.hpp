#pragma once

#include <cstdint>

namespace bornlab::qmc {

// Sobol low-discrepancy sequence, dimensions 1..8, with an optional digital
// XOR shift for randomized replications (replicate >= 0). The shift is a pure
// function of (seed, replicate, dimension), so estimates replay exactly.
class sobol {
 public:
  sobol(int dim, uint64_t seed = 0, int replicate = -1);
  void point(uint64_t index, double* out) const;
  int dim() const { return dim_; }

 private:
  int dim_;
  uint64_t v_[8][64];
  uint64_t shift_[8];
};

}  // namespace bornlab::qmc
