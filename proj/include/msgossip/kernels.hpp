#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace msgossip::kernels {

// Arithmetic inner loops of the simulator: residual-norm reductions for the
// convergence oracle, argmin distance scans, and the radius filter used by
// graph construction. Scalar implementations are the reference; AVX2/NEON
// variants are selected at runtime and equivalence-tested against scalar.
//
// argmin_dist2 and collect_within evaluate the exact same per-element
// predicate in every backend (explicit mul/add, no FMA contraction), so their
// results are bit-identical across backends. The sum reductions differ only
// in association order (lane partial sums).

enum class Backend { kScalar, kAvx2, kNeon };

struct Ops {
  // Plain sum of n doubles.
  double (*sum)(const double* x, std::size_t n);
  // Sum of squared deviations from `mean`.
  double (*sum_sq_dev)(const double* x, std::size_t n, double mean);
  // Index minimizing (xs[i]-tx)^2 + (ys[i]-ty)^2; ties -> lowest index. n >= 1.
  std::size_t (*argmin_dist2)(const double* xs, const double* ys, std::size_t n,
                              double tx, double ty);
  // Appends base+i for every i with (xs[i]-px)^2 + (ys[i]-py)^2 <= r2,
  // in ascending i.
  void (*collect_within)(const double* xs, const double* ys, std::size_t n,
                         double px, double py, double r2, std::uint32_t base,
                         std::vector<std::uint32_t>& out);
};

const Ops& ops();                    // currently active backend
const Ops* ops_for(Backend b);       // nullptr if backend unavailable
Backend active_backend();
bool force_backend(Backend b);       // false if unavailable on this host
const char* backend_name(Backend b);

}  // namespace msgossip::kernels
