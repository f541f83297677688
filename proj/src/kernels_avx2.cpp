#include <immintrin.h>

#include "msgossip/kernels.hpp"

// AVX2 variants. Distance predicates use explicit mul/add intrinsics so the
// per-element arithmetic matches the scalar reference bit-for-bit; only the
// sum reductions reassociate (four lane accumulators).

namespace msgossip::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double total = hsum(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

double sum_sq_dev_avx2(const double* x, std::size_t n, double mean) {
  const __m256d m = _mm256_set1_pd(mean);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), m);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    const double d = x[i] - mean;
    total += d * d;
  }
  return total;
}

std::size_t argmin_dist2_avx2(const double* xs, const double* ys, std::size_t n,
                              double tx, double ty) {
  const __m256d vtx = _mm256_set1_pd(tx);
  const __m256d vty = _mm256_set1_pd(ty);
  __m256d best = _mm256_set1_pd(__builtin_huge_val());
  __m256d best_idx = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vtx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vty);
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const __m256d lt = _mm256_cmp_pd(d2, best, _CMP_LT_OQ);
    const __m256d idx = _mm256_set_pd(static_cast<double>(i + 3), static_cast<double>(i + 2),
                                      static_cast<double>(i + 1), static_cast<double>(i));
    best = _mm256_blendv_pd(best, d2, lt);
    best_idx = _mm256_blendv_pd(best_idx, idx, lt);
  }
  double vals[4], idxs[4];
  _mm256_storeu_pd(vals, best);
  _mm256_storeu_pd(idxs, best_idx);
  double best_d2 = __builtin_huge_val();
  std::size_t best_i = 0;
  for (int lane = 0; lane < 4; ++lane) {
    const auto li = static_cast<std::size_t>(idxs[lane]);
    if (vals[lane] < best_d2 || (vals[lane] == best_d2 && li < best_i)) {
      best_d2 = vals[lane];
      best_i = li;
    }
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - tx;
    const double dy = ys[i] - ty;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best_i = i;
    }
  }
  return best_i;
}

void collect_within_avx2(const double* xs, const double* ys, std::size_t n,
                         double px, double py, double r2, std::uint32_t base,
                         std::vector<std::uint32_t>& out) {
  const __m256d vpx = _mm256_set1_pd(px);
  const __m256d vpy = _mm256_set1_pd(py);
  const __m256d vr2 = _mm256_set1_pd(r2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vpx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vpy);
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    int mask = _mm256_movemask_pd(_mm256_cmp_pd(d2, vr2, _CMP_LE_OQ));
    while (mask) {
      const int lane = __builtin_ctz(mask);
      out.push_back(base + static_cast<std::uint32_t>(i + lane));
      mask &= mask - 1;
    }
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - px;
    const double dy = ys[i] - py;
    if (dx * dx + dy * dy <= r2) out.push_back(base + static_cast<std::uint32_t>(i));
  }
}

}  // namespace

const Ops& avx2_ops() {
  static constexpr Ops kOps{sum_avx2, sum_sq_dev_avx2, argmin_dist2_avx2, collect_within_avx2};
  return kOps;
}

}  // namespace msgossip::kernels
