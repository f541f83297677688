#if defined(__aarch64__) || defined(__ARM_NEON)

#include <arm_neon.h>

#include "msgossip/kernels.hpp"

// NEON variants (2-lane f64). Same layout as the AVX2 file: explicit mul/add
// for the distance predicates, reassociated reductions for the sums.

namespace msgossip::kernels {

namespace {

double sum_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) total += x[i];
  return total;
}

double sum_sq_dev_neon(const double* x, std::size_t n, double mean) {
  const float64x2_t m = vdupq_n_f64(mean);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), m);
    acc = vaddq_f64(acc, vmulq_f64(d, d));
  }
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) {
    const double d = x[i] - mean;
    total += d * d;
  }
  return total;
}

std::size_t argmin_dist2_neon(const double* xs, const double* ys, std::size_t n,
                              double tx, double ty) {
  const float64x2_t vtx = vdupq_n_f64(tx);
  const float64x2_t vty = vdupq_n_f64(ty);
  double best_d2 = __builtin_huge_val();
  std::size_t best_i = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vtx);
    const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vty);
    const float64x2_t d2 = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
    const double d0 = vgetq_lane_f64(d2, 0);
    const double d1 = vgetq_lane_f64(d2, 1);
    if (d0 < best_d2) {
      best_d2 = d0;
      best_i = i;
    }
    if (d1 < best_d2) {
      best_d2 = d1;
      best_i = i + 1;
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

void collect_within_neon(const double* xs, const double* ys, std::size_t n,
                         double px, double py, double r2, std::uint32_t base,
                         std::vector<std::uint32_t>& out) {
  const float64x2_t vpx = vdupq_n_f64(px);
  const float64x2_t vpy = vdupq_n_f64(py);
  const float64x2_t vr2 = vdupq_n_f64(r2);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vpx);
    const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vpy);
    const float64x2_t d2 = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
    const uint64x2_t le = vcleq_f64(d2, vr2);
    if (vgetq_lane_u64(le, 0)) out.push_back(base + static_cast<std::uint32_t>(i));
    if (vgetq_lane_u64(le, 1)) out.push_back(base + static_cast<std::uint32_t>(i + 1));
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - px;
    const double dy = ys[i] - py;
    if (dx * dx + dy * dy <= r2) out.push_back(base + static_cast<std::uint32_t>(i));
  }
}

}  // namespace

const Ops& neon_ops() {
  static constexpr Ops kOps{sum_neon, sum_sq_dev_neon, argmin_dist2_neon, collect_within_neon};
  return kOps;
}

}  // namespace msgossip::kernels

#endif  // __aarch64__ || __ARM_NEON
