#include "msgossip/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace msgossip::kernels {

namespace {

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sum_sq_dev_scalar(const double* x, std::size_t n, double mean) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - mean;
    acc += d * d;
  }
  return acc;
}

std::size_t argmin_dist2_scalar(const double* xs, const double* ys, std::size_t n,
                                double tx, double ty) {
  std::size_t best = 0;
  double best_d2 = (xs[0] - tx) * (xs[0] - tx) + (ys[0] - ty) * (ys[0] - ty);
  for (std::size_t i = 1; i < n; ++i) {
    const double dx = xs[i] - tx;
    const double dy = ys[i] - ty;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

void collect_within_scalar(const double* xs, const double* ys, std::size_t n,
                           double px, double py, double r2, std::uint32_t base,
                           std::vector<std::uint32_t>& out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - px;
    const double dy = ys[i] - py;
    if (dx * dx + dy * dy <= r2) out.push_back(base + static_cast<std::uint32_t>(i));
  }
}

constexpr Ops kScalarOps{sum_scalar, sum_sq_dev_scalar, argmin_dist2_scalar,
                         collect_within_scalar};

}  // namespace

#if defined(MSGOSSIP_HAVE_AVX2_TU)
const Ops& avx2_ops();  // defined in kernels_avx2.cpp
#endif
#if defined(MSGOSSIP_HAVE_NEON_TU)
const Ops& neon_ops();  // defined in kernels_neon.cpp
#endif

namespace {

bool backend_available(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(MSGOSSIP_HAVE_AVX2_TU)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
    case Backend::kNeon:
#if defined(MSGOSSIP_HAVE_NEON_TU)
      return true;  // NEON is baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

Backend detect_backend() {
  if (const char* env = std::getenv("MSGOSSIP_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
    if (std::strcmp(env, "avx2") == 0 && backend_available(Backend::kAvx2)) return Backend::kAvx2;
    if (std::strcmp(env, "neon") == 0 && backend_available(Backend::kNeon)) return Backend::kNeon;
  }
  if (backend_available(Backend::kAvx2)) return Backend::kAvx2;
  if (backend_available(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

Backend g_active = detect_backend();

}  // namespace

const Ops* ops_for(Backend b) {
  if (!backend_available(b)) return nullptr;
  switch (b) {
    case Backend::kScalar:
      return &kScalarOps;
#if defined(MSGOSSIP_HAVE_AVX2_TU)
    case Backend::kAvx2:
      return &avx2_ops();
#endif
#if defined(MSGOSSIP_HAVE_NEON_TU)
    case Backend::kNeon:
      return &neon_ops();
#endif
    default:
      return nullptr;
  }
}

const Ops& ops() { return *ops_for(g_active); }

Backend active_backend() { return g_active; }

bool force_backend(Backend b) {
  if (!backend_available(b)) return false;
  g_active = b;
  return true;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "?";
}

}  // namespace msgossip::kernels
