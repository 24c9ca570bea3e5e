#include "promptpg/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>

#include "promptpg/errors.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define PROMPTPG_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#endif

#if defined(__aarch64__)
#define PROMPTPG_HAVE_NEON_BUILD 1
#include <arm_neon.h>
#endif

namespace promptpg::kernels {

namespace {

struct Ops {
  void (*axpy)(double, std::span<const double>, std::span<double>);
  void (*scale)(std::span<double>, double);
  double (*sum)(std::span<const double>);
  void (*clipped_shift)(std::span<const double>, double, std::span<double>);
  double (*clipped_shift_sum)(std::span<const double>, double);
};

void axpy_scalar(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

void scale_scalar(std::span<double> x, double a) {
  for (double& v : x) v *= a;
}

double sum_scalar(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

void clipped_shift_scalar(std::span<const double> z, double v,
                          std::span<double> out) {
  for (std::size_t i = 0; i < z.size(); ++i)
    out[i] = std::min(1.0, std::max(0.0, z[i] - v));
}

double clipped_shift_sum_scalar(std::span<const double> z, double v) {
  double s = 0.0;
  for (double zi : z) s += std::min(1.0, std::max(0.0, zi - v));
  return s;
}

constexpr Ops kScalarOps = {axpy_scalar, scale_scalar, sum_scalar,
                            clipped_shift_scalar, clipped_shift_sum_scalar};

#if PROMPTPG_HAVE_AVX2_BUILD

// Plain mul+add (no FMA) so lanes round exactly like the scalar loop and
// elementwise results stay bitwise identical across backends.
__attribute__((target("avx2"))) void axpy_avx2(double a,
                                               std::span<const double> x,
                                               std::span<double> y) {
  const std::size_t n = y.size();
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y.data() + i);
    __m256d vx = _mm256_loadu_pd(x.data() + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
    _mm256_storeu_pd(y.data() + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2"))) void scale_avx2(std::span<double> x, double a) {
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x.data() + i);
    _mm256_storeu_pd(x.data() + i, _mm256_mul_pd(vx, va));
  }
  for (; i < n; ++i) x[i] *= a;
}

__attribute__((target("avx2"))) double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

__attribute__((target("avx2"))) double sum_avx2(std::span<const double> x) {
  const std::size_t n = x.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x.data() + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

__attribute__((target("avx2"))) void clipped_shift_avx2(
    std::span<const double> z, double v, std::span<double> out) {
  const std::size_t n = z.size();
  const __m256d vv = _mm256_set1_pd(v);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_sub_pd(_mm256_loadu_pd(z.data() + i), vv);
    t = _mm256_min_pd(one, _mm256_max_pd(zero, t));
    _mm256_storeu_pd(out.data() + i, t);
  }
  for (; i < n; ++i) out[i] = std::min(1.0, std::max(0.0, z[i] - v));
}

__attribute__((target("avx2"))) double clipped_shift_sum_avx2(
    std::span<const double> z, double v) {
  const std::size_t n = z.size();
  const __m256d vv = _mm256_set1_pd(v);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_sub_pd(_mm256_loadu_pd(z.data() + i), vv);
    acc = _mm256_add_pd(acc, _mm256_min_pd(one, _mm256_max_pd(zero, t)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::min(1.0, std::max(0.0, z[i] - v));
  return s;
}

constexpr Ops kAvx2Ops = {axpy_avx2, scale_avx2, sum_avx2, clipped_shift_avx2,
                          clipped_shift_sum_avx2};

#endif  // PROMPTPG_HAVE_AVX2_BUILD

#if PROMPTPG_HAVE_NEON_BUILD

void axpy_neon(double a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = y.size();
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y.data() + i);
    float64x2_t vx = vld1q_f64(x.data() + i);
    vy = vaddq_f64(vy, vmulq_f64(va, vx));
    vst1q_f64(y.data() + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(std::span<double> x, double a) {
  const std::size_t n = x.size();
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(x.data() + i, vmulq_f64(vld1q_f64(x.data() + i), va));
  for (; i < n; ++i) x[i] *= a;
}

double sum_neon(std::span<const double> x) {
  const std::size_t n = x.size();
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x.data() + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

void clipped_shift_neon(std::span<const double> z, double v,
                        std::span<double> out) {
  const std::size_t n = z.size();
  const float64x2_t vv = vdupq_n_f64(v);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t t = vsubq_f64(vld1q_f64(z.data() + i), vv);
    vst1q_f64(out.data() + i, vminq_f64(one, vmaxq_f64(zero, t)));
  }
  for (; i < n; ++i) out[i] = std::min(1.0, std::max(0.0, z[i] - v));
}

double clipped_shift_sum_neon(std::span<const double> z, double v) {
  const std::size_t n = z.size();
  const float64x2_t vv = vdupq_n_f64(v);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t one = vdupq_n_f64(1.0);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t t = vsubq_f64(vld1q_f64(z.data() + i), vv);
    acc = vaddq_f64(acc, vminq_f64(one, vmaxq_f64(zero, t)));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += std::min(1.0, std::max(0.0, z[i] - v));
  return s;
}

constexpr Ops kNeonOps = {axpy_neon, scale_neon, sum_neon, clipped_shift_neon,
                          clipped_shift_sum_neon};

#endif  // PROMPTPG_HAVE_NEON_BUILD

std::atomic<const Ops*> g_ops{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};
std::once_flag g_init_flag;

const Ops* ops_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &kScalarOps;
    case Backend::avx2:
#if PROMPTPG_HAVE_AVX2_BUILD
      return &kAvx2Ops;
#else
      return nullptr;
#endif
    case Backend::neon:
#if PROMPTPG_HAVE_NEON_BUILD
      return &kNeonOps;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const Ops& current() {
  const Ops* p = g_ops.load(std::memory_order_acquire);
  if (p == nullptr) {
    std::call_once(g_init_flag, [] { select_from_env(); });
    p = g_ops.load(std::memory_order_acquire);
  }
  return *p;
}

}  // namespace

const char* name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "?";
}

bool is_available(Backend b) {
  if (b == Backend::scalar) return true;
#if PROMPTPG_HAVE_AVX2_BUILD
  if (b == Backend::avx2) return __builtin_cpu_supports("avx2") != 0;
#endif
#if PROMPTPG_HAVE_NEON_BUILD
  if (b == Backend::neon) return true;
#endif
  return false;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon})
    if (is_available(b)) out.push_back(b);
  return out;
}

Backend active_backend() {
  current();
  return g_backend.load(std::memory_order_acquire);
}

void select_backend(Backend b) {
  if (!is_available(b))
    throw InvalidInput(std::string("kernel backend not available: ") + name(b));
  g_backend.store(b, std::memory_order_release);
  g_ops.store(ops_for(b), std::memory_order_release);
}

void select_from_env() {
  const char* env = std::getenv("PROMPTPG_KERNELS");
  if (env != nullptr && *env != '\0') {
    const std::string want(env);
    for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
      if (want == name(b)) {
        select_backend(b);
        return;
      }
    }
    throw ConfigError("PROMPTPG_KERNELS must be scalar, avx2 or neon, got: " +
                      want);
  }
  Backend best = Backend::scalar;
  if (is_available(Backend::avx2)) best = Backend::avx2;
  if (is_available(Backend::neon)) best = Backend::neon;
  select_backend(best);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw InvalidInput("axpy: size mismatch");
  current().axpy(a, x, y);
}

void scale(std::span<double> x, double a) { current().scale(x, a); }

double sum(std::span<const double> x) { return current().sum(x); }

void clipped_shift(std::span<const double> z, double v, std::span<double> out) {
  if (z.size() != out.size()) throw InvalidInput("clipped_shift: size mismatch");
  current().clipped_shift(z, v, out);
}

double clipped_shift_sum(std::span<const double> z, double v) {
  return current().clipped_shift_sum(z, v);
}

}  // namespace promptpg::kernels
