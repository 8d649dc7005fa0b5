#include "homsense/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define HOMSENSE_X86 1
#endif

namespace homsense::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

std::complex<double> weighted_sum(const double* w, const double* re, const double* im, std::size_t n) {
  double sr = 0.0, si = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sr += w[i] * re[i];
    si += w[i] * im[i];
  }
  return {sr, si};
}

void envelope(const EnvelopeBatch& b, double omega, double t, double* out) {
  for (std::size_t i = 0; i < b.n; ++i) {
    const double dw = omega - b.w0[i];
    const double dt = t - b.t0[i];
    out[i] = b.peak[i] - (b.hww[i] * dw * dw + 2.0 * b.hwt[i] * dw * dt + b.htt[i] * dt * dt);
  }
}

}  // namespace scalar

namespace avx2 {

#ifdef HOMSENSE_X86

namespace {
__attribute__((target("avx2,fma"))) inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}
}  // namespace

__attribute__((target("avx2,fma"))) double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

__attribute__((target("avx2,fma"))) std::complex<double> weighted_sum(const double* w, const double* re,
                                                                      const double* im, std::size_t n) {
  __m256d ar = _mm256_setzero_pd();
  __m256d ai = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wv = _mm256_loadu_pd(w + i);
    ar = _mm256_fmadd_pd(wv, _mm256_loadu_pd(re + i), ar);
    ai = _mm256_fmadd_pd(wv, _mm256_loadu_pd(im + i), ai);
  }
  double sr = hsum(ar), si = hsum(ai);
  for (; i < n; ++i) {
    sr += w[i] * re[i];
    si += w[i] * im[i];
  }
  return {sr, si};
}

__attribute__((target("avx2,fma"))) void envelope(const EnvelopeBatch& b, double omega, double t, double* out) {
  const __m256d om = _mm256_set1_pd(omega);
  const __m256d tv = _mm256_set1_pd(t);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= b.n; i += 4) {
    const __m256d dw = _mm256_sub_pd(om, _mm256_loadu_pd(b.w0 + i));
    const __m256d dt = _mm256_sub_pd(tv, _mm256_loadu_pd(b.t0 + i));
    __m256d q = _mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(b.hww + i), dw), dw);
    q = _mm256_fmadd_pd(_mm256_mul_pd(two, _mm256_loadu_pd(b.hwt + i)), _mm256_mul_pd(dw, dt), q);
    q = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(b.htt + i), dt), dt, q);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(b.peak + i), q));
  }
  for (; i < b.n; ++i) {
    const double dw = omega - b.w0[i];
    const double dt = t - b.t0[i];
    out[i] = b.peak[i] - (b.hww[i] * dw * dw + 2.0 * b.hwt[i] * dw * dt + b.htt[i] * dt * dt);
  }
}

#else

double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
std::complex<double> weighted_sum(const double* w, const double* re, const double* im, std::size_t n) {
  return scalar::weighted_sum(w, re, im, n);
}
void envelope(const EnvelopeBatch& b, double omega, double t, double* out) { scalar::envelope(b, omega, t, out); }

#endif

}  // namespace avx2

bool avx2_supported() {
#ifdef HOMSENSE_X86
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

namespace {

std::atomic<int> g_forced{-1};  // -1: not yet decided, 0: simd allowed, 1: scalar

bool use_simd() {
  int f = g_forced.load(std::memory_order_relaxed);
  if (f < 0) {
    const char* env = std::getenv("HOMSENSE_SIMD");
    f = (env != nullptr && std::strcmp(env, "scalar") == 0) ? 1 : 0;
    g_forced.store(f, std::memory_order_relaxed);
  }
  return f == 0 && avx2_supported();
}

}  // namespace

void force_scalar(bool on) { g_forced.store(on ? 1 : 0, std::memory_order_relaxed); }

const char* active_path() { return use_simd() ? "avx2" : "scalar"; }

double dot(const double* a, const double* b, std::size_t n) {
  return use_simd() ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

std::complex<double> weighted_sum(const double* w, const double* re, const double* im, std::size_t n) {
  return use_simd() ? avx2::weighted_sum(w, re, im, n) : scalar::weighted_sum(w, re, im, n);
}

void envelope(const EnvelopeBatch& b, double omega, double t, double* out) {
  if (use_simd()) {
    avx2::envelope(b, omega, t, out);
  } else {
    scalar::envelope(b, omega, t, out);
  }
}

}  // namespace homsense::kernels
