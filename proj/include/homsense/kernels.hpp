#pragma once

#include <complex>
#include <cstddef>

// Hot inner loops with a scalar reference path and an AVX2/FMA path chosen
// at runtime. Both paths are kept callable so tests can compare them.
namespace homsense::kernels {

// Coefficients of a batch of concave quadratic log-envelopes
//   out[i] = peak[i] - (hww[i]*dw^2 + 2*hwt[i]*dw*dt + htt[i]*dt^2),
// with dw = omega - w0[i], dt = t - t0[i]. Structure-of-arrays layout.
struct EnvelopeBatch {
  const double* w0;
  const double* t0;
  const double* hww;
  const double* hwt;
  const double* htt;
  const double* peak;
  std::size_t n;
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
std::complex<double> weighted_sum(const double* w, const double* re, const double* im, std::size_t n);
void envelope(const EnvelopeBatch& batch, double omega, double t, double* out);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
std::complex<double> weighted_sum(const double* w, const double* re, const double* im, std::size_t n);
void envelope(const EnvelopeBatch& batch, double omega, double t, double* out);
}  // namespace avx2

bool avx2_supported();

// Forces the scalar path even when AVX2 is present (also set by the
// HOMSENSE_SIMD=scalar environment variable at first use).
void force_scalar(bool on);
const char* active_path();

double dot(const double* a, const double* b, std::size_t n);
std::complex<double> weighted_sum(const double* w, const double* re, const double* im, std::size_t n);
void envelope(const EnvelopeBatch& batch, double omega, double t, double* out);

}  // namespace homsense::kernels
