#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "homsense/kernels.hpp"

using namespace homsense;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("scalar and vector paths agree") {
  if (!kernels::avx2_supported()) {
    MESSAGE("AVX2 not available; vector path not exercised");
    return;
  }
  std::mt19937_64 rng(21);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 1000u}) {
    const auto a = random_vector(rng, n, -1, 1), b = random_vector(rng, n, -1, 1);
    const auto re = random_vector(rng, n, -1, 1), im = random_vector(rng, n, -1, 1);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(kernels::scalar::dot(a.data(), b.data(), n) - kernels::avx2::dot(a.data(), b.data(), n)) <=
          1e-14 * (mag + 1));
    const auto ws = kernels::scalar::weighted_sum(a.data(), re.data(), im.data(), n);
    const auto wv = kernels::avx2::weighted_sum(a.data(), re.data(), im.data(), n);
    CHECK(std::abs(ws - wv) <= 1e-14 * (static_cast<double>(n) + 1));

    const auto w0 = random_vector(rng, n, -3, 3), t0 = random_vector(rng, n, -3, 3);
    const auto hww = random_vector(rng, n, 0.1, 2), htt = random_vector(rng, n, 0.1, 2);
    const auto hwt = random_vector(rng, n, -0.05, 0.05), peak = random_vector(rng, n, -5, 0);
    const kernels::EnvelopeBatch batch{w0.data(), t0.data(), hww.data(), hwt.data(), htt.data(), peak.data(), n};
    std::vector<double> out_s(n), out_v(n);
    kernels::scalar::envelope(batch, 0.4, -1.1, out_s.data());
    kernels::avx2::envelope(batch, 0.4, -1.1, out_v.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(out_s[i] - out_v[i]) <= 1e-13 * (1 + std::abs(out_s[i])));
  }
}

TEST_CASE("envelope matches its defining quadratic form") {
  const double w0[] = {0.5}, t0[] = {-0.25}, hww[] = {2.0}, hwt[] = {0.3}, htt[] = {1.5}, peak[] = {-1.0};
  const kernels::EnvelopeBatch batch{w0, t0, hww, hwt, htt, peak, 1};
  double out = 0.0;
  kernels::scalar::envelope(batch, 1.0, 0.75, &out);
  const double dw = 0.5, dt = 1.0;
  CHECK(out == doctest::Approx(-1.0 - (2.0 * dw * dw + 2 * 0.3 * dw * dt + 1.5 * dt * dt)).epsilon(1e-15));
}

TEST_CASE("scalar override selects the reference path") {
  kernels::force_scalar(true);
  CHECK(std::string(kernels::active_path()) == "scalar");
  const double a[] = {1, 2, 3, 4, 5}, b[] = {5, 4, 3, 2, 1};
  CHECK(kernels::dot(a, b, 5) == 35.0);
  kernels::force_scalar(false);
  if (kernels::avx2_supported()) CHECK(std::string(kernels::active_path()) != "scalar");
  CHECK(kernels::dot(a, b, 5) == 35.0);
}
