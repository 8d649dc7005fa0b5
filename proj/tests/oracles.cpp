#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

namespace {

template <typename T>
T simpson_impl(const std::function<T(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  T s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * (h / 3.0);
}

}  // namespace

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  return simpson_impl<double>(f, a, b, n);
}

cplx simpson(const std::function<cplx(double)>& f, double a, double b, int n) {
  return simpson_impl<cplx>(f, a, b, n);
}

Amplitude gaussian(double sigma, double center) {
  return [=](double w) { return cplx(std::exp(-(w - center) * (w - center) / (2 * sigma * sigma))); };
}

Amplitude chirped_gaussian(double sigma, double center, double c, double sign) {
  return [=](double w) {
    const double x = w - center;
    return std::exp(cplx(-x * x / (2 * sigma * sigma), sign * x * x / (2 * c * c)));
  };
}

Amplitude frequency_cat(double sigma, double delta) {
  return [=](double w) {
    return cplx(std::exp(-(w - delta) * (w - delta) / (2 * sigma * sigma)) +
                std::exp(-(w + delta) * (w + delta) / (2 * sigma * sigma)));
  };
}

Amplitude time_cat(double sigma, double delta_t) {
  return [=](double w) { return cplx(2.0 * std::cos(w * delta_t) * std::exp(-w * w / (2 * sigma * sigma))); };
}

Amplitude airy_closed_form(double sigma, double R, double tau_bar) {
  return [=](double w) {
    return std::exp(-w * w / (2 * sigma * sigma)) / (1.0 - R * std::exp(cplx(0.0, 2.0 * w * tau_bar)));
  };
}

Amplitude frequency_airy(double sigma, double R, double tau_bar, int terms) {
  return [=](double w) {
    double s = 0.0, r = 1.0;
    for (int k = 0; k < terms; ++k, r *= R) {
      const double c = 2.0 * k * sigma * sigma * tau_bar;
      s += r * std::exp(-(w - c) * (w - c) / (2 * sigma * sigma));
    }
    return cplx(s);
  };
}

Amplitude comb_teeth(double sigma, double omega_bar, double peak_width) {
  return [=](double w) {
    double s = 0.0;
    const int nmax = static_cast<int>(std::ceil(std::abs(w) / omega_bar)) + 40;
    const int n0 = static_cast<int>(std::round(w / omega_bar));
    for (int n = n0 - nmax; n <= n0 + nmax; ++n) {
      const double x = w - n * omega_bar;
      s += std::exp(-x * x / (2 * peak_width * peak_width));
    }
    return cplx(s * std::exp(-w * w / (2 * sigma * sigma)));
  };
}

Amplitude normalized(const Amplitude& f, double a, double b, int n) {
  const double mass = simpson(std::function<double(double)>([&](double w) { return std::norm(f(w)); }), a, b, n);
  const double k = 1.0 / std::sqrt(mass);
  return [f, k](double w) { return k * f(w); };
}

cplx cross_wigner(const Amplitude& f, const Amplitude& g, double omega, double t, double half_span, int n) {
  const cplx v = simpson(
      [&](double x) { return std::exp(cplx(0.0, 2.0 * x * t)) * f(omega - x) * std::conj(g(omega + x)); },
      -half_span, half_span, n);
  return v / M_PI;
}

double wigner(const Amplitude& f, double omega, double t, double half_span, int n) {
  return cross_wigner(f, f, omega, t, half_span, n).real();
}

cplx temporal(const Amplitude& f, double t, double a, double b, int n) {
  return simpson([&](double w) { return std::exp(cplx(0.0, w * t)) * f(w); }, a, b, n) / std::sqrt(2.0 * M_PI);
}

double grid_variance(double R, double p, bool plus, int terms) {
  long double s0 = 0, s1 = 0, s2 = 0;
  for (int n = 0; n < terms; ++n) {
    for (int m = 0; m < terms; ++m) {
      const long double w = std::pow(static_cast<long double>(R), n + m) *
                            std::exp(-static_cast<long double>((n - m) * (n - m)) * p * p);
      const long double x = plus ? n + m : n - m;
      s0 += w;
      s1 += w * x;
      s2 += w * x * x;
    }
  }
  const long double mean = s1 / s0;
  return static_cast<double>(s2 / s0 - mean * mean);
}

double mixed_two_color_qfi(double sigma, double delta, double tau) {
  const double lo = -delta - 12 * sigma, hi = delta + 12 * sigma;
  const Amplitude fp = normalized(gaussian(sigma, delta), lo, hi);
  const Amplitude fm = normalized(gaussian(sigma, -delta), lo, hi);
  const Amplitude comps[2] = {fp, fm};
  double total = 0.0;
  for (const auto& fi : comps) {
    for (const auto& fj : comps) {
      const cplx v = simpson([&](double w) { return w * std::sin(2.0 * w * tau) * fi(w) * std::conj(fj(w)); },
                             lo, hi, 40000);
      total += 4.0 * std::norm(v);
    }
  }
  return total;
}

double log_likelihood(double n0, double n1, double n2, double p0, double p1, double p2) {
  auto term = [](double n, double p) {
    if (n == 0.0) return 0.0;
    return p > 0.0 ? n * std::log(p) : -std::numeric_limits<double>::infinity();
  };
  return term(n0, p0) + term(n1, p1) + term(n2, p2);
}

std::size_t argmax(const std::vector<double>& score) {
  return static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
}

}  // namespace oracle
