#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "homsense/chronocyclic.hpp"
#include "homsense/error.hpp"
#include "oracles.hpp"

using namespace homsense;

namespace {

PhaseMatchingSpec make(Family f, double sigma) {
  PhaseMatchingSpec s;
  s.family = f;
  s.sigma = sigma;
  return s;
}

PhaseMatchingSpec cat(double sigma, double delta) {
  PhaseMatchingSpec s = make(Family::FrequencyCat, sigma);
  s.delta = delta;
  return s;
}

PhaseMatchingSpec time_cat(double sigma, double delta_t) {
  PhaseMatchingSpec s = make(Family::TimeCat, sigma);
  s.delta_t = delta_t;
  return s;
}

PhaseMatchingSpec airy(double sigma, double R, double tau_bar) {
  PhaseMatchingSpec s = make(Family::AiryGrid, sigma);
  s.reflectivity = R;
  s.tau_bar = tau_bar;
  return s;
}

PhaseMatchingSpec comb(double sigma, double omega_bar, double width) {
  PhaseMatchingSpec s = make(Family::GaussianComb, sigma);
  s.omega_bar = omega_bar;
  s.peak_width = width;
  return s;
}

// Random specs over every pure family, with a flag for the looser grid tolerance.
std::vector<std::pair<PhaseMatchingSpec, bool>> random_specs(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<PhaseMatchingSpec, bool>> out;
  for (int i = 0; i < count; ++i) {
    const double sigma = 0.6 + u(rng);
    switch (i % 6) {
      case 0: {
        PhaseMatchingSpec s = make(Family::Gaussian, sigma);
        s.delta = u(rng) - 0.5;
        out.emplace_back(s, false);
        break;
      }
      case 1: {
        PhaseMatchingSpec s = make(Family::Gaussian, sigma);
        s.freq_chirp = Chirp{0.8 + u(rng), u(rng) < 0.5};
        out.emplace_back(s, false);
        break;
      }
      case 2:
        out.emplace_back(cat(sigma, 0.5 + 3 * u(rng)), false);
        break;
      case 3:
        out.emplace_back(time_cat(sigma, 0.5 + 2 * u(rng)), false);
        break;
      case 4:
        out.emplace_back(airy(sigma, 0.2 + 0.5 * u(rng), 0.5 + u(rng)), true);
        break;
      default:
        out.emplace_back(comb(2 + u(rng), 1 + u(rng), 0.25 + 0.1 * u(rng)), true);
        break;
    }
  }
  return out;
}

double trapezoid_mass(const State& st, double wlo, double whi, double tlo, double thi, int n) {
  const WignerEvaluator ev(st);
  const double hw = (whi - wlo) / n, ht = (thi - tlo) / n;
  double total = 0.0;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const double c = (i == 0 || i == n ? 0.5 : 1.0) * (j == 0 || j == n ? 0.5 : 1.0);
      total += c * ev.value(wlo + i * hw, tlo + j * ht);
    }
  }
  return total * hw * ht;
}

}  // namespace

TEST_CASE("normalized even state has unit dip at the origin") {
  const State g(make(Family::Gaussian, 1.0));
  CHECK(M_PI * wigner_analytic(g, 0, 0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(M_PI * wigner_numeric(g, 0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  for (const auto& spec : {cat(1.0, 3.0), time_cat(1.0, 2.0), comb(3.0, 1.0, 0.1)}) {
    CHECK(M_PI * wigner_analytic(State(spec), 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("cat interference fringe vanishes at a quarter period") {
  const State st(cat(1.0, 10.0));
  const double w00 = wigner_analytic(st, 0, 0);
  const double t = M_PI / 40.0;
  CHECK(std::abs(wigner_analytic(st, 0, t)) <= 1e-12 * w00);
  CHECK(std::abs(wigner_numeric(st, 0, t)) <= 1e-9 * w00);
  // Shape along t: exp(-t^2 sigma^2) cos(2 delta t).
  for (double tt : {0.01, 0.05, 0.13}) {
    CHECK(wigner_analytic(st, 0, tt) ==
          doctest::Approx(w00 * std::exp(-tt * tt) * std::cos(20 * tt)).epsilon(1e-10).scale(w00));
  }
}

TEST_CASE("gaussian peak location") {
  PhaseMatchingSpec s = make(Family::Gaussian, 1.0);
  s.delta = 2.0;
  const State st(s);
  const WignerGrid g = wigner_grid(st, {-3, 7}, {-5, 5}, 101, 101);
  std::size_t best = 0;
  for (std::size_t k = 1; k < g.values.size(); ++k) if (g.values[k] > g.values[best]) best = k;
  CHECK(g.omega_axis[best / g.time_axis.size()] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(g.time_axis[best % g.time_axis.size()]) <= 1e-12);
}

TEST_CASE("time cat interference along frequency") {
  const State st(time_cat(1.0, 10.0));
  const double period = M_PI / 10.0;
  CHECK(wigner_analytic(st, 0, 0) > 0);
  CHECK(wigner_analytic(st, period / 2, 0) < 0);
  CHECK(wigner_analytic(st, period, 0) > 0);
  CHECK(wigner_analytic(st, period / 2, 0) ==
        doctest::Approx(-wigner_analytic(st, 0, 0) * std::exp(-period * period / 4)).epsilon(1e-10));
}

TEST_CASE("cavity grid cross ridge and positive zero-frequency cut") {
  const PhaseMatchingSpec spec = airy(1.0, 0.9, 20.0);
  const State st(spec);
  const oracle::Amplitude f = oracle::normalized(oracle::airy_closed_form(1.0, 0.9, 20.0), -12, 12, 400000);
  const double ridge = wigner_analytic(st, 0.0, 20.0);
  CHECK(ridge > 0);
  CHECK(std::abs(ridge - oracle::wigner(f, 0.0, 20.0, 12.0, 400000)) <= 1e-6);
  const WignerEvaluator ev(st);
  double lowest = 0.0;
  for (double t = -10.0; t <= 600.0; t += 0.05) lowest = std::min(lowest, ev.value(0.0, t));
  CHECK(lowest >= -1e-9);
}

TEST_CASE("dirac comb sign lattice") {
  const State st(comb(50.0 / (2 * M_PI), 1.0, 0.02));
  const WignerEvaluator ev(st);
  for (int n = 0; n <= 3; ++n) {
    for (int k = 0; k <= 3; ++k) {
      const double w = ev.value(0.5 * n, M_PI * k);
      CAPTURE(n);
      CAPTURE(k);
      CHECK(((n * k) % 2 ? w < 0 : w > 0));
    }
  }
}

TEST_CASE("analytic and numeric Wigner agree on random parameters") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& [spec, grid] : random_specs(52, 24)) {
    const State st(spec);
    CAPTURE(family_name(spec.family));
    for (int k = 0; k < 10; ++k) {
      const double w = 2.5 * spec.sigma * u(rng), t = 2.5 / spec.sigma * u(rng);
      CHECK(std::abs(wigner_analytic(st, w, t) - wigner_numeric(st, w, t)) <= (grid ? 1e-6 : 1e-8));
    }
  }
}

TEST_CASE("independent quadrature of the defining integral") {
  const oracle::Amplitude fc = oracle::normalized(oracle::frequency_cat(1.0, 2.0), -14, 14);
  const oracle::Amplitude ch = oracle::normalized(oracle::chirped_gaussian(1.0, 0.0, 1.3, -1.0), -14, 14);
  PhaseMatchingSpec chirped = make(Family::Gaussian, 1.0);
  chirped.freq_chirp = Chirp{1.3, false};
  const State a(cat(1.0, 2.0)), b(chirped);
  for (double w : {-1.0, 0.0, 0.4, 2.0}) {
    for (double t : {-0.8, 0.0, 0.3, 1.1}) {
      CHECK(std::abs(wigner_analytic(a, w, t) - oracle::wigner(fc, w, t, 14.0)) <= 1e-9);
      CHECK(std::abs(wigner_analytic(b, w, t) - oracle::wigner(ch, w, t, 14.0)) <= 1e-9);
    }
  }
}

TEST_CASE("realness and dip bound") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& [spec, grid] : random_specs(54, 18)) {
    const State st(spec);
    const WignerEvaluator ev(st);
    for (int k = 0; k < 20; ++k) {
      const double w = 3 * spec.sigma * u(rng), t = 3 / spec.sigma * u(rng);
      CHECK(std::abs(ev.imaginary_residue(w, t)) < 1e-9);
      CHECK(M_PI * ev.value(w, t) <= 1 + 1e-6);
    }
  }
}

TEST_CASE("phase-space mass is one") {
  CHECK(trapezoid_mass(State(make(Family::Gaussian, 1.0)), -8, 8, -8, 8, 200) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(trapezoid_mass(State(cat(1.0, 3.0)), -11, 11, -8, 8, 300) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(trapezoid_mass(State(time_cat(0.8, 2.0)), -8, 8, -14, 14, 300) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(trapezoid_mass(State(airy(1.0, 0.3, 1.5)), -8, 8, -8, 40, 300) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("even families are symmetric in both axes") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& spec : {make(Family::Gaussian, 1.3), cat(1.0, 2.5), time_cat(0.9, 1.5), comb(3.0, 1.0, 0.2)}) {
    const State st(spec);
    const WignerEvaluator ev(st);
    for (int k = 0; k < 30; ++k) {
      const double w = 3 * u(rng), t = 3 * u(rng);
      const double v = ev.value(w, t);
      CHECK(std::abs(v - ev.value(-w, t)) <= 1e-9);
      CHECK(std::abs(v - ev.value(w, -t)) <= 1e-9);
    }
  }
  // A chirp keeps only the joint reflection.
  PhaseMatchingSpec ch = cat(1.0, 2.0);
  ch.freq_chirp = Chirp{1.5, true};
  const WignerEvaluator ev{State(ch)};
  double broken = 0.0;
  for (int k = 0; k < 30; ++k) {
    const double w = 3 * u(rng), t = 3 * u(rng);
    CHECK(std::abs(ev.value(w, t) - ev.value(-w, -t)) <= 1e-9);
    broken = std::max(broken, std::abs(ev.value(w, t) - ev.value(-w, t)));
  }
  CHECK(broken > 1e-3);
}

TEST_CASE("analytic gradient matches finite differences") {
  for (const auto& [spec, grid] : random_specs(56, 12)) {
    const State st(spec);
    const double w = 0.37 * spec.sigma, t = -0.21 / spec.sigma;
    const WignerGradient g = wigner_analytic_gradient(st, w, t);
    const double h = 1e-5;
    const double dw = (wigner_analytic(st, w + h * spec.sigma, t) - wigner_analytic(st, w - h * spec.sigma, t)) /
                      (2 * h * spec.sigma);
    const double dt = (wigner_analytic(st, w, t + h / spec.sigma) - wigner_analytic(st, w, t - h / spec.sigma)) /
                      (2 * h / spec.sigma);
    CHECK(g.value == doctest::Approx(wigner_analytic(st, w, t)).epsilon(1e-14));
    CHECK(std::abs(g.d_omega - dw) <= std::max(1e-6, 1e-4 * std::abs(dw)));
    CHECK(std::abs(g.d_t - dt) <= std::max(1e-6, 1e-4 * std::abs(dt)));
  }
}

TEST_CASE("grid construction and errors") {
  const State g(make(Family::Gaussian, 1.0));
  const WignerGrid w = wigner_grid(g, {-5, 5}, {-5, 5}, 101, 101);
  CHECK(w.omega_axis.size() == 101);
  CHECK(w.time_axis.size() == 101);
  CHECK(w.omega_axis.front() == -5.0);
  CHECK(w.omega_axis.back() == 5.0);
  CHECK(w.norm_estimate == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(w.even);
  CHECK(w.at(50, 50) == doctest::Approx(1 / M_PI).epsilon(1e-13));
  CHECK_THROWS_AS(wigner_grid(g, {-5, 5}, {-5, 5}, 15, 101), InvalidSpec);
  CHECK_THROWS_AS(wigner_grid(g, {5, -5}, {-5, 5}, 101, 101), InvalidSpec);
  CHECK_THROWS_AS(wigner_grid(g, {-0.5, 0.5}, {-0.5, 0.5}, 32, 32), GridTooCoarse);

  const WignerGrid c = wigner_grid(State(cat(1.0, 10.0)), {-15, 15}, {-5, 5}, 101, 101);
  CHECK(c.norm_estimate == doctest::Approx(1.0).epsilon(1e-3));
  double lobe = 0.0, centre_min = 0.0;
  for (std::size_t i = 0; i < c.omega_axis.size(); ++i) {
    for (std::size_t j = 0; j < c.time_axis.size(); ++j) {
      if (std::abs(c.omega_axis[i] - 10) < 0.2) lobe = std::max(lobe, c.at(i, j));
      if (std::abs(c.omega_axis[i]) < 0.2) centre_min = std::min(centre_min, c.at(i, j));
    }
  }
  CHECK(lobe > 0.1);
  CHECK(centre_min < -0.1);

  const WignerGrid n = wigner_grid(g, {-5, 5}, {-5, 5}, 31, 31, WignerMethod::Numeric);
  const WignerGrid a = wigner_grid(g, {-5, 5}, {-5, 5}, 31, 31, WignerMethod::Analytic);
  for (std::size_t k = 0; k < a.values.size(); ++k) CHECK(std::abs(a.values[k] - n.values[k]) <= 1e-10);
}

TEST_CASE("marginals reproduce intensities") {
  const State g(make(Family::Gaussian, 1.0));
  const WignerGrid w = wigner_grid(g, {-6, 6}, {-6, 6}, 121, 121);
  const Marginals m = marginals(w);
  for (std::size_t i = 0; i < w.omega_axis.size(); ++i) {
    const double x = w.omega_axis[i];
    CHECK(std::abs(m.spectral[i] - std::exp(-x * x) / std::sqrt(M_PI)) <= 1e-6);
  }
  const State c(cat(1.0, 3.0));
  const WignerGrid wc = wigner_grid(c, {-10, 10}, {-6, 6}, 161, 161);
  const Marginals mc = marginals(wc);
  const double t0 = mc.temporal[80];
  for (std::size_t j = 0; j < wc.time_axis.size(); ++j) {
    const double t = wc.time_axis[j];
    CHECK(std::abs(mc.temporal[j] - t0 * std::pow(std::cos(3 * t), 2) * std::exp(-t * t)) <= 1e-6);
    CHECK(std::abs(mc.temporal[j] - c.temporal_intensity(-t)) <= 1e-6);
  }
  for (const auto& [spec, grid] : random_specs(57, 6)) {
    const State st(spec);
    const double ws = 9 * spec.sigma;
    const WignerGrid r = wigner_grid(st, {-ws, ws}, {-12, 12}, 81, 81);
    const Marginals mr = marginals(r);
    for (double v : mr.spectral) CHECK(v >= -1e-9);
    for (double v : mr.temporal) CHECK(v >= -1e-9);
  }
}

TEST_CASE("inverse transform round trips") {
  const State g(make(Family::Gaussian, 1.0));
  const AmplitudeSamples s = inverse_transform(wigner_grid(g, {-4, 4}, {-9, 9}, 161, 301));
  for (std::size_t i = 0; i < s.omega.size(); ++i) CHECK(std::abs(s.amplitude[i] - g.spectral(s.omega[i])) <= 1e-6);

  const State tc(time_cat(1.0, 2.0));
  const AmplitudeSamples r = inverse_transform(wigner_grid(tc, {-4, 4}, {-10, 10}, 161, 401));
  const cplx phase = r.amplitude[80] / tc.spectral(0.0);
  CHECK(std::abs(std::abs(phase) - 1.0) <= 1e-4);
  for (std::size_t i = 0; i < r.omega.size(); ++i) {
    CHECK(std::abs(r.amplitude[i] - phase * tc.spectral(r.omega[i])) <= 1e-4);
  }

  CHECK_THROWS_AS(inverse_transform(wigner_grid(State(cat(1.0, 10.0)), {-15, 15}, {-5, 5}, 101, 101)), ZeroAnchor);
}
