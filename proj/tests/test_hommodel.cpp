#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "homsense/error.hpp"
#include "homsense/hommodel.hpp"
#include "homsense/qfi.hpp"

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

std::vector<PhaseMatchingSpec> all_families() {
  PhaseMatchingSpec tc = make(Family::TimeCat, 0.9);
  tc.delta_t = 2.0;
  PhaseMatchingSpec airy = make(Family::AiryGrid, 1.0);
  airy.reflectivity = 0.6;
  airy.tau_bar = 1.2;
  PhaseMatchingSpec comb = make(Family::GaussianComb, 3.0);
  comb.omega_bar = 1.0;
  comb.peak_width = 0.2;
  PhaseMatchingSpec chirped = make(Family::Gaussian, 1.1);
  chirped.freq_chirp = Chirp{1.5, false};
  PhaseMatchingSpec fag = make(Family::FrequencyAiryGrid, 1.0);
  fag.reflectivity = 0.4;
  fag.tau_bar = 1.0;
  return {make(Family::Gaussian, 1.0), cat(1.0, 3.0), tc, airy, comb, chirped, fag};
}

// Three-outcome Fisher information written directly from the probabilities.
double multinomial_fisher(double dip, double di, double dj, double gamma) {
  const double k = 0.5 * (1 - gamma) * (1 - gamma);
  const double p2 = k * (1 - dip), p1 = 1 - gamma * gamma - p2;
  const double dpi = -k * di, dpj = -k * dj;
  return dpi * dpj * (1 / p1 + 1 / p2);
}

}  // namespace

TEST_CASE("detector model validation") {
  CHECK_NOTHROW(validate(DetectionModel{0.0}));
  CHECK_NOTHROW(validate(DetectionModel{0.99}));
  CHECK_THROWS_AS(validate(DetectionModel{1.0}), InvalidSpec);
  CHECK_THROWS_AS(validate(DetectionModel{-0.1}), InvalidSpec);
  CHECK(loss_offset(0.0) == 1.0);
  CHECK(loss_offset(0.3) == doctest::Approx(1.9 / 0.7).epsilon(1e-15));
}

TEST_CASE("coincidence probability") {
  const State g(make(Family::Gaussian, 1.0));
  CHECK(coincidence_prob(g, 0, 0) == 0.0);
  CHECK(coincidence_prob(g, 0, 50) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(coincidence_prob(g, 0.3, 0.4) == doctest::Approx(0.5 * (1 - std::exp(-0.09 - 0.16))).epsilon(1e-13));
  const State c(cat(1.0, 10.0));
  const double tau = M_PI / 20;
  CHECK(coincidence_prob(c, 0, tau) == doctest::Approx(0.5 * (1 + std::exp(-tau * tau))).epsilon(1e-12));
  CHECK(coincidence_prob(c, 0, tau) > 0.5);
}

TEST_CASE("outcome probabilities") {
  const State g(make(Family::Gaussian, 1.0));
  const OutcomeProbabilities lossy = outcome_probs(g, 0.2, 0.7, DetectionModel{0.3});
  CHECK(lossy.p0 == 0.3 * 0.3);
  const OutcomeProbabilities dip = outcome_probs(g, 0, 0, DetectionModel{0.0});
  CHECK(dip.p0 == 0.0);
  CHECK(dip.p1 == 1.0);
  CHECK(dip.p2 == 0.0);
  const OutcomeProbabilities far = outcome_probs(g, 0, 60, DetectionModel{0.0});
  CHECK(far.p1 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(far.p2 == doctest::Approx(0.5).epsilon(1e-15));
  const OutcomeProbabilities fd = outcome_probs_from_dip(0.25, DetectionModel{0.4});
  CHECK(fd.p2 == doctest::Approx(0.5 * 0.36 * 0.75).epsilon(1e-15));
  CHECK(fd.p1 == doctest::Approx(1 - 0.16 - 0.5 * 0.36 * 0.75).epsilon(1e-15));
}

TEST_CASE("fisher information from the dip matches the multinomial form") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double dip = 2 * u(rng) - 1, di = 3 * u(rng) - 1.5, dj = 3 * u(rng) - 1.5, gamma = 0.9 * u(rng);
    CHECK(fisher_from_dip(dip, di, dj, DetectionModel{gamma}) ==
          doctest::Approx(multinomial_fisher(dip, di, dj, gamma)).epsilon(1e-12));
  }
}

TEST_CASE("delay information limits at the dip") {
  const DetectionModel ideal;
  const HomModel g{State(make(Family::Gaussian, 1.0))};
  CHECK(g.fisher(0, 1e-4, ideal).f_tt == doctest::Approx(2.0).epsilon(1e-6));
  const HomModel c{State(cat(1.0, 10.0))};
  CHECK(c.fisher(0, 1e-5, ideal).f_tt == doctest::Approx(402.0).epsilon(1e-6));
  const FisherMatrix origin = c.fisher(0, 0, ideal);
  CHECK(origin.singular_point);
  CHECK(origin.f_tt == doctest::Approx(402.0).epsilon(1e-6));
  CHECK_FALSE(c.fisher(0, 0.05, ideal).singular_point);
  const double lossy = c.fisher(0, 1e-5, DetectionModel{0.3}).f_tt;
  CHECK(lossy < 402.0);
  for (double tau = 0.002; tau < 0.3; tau += 0.01) {
    CHECK(c.fisher(0, tau, DetectionModel{0.3}).f_tt < c.fisher(0, tau, ideal).f_tt);
  }
}

TEST_CASE("closed-form cat delay information") {
  for (double d : {5.0, 10.0}) {
    const PhaseMatchingSpec s = cat(1.0, d);
    const State st(s);
    for (double gamma : {0.0, 0.2, 0.5}) {
      const DetectionModel det{gamma};
      for (double tau : {0.013, 0.05, M_PI / (4 * d), 0.21, 0.6}) {
        CHECK(fisher_tau_analytic(s, tau, det) ==
              doctest::Approx(fisher_matrix(st, 0, tau, det).f_tt).epsilon(1e-8));
      }
      CHECK(fisher_tau_analytic(s, 0, det) ==
            doctest::Approx(2 * (1 - gamma) * (1 - gamma) * (1 + 2 * d * d)).epsilon(1e-12));
    }
    CHECK(fisher_tau_analytic(s, 0.1, DetectionModel{0.999999}) < 1e-9);
  }
  CHECK_THROWS_AS(fisher_tau_analytic(make(Family::Gaussian, 1.0), 0.1, DetectionModel{}), InvalidSpec);
}

TEST_CASE("closed-form cat frequency information") {
  for (double d : {1.0, 2.0, 10.0}) {
    const PhaseMatchingSpec s = cat(1.0, d);
    const State st(s);
    for (double gamma : {0.0, 0.3}) {
      const DetectionModel det{gamma};
      for (double mu : {0.05, 0.3, 0.7071, 1.4}) {
        CHECK(fisher_mu_analytic(s, mu, det) ==
              doctest::Approx(fisher_matrix(st, mu, 0, det, DerivativeMethod::FiniteDifference).f_mm).epsilon(1e-7));
      }
    }
    // Continuous extension at the symmetric point equals the canonical frequency information.
    CHECK(fisher_mu_analytic(s, 0, DetectionModel{}) == doctest::Approx(qfi_numeric(st).f_mm).epsilon(1e-8));
    CHECK(fisher_mu_analytic(s, 1e-5, DetectionModel{}) ==
          doctest::Approx(fisher_mu_analytic(s, 0, DetectionModel{})).epsilon(1e-6));
  }
  CHECK_THROWS_AS(fisher_mu_analytic(make(Family::Gaussian, 1.0), 0.1, DetectionModel{}), InvalidSpec);
}

TEST_CASE("analytic and finite-difference derivatives agree for every family") {
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const PhaseMatchingSpec& s : all_families()) {
    CAPTURE(family_name(s.family));
    const HomModel m{State(s)};
    for (int k = 0; k < 15; ++k) {
      const double mu = 1.5 * m.mu_scale() * u(rng), tau = 1.5 * m.tau_scale() * u(rng);
      const DipValue a = m.dip(mu, tau, DerivativeMethod::Analytic);
      const DipValue f = m.dip(mu, tau, DerivativeMethod::FiniteDifference);
      CHECK(a.value == f.value);
      CHECK(std::abs(a.d_mu - f.d_mu) <= std::max(1e-6, 1e-4 * std::abs(a.d_mu)));
      CHECK(std::abs(a.d_tau - f.d_tau) <= std::max(1e-6, 1e-4 * std::abs(a.d_tau)));
    }
  }
}

TEST_CASE("dip value follows the Wigner function at reversed time") {
  PhaseMatchingSpec airy = make(Family::AiryGrid, 1.0);
  airy.reflectivity = 0.5;
  airy.tau_bar = 1.0;
  const State st(airy);
  const HomModel m(st);
  for (double tau : {-2.0, -0.5, 0.7, 2.0}) {
    CHECK(m.dip(0.3, tau).value == doctest::Approx(M_PI * wigner_analytic(st, 0.3, -tau)).epsilon(1e-14));
  }
  CHECK(m.coincidence(0.3, 0.7) == doctest::Approx(coincidence_prob(st, 0.3, 0.7)).epsilon(1e-15));
}

TEST_CASE("probability simplex and loss scaling") {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const PhaseMatchingSpec& s : all_families()) {
    const HomModel m{State(s)};
    for (int k = 0; k < 20; ++k) {
      const double mu = 2 * m.mu_scale() * u(rng), tau = 2 * m.tau_scale() * u(rng);
      const FisherMatrix f0 = m.fisher(mu, tau, DetectionModel{});
      for (double gamma : {0.05, 0.3, 0.6, 0.9}) {
        const DetectionModel det{gamma};
        const OutcomeProbabilities p = m.outcomes(mu, tau, det);
        CHECK(std::abs(p.p0 + p.p1 + p.p2 - 1) <= 1e-12);
        for (double v : {p.p0, p.p1, p.p2}) CHECK((v >= 0 && v <= 1));
        CHECK(p.p0 == gamma * gamma);
        const FisherMatrix f = m.fisher(mu, tau, det);
        CHECK(f.f_tt <= f0.f_tt);
        CHECK(f.f_mm <= f0.f_mm);
        CHECK(std::abs(f.f_mt) <= std::abs(f0.f_mt));
      }
    }
  }
}

TEST_CASE("information reaches four times the variance only for even states") {
  for (const PhaseMatchingSpec& s : all_families()) {
    CAPTURE(family_name(s.family));
    const State st(s);
    const HomModel m(st);
    const PhaseSpaceMoments mom = phase_space_moments(st);
    const double rt = m.fisher(mom.mean_omega * 0, 1e-4 / std::sqrt(mom.var_omega), DetectionModel{}).f_tt /
                      (4 * mom.var_omega);
    if (st.even()) {
      CHECK(rt == doctest::Approx(1.0).epsilon(1e-3));
      const double rm = m.fisher(1e-4 / std::sqrt(mom.var_t), 0, DetectionModel{}).f_mm / (4 * mom.var_t);
      CHECK(rm == doctest::Approx(1.0).epsilon(1e-3));
    } else if (s.family == Family::AiryGrid || s.family == Family::FrequencyAiryGrid) {
      CHECK(rt < 0.999);
    }
  }
}

TEST_CASE("model and free functions agree") {
  const State st(cat(1.0, 2.0));
  const HomModel m(st);
  const DetectionModel det{0.2};
  const FisherMatrix a = m.fisher(0.1, 0.2, det), b = fisher_matrix(st, 0.1, 0.2, det);
  CHECK(a.f_tt == b.f_tt);
  CHECK(a.f_mm == b.f_mm);
  CHECK(a.f_mt == b.f_mt);
  CHECK(m.outcomes(0.1, 0.2, det).p2 == outcome_probs(st, 0.1, 0.2, det).p2);
  CHECK(m.tau_scale() > 0);
  CHECK(m.mu_scale() > 0);
}
