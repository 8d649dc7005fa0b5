#pragma once

#include "homsense/chronocyclic.hpp"
#include "homsense/statefamilies.hpp"

namespace homsense {

struct DetectionModel {
  double gamma = 0.0;  // loss beam-splitter reflectivity, in [0, 1)
};

void validate(const DetectionModel& det);

struct OutcomeProbabilities {
  double p0 = 0.0;  // no count
  double p1 = 0.0;  // single count
  double p2 = 0.0;  // coincidence
};

// Ratio (1 + 3 gamma) / (1 - gamma) entering the single-count probability.
double loss_offset(double gamma);

// Outcome probabilities as a function of the dip value D = pi W.
OutcomeProbabilities outcome_probs_from_dip(double dip, const DetectionModel& det);

// Fisher information of the three-outcome measurement in the direction pair
// (i, j), given the dip value and its partial derivatives.
double fisher_from_dip(double dip, double di, double dj, const DetectionModel& det);

enum class DerivativeMethod { Analytic, FiniteDifference };

struct DipValue {
  double value = 0.0;  // D(mu, tau) = pi W(omega = mu, t = -tau)
  double d_mu = 0.0;
  double d_tau = 0.0;
};

struct FisherMatrix {
  double f_tt = 0.0;
  double f_mm = 0.0;
  double f_mt = 0.0;
  // Set at the dip bottom (D = 1), where the second-order limit is returned.
  bool singular_point = false;
};

// HOM measurement model bound to one state; reuses the Wigner pair table.
class HomModel {
 public:
  explicit HomModel(const State& state);

  const State& state() const { return state_; }

  DipValue dip(double mu, double tau, DerivativeMethod method = DerivativeMethod::Analytic) const;
  double coincidence(double mu, double tau) const;
  OutcomeProbabilities outcomes(double mu, double tau, const DetectionModel& det) const;
  FisherMatrix fisher(double mu, double tau, const DetectionModel& det,
                      DerivativeMethod method = DerivativeMethod::Analytic) const;

  // Finite-difference scales: time-like and frequency-like widths of the state.
  double tau_scale() const { return tau_scale_; }
  double mu_scale() const { return mu_scale_; }

 private:
  State state_;
  WignerEvaluator wigner_;
  double tau_scale_ = 1.0;
  double mu_scale_ = 1.0;
};

double coincidence_prob(const State& state, double mu, double tau);
OutcomeProbabilities outcome_probs(const State& state, double mu, double tau, const DetectionModel& det);
FisherMatrix fisher_matrix(const State& state, double mu, double tau, const DetectionModel& det,
                           DerivativeMethod method = DerivativeMethod::Analytic);

// Closed-form delay information of the frequency cat (interference term
// only); continuous extension at tau = 0.
double fisher_tau_analytic(const PhaseMatchingSpec& spec, double tau, const DetectionModel& det);
// Closed-form frequency information of the frequency cat with the full
// normalization; continuous extension at mu = 0.
double fisher_mu_analytic(const PhaseMatchingSpec& spec, double mu, const DetectionModel& det);

}  // namespace homsense
