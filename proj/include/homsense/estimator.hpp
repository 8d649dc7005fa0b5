#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "homsense/hommodel.hpp"

namespace homsense {

struct TrialCounts {
  std::uint64_t n0 = 0;
  std::uint64_t n1 = 0;
  std::uint64_t n2 = 0;
  std::uint64_t total() const { return n0 + n1 + n2; }
};

enum class Axis { Tau, Mu };
enum class Target { Tau, Mu, Joint };

struct SearchWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct EstimationResult {
  double estimate = 0.0;        // tau-hat or mu-hat; tau-hat for joint
  double estimate_mu = 0.0;     // mu-hat for joint (or the fixed mu)
  double dip_value_hat = 0.0;   // estimated pi W
  double std_error = 0.0;       // delta-method spread from the observed counts
  double cr_std_error = 0.0;    // 1 / sqrt(N F) at the estimate
  std::optional<double> gamma_hat;
  SearchWindow window;
  bool converged = false;
};

// 64-bit stream seed derived from (seed, index) with splitmix64 mixing.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

// Multinomial draw of n_repeats outcomes (std::mt19937_64 seeded by seed).
TrialCounts simulate_trials(const HomModel& model, double mu, double tau, const DetectionModel& det,
                            std::uint64_t n_repeats, std::uint64_t seed);
TrialCounts simulate_trials(const State& state, double mu, double tau, const DetectionModel& det,
                            std::uint64_t n_repeats, std::uint64_t seed);

// Dip value maximizing the multinomial likelihood:
//   (n1 - n2 (1 + 3 gamma) / (1 - gamma)) / (n1 + n2).
// Throws NoRoot when n1 + n2 = 0.
double dip_value_estimate(const TrialCounts& counts, const DetectionModel& det);

// Window between the extrema of the dip profile adjacent to center along the
// axis, clipped to center +- half_width (default: a scale-based width).
SearchWindow monotone_window(const HomModel& model, Axis axis, double center, double other,
                             std::optional<double> half_width = std::nullopt);
// Preset: +- half fringe for the cat and cavity families, +- 2/sigma for the
// Gaussian, always clipped to the adjacent extrema.
SearchWindow preset_window(const HomModel& model, Axis axis, double center, double other = 0.0);

// Maximum-likelihood estimate. For Tau (Mu) the other coordinate is held at
// `other`; the window must hold a monotone piece of the dip profile. Joint
// runs coordinate descent on (D(mu, tau) - D_hat)^2 starting at the window
// centers. Throws NoRoot / NonMonotoneWindow.
EstimationResult mle_estimate(const TrialCounts& counts, const HomModel& model, const DetectionModel& det,
                              SearchWindow window, Target which, double other = 0.0,
                              std::optional<SearchWindow> mu_window = std::nullopt);

double estimate_gamma(const TrialCounts& counts);

struct PrecisionPoint {
  double alpha = 0.0;
  double delta = std::numeric_limits<double>::infinity();  // +inf where the slope vanishes
};

struct PrecisionProfile {
  std::vector<PrecisionPoint> curve;
  double best_alpha = 0.0;
  double best_delta = std::numeric_limits<double>::infinity();
};

// Single-shot precision sqrt(P2 (1 - P2)) / |dP2/d alpha| over lo..hi.
PrecisionProfile precision_profile(const HomModel& model, Axis axis, double lo, double hi, std::size_t count,
                                   const DetectionModel& det, double other = 0.0);

// Delay maximizing F_tt on tau > 0 subject to N min(p1, p2) >= min_counts.
double optimal_operating_tau(const HomModel& model, const DetectionModel& det, std::uint64_t n_repeats,
                             double min_counts = 100.0);

struct CrExperiment {
  std::size_t id = 0;
  double tau_hat = 0.0;
  bool converged = false;
};

struct CrStudyReport {
  double true_tau = 0.0;
  double true_mu = 0.0;
  double gamma = 0.0;
  std::uint64_t n_repeats = 0;
  std::size_t n_experiments = 0;
  std::uint64_t seed = 0;
  SearchWindow window;
  double fisher = 0.0;         // F_tt at the true point
  double mean_tau_hat = 0.0;
  double empirical_var = 0.0;  // over converged experiments
  double ratio = 0.0;          // empirical_var * N * F
  double ratio_error = 0.0;    // bootstrap standard error of the ratio
  double failure_rate = 0.0;
  std::vector<CrExperiment> experiments;
};

CrStudyReport cr_saturation_study(const HomModel& model, double true_tau, double true_mu, const DetectionModel& det,
                                  std::uint64_t n_repeats, std::size_t n_experiments, std::uint64_t seed,
                                  std::optional<SearchWindow> window = std::nullopt);

}  // namespace homsense
