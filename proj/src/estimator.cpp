#include "homsense/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "homsense/error.hpp"
#include "homsense/parallel.hpp"

namespace homsense {

namespace {

constexpr std::size_t kProfileSamples = 257;
constexpr double kRootTol = 1e-12;      // relative to the window width
constexpr double kEdgeTol = 1e-12;      // dip-value slack at the window edges
constexpr double kFlatSlope = 1e-12;    // slope x scale below which the profile is flat

double axis_scale(const HomModel& model, Axis axis) {
  return axis == Axis::Tau ? model.tau_scale() : model.mu_scale();
}

// Dip value and slope along one axis with the other coordinate fixed.
std::pair<double, double> profile(const HomModel& model, Axis axis, double x, double other) {
  const DipValue d = axis == Axis::Tau ? model.dip(other, x) : model.dip(x, other);
  return {d.value, axis == Axis::Tau ? d.d_tau : d.d_mu};
}

double slope_sign(double s, double scale) {
  if (std::abs(s) * scale < kFlatSlope) return 0.0;
  return s > 0.0 ? 1.0 : -1.0;
}

// First point from center towards center + dir * width where the slope
// changes sign; center + dir * width when it never does.
double adjacent_extremum(const HomModel& model, Axis axis, double center, double other, double width, double dir) {
  const double scale = axis_scale(model, axis);
  const int steps = 512;
  const double h = width / steps;
  double ref = slope_sign(profile(model, axis, center, other).second, scale);
  double prev = center;
  for (int k = 1; k <= steps; ++k) {
    const double x = center + dir * h * k;
    const double s = slope_sign(profile(model, axis, x, other).second, scale);
    if (ref == 0.0) {
      if (s == 0.0) return prev;  // flat stretch starting at center
      ref = s;
      prev = x;
      continue;
    }
    if (s != ref) {
      if (s == 0.0) return x;
      auto slope = [&](double y) { return profile(model, axis, y, other).second; };
      return find_root(slope, prev, x, kRootTol * h);
    }
    prev = x;
  }
  return center + dir * width;
}

struct Sampled {
  std::vector<double> x;
  std::vector<double> d;
};

Sampled sample_profile(const HomModel& model, Axis axis, SearchWindow w, double other) {
  Sampled s;
  s.x.resize(kProfileSamples);
  s.d.resize(kProfileSamples);
  for (std::size_t i = 0; i < kProfileSamples; ++i) {
    s.x[i] = w.lo + (w.hi - w.lo) * static_cast<double>(i) / static_cast<double>(kProfileSamples - 1);
    s.d[i] = profile(model, axis, s.x[i], other).first;
  }
  return s;
}

// Solves D = target on a monotone window; edge values within kEdgeTol are
// accepted as the edge itself.
double invert_monotone(const HomModel& model, Axis axis, SearchWindow w, double other, double target) {
  const Sampled s = sample_profile(model, axis, w, other);
  bool up = true, down = true;
  for (std::size_t i = 1; i < s.d.size(); ++i) {
    const double step = s.d[i] - s.d[i - 1];
    if (step < -1e-14) up = false;
    if (step > 1e-14) down = false;
  }
  if (!up && !down) throw NonMonotoneWindow("dip profile is not monotone on the search window");
  const double lo_v = s.d.front(), hi_v = s.d.back();
  const double vmin = std::min(lo_v, hi_v), vmax = std::max(lo_v, hi_v);
  if (target > vmax) {
    if (target - vmax <= kEdgeTol) return hi_v > lo_v ? w.hi : w.lo;
    throw NoRoot("estimated dip value lies above the profile range on the window");
  }
  if (target < vmin) {
    if (vmin - target <= kEdgeTol) return hi_v < lo_v ? w.hi : w.lo;
    throw NoRoot("estimated dip value lies below the profile range on the window");
  }
  auto f = [&](double x) { return profile(model, axis, x, other).first - target; };
  return find_root(f, w.lo, w.hi, kRootTol * (w.hi - w.lo));
}

// Point on the window where D is closest to target, preferring the level
// crossing nearest to start.
double closest_level(const HomModel& model, Axis axis, SearchWindow w, double other, double target, double start) {
  const Sampled s = sample_profile(model, axis, w, other);
  double best = start, best_gap = std::abs(profile(model, axis, start, other).first - target);
  bool crossing = false;
  for (std::size_t i = 1; i < s.d.size(); ++i) {
    const double a = s.d[i - 1] - target, b = s.d[i] - target;
    if (std::signbit(a) == std::signbit(b) && a != 0.0) continue;
    auto f = [&](double x) { return profile(model, axis, x, other).first - target; };
    const double root = find_root(f, s.x[i - 1], s.x[i], kRootTol * (w.hi - w.lo));
    if (!crossing || std::abs(root - start) < std::abs(best - start)) best = root;
    crossing = true;
  }
  if (crossing) return best;
  for (std::size_t i = 0; i < s.d.size(); ++i) {
    const double gap = std::abs(s.d[i] - target);
    if (gap < best_gap) {
      best_gap = gap;
      best = s.x[i];
    }
  }
  return best;
}

void fill_errors(EstimationResult& r, const TrialCounts& counts, const HomModel& model, const DetectionModel& det,
                 Axis axis) {
  const double m = static_cast<double>(counts.n1 + counts.n2);
  const double p_hat = static_cast<double>(counts.n1) / m;
  const double c = loss_offset(det.gamma);
  const double sd_dip = (1.0 + c) * std::sqrt(p_hat * (1.0 - p_hat) / m);
  const DipValue d = model.dip(r.estimate_mu, r.estimate);
  const double slope = axis == Axis::Tau ? d.d_tau : d.d_mu;
  r.std_error = slope != 0.0 ? sd_dip / std::abs(slope) : std::numeric_limits<double>::infinity();
  const FisherMatrix f = model.fisher(r.estimate_mu, r.estimate, det);
  const double info = axis == Axis::Tau ? f.f_tt : f.f_mm;
  r.cr_std_error = info > 0.0 ? 1.0 / std::sqrt(static_cast<double>(counts.total()) * info)
                              : std::numeric_limits<double>::infinity();
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TrialCounts simulate_trials(const HomModel& model, double mu, double tau, const DetectionModel& det,
                            std::uint64_t n_repeats, std::uint64_t seed) {
  if (n_repeats < 1) throw InvalidSpec("n_repeats must be at least 1");
  const OutcomeProbabilities p = model.outcomes(mu, tau, det);
  std::mt19937_64 rng(seed);
  TrialCounts c;
  if (p.p0 > 0.0) c.n0 = std::binomial_distribution<std::uint64_t>(n_repeats, p.p0)(rng);
  const std::uint64_t rest = n_repeats - c.n0;
  const double q2 = std::clamp(p.p2 / (1.0 - p.p0), 0.0, 1.0);
  if (rest > 0 && q2 > 0.0) c.n2 = std::binomial_distribution<std::uint64_t>(rest, q2)(rng);
  c.n1 = rest - c.n2;
  return c;
}

TrialCounts simulate_trials(const State& state, double mu, double tau, const DetectionModel& det,
                            std::uint64_t n_repeats, std::uint64_t seed) {
  return simulate_trials(HomModel(state), mu, tau, det, n_repeats, seed);
}

double dip_value_estimate(const TrialCounts& counts, const DetectionModel& det) {
  validate(det);
  const double m = static_cast<double>(counts.n1 + counts.n2);
  if (m == 0.0) throw NoRoot("no single or coincidence counts");
  return (static_cast<double>(counts.n1) - static_cast<double>(counts.n2) * loss_offset(det.gamma)) / m;
}

SearchWindow monotone_window(const HomModel& model, Axis axis, double center, double other,
                             std::optional<double> half_width) {
  const double w = half_width.value_or(4.0 * axis_scale(model, axis));
  if (!(w > 0.0)) throw InvalidSpec("window half-width must be positive");
  // A center on an extremum opens the window towards increasing values.
  if (slope_sign(profile(model, axis, center, other).second, axis_scale(model, axis)) == 0.0) {
    return {center, adjacent_extremum(model, axis, center, other, w, +1.0)};
  }
  return {adjacent_extremum(model, axis, center, other, w, -1.0),
          adjacent_extremum(model, axis, center, other, w, +1.0)};
}

SearchWindow preset_window(const HomModel& model, Axis axis, double center, double other) {
  const PhaseMatchingSpec& s = model.state().spec();
  std::optional<double> w;
  if (s.family == Family::Gaussian) {
    w = axis == Axis::Tau ? 2.0 / s.sigma : 2.0 * s.sigma;
  } else if (s.family == Family::FrequencyCat && axis == Axis::Tau) {
    w = M_PI / (2.0 * s.delta);
  } else if (s.family == Family::TimeCat && axis == Axis::Mu) {
    w = M_PI / (2.0 * s.delta_t);
  } else if (s.family == Family::AiryGrid) {
    w = axis == Axis::Tau ? 0.5 * s.tau_bar : M_PI / (2.0 * s.tau_bar);
  }
  return monotone_window(model, axis, center, other, w);
}

EstimationResult mle_estimate(const TrialCounts& counts, const HomModel& model, const DetectionModel& det,
                              SearchWindow window, Target which, double other, std::optional<SearchWindow> mu_window) {
  if (counts.total() < 1) throw InvalidSpec("counts must contain at least one trial");
  if (!(window.hi > window.lo)) throw InvalidSpec("search window must satisfy lo < hi");
  EstimationResult r;
  r.window = window;
  r.dip_value_hat = dip_value_estimate(counts, det);
  r.gamma_hat = estimate_gamma(counts);
  if (which == Target::Tau) {
    r.estimate = invert_monotone(model, Axis::Tau, window, other, r.dip_value_hat);
    r.estimate_mu = other;
    fill_errors(r, counts, model, det, Axis::Tau);
  } else if (which == Target::Mu) {
    r.estimate_mu = invert_monotone(model, Axis::Mu, window, other, r.dip_value_hat);
    r.estimate = other;
    fill_errors(r, counts, model, det, Axis::Mu);
    r.estimate = r.estimate_mu;
    r.estimate_mu = other;
  } else {
    if (!mu_window || !(mu_window->hi > mu_window->lo)) throw InvalidSpec("joint estimation needs a mu window");
    double tau = 0.5 * (window.lo + window.hi);
    double mu = 0.5 * (mu_window->lo + mu_window->hi);
    const double tol_t = kRootTol * (window.hi - window.lo), tol_m = kRootTol * (mu_window->hi - mu_window->lo);
    for (int iter = 0; iter < 100; ++iter) {
      const double t_new = closest_level(model, Axis::Tau, window, mu, r.dip_value_hat, tau);
      const double m_new = closest_level(model, Axis::Mu, *mu_window, t_new, r.dip_value_hat, mu);
      const bool done = std::abs(t_new - tau) <= tol_t && std::abs(m_new - mu) <= tol_m;
      tau = t_new;
      mu = m_new;
      if (done) break;
    }
    if (std::abs(model.dip(mu, tau).value - r.dip_value_hat) > 1e-9) {
      throw NoRoot("estimated dip value not reached on the joint search window");
    }
    r.estimate = tau;
    r.estimate_mu = mu;
    fill_errors(r, counts, model, det, Axis::Tau);
  }
  r.converged = true;
  return r;
}

double estimate_gamma(const TrialCounts& counts) {
  if (counts.total() < 1) throw InvalidSpec("counts must contain at least one trial");
  return std::sqrt(static_cast<double>(counts.n0) / static_cast<double>(counts.total()));
}

PrecisionProfile precision_profile(const HomModel& model, Axis axis, double lo, double hi, std::size_t count,
                                   const DetectionModel& det, double other) {
  validate(det);
  if (count < 2 || !(hi > lo)) throw InvalidSpec("precision profile needs lo < hi and count >= 2");
  const double scale = axis_scale(model, axis);
  const double pre = 0.5 * (1.0 - det.gamma) * (1.0 - det.gamma);
  PrecisionProfile out;
  out.curve.resize(count);
  parallel_for(count, [&](std::size_t i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    const auto [d, slope] = profile(model, axis, x, other);
    PrecisionPoint& p = out.curve[i];
    p.alpha = x;
    if (slope_sign(slope, scale) == 0.0) return;
    const double p2 = pre * (1.0 - d);
    p.delta = std::sqrt(p2 * (1.0 - p2)) / (pre * std::abs(slope));
  });
  for (const PrecisionPoint& p : out.curve) {
    if (p.delta < out.best_delta) {
      out.best_delta = p.delta;
      out.best_alpha = p.alpha;
    }
  }
  return out;
}

double optimal_operating_tau(const HomModel& model, const DetectionModel& det, std::uint64_t n_repeats,
                             double min_counts) {
  const std::size_t count = 4000;
  const double span = 6.0 * model.tau_scale();
  std::vector<double> info(count, -1.0);
  parallel_for(count, [&](std::size_t i) {
    const double tau = span * static_cast<double>(i + 1) / static_cast<double>(count);
    const OutcomeProbabilities p = model.outcomes(0.0, tau, det);
    if (static_cast<double>(n_repeats) * std::min(p.p1, p.p2) < min_counts) return;
    info[i] = model.fisher(0.0, tau, det).f_tt;
  });
  const auto it = std::max_element(info.begin(), info.end());
  if (*it <= 0.0) throw NoRoot("no delay with enough expected counts in both outcomes");
  return span * static_cast<double>(it - info.begin() + 1) / static_cast<double>(count);
}

CrStudyReport cr_saturation_study(const HomModel& model, double true_tau, double true_mu, const DetectionModel& det,
                                  std::uint64_t n_repeats, std::size_t n_experiments, std::uint64_t seed,
                                  std::optional<SearchWindow> window) {
  validate(det);
  if (n_experiments < 2) throw InvalidSpec("a study needs at least two experiments");
  CrStudyReport rep;
  rep.true_tau = true_tau;
  rep.true_mu = true_mu;
  rep.gamma = det.gamma;
  rep.n_repeats = n_repeats;
  rep.n_experiments = n_experiments;
  rep.seed = seed;
  rep.window = window.value_or(preset_window(model, Axis::Tau, true_tau, true_mu));
  rep.fisher = model.fisher(true_mu, true_tau, det).f_tt;
  if (!(rep.fisher > 0.0)) throw InvalidSpec("Fisher information vanishes at the operating point");
  rep.experiments.resize(n_experiments);
  parallel_for(n_experiments, [&](std::size_t i) {
    CrExperiment& e = rep.experiments[i];
    e.id = i;
    const TrialCounts c = simulate_trials(model, true_mu, true_tau, det, n_repeats, stream_seed(seed, i));
    try {
      e.tau_hat = mle_estimate(c, model, det, rep.window, Target::Tau, true_mu).estimate;
      e.converged = true;
    } catch (const NoRoot&) {
    } catch (const NonMonotoneWindow&) {
    }
  });
  std::vector<double> hats;
  for (const CrExperiment& e : rep.experiments) {
    if (e.converged) hats.push_back(e.tau_hat);
  }
  rep.failure_rate = 1.0 - static_cast<double>(hats.size()) / static_cast<double>(n_experiments);
  if (hats.size() < 2) return rep;
  const double nf = static_cast<double>(n_repeats) * rep.fisher;
  auto variance = [](const std::vector<double>& v, double* mean_out) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    if (mean_out) *mean_out = mean;
    return ss / static_cast<double>(v.size() - 1);
  };
  rep.empirical_var = variance(hats, &rep.mean_tau_hat);
  rep.ratio = rep.empirical_var * nf;
  // Bootstrap over experiments, seeded from the study seed.
  std::mt19937_64 rng(stream_seed(seed, ~std::uint64_t{0}));
  std::uniform_int_distribution<std::size_t> pick(0, hats.size() - 1);
  const int resamples = 400;
  std::vector<double> ratios(resamples), draw(hats.size());
  for (int b = 0; b < resamples; ++b) {
    for (double& x : draw) x = hats[pick(rng)];
    ratios[b] = variance(draw, nullptr) * nf;
  }
  rep.ratio_error = std::sqrt(variance(ratios, nullptr));
  return rep;
}

}  // namespace homsense
