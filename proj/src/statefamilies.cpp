#include "homsense/statefamilies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "homsense/error.hpp"

namespace homsense {

namespace {

constexpr double kSupportThreshold = 1e-12;
constexpr double kCombToothFloor = 1e-17;
constexpr double kCombDualFloor = 1e-18;

bool finite_pos(double x) { return std::isfinite(x) && x > 0.0; }

struct Envelope {
  double center = 0.0;
  double peak_log = 0.0;
  double curvature = 1.0;  // log|f| ~ peak_log - curvature (x - center)^2
};

Envelope spectral_envelope(const GaussianTerm& t) {
  const double ra = t.a.real();
  const double rb = t.b.real();
  Envelope e;
  e.curvature = ra;
  e.center = t.w + rb / (2.0 * ra);
  e.peak_log = t.g.real() + rb * rb / (4.0 * ra);
  return e;
}

Envelope temporal_envelope(const GaussianTerm& t) {
  // term_temporal = exp(c0 + c1 t + c2 t^2)
  const cplx c2 = -1.0 / (4.0 * t.a);
  const cplx c1 = cplx(0.0, 1.0) * (t.w + t.b / (2.0 * t.a));
  const cplx c0 = t.g + t.b * t.b / (4.0 * t.a) - 0.5 * std::log(2.0 * t.a);
  Envelope e;
  e.curvature = -c2.real();
  e.center = -c1.real() / (2.0 * c2.real());
  e.peak_log = c0.real() - c1.real() * c1.real() / (4.0 * c2.real());
  return e;
}

void hull(const std::vector<Envelope>& envs, double& lo, double& hi) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& e : envs) top = std::max(top, e.peak_log);
  const double floor_log = top + std::log(kSupportThreshold);
  lo = std::numeric_limits<double>::infinity();
  hi = -std::numeric_limits<double>::infinity();
  for (const auto& e : envs) {
    if (e.peak_log < floor_log) continue;
    const double half = std::sqrt((e.peak_log - floor_log) / e.curvature);
    lo = std::min(lo, e.center - half);
    hi = std::max(hi, e.center + half);
  }
}

void apply_freq_chirp(GaussianTerm& t, const Chirp& c, double center) {
  const double k = c.sign() / (2.0 * c.c * c.c);
  const double d = t.w - center;
  const cplx i(0.0, 1.0);
  t.a -= i * k;
  t.b += i * 2.0 * k * d;
  t.g += i * k * d * d;
}

// Multiplies the temporal amplitude by exp(i beta t^2) and maps back.
void apply_time_chirp(GaussianTerm& t, const Chirp& c) {
  const cplx i(0.0, 1.0);
  const double beta = c.sign() / (2.0 * c.c * c.c);
  const cplx a = t.a, b = t.b;
  const cplx P = 1.0 / (4.0 * a) - i * beta;
  t.a = 1.0 / (4.0 * P);
  t.b = b / (4.0 * a * P);
  t.g = t.g + b * b / (4.0 * a) - b * b / (16.0 * a * a * P) - std::log(std::sqrt(2.0 * a) * std::sqrt(2.0 * P));
}

GaussianTerm gaussian_at(double center, double sigma) {
  return GaussianTerm{cplx(0.0), cplx(0.0), cplx(1.0 / (2.0 * sigma * sigma)), center};
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::FrequencyCat: return "frequency_cat";
    case Family::TimeCat: return "time_cat";
    case Family::AiryGrid: return "airy_grid";
    case Family::FrequencyAiryGrid: return "frequency_airy_grid";
    case Family::GaussianComb: return "gaussian_comb";
    case Family::TwoColorMixture: return "two_color_mixture";
  }
  return "unknown";
}

Family family_from_name(const std::string& name) {
  for (Family f : {Family::Gaussian, Family::FrequencyCat, Family::TimeCat, Family::AiryGrid,
                   Family::FrequencyAiryGrid, Family::GaussianComb, Family::TwoColorMixture}) {
    if (family_name(f) == name) return f;
  }
  throw InvalidSpec("unknown family '" + name + "'");
}

void validate(const PhaseMatchingSpec& s) {
  if (!finite_pos(s.sigma)) throw InvalidSpec("sigma must be positive and finite");
  if (!std::isfinite(s.delta) || !std::isfinite(s.delta_t) || !std::isfinite(s.omega0)) {
    throw InvalidSpec("non-finite offset");
  }
  if (!finite_pos(s.unit_scale)) throw InvalidSpec("unit_scale must be positive");
  if (s.freq_chirp && s.time_chirp) throw InvalidSpec("frequency and time chirps are mutually exclusive");
  for (const auto* c : {&s.freq_chirp, &s.time_chirp}) {
    if (*c && !finite_pos((*c)->c)) throw InvalidSpec("chirp parameter must be positive");
  }
  const bool grid = s.family == Family::AiryGrid || s.family == Family::FrequencyAiryGrid;
  const bool comb = s.family == Family::GaussianComb;
  if (grid) {
    if (!(s.reflectivity >= 0.0 && s.reflectivity < 1.0)) throw InvalidSpec("reflectivity must lie in [0, 1)");
    if (!finite_pos(s.tau_bar)) throw InvalidSpec("tau_bar must be positive for grid families");
  } else if (s.reflectivity != 0.0 || s.tau_bar != 0.0) {
    throw InvalidSpec("reflectivity/tau_bar only apply to grid families");
  }
  if (comb) {
    if (!finite_pos(s.omega_bar) || !finite_pos(s.peak_width)) {
      throw InvalidSpec("omega_bar and peak_width must be positive for the comb");
    }
  } else if (s.omega_bar != 0.0 || s.peak_width != 0.0) {
    throw InvalidSpec("omega_bar/peak_width only apply to the comb");
  }
  const bool uses_delta = s.family == Family::Gaussian || s.family == Family::FrequencyCat ||
                          s.family == Family::TwoColorMixture;
  if (!uses_delta && s.delta != 0.0) throw InvalidSpec("delta does not apply to " + family_name(s.family));
  if (s.family != Family::TimeCat && s.delta_t != 0.0) throw InvalidSpec("delta_t only applies to time_cat");
  if ((s.family == Family::FrequencyCat || s.family == Family::TwoColorMixture) && s.delta < 0.0) {
    throw InvalidSpec("cat separation must be nonnegative");
  }
  if (s.family == Family::TimeCat && s.delta_t < 0.0) throw InvalidSpec("delta_t must be nonnegative");
  if (s.family == Family::TwoColorMixture) {
    if (s.freq_chirp || s.time_chirp || s.omega0 != 0.0) {
      throw InvalidSpec("two_color_mixture carries sigma and delta only");
    }
  }
  if (s.family == Family::AiryGrid && s.time_chirp) throw InvalidSpec("airy_grid takes a frequency chirp only");
  if (s.family == Family::FrequencyAiryGrid && s.freq_chirp) {
    throw InvalidSpec("frequency_airy_grid takes a time chirp only");
  }
}

cplx term_spectral(const GaussianTerm& t, double omega) {
  const double x = omega - t.w;
  return std::exp(t.g + t.b * x - t.a * (x * x));
}

cplx term_spectral_derivative(const GaussianTerm& t, double omega) {
  const double x = omega - t.w;
  return (t.b - 2.0 * t.a * x) * std::exp(t.g + t.b * x - t.a * (x * x));
}

cplx term_temporal(const GaussianTerm& t, double time) {
  const cplx i(0.0, 1.0);
  const cplx bt = t.b + i * time;
  return std::exp(t.g + i * (t.w * time) + bt * bt / (4.0 * t.a)) / std::sqrt(2.0 * t.a);
}

cplx term_overlap(const GaussianTerm& k, const GaussianTerm& l) {
  // Expand around the midpoint of the two centers to limit cancellation.
  const double d = 0.5 * (k.w - l.w);
  const cplx al = std::conj(l.a);
  const cplx bl = std::conj(l.b);
  const cplx alpha = k.a + al;
  const cplx beta = k.b + bl + 2.0 * k.a * d - 2.0 * al * d;
  const cplx c0 = k.g + std::conj(l.g) - k.b * d + bl * d - alpha * (d * d);
  return std::sqrt(M_PI / alpha) * std::exp(c0 + beta * beta / (4.0 * alpha));
}

std::size_t grid_terms(double reflectivity) { return geometric_truncation(reflectivity, 1e-10, 10000); }

State::State(const PhaseMatchingSpec& spec) : spec_(spec) {
  validate(spec_);
  const double s = spec_.sigma;
  const double w0 = spec_.omega0;
  std::vector<GaussianTerm> raw;
  double chirp_center = w0;
  switch (spec_.family) {
    case Family::Gaussian:
      raw.push_back(gaussian_at(w0 + spec_.delta, s));
      chirp_center = w0 + spec_.delta;
      even_ = (w0 + spec_.delta) == 0.0;
      break;
    case Family::FrequencyCat:
      raw.push_back(gaussian_at(w0 + spec_.delta, s));
      raw.push_back(gaussian_at(w0 - spec_.delta, s));
      even_ = w0 == 0.0;
      break;
    case Family::TimeCat: {
      GaussianTerm a = gaussian_at(w0, s), b = gaussian_at(w0, s);
      a.b = cplx(0.0, -spec_.delta_t);  // temporal peak at +delta_t
      b.b = cplx(0.0, spec_.delta_t);
      raw = {a, b};
      even_ = w0 == 0.0;
      break;
    }
    case Family::AiryGrid: {
      const std::size_t n = grid_terms(spec_.reflectivity);
      const double lr = spectral_log_r();
      for (std::size_t k = 0; k < n; ++k) {
        GaussianTerm t = gaussian_at(w0, s);
        t.b = cplx(0.0, 2.0 * static_cast<double>(k) * spec_.tau_bar);
        t.g = cplx(k == 0 ? 0.0 : static_cast<double>(k) * lr);
        raw.push_back(t);
      }
      even_ = false;
      break;
    }
    case Family::FrequencyAiryGrid: {
      // Exact quarter-turn of the cavity grid: spectral peaks every 2 sigma^2 tau_bar.
      const std::size_t n = grid_terms(spec_.reflectivity);
      const double lr = spectral_log_r();
      for (std::size_t k = 0; k < n; ++k) {
        GaussianTerm t = gaussian_at(w0 + 2.0 * static_cast<double>(k) * s * s * spec_.tau_bar, s);
        t.g = cplx(k == 0 ? 0.0 : static_cast<double>(k) * lr);
        raw.push_back(t);
      }
      even_ = false;
      break;
    }
    case Family::GaussianComb: {
      const double dw = spec_.peak_width;
      const double tot = s * s + dw * dw;
      const long nmax = gaussian_truncation(spec_.omega_bar * spec_.omega_bar / (2.0 * tot), kCombToothFloor);
      for (long n = -nmax; n <= nmax; ++n) {
        const double nd = static_cast<double>(n);
        GaussianTerm t;
        t.a = cplx(tot / (2.0 * s * s * dw * dw));
        t.w = w0 + nd * spec_.omega_bar * s * s / tot;
        t.b = cplx(0.0);
        t.g = cplx(-nd * nd * spec_.omega_bar * spec_.omega_bar / (2.0 * tot));
        raw.push_back(t);
      }
      even_ = w0 == 0.0;
      break;
    }
    case Family::TwoColorMixture: {
      components_ = {{gaussian_at(spec_.delta, s)}, {gaussian_at(-spec_.delta, s)}};
      weights_ = {0.5, 0.5};
      even_ = false;
      const double lg = -0.25 * std::log(M_PI * s * s);
      for (auto& comp : components_) comp[0].g = cplx(lg);
      norm_ = std::exp(lg);
      break;
    }
  }

  if (spec_.family != Family::TwoColorMixture) {
    if (spec_.freq_chirp) {
      const double center = spec_.family == Family::Gaussian ? chirp_center : w0;
      for (auto& t : raw) apply_freq_chirp(t, *spec_.freq_chirp, center);
    }
    if (spec_.time_chirp) {
      for (auto& t : raw) apply_time_chirp(t, *spec_.time_chirp);
    }
    double total = 0.0;
    const bool grid = spec_.family == Family::AiryGrid || spec_.family == Family::FrequencyAiryGrid;
    if (grid && !spec_.time_chirp) {
      const double R = spec_.reflectivity;
      const double p = s * spec_.tau_bar;
      const long n = static_cast<long>(raw.size());
      const double tail = grid_tail_bound(R, p, raw.size());
      const SumResult sum = truncated_double_sum(
          [&](long a, long b) {
            const double lr = (a + b == 0) ? 0.0 : static_cast<double>(a + b) * std::log(R);
            return std::exp(lr - static_cast<double>((a - b) * (a - b)) * p * p);
          },
          IndexRange{0, n - 1}, tail, 1e-9);
      total = sum.value * s * std::sqrt(M_PI);
    } else {
      for (const auto& k : raw) {
        for (const auto& l : raw) total += term_overlap(k, l).real();
      }
    }
    if (!(total > 0.0) || !std::isfinite(total)) throw NonConvergentSum("normalization integral is not positive");
    norm_ = 1.0 / std::sqrt(total);
    const double ln = std::log(norm_);
    for (auto& t : raw) t.g += ln;
    components_ = {std::move(raw)};
    weights_ = {1.0};
  }

  std::vector<Envelope> se, te;
  double finest = std::numeric_limits<double>::infinity();
  for (const auto& comp : components_) {
    for (const auto& t : comp) {
      se.push_back(spectral_envelope(t));
      te.push_back(temporal_envelope(t));
      finest = std::min(finest, 2.0 / std::sqrt(2.0 * t.a.real()));
    }
  }
  hull(se, support_lo_, support_hi_);
  hull(te, temporal_lo_, temporal_hi_);
  if (spec_.family == Family::AiryGrid) {
    finest = std::min(finest, M_PI / spec_.tau_bar);
    // The closed form extends past the truncated terms; keep the symmetric envelope.
  }
  panel_width_ = finest;
}

double State::spectral_log_r() const { return spec_.reflectivity > 0.0 ? std::log(spec_.reflectivity) : 0.0; }

cplx State::spectral(double omega) const {
  if (!pure()) throw InvalidSpec("a mixed state has no single spectral amplitude");
  if (spec_.family == Family::AiryGrid) {
    const double x = omega - spec_.omega0;
    const double s = spec_.sigma;
    const cplx ph = std::polar(spec_.reflectivity, 2.0 * x * spec_.tau_bar);
    cplx v = norm_ * std::exp(-x * x / (2.0 * s * s)) / (1.0 - ph);
    if (spec_.freq_chirp) {
      const double c = spec_.freq_chirp->c;
      v *= std::polar(1.0, spec_.freq_chirp->sign() * x * x / (2.0 * c * c));
    }
    return v;
  }
  cplx v(0.0);
  for (const auto& t : components_[0]) v += term_spectral(t, omega);
  return v;
}

cplx State::spectral_derivative(double omega) const {
  if (!pure()) throw InvalidSpec("a mixed state has no single spectral amplitude");
  if (spec_.family == Family::AiryGrid) {
    const double x = omega - spec_.omega0;
    const double s = spec_.sigma;
    const cplx i(0.0, 1.0);
    const cplx ph = std::polar(spec_.reflectivity, 2.0 * x * spec_.tau_bar);
    cplx logd = -x / (s * s) + 2.0 * i * spec_.tau_bar * ph / (1.0 - ph);
    if (spec_.freq_chirp) {
      const double c = spec_.freq_chirp->c;
      logd += i * spec_.freq_chirp->sign() * x / (c * c);
    }
    return spectral(omega) * logd;
  }
  cplx v(0.0);
  for (const auto& t : components_[0]) v += term_spectral_derivative(t, omega);
  return v;
}

cplx State::temporal(double time) const {
  if (!pure()) throw InvalidSpec("a mixed state has no single temporal amplitude");
  cplx v(0.0);
  for (const auto& t : components_[0]) v += term_temporal(t, time);
  return v;
}

double State::spectral_intensity(double omega) const {
  if (pure()) return std::norm(spectral(omega));
  double v = 0.0;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    cplx a(0.0);
    for (const auto& t : components_[c]) a += term_spectral(t, omega);
    v += weights_[c] * std::norm(a);
  }
  return v;
}

double State::temporal_intensity(double time) const {
  double v = 0.0;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    cplx a(0.0);
    for (const auto& t : components_[c]) a += term_temporal(t, time);
    v += weights_[c] * std::norm(a);
  }
  return v;
}

QuadratureSpec State::quadrature(double lo, double hi, double k) const {
  QuadratureSpec q;
  q.lo = lo;
  q.hi = hi;
  const double width = hi - lo;
  const double panels = std::ceil(width / panel_width_) + std::ceil(width * std::fabs(k) / (2.0 * M_PI));
  q.panels = static_cast<int>(std::clamp(panels, 1.0, 200000.0));
  q.base_order = 16;
  q.max_order = 1 << 14;
  return q;
}

double grid_tail_bound(double R, double p, std::size_t n_terms, int order, bool difference) {
  if (R == 0.0) return 0.0;
  // Pairs with max(n, m) >= N: write m = n - j, bound R^m by R^(n - |j|) and
  // sum over n >= N and all j, doubled for the mirrored half.
  const double lr = std::log(R);
  const double jpeak = -lr / (2.0 * p * p) + 1.0;
  std::vector<double> kj;
  for (long j = 0;; ++j) {
    const double jd = static_cast<double>(j);
    const double lt = -jd * lr - jd * jd * p * p;
    if (jd > jpeak && lt < -745.0) break;
    kj.push_back(std::exp(lt));
    if (j > 10000000) throw NonConvergentSum("grid tail bound does not converge");
  }
  double total = 0.0, first = 0.0;
  for (std::size_t n = n_terms;; ++n) {
    const double nd = static_cast<double>(n);
    double inner = 0.0;
    for (std::size_t j = 0; j < kj.size(); ++j) {
      const double jd = static_cast<double>(j);
      const double x = difference ? jd : 2.0 * nd + jd;
      const double f = order == 0 ? 1.0 : std::pow(x, order);
      inner += (j == 0 ? 1.0 : 2.0) * f * kj[j];
    }
    const double term = std::exp(2.0 * nd * lr) * inner;
    if (n == n_terms) first = term;
    total += term;
    if (term <= 1e-30 * first || term == 0.0) break;
    if (n > n_terms + 10000000) throw NonConvergentSum("grid tail bound does not converge");
  }
  return 2.0 * total;
}

double normalization(const PhaseMatchingSpec& spec) { return State(spec).norm_constant(); }

cplx eval_spectral(const PhaseMatchingSpec& spec, double omega) { return State(spec).spectral(omega); }

cplx eval_temporal(const PhaseMatchingSpec& spec, double t) { return State(spec).temporal(t); }

cplx comb_direct(const State& comb, double omega) {
  if (comb.spec().family != Family::GaussianComb) throw InvalidSpec("comb_direct needs a gaussian_comb state");
  return comb.spectral(omega);
}

cplx comb_resummed(const State& comb, double omega) {
  const auto& s = comb.spec();
  if (s.family != Family::GaussianComb) throw InvalidSpec("comb_resummed needs a gaussian_comb state");
  if (s.freq_chirp || s.time_chirp) throw InvalidSpec("resummed comb form is defined without chirp");
  // Poisson dual of the tooth sum: sum_n g(w - n wb) = (sqrt(2 pi) dw / wb) sum_k exp(-2 pi^2 k^2 (dw/wb)^2) exp(2 pi i k w / wb)
  const double x = omega - s.omega0;
  const double ratio = s.peak_width / s.omega_bar;
  const double q = 2.0 * M_PI * M_PI * ratio * ratio;
  const long kmax = gaussian_truncation(q, kCombDualFloor);
  // The dual sum is periodic in x; reducing keeps the phases small.
  const double xr = std::remainder(x, s.omega_bar);
  cplx sum(0.0);
  for (long k = -kmax; k <= kmax; ++k) {
    const double kd = static_cast<double>(k);
    sum += std::exp(-q * kd * kd) * std::polar(1.0, 2.0 * M_PI * kd * xr / s.omega_bar);
  }
  const double env = std::exp(-x * x / (2.0 * s.sigma * s.sigma));
  return comb.norm_constant() * env * std::sqrt(2.0 * M_PI) * ratio * sum;
}

}  // namespace homsense
