#include "homsense/qfi.hpp"

#include <cmath>

#include "homsense/error.hpp"
#include "homsense/parallel.hpp"

namespace homsense {

namespace {

constexpr double kGridRelTol = 1e-10;
constexpr double kUnderflowClamp = 1e-300;

cplx component_value(const State& s, std::size_t c, double w) {
  if (s.pure()) return s.spectral(w);
  cplx v(0.0);
  for (const auto& t : s.components()[c]) v += term_spectral(t, w);
  return v;
}

cplx component_derivative(const State& s, std::size_t c, double w) {
  if (s.pure()) return s.spectral_derivative(w);
  cplx v(0.0);
  for (const auto& t : s.components()[c]) v += term_spectral_derivative(t, w);
  return v;
}

std::vector<double> trapezoid(const std::vector<double>& axis) {
  std::vector<double> w(axis.size(), 0.0);
  for (std::size_t i = 0; i + 1 < axis.size(); ++i) {
    const double h = 0.5 * (axis[i + 1] - axis[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

// 1-D sums over n in Z of n^k exp(-n^2 q / 2), either over all n or |n| > from.
double gauss_power_sum(double q, int k, long from) {
  double total = 0.0, first = 0.0;
  for (long n = from + 1;; ++n) {
    const double nd = static_cast<double>(n);
    const double term = std::pow(nd, k) * std::exp(-0.5 * q * nd * nd);
    if (n == from + 1) first = term;
    total += 2.0 * term;
    if ((term <= 1e-30 * first || term == 0.0) && nd * nd * q > static_cast<double>(k)) break;
  }
  if (from < 0 && k == 0) total -= 1.0;  // n = 0 counted twice
  return total;
}

double comb_full_sum(double q, int k) { return k == 0 ? gauss_power_sum(q, 0, -1) : gauss_power_sum(q, k, 0); }

double grid_sum(double R, double p, int order, GridSign sign) {
  const std::size_t n = grid_terms(R);
  const long hi = static_cast<long>(n) - 1;
  const double lr = R > 0.0 ? std::log(R) : 0.0;
  const bool diff = sign == GridSign::Minus;
  const double tail = grid_tail_bound(R, p, n, order, diff);
  const SumResult s = truncated_double_sum(
      [&](long a, long b) {
        const double x = diff ? static_cast<double>(a - b) : static_cast<double>(a + b);
        const double f = order == 0 ? 1.0 : std::pow(x, order);
        if (f == 0.0) return 0.0;
        const double lw = (a + b == 0 ? 0.0 : static_cast<double>(a + b) * lr) -
                          static_cast<double>((a - b) * (a - b)) * p * p;
        return f * std::exp(lw);
      },
      IndexRange{0, hi}, tail, kGridRelTol);
  return s.value;
}

double comb_sum(double q, double p, int order, GridSign sign) {
  const long n = gaussian_truncation(0.5 * q, 1e-17);
  const bool diff = sign == GridSign::Minus;
  // Omitted pairs have |n| or |m| beyond the cut; (n +- m)^2 <= 2 n^2 + 2 m^2
  // and the cross factor is at most 1 (or its maximum over n != m for n - m).
  const double t0 = gauss_power_sum(q, 0, n), t2 = gauss_power_sum(q, 2, n);
  const double s0 = comb_full_sum(q, 0), s2 = comb_full_sum(q, 2);
  double tail = 0.0;
  if (order == 0) {
    tail = 2.0 * t0 * s0;
  } else if (diff) {
    double peak = 0.0;
    for (long j = 1; j < 100000; ++j) {
      const double jd = static_cast<double>(j);
      const double v = jd * jd * std::exp(-jd * jd * p * p);
      peak = std::max(peak, v);
      if (jd * p > 1.0 && v < 1e-3 * peak) break;
    }
    tail = 2.0 * t0 * s0 * peak;
  } else {
    tail = 2.0 * 2.0 * (t2 * s0 + t0 * s2);
  }
  const SumResult s = truncated_double_sum(
      [&](long a, long b) {
        const double x = diff ? static_cast<double>(a - b) : static_cast<double>(a + b);
        const double f = order == 0 ? 1.0 : std::pow(x, order);
        if (f == 0.0) return 0.0;
        const double ad = static_cast<double>(a), bd = static_cast<double>(b);
        const double lw = -0.5 * q * (ad * ad + bd * bd) - (ad - bd) * (ad - bd) * p * p;
        return f * std::exp(lw);
      },
      IndexRange{-n, n}, tail, kGridRelTol);
  return s.value;
}

GridVariance clamp_variance(double raw) {
  GridVariance v;
  if (raw < kUnderflowClamp) {
    v.value = 0.0;
    v.clamped = true;
  } else {
    v.value = raw;
  }
  return v;
}

// Published grid block: time row shrinks by the difference variance, frequency
// row grows by the sum variance.
QfiMatrix grid_block(double sigma, double p, double var_plus, double var_minus) {
  QfiMatrix q;
  q.convention = Convention::Printed;
  q.f_tt = 0.5 * sigma * sigma * (1.0 - 2.0 * p * p * var_minus);
  q.f_mm = 0.5 / (sigma * sigma) * (1.0 + 2.0 * p * p * var_plus);
  q.f_mt = 0.0;
  return q;
}

}  // namespace

std::string convention_name(Convention c) { return c == Convention::Printed ? "printed" : "canonical"; }

Convention convention_from_name(const std::string& name) {
  if (name == "printed") return Convention::Printed;
  if (name == "canonical") return Convention::Canonical;
  throw InvalidSpec("unknown convention '" + name + "'");
}

PhaseSpaceMoments phase_space_moments(const State& state) {
  double m_w = 0.0, m_w2 = 0.0, m_t = 0.0, m_t2 = 0.0, m_wt = 0.0;
  for (std::size_t c = 0; c < state.components().size(); ++c) {
    const double wc = state.mixing_weights()[c];
    QuadratureSpec q = state.quadrature(state.support_lo(), state.support_hi());
    q.abs_tol = 1e-14;
    q.rel_tol = 1e-13;
    auto pack = [&](auto re, auto im) {
      return integrate(
                 [&](double w) {
                   const cplx f = component_value(state, c, w);
                   const cplx d = component_derivative(state, c, w);
                   return cplx(re(w, f, d), im(w, f, d));
                 },
                 q)
          .value;
    };
    const cplx a = pack([](double w, cplx f, cplx) { return w * std::norm(f); },
                        [](double w, cplx f, cplx) { return w * w * std::norm(f); });
    const cplx b = pack([](double, cplx f, cplx d) { return (std::conj(f) * d).imag(); },
                        [](double w, cplx f, cplx d) { return w * (std::conj(f) * d).imag(); });
    const cplx n = pack([](double, cplx, cplx d) { return std::norm(d); }, [](double, cplx, cplx) { return 0.0; });
    m_w += wc * a.real();
    m_w2 += wc * a.imag();
    m_t += wc * b.real();
    m_wt += wc * b.imag();
    m_t2 += wc * n.real();
  }
  PhaseSpaceMoments m;
  m.mean_omega = m_w;
  m.mean_t = m_t;
  m.var_omega = m_w2 - m_w * m_w;
  m.var_t = m_t2 - m_t * m_t;
  m.cov = m_wt - m_w * m_t;
  return m;
}

PhaseSpaceMoments grid_phase_space_moments(const WignerGrid& grid) {
  const std::size_t nx = grid.omega_axis.size(), ny = grid.time_axis.size();
  const auto wx = trapezoid(grid.omega_axis), wt = trapezoid(grid.time_axis);
  double s0 = 0.0, sw = 0.0, st = 0.0, sww = 0.0, stt = 0.0, swt = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    const double w = grid.omega_axis[i];
    for (std::size_t j = 0; j < ny; ++j) {
      const double t = grid.time_axis[j];
      const double v = wx[i] * wt[j] * grid.values[i * ny + j];
      s0 += v;
      sw += v * w;
      st += v * t;
      sww += v * w * w;
      stt += v * t * t;
      swt += v * w * t;
    }
  }
  PhaseSpaceMoments m;
  m.mean_omega = sw / s0;
  m.mean_t = st / s0;
  m.var_omega = sww / s0 - m.mean_omega * m.mean_omega;
  m.var_t = stt / s0 - m.mean_t * m.mean_t;
  m.cov = swt / s0 - m.mean_omega * m.mean_t;
  return m;
}

QfiMatrix qfi_from_moments(const PhaseSpaceMoments& m) {
  QfiMatrix q;
  q.convention = Convention::Canonical;
  q.f_tt = 4.0 * m.var_omega;
  q.f_mm = 4.0 * m.var_t;
  q.f_mt = -4.0 * m.cov;
  return q;
}

QfiMatrix qfi_numeric(const State& state) { return qfi_from_moments(phase_space_moments(state)); }

QfiMatrix qfi_analytic(const State& state) {
  const auto& s = state.spec();
  const double sg = s.sigma, s2 = sg * sg;
  QfiMatrix q;
  q.convention = Convention::Printed;
  switch (s.family) {
    case Family::Gaussian: {
      q.f_tt = 0.5 * s2;
      q.f_mm = 0.5 / s2;
      if (s.freq_chirp) {
        const double c2 = s.freq_chirp->c * s.freq_chirp->c;
        q.f_mm += 0.5 * s2 / (c2 * c2);
        q.f_mt = -s.freq_chirp->sign() * 0.5 * s2 / c2;
      } else if (s.time_chirp) {
        const double c2 = s.time_chirp->c * s.time_chirp->c;
        q.f_tt += 0.5 / (s2 * c2 * c2);
        q.f_mt = s.time_chirp->sign() * 0.5 / (s2 * c2);
      }
      return q;
    }
    case Family::FrequencyCat: {
      const double d2 = s.delta * s.delta;
      const double e = std::exp(-d2 / s2);
      q.f_tt = s2 + 2.0 * d2 / (1.0 + e);
      q.f_mm = (1.0 / s2) * (1.0 - 2.0 * (d2 / s2) * e / (1.0 + e));
      if (s.freq_chirp) {
        // Quarter-turn image of the chirped time-cat block.
        const double c2 = s.freq_chirp->c * s.freq_chirp->c;
        q.f_mm = 1.0 / s2 + s2 / (c2 * c2) - 0.5 * d2 / (s2 * s2) * e / (1.0 + e);
        q.f_mt = -s.freq_chirp->sign() * (s2 / c2) / (1.0 + e);
      } else if (s.time_chirp) {
        throw InvalidSpec("no closed-form QFI for a time-chirped frequency cat");
      }
      return q;
    }
    case Family::TimeCat: {
      const double d2 = s.delta_t * s.delta_t;
      const double e = std::exp(-d2 * s2);
      q.f_mm = 1.0 / s2 + 2.0 * d2 / (1.0 + e);
      q.f_tt = s2 * (1.0 - 2.0 * d2 * s2 * e / (1.0 + e));
      if (s.time_chirp) {
        // Chirp rate expressed as the inverse chirp time.
        const double cp2 = 1.0 / (s.time_chirp->c * s.time_chirp->c);
        q.f_tt = s2 + cp2 * cp2 / s2 - 0.5 * d2 * s2 * s2 * e / (1.0 + e);
        q.f_mt = s.time_chirp->sign() * (cp2 / s2) / (1.0 + e);
      } else if (s.freq_chirp) {
        throw InvalidSpec("no closed-form QFI for a frequency-chirped time cat");
      }
      return q;
    }
    case Family::AiryGrid: {
      const double p = sg * s.tau_bar;
      const double vp = grid_variance(s.reflectivity, p, GridSign::Plus).value;
      const double vm = grid_variance(s.reflectivity, p, GridSign::Minus).value;
      q = grid_block(sg, p, vp, vm);
      if (s.freq_chirp) {
        const double c2 = s.freq_chirp->c * s.freq_chirp->c;
        const double shrink = 1.0 - 2.0 * p * p * vm;
        q.f_mm += 0.5 * s2 / (c2 * c2) * shrink;
        q.f_mt = -s.freq_chirp->sign() * 0.5 * s2 / c2 * shrink;
      }
      return q;
    }
    case Family::FrequencyAiryGrid: {
      const double p = sg * s.tau_bar;
      const double vp = grid_variance(s.reflectivity, p, GridSign::Plus).value;
      const double vm = grid_variance(s.reflectivity, p, GridSign::Minus).value;
      const double shrink = 1.0 - 2.0 * p * p * vm;
      q.f_mm = 0.5 / s2 * shrink;
      q.f_tt = 0.5 * s2 * (1.0 + 2.0 * p * p * vp);
      if (s.time_chirp) {
        const double c2 = s.time_chirp->c * s.time_chirp->c;
        q.f_tt += 0.5 / (s2 * c2 * c2) * shrink;
        q.f_mt = s.time_chirp->sign() * 0.5 / (s2 * c2) * shrink;
      }
      return q;
    }
    case Family::GaussianComb: {
      if (s.freq_chirp || s.time_chirp) throw InvalidSpec("no closed-form QFI for a chirped comb");
      const double ratio = s.peak_width / s.omega_bar;
      const double qq = ratio * ratio;
      const double p = sg * 2.0 * M_PI / s.omega_bar;
      const double vp = comb_grid_variance(qq, p, GridSign::Plus).value;
      const double vm = comb_grid_variance(qq, p, GridSign::Minus).value;
      return grid_block(sg, p, vp, vm);
    }
    case Family::TwoColorMixture:
      throw InvalidSpec("the two-colour mixture has a delay-dependent QFI; use qfi_mixed_two_color");
  }
  throw InvalidSpec("unhandled family");
}

double grid_moments(double R, double p, int order, GridSign sign) {
  if (!(R >= 0.0 && R < 1.0)) throw InvalidSpec("reflectivity must lie in [0, 1)");
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidSpec("sigma * tau_bar must be positive");
  if (order != 1 && order != 2) throw InvalidSpec("grid moment order must be 1 or 2");
  if (sign == GridSign::Minus && order == 1) return 0.0;  // antisymmetric weight
  return grid_sum(R, p, order, sign) / grid_sum(R, p, 0, sign);
}

GridVariance grid_variance(double R, double p, GridSign sign) {
  const double m2 = grid_moments(R, p, 2, sign);
  const double m1 = grid_moments(R, p, 1, sign);
  return clamp_variance(m2 - m1 * m1);
}

double comb_grid_moments(double q, double p, int order, GridSign sign) {
  if (!(q > 0.0) || !std::isfinite(q)) throw InvalidSpec("comb width ratio must be positive");
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidSpec("sigma * tau_bar must be positive");
  if (order != 1 && order != 2) throw InvalidSpec("grid moment order must be 1 or 2");
  if (order == 1) return 0.0;  // weight is even under (n, m) -> (-n, -m)
  return comb_sum(q, p, order, sign) / comb_sum(q, p, 0, sign);
}

GridVariance comb_grid_variance(double q, double p, GridSign sign) {
  return clamp_variance(comb_grid_moments(q, p, 2, sign));
}

double qfi_mixed_two_color(const PhaseMatchingSpec& spec, double tau) {
  if (spec.family != Family::TwoColorMixture) throw InvalidSpec("qfi_mixed_two_color needs a two_color_mixture");
  validate(spec);
  if (!std::isfinite(tau)) throw InvalidSpec("delay must be finite");
  const double s2 = spec.sigma * spec.sigma, d = spec.delta;
  const double env = std::exp(-2.0 * tau * tau * s2);
  const double lead = d * std::sin(d * tau) + tau * s2 * std::cos(d * tau);
  return 8.0 * env * lead * lead + 8.0 * tau * tau * s2 * s2 * env * std::exp(-2.0 * d * d / s2);
}

QfiMatrix qfi_total(const State& minus, double sigma_plus) {
  if (!(sigma_plus > 0.0) || !std::isfinite(sigma_plus)) throw InvalidSpec("sigma_plus must be positive");
  const PhaseSpaceMoments m = phase_space_moments(minus);
  QfiMatrix q;
  q.convention = Convention::Canonical;
  q.f_tt = 4.0 * (0.5 * sigma_plus * sigma_plus + m.var_omega);
  q.f_mm = 4.0 * (0.5 / (sigma_plus * sigma_plus) + m.var_t);
  q.f_mt = -4.0 * m.cov;
  return q;
}

CrCovariance invert(const QfiMatrix& q, double n_repeats) {
  if (!(n_repeats > 0.0)) throw InvalidSpec("repeat count must be positive");
  const double det = q.determinant();
  if (!(det > 1e-12 * q.f_tt * q.f_mm) || !(q.f_tt > 0.0) || !(q.f_mm > 0.0)) {
    throw SingularMatrix("information matrix is singular");
  }
  CrCovariance c;
  c.n_repeats = n_repeats;
  c.var_tau = q.f_mm / det / n_repeats;
  c.var_mu = q.f_tt / det / n_repeats;
  c.cov_mu_tau = -q.f_mt / det / n_repeats;
  return c;
}

std::vector<QcrRow> qcr_table(const std::vector<QcrEntry>& entries, double n_repeats, Convention convention) {
  std::vector<QcrRow> rows(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    const State st(entries[i].spec);
    const QfiMatrix q = convention == Convention::Printed ? qfi_analytic(st) : qfi_numeric(st);
    const CrCovariance c = invert(q, n_repeats);
    QcrRow& r = rows[i];
    r.label = entries[i].label;
    r.qfi = q;
    r.d_tau = std::sqrt(c.var_tau * n_repeats);
    r.d_mu = std::sqrt(c.var_mu * n_repeats);
    r.d_mutau = std::sqrt(std::fabs(c.cov_mu_tau) * n_repeats);
  });
  return rows;
}

std::vector<QcrEntry> table1_preset() {
  auto gaussian = [](const std::string& label, double sigma) {
    QcrEntry e;
    e.label = label;
    e.spec.family = Family::Gaussian;
    e.spec.sigma = sigma;
    return e;
  };
  return {gaussian("algaas_broadband", 2.0 * M_PI * 10.9e12), gaussian("narrowband", 2.0 * M_PI * 0.1e12),
          gaussian("laser_cooled", 1e6), gaussian("bulk", 2.0 * M_PI * 1.5e12)};
}

std::vector<QcrEntry> table2_preset() {
  std::vector<QcrEntry> rows;
  const double sigma_fast = 2.0 * M_PI * 10.9e12;
  const double sigma_slow = 1e6;
  QcrEntry g;
  g.label = "gaussian_time";
  g.spec.sigma = sigma_fast;
  rows.push_back(g);
  QcrEntry fc;
  fc.label = "frequency_cat_time";
  fc.spec.family = Family::FrequencyCat;
  fc.spec.sigma = sigma_fast;
  fc.spec.delta = 10.0 * sigma_fast;
  rows.push_back(fc);
  QcrEntry gs;
  gs.label = "gaussian_frequency";
  gs.spec.sigma = sigma_slow;
  rows.push_back(gs);
  QcrEntry tc;
  tc.label = "time_cat_frequency";
  tc.spec.family = Family::TimeCat;
  tc.spec.sigma = sigma_slow;
  tc.spec.delta_t = 10.0 / sigma_slow;
  rows.push_back(tc);
  return rows;
}

}  // namespace homsense
