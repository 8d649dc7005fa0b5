#include "homsense/hommodel.hpp"

#include <algorithm>
#include <cmath>

#include "homsense/error.hpp"
#include "homsense/qfi.hpp"

namespace homsense {

namespace {

// Below this distance from the dip bottom the ratio (dD)^2 / (1 - D) is
// replaced by its second-order limit.
constexpr double kDipBottom = 1e-13;

void require_frequency_cat(const PhaseMatchingSpec& spec) {
  if (spec.family != Family::FrequencyCat || spec.freq_chirp || spec.time_chirp || spec.omega0 != 0.0) {
    throw InvalidSpec("closed-form HOM information is defined for the unchirped, centered frequency cat");
  }
  validate(spec);
}

}  // namespace

void validate(const DetectionModel& det) {
  if (!(det.gamma >= 0.0 && det.gamma < 1.0)) throw InvalidSpec("gamma must lie in [0, 1)");
}

double loss_offset(double gamma) { return (1.0 + 3.0 * gamma) / (1.0 - gamma); }

OutcomeProbabilities outcome_probs_from_dip(double dip, const DetectionModel& det) {
  validate(det);
  const double g = det.gamma;
  const double d = std::clamp(dip, -1.0, 1.0);
  const double scale = 0.5 * (1.0 - g) * (1.0 - g);
  OutcomeProbabilities p;
  p.p0 = g * g;
  p.p2 = scale * (1.0 - d);
  p.p1 = 1.0 - p.p0 - p.p2;
  return p;
}

double fisher_from_dip(double dip, double di, double dj, const DetectionModel& det) {
  validate(det);
  const double g = det.gamma;
  return 0.5 * (1.0 - g) * (1.0 - g) * di * dj * (1.0 / (1.0 - dip) + 1.0 / (loss_offset(g) + dip));
}

HomModel::HomModel(const State& state) : state_(state), wigner_(state) {
  const PhaseSpaceMoments m = phase_space_moments(state_);
  tau_scale_ = 1.0 / std::sqrt(std::max(m.var_omega, 1e-300));
  mu_scale_ = 1.0 / std::sqrt(std::max(m.var_t, 1e-300));
}

DipValue HomModel::dip(double mu, double tau, DerivativeMethod method) const {
  DipValue d;
  if (method == DerivativeMethod::Analytic) {
    const WignerGradient g = wigner_.gradient(mu, -tau);
    d.value = M_PI * g.value;
    d.d_mu = M_PI * g.d_omega;
    d.d_tau = -M_PI * g.d_t;
    return d;
  }
  auto at = [&](double m, double t) { return M_PI * wigner_.value(m, -t); };
  d.value = at(mu, tau);
  d.d_mu = central_difference([&](double m) { return at(m, tau); }, mu, mu_scale_);
  d.d_tau = central_difference([&](double t) { return at(mu, t); }, tau, tau_scale_);
  return d;
}

double HomModel::coincidence(double mu, double tau) const {
  const double d = M_PI * wigner_.value(mu, -tau);
  return std::clamp(0.5 * (1.0 - d), 0.0, 1.0);
}

OutcomeProbabilities HomModel::outcomes(double mu, double tau, const DetectionModel& det) const {
  return outcome_probs_from_dip(M_PI * wigner_.value(mu, -tau), det);
}

FisherMatrix HomModel::fisher(double mu, double tau, const DetectionModel& det, DerivativeMethod method) const {
  validate(det);
  const DipValue d = dip(mu, tau, method);
  FisherMatrix f;
  if (1.0 - d.value > kDipBottom) {
    f.f_tt = fisher_from_dip(d.value, d.d_tau, d.d_tau, det);
    f.f_mm = fisher_from_dip(d.value, d.d_mu, d.d_mu, det);
    f.f_mt = fisher_from_dip(d.value, d.d_mu, d.d_tau, det);
    return f;
  }
  // Dip bottom: (dD)^2 / (1 - D) tends to -2 x (second derivative) along each
  // axis; the Hessian comes from differencing the analytic gradient.
  const double ht = fd_step(tau, tau_scale_), hm = fd_step(mu, mu_scale_);
  const DipValue tp = dip(mu, tau + ht), tm = dip(mu, tau - ht);
  const DipValue mp = dip(mu + hm, tau), mm = dip(mu - hm, tau);
  const double h_tt = (tp.d_tau - tm.d_tau) / (2.0 * ht);
  const double h_mm = (mp.d_mu - mm.d_mu) / (2.0 * hm);
  const double h_mt = 0.5 * ((tp.d_mu - tm.d_mu) / (2.0 * ht) + (mp.d_tau - mm.d_tau) / (2.0 * hm));
  const double scale = (1.0 - det.gamma) * (1.0 - det.gamma);
  f.f_tt = -scale * h_tt;
  f.f_mm = -scale * h_mm;
  f.f_mt = -scale * h_mt;
  f.singular_point = true;
  return f;
}

double coincidence_prob(const State& state, double mu, double tau) {
  return std::clamp(0.5 * (1.0 - M_PI * wigner_analytic(state, mu, -tau)), 0.0, 1.0);
}

OutcomeProbabilities outcome_probs(const State& state, double mu, double tau, const DetectionModel& det) {
  return outcome_probs_from_dip(M_PI * wigner_analytic(state, mu, -tau), det);
}

FisherMatrix fisher_matrix(const State& state, double mu, double tau, const DetectionModel& det,
                           DerivativeMethod method) {
  return HomModel(state).fisher(mu, tau, det, method);
}

double fisher_tau_analytic(const PhaseMatchingSpec& spec, double tau, const DetectionModel& det) {
  require_frequency_cat(spec);
  validate(det);
  const double g = det.gamma, s2 = spec.sigma * spec.sigma, d = spec.delta;
  const double pre = 0.5 * (1.0 - g) * (1.0 - g);
  if (tau == 0.0) return 4.0 * pre * (s2 + 2.0 * d * d);
  const double x = tau * tau * s2;
  const double c2 = std::cos(2.0 * d * tau);
  const double dip = std::exp(-x) * c2;
  // 1 - e^{-x} cos = (1 - e^{-x}) cos + (1 - cos), evaluated without cancellation.
  const double one_minus = -std::expm1(-x) * c2 + 2.0 * std::sin(d * tau) * std::sin(d * tau);
  const double slope = 2.0 * d * std::sin(2.0 * d * tau) + 2.0 * tau * s2 * c2;
  return pre * slope * slope * std::exp(-2.0 * x) * (1.0 / one_minus + 1.0 / (loss_offset(g) + dip));
}

double fisher_mu_analytic(const PhaseMatchingSpec& spec, double mu, const DetectionModel& det) {
  require_frequency_cat(spec);
  validate(det);
  const double g = det.gamma, s2 = spec.sigma * spec.sigma, d = spec.delta;
  const double pre = 0.5 * (1.0 - g) * (1.0 - g);
  const double e = std::exp(-d * d / s2);
  if (mu == 0.0) {
    const double curvature = (2.0 * e * (1.0 - 2.0 * d * d / s2) + 2.0) / (s2 * (1.0 + e));
    return 2.0 * pre * curvature;
  }
  const double ep = std::exp(-(mu + d) * (mu + d) / s2);
  const double em = std::exp(-(mu - d) * (mu - d) / s2);
  const double ec = std::exp(-mu * mu / s2);
  const double s0 = ep + em + 2.0 * ec;
  const double s1 = (mu + d) * ep + (mu - d) * em + 2.0 * mu * ec;
  const double dip = s0 / (2.0 * (1.0 + e));
  const double slope = -s1 / (s2 * (1.0 + e));
  // 1 - dip rewritten with expm1 and sinh so the dip bottom does not cancel.
  const double m2 = mu * mu / s2, y = 2.0 * mu * d / s2;
  const double sh = std::sinh(0.5 * y);
  const double one_minus = (-std::expm1(-m2) * (1.0 + e * std::cosh(y)) - 2.0 * e * sh * sh) / (1.0 + e);
  return pre * slope * slope * (1.0 / one_minus + 1.0 / (loss_offset(g) + dip));
}

}  // namespace homsense
