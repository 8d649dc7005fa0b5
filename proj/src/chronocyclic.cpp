#include "homsense/chronocyclic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "homsense/error.hpp"
#include "homsense/kernels.hpp"
#include "homsense/parallel.hpp"

namespace homsense {

namespace {

// Pairs whose envelope lies below exp(kPruneLog) at the query point are skipped.
const double kPruneLog = std::log(1e-22);
constexpr double kResidueTol = 1e-9;

std::vector<double> uniform_axis(AxisRange r, std::size_t n) {
  std::vector<double> axis(n);
  const double step = (r.hi - r.lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) axis[i] = r.lo + step * static_cast<double>(i);
  axis[n - 1] = r.hi;
  return axis;
}

std::vector<double> trapezoid_weights(const std::vector<double>& axis) {
  const std::size_t n = axis.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = 0.5 * (axis[i + 1] - axis[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

cplx component_amplitude(const State& state, std::size_t c, double omega) {
  if (state.pure()) return state.spectral(omega);
  cplx v(0.0);
  for (const auto& term : state.components()[c]) v += term_spectral(term, omega);
  return v;
}

}  // namespace

WignerEvaluator::WignerEvaluator(const State& state) {
  const cplx i(0.0, 1.0);
  const auto& comps = state.components();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const double wc = state.mixing_weights()[c];
    for (const auto& k : comps[c]) {
      for (const auto& l : comps[c]) {
        const cplx al = std::conj(l.a), bl = std::conj(l.b), gl = std::conj(l.g);
        const cplx alpha = k.a + al;
        const cplx p = 2.0 * (k.a - al);
        const cplx q = -2.0 * k.a * k.w + 2.0 * al * l.w - k.b + bl;
        const cplx r = 2.0 * k.a * k.w + 2.0 * al * l.w + k.b + bl;
        const cplx s0 = -k.a * (k.w * k.w) - al * (l.w * l.w) - k.b * k.w - bl * l.w + k.g + gl;
        const cplx inv = 1.0 / alpha;
        const cplx A = p * p * inv / 4.0 - alpha;
        const cplx B = i * p * inv;
        const cplx C = -inv;
        const cplx D = p * q * inv / 2.0 + r;
        const cplx G = i * q * inv;
        const cplx F = q * q * inv / 4.0 + s0 + std::log(std::sqrt(M_PI * inv) / M_PI);
        qa_.push_back(A);
        qb_.push_back(B);
        qc_.push_back(C);
        qd_.push_back(D);
        qg_.push_back(G);
        qf_.push_back(F);
        weight_.push_back(wc);

        const double hww = -A.real(), hwt = -0.5 * B.real(), htt = -C.real();
        const double det = hww * htt - hwt * hwt;
        if (det > 1e-14 * std::max(1.0, hww * htt) && hww > 0.0 && htt > 0.0) {
          // Stationary point of the real quadratic: 2 H z = (Re D, Re G).
          const double rd = D.real(), rg = G.real();
          const double ws = (htt * rd - hwt * rg) / (2.0 * det);
          const double ts = (hww * rg - hwt * rd) / (2.0 * det);
          w0_.push_back(ws);
          t0_.push_back(ts);
          hww_.push_back(hww);
          hwt_.push_back(hwt);
          htt_.push_back(htt);
          peak_.push_back(F.real() + 0.5 * (rd * ws + rg * ts) + std::log(wc));
        } else {
          w0_.push_back(0.0);
          t0_.push_back(0.0);
          hww_.push_back(0.0);
          hwt_.push_back(0.0);
          htt_.push_back(0.0);
          peak_.push_back(std::numeric_limits<double>::infinity());
        }
      }
    }
  }
}

template <bool WithGradient>
void WignerEvaluator::accumulate(double omega, double t, cplx& v, cplx& dw, cplx& dt) const {
  const std::size_t n = weight_.size();
  thread_local std::vector<double> env;
  env.resize(n);
  const kernels::EnvelopeBatch batch{w0_.data(), t0_.data(), hww_.data(), hwt_.data(), htt_.data(), peak_.data(), n};
  kernels::envelope(batch, omega, t, env.data());
  v = dw = dt = cplx(0.0);
  const double w2 = omega * omega, wt = omega * t, t2 = t * t;
  for (std::size_t k = 0; k < n; ++k) {
    if (env[k] < kPruneLog) continue;
    const cplx e = std::exp(qa_[k] * w2 + qb_[k] * wt + qc_[k] * t2 + qd_[k] * omega + qg_[k] * t + qf_[k]) * weight_[k];
    v += e;
    if constexpr (WithGradient) {
      dw += e * (2.0 * qa_[k] * omega + qb_[k] * t + qd_[k]);
      dt += e * (qb_[k] * omega + 2.0 * qc_[k] * t + qg_[k]);
    }
  }
}

double WignerEvaluator::value(double omega, double t) const {
  cplx v, dw, dt;
  accumulate<false>(omega, t, v, dw, dt);
  return v.real();
}

double WignerEvaluator::imaginary_residue(double omega, double t) const {
  cplx v, dw, dt;
  accumulate<false>(omega, t, v, dw, dt);
  return std::fabs(v.imag());
}

WignerGradient WignerEvaluator::gradient(double omega, double t) const {
  cplx v, dw, dt;
  accumulate<true>(omega, t, v, dw, dt);
  return {v.real(), dw.real(), dt.real()};
}

double wigner_numeric(const State& state, double omega, double t) {
  const double lo = state.support_lo(), hi = state.support_hi();
  // Both omega - x and omega + x must stay inside the support.
  const double xlo = std::max(omega - hi, lo - omega);
  const double xhi = std::min(omega - lo, hi - omega);
  if (!(xhi > xlo)) return 0.0;
  double total = 0.0;
  double residue = 0.0;
  for (std::size_t c = 0; c < state.components().size(); ++c) {
    QuadratureSpec q = state.quadrature(xlo, xhi, 2.0 * t);
    q.abs_tol = 1e-12;
    const auto res = integrate(
        [&](double x) {
          return std::polar(1.0, 2.0 * x * t) * component_amplitude(state, c, omega - x) *
                 std::conj(component_amplitude(state, c, omega + x));
        },
        q);
    total += state.mixing_weights()[c] * res.value.real() / M_PI;
    residue += state.mixing_weights()[c] * res.value.imag() / M_PI;
  }
  if (std::fabs(residue) > kResidueTol) {
    throw QuadratureFailure("Wigner integrand has imaginary residue " + std::to_string(residue));
  }
  return total;
}

double wigner_analytic(const State& state, double omega, double t) { return WignerEvaluator(state).value(omega, t); }

WignerGradient wigner_analytic_gradient(const State& state, double omega, double t) {
  return WignerEvaluator(state).gradient(omega, t);
}

WignerGrid wigner_grid(const State& state, AxisRange omega, AxisRange time, std::size_t nx, std::size_t ny,
                       WignerMethod method) {
  if (nx < 16 || ny < 16) throw InvalidSpec("Wigner grid needs at least 16 samples per axis");
  if (!(omega.hi > omega.lo) || !(time.hi > time.lo)) throw InvalidSpec("empty Wigner grid range");
  WignerGrid grid;
  grid.omega_axis = uniform_axis(omega, nx);
  grid.time_axis = uniform_axis(time, ny);
  grid.values.assign(nx * ny, 0.0);
  grid.even = state.even();
  grid.unit_scale = state.spec().unit_scale;
  std::unique_ptr<WignerEvaluator> eval;
  if (method == WignerMethod::Analytic) eval = std::make_unique<WignerEvaluator>(state);
  parallel_for(nx, [&](std::size_t i) {
    const double w = grid.omega_axis[i];
    for (std::size_t j = 0; j < ny; ++j) {
      const double t = grid.time_axis[j];
      grid.values[i * ny + j] = eval ? eval->value(w, t) : wigner_numeric(state, w, t);
    }
  });
  const auto wx = trapezoid_weights(grid.omega_axis);
  const auto wt = trapezoid_weights(grid.time_axis);
  double mass = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) mass += wx[i] * wt[j] * grid.values[i * ny + j];
  }
  grid.norm_estimate = mass;
  if (!(std::fabs(mass - 1.0) <= 1e-2)) {
    throw GridTooCoarse("Wigner grid mass " + std::to_string(mass) + " deviates from 1 by more than 1e-2");
  }
  return grid;
}

Marginals marginals(const WignerGrid& grid) {
  const std::size_t nx = grid.omega_axis.size(), ny = grid.time_axis.size();
  if (nx < 2 || ny < 2 || grid.values.size() != nx * ny) throw InvalidSpec("malformed Wigner grid");
  const auto wx = trapezoid_weights(grid.omega_axis);
  const auto wt = trapezoid_weights(grid.time_axis);
  Marginals m;
  m.spectral.assign(nx, 0.0);
  m.temporal.assign(ny, 0.0);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double v = grid.values[i * ny + j];
      m.spectral[i] += wt[j] * v;
      m.temporal[j] += wx[i] * v;
    }
  }
  return m;
}

AmplitudeSamples inverse_transform(const WignerGrid& grid) {
  const std::size_t nx = grid.omega_axis.size(), ny = grid.time_axis.size();
  if (nx < 2 || ny < 2 || grid.values.size() != nx * ny) throw InvalidSpec("malformed Wigner grid");
  const auto& ax = grid.omega_axis;
  if (!(ax.front() <= 0.0 && ax.back() >= 0.0)) throw ZeroAnchor("omega axis does not contain the anchor 0");
  const auto wt = trapezoid_weights(grid.time_axis);
  auto row_integral = [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < ny; ++j) s += wt[j] * grid.values[i * ny + j];
    return s;
  };
  // |f(0)|^2 is the spectral marginal at omega = 0, interpolated between rows.
  std::size_t i1 = static_cast<std::size_t>(std::upper_bound(ax.begin(), ax.end(), 0.0) - ax.begin());
  i1 = std::clamp<std::size_t>(i1, 1, nx - 1);
  const std::size_t i0 = i1 - 1;
  const double frac = (0.0 - ax[i0]) / (ax[i1] - ax[i0]);
  const double anchor2 = (1.0 - frac) * row_integral(i0) + frac * row_integral(i1);
  if (!(anchor2 > 1e-18)) throw ZeroAnchor("|f(0)| below 1e-9; the inverse transform has no anchor");
  const double anchor = std::sqrt(anchor2);
  AmplitudeSamples out;
  out.omega.resize(nx);
  out.amplitude.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    cplx s(0.0);
    for (std::size_t j = 0; j < ny; ++j) {
      s += wt[j] * grid.values[i * ny + j] * std::polar(1.0, 2.0 * ax[i] * grid.time_axis[j]);
    }
    out.omega[i] = 2.0 * ax[i];
    out.amplitude[i] = s / anchor;
  }
  return out;
}

}  // namespace homsense
