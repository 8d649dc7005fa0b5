#pragma once

#include <vector>

#include "homsense/statefamilies.hpp"

namespace homsense {

// W(omega, t) = (1/pi) * integral exp(2 i x t) f(omega - x) conj(f(omega + x)) dx,
// normalized so that its integral over the plane is 1. Its spectral marginal
// is |f(omega)|^2 and its temporal marginal is |f~(-t)|^2.

struct WignerGradient {
  double value = 0.0;
  double d_omega = 0.0;
  double d_t = 0.0;
};

// Closed-form Wigner function assembled from pairs of Gaussian terms.
// Pairs whose log-envelope falls below the pruning floor at the query point
// are skipped; the envelope test runs through the SIMD kernel layer.
class WignerEvaluator {
 public:
  explicit WignerEvaluator(const State& state);

  double value(double omega, double t) const;
  WignerGradient gradient(double omega, double t) const;
  // Imaginary residue of the pair sum (round-off only for valid states).
  double imaginary_residue(double omega, double t) const;

  std::size_t pair_count() const { return weight_.size(); }

 private:
  template <bool WithGradient>
  void accumulate(double omega, double t, cplx& v, cplx& dw, cplx& dt) const;

  // Complex exponent E = A w^2 + B w t + C t^2 + D w + G t + F per pair.
  std::vector<cplx> qa_, qb_, qc_, qd_, qg_, qf_;
  std::vector<double> weight_;
  // Real log-envelope in peak form (structure of arrays).
  std::vector<double> w0_, t0_, hww_, hwt_, htt_, peak_;
};

double wigner_numeric(const State& state, double omega, double t);
double wigner_analytic(const State& state, double omega, double t);
WignerGradient wigner_analytic_gradient(const State& state, double omega, double t);

struct AxisRange {
  double lo = -1.0;
  double hi = 1.0;
};

// Uniform inclusive axes; values are row-major with the omega index slowest:
// values[i * time_axis.size() + j] = W(omega_axis[i], time_axis[j]).
struct WignerGrid {
  std::vector<double> omega_axis;
  std::vector<double> time_axis;
  std::vector<double> values;
  double norm_estimate = 0.0;
  bool even = false;
  double unit_scale = 1.0;

  double at(std::size_t i, std::size_t j) const { return values[i * time_axis.size() + j]; }
};

enum class WignerMethod { Analytic, Numeric };

// Throws InvalidSpec for nx, ny < 16 and GridTooCoarse when the trapezoid
// mass deviates from 1 by more than 1e-2.
WignerGrid wigner_grid(const State& state, AxisRange omega, AxisRange time, std::size_t nx, std::size_t ny,
                       WignerMethod method = WignerMethod::Analytic);

struct Marginals {
  std::vector<double> spectral;  // integral over t, per omega sample
  std::vector<double> temporal;  // integral over omega, per t sample
};

Marginals marginals(const WignerGrid& grid);

struct AmplitudeSamples {
  std::vector<double> omega;
  std::vector<cplx> amplitude;
};

// Recovers f(2 omega_i) = integral W(omega_i, t) exp(2 i omega_i t) dt / conj(f(0))
// with the anchor phase fixed to zero. Throws ZeroAnchor when |f(0)| < 1e-9.
AmplitudeSamples inverse_transform(const WignerGrid& grid);

}  // namespace homsense
