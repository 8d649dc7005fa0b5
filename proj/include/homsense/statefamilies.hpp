#pragma once

#include <optional>
#include <string>
#include <vector>

#include "homsense/numerics.hpp"

namespace homsense {

enum class Family { Gaussian, FrequencyCat, TimeCat, AiryGrid, FrequencyAiryGrid, GaussianComb, TwoColorMixture };

std::string family_name(Family f);        // snake_case identifier used in JSON and CSV
Family family_from_name(const std::string& name);  // throws InvalidSpec

// Quadratic phase with an explicit sign. For a spectral chirp the phase is
// exp(+-i (w - center)^2 / 2c^2); for a temporal chirp exp(+-i t^2 / 2c^2).
struct Chirp {
  double c = 1.0;
  bool positive = true;
  double sign() const { return positive ? 1.0 : -1.0; }
};

struct PhaseMatchingSpec {
  Family family = Family::Gaussian;
  double sigma = 1.0;         // spectral envelope width
  double delta = 0.0;         // Gaussian center, cat half-separation
  double delta_t = 0.0;       // time-cat half-separation
  double reflectivity = 0.0;  // grid families
  double tau_bar = 0.0;       // grid round trip
  double omega_bar = 0.0;     // comb spacing
  double peak_width = 0.0;    // comb tooth width
  double omega0 = 0.0;        // global spectral offset
  std::optional<Chirp> freq_chirp;
  std::optional<Chirp> time_chirp;
  double unit_scale = 1.0;    // I/O labelling only
};

// Throws InvalidSpec when fields are out of range or not allowed for the family.
void validate(const PhaseMatchingSpec& spec);

// One Gaussian building block  exp(g + b x - a x^2)  with x = omega - w.
struct GaussianTerm {
  cplx g;
  cplx b;
  cplx a;  // Re(a) > 0
  double w = 0.0;
};

cplx term_spectral(const GaussianTerm& t, double omega);
cplx term_spectral_derivative(const GaussianTerm& t, double omega);
// Unitary transform  (2 pi)^(-1/2) * integral exp(i omega t) term(omega) d omega.
cplx term_temporal(const GaussianTerm& t, double time);
// Integral of term_k(omega) * conj(term_l(omega)) over the real line.
cplx term_overlap(const GaussianTerm& k, const GaussianTerm& l);

// Normalized state. Pure families hold one component; the two-colour mixture
// holds two equally weighted incoherent components.
class State {
 public:
  explicit State(const PhaseMatchingSpec& spec);

  const PhaseMatchingSpec& spec() const { return spec_; }
  bool pure() const { return components_.size() == 1; }
  bool even() const { return even_; }

  // Normalization constant A multiplying the raw family amplitude.
  double norm_constant() const { return norm_; }

  const std::vector<std::vector<GaussianTerm>>& components() const { return components_; }
  const std::vector<double>& mixing_weights() const { return weights_; }

  // Pure states only (InvalidSpec otherwise).
  cplx spectral(double omega) const;
  cplx spectral_derivative(double omega) const;
  cplx temporal(double t) const;

  double spectral_intensity(double omega) const;
  double temporal_intensity(double t) const;

  // Hull of the region where the amplitude exceeds 1e-12 of its peak.
  double support_lo() const { return support_lo_; }
  double support_hi() const { return support_hi_; }
  // Same for the temporal amplitude.
  double temporal_lo() const { return temporal_lo_; }
  double temporal_hi() const { return temporal_hi_; }

  // Panel width resolving the finest spectral structure (envelope widths,
  // comb teeth, cavity fringes).
  double panel_width() const { return panel_width_; }

  // Panel layout for an integrand of the spectral amplitude over [lo, hi]
  // with an extra oscillation exp(i k x).
  QuadratureSpec quadrature(double lo, double hi, double k = 0.0) const;

 private:
  double spectral_log_r() const;

  PhaseMatchingSpec spec_;
  std::vector<std::vector<GaussianTerm>> components_;
  std::vector<double> weights_;
  double norm_ = 1.0;
  bool even_ = false;
  double support_lo_ = 0.0, support_hi_ = 0.0;
  double temporal_lo_ = 0.0, temporal_hi_ = 0.0;
  double panel_width_ = 1.0;
};

// Free-function forms of the state operations.
double normalization(const PhaseMatchingSpec& spec);
cplx eval_spectral(const PhaseMatchingSpec& spec, double omega);
cplx eval_temporal(const PhaseMatchingSpec& spec, double t);

// Grid truncation: number of retained round trips for the cavity families.
std::size_t grid_terms(double reflectivity);
// Bound on the part of the sum over n, m >= 0 of x^order R^(n+m) exp(-(n-m)^2 p^2)
// with max(n, m) >= n_terms; x = n + m, or |n - m| when difference is set.
double grid_tail_bound(double R, double p, std::size_t n_terms, int order = 0, bool difference = false);

// Comb amplitudes (normalized): direct tooth sum and its Poisson-resummed
// dual, which must agree pointwise.
cplx comb_direct(const State& comb, double omega);
cplx comb_resummed(const State& comb, double omega);

}  // namespace homsense
