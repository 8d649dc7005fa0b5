#pragma once

#include <string>
#include <vector>

#include "homsense/chronocyclic.hpp"
#include "homsense/statefamilies.hpp"

namespace homsense {

// printed: closed forms as published per family.
// canonical: 4 Var(omega), 4 Var(t), -4 cov(omega, t) of the Wigner function.
enum class Convention { Printed, Canonical };

std::string convention_name(Convention c);
Convention convention_from_name(const std::string& name);  // throws InvalidSpec

struct QfiMatrix {
  double f_tt = 0.0;  // time-shift information
  double f_mm = 0.0;  // frequency-shift information
  double f_mt = 0.0;  // cross term
  Convention convention = Convention::Canonical;

  double determinant() const { return f_tt * f_mm - f_mt * f_mt; }
};

struct CrCovariance {
  double var_tau = 0.0;
  double var_mu = 0.0;
  double cov_mu_tau = 0.0;
  double n_repeats = 1.0;
};

// First and second moments of the Wigner function over (omega, t).
struct PhaseSpaceMoments {
  double mean_omega = 0.0;
  double mean_t = 0.0;
  double var_omega = 0.0;
  double var_t = 0.0;
  double cov = 0.0;  // cov(omega, t)
};

// Exact moments from one-dimensional spectral integrals:
//   <t> = int Im(conj(f) f'),  <t^2> = int |f'|^2,  <omega t> = int omega Im(conj(f) f').
PhaseSpaceMoments phase_space_moments(const State& state);
// Trapezoid moments of a sampled Wigner grid (cross-check path).
PhaseSpaceMoments grid_phase_space_moments(const WignerGrid& grid);

QfiMatrix qfi_from_moments(const PhaseSpaceMoments& m);
QfiMatrix qfi_numeric(const State& state);
// Throws InvalidSpec for family/chirp combinations without a closed form.
QfiMatrix qfi_analytic(const State& state);

enum class GridSign { Plus, Minus };

struct GridVariance {
  double value = 0.0;
  bool clamped = false;  // true when the raw value fell below 1e-300 and was set to 0
};

// <(n +- m)^order> under weights R^(n+m) exp(-(n-m)^2 p^2), n, m >= 0,
// with p = sigma * tau_bar. Summed to relative 1e-10 with a certified tail.
double grid_moments(double R, double p, int order, GridSign sign);
GridVariance grid_variance(double R, double p, GridSign sign);

// Comb counterpart over Z^2 with weights
// exp(-n^2 q/2) exp(-m^2 q/2) exp(-(n-m)^2 p^2), q = (peak_width / omega_bar)^2.
double comb_grid_moments(double q, double p, int order, GridSign sign);
GridVariance comb_grid_variance(double q, double p, GridSign sign);

// Published closed form for the incoherent two-colour mixture, as a
// function of the delay.
double qfi_mixed_two_color(const PhaseMatchingSpec& spec, double tau);

// Total biphoton QFI with a Gaussian sum-frequency amplitude of width sigma_plus.
QfiMatrix qfi_total(const State& minus, double sigma_plus);

// (1/N) * inverse. Throws SingularMatrix when det <= 1e-12 f_tt f_mm.
CrCovariance invert(const QfiMatrix& q, double n_repeats);

struct QcrEntry {
  std::string label;
  PhaseMatchingSpec spec;
};

struct QcrRow {
  std::string label;
  double d_tau = 0.0;    // sqrt(N var_tau)
  double d_mu = 0.0;     // sqrt(N var_mu)
  double d_mutau = 0.0;  // sqrt(N |cov|)
  QfiMatrix qfi;
};

std::vector<QcrRow> qcr_table(const std::vector<QcrEntry>& entries, double n_repeats,
                              Convention convention = Convention::Printed);

// Preset rows: single-Gaussian sources, and Gaussian versus cat states.
std::vector<QcrEntry> table1_preset();
std::vector<QcrEntry> table2_preset();

}  // namespace homsense
