#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace homsense {

using cplx = std::complex<double>;

// Composite Gauss-Legendre integration over [lo, hi] split into equal panels.
// The per-panel order doubles from base_order until two successive estimates
// differ by less than max(abs_tol, rel_tol*|I|); max_order caps the per-panel
// order.
struct QuadratureSpec {
  double lo = -1.0;
  double hi = 1.0;
  int panels = 1;
  int base_order = 16;
  int max_order = 1 << 14;
  double abs_tol = 1e-9;
  double rel_tol = 0.0;
};

struct QuadratureResult {
  cplx value;
  double error_estimate = 0.0;  // |I_2n - I_n| at the accepted level
  int order = 0;                // per-panel order of the accepted estimate
  long evaluations = 0;
};

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Cached n-point rule; thread safe.
std::shared_ptr<const GaussLegendreRule> gauss_legendre(int n);

QuadratureResult integrate(const std::function<cplx(double)>& f, const QuadratureSpec& spec);

// Closed form of  integral over R of w^order * exp(-alpha w^2 + beta w) dw,
// order in {0, 1, 2}, Re(alpha) > 0.
cplx gaussian_moment(cplx alpha, cplx beta, int order);

struct IndexRange {
  long lo = 0;
  long hi = 0;  // inclusive
};

struct SumResult {
  double value = 0.0;
  double tail_bound = 0.0;
  std::size_t terms = 0;
};

// Sums weight(n, m) over range x range. The caller supplies a bound on the
// omitted tail; NonConvergentSum is thrown when it exceeds tolerance*|sum|.
SumResult truncated_double_sum(const std::function<double(long, long)>& weight, IndexRange range,
                               double tail_bound, double tolerance);

// Number of indices n >= 0 with R^n >= threshold (at least 1), or throws
// NonConvergentSum when more than cap would be needed.
std::size_t geometric_truncation(double R, double threshold = 1e-10, std::size_t cap = 10000);

// Upper bound on the sum of R^(n+m) over pairs with max(n, m) >= n_terms.
double geometric_double_tail(double R, std::size_t n_terms);

// Largest n >= 0 with exp(-q n^2) >= threshold.
long gaussian_truncation(double q, double threshold);

// Central-difference step eps^(1/3) * max(scale, |x|).
double fd_step(double x, double scale);
double central_difference(const std::function<double(double)>& f, double x, double scale);

// Root of f in [a, b] by bisection with secant refinement; requires a sign
// change and stops when the bracket is below xtol. Throws NoRoot otherwise.
double find_root(const std::function<double(double)>& f, double a, double b, double xtol);

}  // namespace homsense
