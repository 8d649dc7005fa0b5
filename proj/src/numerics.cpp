#include "homsense/numerics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "homsense/error.hpp"
#include "homsense/kernels.hpp"

namespace homsense {

namespace {

GaussLegendreRule build_rule(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

cplx composite(const std::function<cplx(double)>& f, const QuadratureSpec& s, int order, long& evals) {
  auto rule = gauss_legendre(order);
  const double width = (s.hi - s.lo) / s.panels;
  const std::size_t total = static_cast<std::size_t>(order) * s.panels;
  std::vector<double> w(total), re(total), im(total);
  std::size_t k = 0;
  for (int p = 0; p < s.panels; ++p) {
    const double a = s.lo + p * width;
    const double mid = a + 0.5 * width;
    for (int i = 0; i < order; ++i, ++k) {
      const cplx v = f(mid + 0.5 * width * rule->nodes[i]);
      w[k] = 0.5 * width * rule->weights[i];
      re[k] = v.real();
      im[k] = v.imag();
    }
  }
  evals += static_cast<long>(total);
  return kernels::weighted_sum(w.data(), re.data(), im.data(), total);
}

}  // namespace

std::shared_ptr<const GaussLegendreRule> gauss_legendre(int n) {
  if (n < 1) throw InvalidSpec("Gauss-Legendre order must be positive");
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const GaussLegendreRule>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
  }
  auto rule = std::make_shared<const GaussLegendreRule>(build_rule(n));
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(n, rule).first->second;
}

QuadratureResult integrate(const std::function<cplx(double)>& f, const QuadratureSpec& spec) {
  if (!(spec.hi > spec.lo) || spec.panels < 1 || spec.base_order < 1 || !(spec.abs_tol > 0.0 || spec.rel_tol > 0.0)) {
    throw InvalidSpec("malformed quadrature specification");
  }
  QuadratureResult out;
  int order = spec.base_order;
  cplx prev = composite(f, spec, order, out.evaluations);
  while (true) {
    const int next = order * 2;
    if (next > spec.max_order) {
      throw QuadratureFailure("order cap reached without convergence on [" + std::to_string(spec.lo) + ", " +
                              std::to_string(spec.hi) + "]");
    }
    const cplx cur = composite(f, spec, next, out.evaluations);
    const double diff = std::abs(cur - prev);
    if (!std::isfinite(diff)) throw QuadratureFailure("non-finite integrand");
    if (diff <= std::max(spec.abs_tol, spec.rel_tol * std::abs(cur))) {
      out.value = cur;
      out.error_estimate = diff;
      out.order = next;
      return out;
    }
    prev = cur;
    order = next;
  }
}

cplx gaussian_moment(cplx alpha, cplx beta, int order) {
  if (!(alpha.real() > 0.0)) throw InvalidAlpha("Re(alpha) must be positive");
  const cplx base = std::sqrt(M_PI / alpha) * std::exp(beta * beta / (4.0 * alpha));
  switch (order) {
    case 0:
      return base;
    case 1:
      return beta / (2.0 * alpha) * base;
    case 2:
      return (1.0 + beta * beta / (2.0 * alpha)) / (2.0 * alpha) * base;
    default:
      throw InvalidSpec("gaussian_moment order must be 0, 1 or 2");
  }
}

SumResult truncated_double_sum(const std::function<double(long, long)>& weight, IndexRange range, double tail_bound,
                               double tolerance) {
  if (range.hi < range.lo) throw InvalidSpec("empty index range");
  const std::size_t len = static_cast<std::size_t>(range.hi - range.lo + 1);
  std::vector<double> row(len), ones(len, 1.0);
  double total = 0.0;
  for (long n = range.lo; n <= range.hi; ++n) {
    for (long m = range.lo; m <= range.hi; ++m) row[m - range.lo] = weight(n, m);
    total += kernels::dot(row.data(), ones.data(), len);
  }
  if (!std::isfinite(total)) throw NonConvergentSum("non-finite partial sum");
  if (tail_bound > tolerance * std::fabs(total)) {
    throw NonConvergentSum("tail bound " + std::to_string(tail_bound) + " exceeds tolerance");
  }
  return {total, tail_bound, len * len};
}

std::size_t geometric_truncation(double R, double threshold, std::size_t cap) {
  if (R < 0.0 || R >= 1.0) throw InvalidSpec("reflectivity must lie in [0, 1)");
  if (R == 0.0) return 1;
  const double n = std::floor(std::log(threshold) / std::log(R)) + 1.0;
  if (n > static_cast<double>(cap)) {
    throw NonConvergentSum("geometric truncation needs more than " + std::to_string(cap) + " terms");
  }
  return static_cast<std::size_t>(std::max(1.0, n));
}

double geometric_double_tail(double R, std::size_t n_terms) {
  if (R == 0.0) return 0.0;
  const double rn = std::pow(R, static_cast<double>(n_terms));
  return 2.0 * rn / ((1.0 - R) * (1.0 - R));
}

long gaussian_truncation(double q, double threshold) {
  if (!(q > 0.0)) throw InvalidSpec("gaussian truncation needs a positive rate");
  return static_cast<long>(std::floor(std::sqrt(-std::log(threshold) / q)));
}

double fd_step(double x, double scale) {
  static const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
  return cbrt_eps * std::max(std::fabs(scale), std::fabs(x));
}

double central_difference(const std::function<double(double)>& f, double x, double scale) {
  const double h = fd_step(x, scale);
  const double xp = x + h;
  const double xm = x - h;
  return (f(xp) - f(xm)) / (xp - xm);
}

double find_root(const std::function<double(double)>& f, double a, double b, double xtol) {
  if (a > b) std::swap(a, b);
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (!(std::signbit(fa) != std::signbit(fb))) throw NoRoot("no sign change on the bracket");
  bool use_secant = true;
  for (int iter = 0; iter < 400 && (b - a) > xtol; ++iter) {
    const double width = b - a;
    double x = 0.5 * (a + b);
    if (use_secant) {
      const double s = b - fb * (b - a) / (fb - fa);
      if (s > a && s < b) x = s;
    }
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (std::signbit(fx) == std::signbit(fa)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    // Fall back to bisection whenever the secant step fails to halve the bracket.
    use_secant = (b - a) < 0.5 * width;
  }
  return std::fabs(fa) < std::fabs(fb) ? a : b;
}

}  // namespace homsense
