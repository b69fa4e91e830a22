#include "defectforge/bulk_potential.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "defectforge/quadrature.hpp"

namespace defectforge {

namespace {

constexpr int kS2Order = 96;

struct S2Integrals {
  double n = 0.0;   // Int (3x^2 - 1) e^{eta x^2}
  double d = 0.0;   // 2 Int e^{eta x^2}
  double np = 0.0;  // Int (3x^2 - 1) x^2 e^{eta x^2}
  double dp = 0.0;  // 2 Int x^2 e^{eta x^2}
};

// Even integrands: integrate on [0, 1] and double.  Shift by max(eta, 0).
S2Integrals s2_integrals(double eta, int order) {
  const double shift = std::max(eta, 0.0);
  const GaussRule& g = gauss_legendre(order);
  Kahan n, d, np, dp;
  for (int i = 0; i < order; ++i) {
    const double x = 0.5 * (g.x[i] + 1.0);
    const double w = 0.5 * g.w[i];
    const double x2 = x * x;
    const double e = w * std::exp(eta * x2 - shift);
    n.add(e * (3.0 * x2 - 1.0));
    d.add(e);
    np.add(e * (3.0 * x2 - 1.0) * x2);
    dp.add(e * x2);
  }
  return {2.0 * n.value(), 4.0 * d.value(), 2.0 * np.value(), 4.0 * dp.value()};
}

void check_eta(double eta) {
  if (!(std::abs(eta) <= kEtaCap))
    throw Error(ErrorCode::CapExceeded, "s2: |eta| exceeds cap");
}

}  // namespace

namespace detail {
double s2_with_order(double eta, int order) {
  check_eta(eta);
  S2Integrals s = s2_integrals(eta, order);
  return s.n / s.d;
}
}  // namespace detail

double s2(double eta) { return detail::s2_with_order(eta, kS2Order); }

double s2_prime(double eta) {
  check_eta(eta);
  S2Integrals s = s2_integrals(eta, kS2Order);
  // d/deta (n/d) with n' = np, d' = dp.
  return (s.np * s.d - s.n * s.dp) / (s.d * s.d);
}

namespace {

double phi_root_fn(double eta, double alpha, int order) {
  return eta - alpha * detail::s2_with_order(eta, order);
}

double bisect_root(double lo, double hi, double flo, const std::function<double(double)>& fn) {
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-14 * std::max(1.0, std::abs(mid))) return mid;
    double fm = fn(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Count of strictly positive roots of eta - alpha s2(eta); near the tangency
// a sign scan misses the shallow dip, so the count is decided by the minimum
// of the function over the dip (golden-section refined).
double positive_dip_min(double alpha, int order) {
  auto fn = [&](double x) { return phi_root_fn(x, alpha, order); };
  // Coarse scan for the argmin on (0, cap].
  const int n = 2000;
  double best_x = 0.0, best = 1e300;
  for (int i = 1; i <= n; ++i) {
    double x = kEtaCap * i / n;
    double f = fn(x);
    if (f < best) {
      best = f;
      best_x = x;
    }
  }
  double a = std::max(1e-6, best_x - kEtaCap / n), b = std::min(kEtaCap, best_x + kEtaCap / n);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  for (int it = 0; it < 120 && (b - a) > 1e-13 * std::max(1.0, b); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = fn(x2);
    }
  }
  return std::min(f1, f2);
}

}  // namespace

CriticalPointSet critical_points(double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::UsageError, "critical_points: alpha must be > 0");
  const int order = kS2Order;
  auto fn = [&](double x) { return phi_root_fn(x, alpha, order); };

  CriticalPointSet out;
  out.alpha = alpha;

  std::vector<double> roots{0.0};
  // Sign scan on [-100, 500]; the scan grid is fine enough for simple roots,
  // and the tangency case is resolved by the dip-minimum refinement below.
  const double lo = -100.0, hi = kEtaCap;
  const int n = 4000;
  double x_prev = lo, f_prev = fn(lo);
  for (int i = 1; i <= n; ++i) {
    double x = lo + (hi - lo) * i / n;
    double f = fn(x);
    if (f_prev == 0.0 && std::abs(x_prev) > 1e-9) roots.push_back(x_prev);
    if ((f_prev < 0.0) != (f < 0.0)) {
      double r = bisect_root(x_prev, x, f_prev, fn);
      // Newton polish.
      for (int it = 0; it < 4; ++it) {
        double d = 1.0 - alpha * s2_prime(r);
        if (std::abs(d) < 1e-12) break;
        r -= fn(r) / d;
      }
      if (std::abs(r) > 1e-9) roots.push_back(r);
    }
    x_prev = x;
    f_prev = f;
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-7; }),
              roots.end());

  double eta1 = 0.0;
  for (double r : roots) eta1 = std::max(eta1, r);
  out.has_eta1 = eta1 > 1e-9;
  out.eta1 = eta1;
  out.s2_eta1 = out.has_eta1 ? s2(eta1) : 0.0;

  for (double r : roots) {
    CriticalPoint cp;
    cp.eta = r;
    cp.s2_value = s2(r);
    const bool is_origin = std::abs(r) <= 1e-9;
    const bool is_eta1 = out.has_eta1 && std::abs(r - eta1) <= 1e-9;
    if (alpha > 7.5)
      cp.stability = is_eta1 ? CriticalStability::Stable : CriticalStability::Unstable;
    else
      cp.stability = (is_origin || is_eta1) ? CriticalStability::Stable
                                            : CriticalStability::Unstable;
    out.roots.push_back(cp);
  }
  return out;
}

double bifurcation_alpha(double tol, int order_factor) {
  const int order = kS2Order * std::max(1, order_factor);
  // Positive pair of roots exists iff the dip minimum is negative.
  double lo = 2.0, hi = 7.5;  // below: none; at 7.5 the origin loses convexity, pair exists
  if (!(positive_dip_min(lo, order) > 0.0) || !(positive_dip_min(hi, order) < 0.0))
    throw Error(ErrorCode::NoConvergence, "bifurcation_alpha: bracket failed");
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (positive_dip_min(mid, order) < 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

double bulk_density(const OrderParams& p, double alpha, const QuadratureSpec& q) {
  require_physical(p, 0.0);
  InvertOptions opt;
  opt.quad = q;
  opt.margin = 0.0;
  BinghamCoeffs b = invert(p, opt);
  MomentSet m = moments_any(b, q);
  return 2.0 * b.f * p.u + 6.0 * b.g * p.v - m.log_z - alpha * (p.u * p.u + 3.0 * p.v * p.v);
}

BulkGradient bulk_gradient(const OrderParams& p, double alpha, const QuadratureSpec& q) {
  InvertOptions opt;
  opt.quad = q;
  opt.margin = 0.0;
  BinghamCoeffs b = invert(p, opt);
  return {2.0 * (b.f - alpha * p.u), 6.0 * (b.g - alpha * p.v)};
}

BulkHessian bulk_hessian(const OrderParams& p, double alpha, const QuadratureSpec& q) {
  InvertOptions opt;
  opt.quad = q;
  opt.margin = 0.0;
  BinghamCoeffs b = invert(p, opt);
  ClosureJacobian j = jacobian_from_moments(moments_any(b, q));
  return {2.0 * (j.f_u - alpha), 2.0 * j.f_v, 6.0 * (j.g_v - alpha)};
}

}  // namespace defectforge
