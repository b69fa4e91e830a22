#include "defectforge/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "defectforge/common.hpp"

namespace defectforge {

namespace {
int g_max_threads = static_cast<int>(std::thread::hardware_concurrency());
}

void set_max_threads(int n) { g_max_threads = std::max(1, n); }
int max_threads() { return std::max(1, g_max_threads); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  int nt = std::min<std::size_t>(max_threads(), n == 0 ? 1 : n);
  if (nt <= 1 || n < 64) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::size_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    std::size_t b = std::min(n, static_cast<std::size_t>(t) * chunk);
    std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

const GaussRule& gauss_legendre(int order) {
  static std::mutex mtx;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  rule.x.resize(order);
  rule.w.resize(order);
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < order; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = order * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-16) break;
    }
    rule.x[i] = -z;
    rule.x[order - 1 - i] = z;
    rule.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.w[order - 1 - i] = rule.w[i];
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

double gauss_integrate(const std::function<double(double)>& fn, double a, double b, int order) {
  const GaussRule& g = gauss_legendre(order);
  const double c = 0.5 * (b - a), mid = 0.5 * (a + b);
  Kahan acc;
  for (int i = 0; i < order; ++i) acc.add(g.w[i] * fn(mid + c * g.x[i]));
  return c * acc.value();
}

namespace {

double adaptive_gauss_rec(const std::function<double(double)>& fn, double a, double b,
                          double coarse, double rel_tol, double abs_tol, int depth) {
  double fine = gauss_integrate(fn, a, b, 20);
  if (std::abs(fine - coarse) <= std::max(abs_tol, rel_tol * std::abs(fine)) || depth <= 0)
    return fine;
  double m = 0.5 * (a + b);
  double cl = gauss_integrate(fn, a, m, 10);
  double cr = gauss_integrate(fn, m, b, 10);
  return adaptive_gauss_rec(fn, a, m, cl, rel_tol, abs_tol * 0.5, depth - 1) +
         adaptive_gauss_rec(fn, m, b, cr, rel_tol, abs_tol * 0.5, depth - 1);
}

}  // namespace

double adaptive_gauss(const std::function<double(double)>& fn, double a, double b,
                      double rel_tol, double abs_tol, int depth_limit) {
  double coarse = gauss_integrate(fn, a, b, 10);
  return adaptive_gauss_rec(fn, a, b, coarse, rel_tol, abs_tol, depth_limit);
}

AngularKernels angular_kernels_scaled(double x) {
  const double ax = std::abs(x);
  // Trapezoid on a periodic integrand: error decays like the n/2-th Fourier
  // coefficient of exp(x cos 2phi), so doubling converges very fast.
  int n = 32;
  AngularKernels prev{0.0, 0.0, 0.0};
  bool have_prev = false;
  for (; n <= 4096; n *= 2) {
    Kahan s0, s1, s2;
    const double h = 2.0 * std::numbers::pi / n;
    for (int i = 0; i < n; ++i) {
      double phi = h * i;
      double c2 = std::cos(2.0 * phi);
      double c4 = std::cos(4.0 * phi);
      double e = std::exp(x * c2 - ax);
      s0.add(e);
      s1.add(c2 * e);
      s2.add(c4 * e);
    }
    AngularKernels cur{h * s0.value(), h * s1.value(), h * s2.value()};
    if (have_prev) {
      double err = std::abs(cur.k0 - prev.k0) + std::abs(cur.k1 - prev.k1) +
                   std::abs(cur.k2 - prev.k2);
      if (err <= 1e-14 * std::abs(cur.k0) + 1e-300) return cur;
    }
    prev = cur;
    have_prev = true;
  }
  return prev;
}

std::pair<double, double> a_kernel(double x) {
  if (!(std::abs(x) <= kCoeffCap))
    throw Error(ErrorCode::CapExceeded,
                "a_kernel: |x| exceeds coefficient cap " + std::to_string(kCoeffCap));
  AngularKernels k = angular_kernels_scaled(x);
  double s = std::exp(std::abs(x));
  return {s * k.k0, s * k.k1};
}

}  // namespace defectforge
