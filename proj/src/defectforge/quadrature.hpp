// Gauss-Legendre rules, adaptive 1-D quadrature, periodic exponential kernels.
#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace defectforge {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Gauss-Legendre rule of the given order (nodes via Newton on P_n).  Cached.
const GaussRule& gauss_legendre(int order);

// Integrate fn over [a, b] with a fixed-order Gauss-Legendre rule.
double gauss_integrate(const std::function<double(double)>& fn, double a, double b, int order);

// Adaptive Gauss quadrature: bisect until GL(n) and GL(2n) agree to tol.
double adaptive_gauss(const std::function<double(double)>& fn, double a, double b,
                      double rel_tol = 1e-13, double abs_tol = 1e-300, int depth_limit = 40);

// Angular kernels of the planar-anisotropy factor:
//   k0 = Int_0^{2pi} exp(x cos 2phi) dphi
//   k1 = Int_0^{2pi} cos 2phi exp(x cos 2phi) dphi   (= dk0/dx)
//   k2 = Int_0^{2pi} cos 4phi exp(x cos 2phi) dphi
// Scaled variant returns e^{-|x|} * (k0, k1, k2) so values stay in (0, 2pi].
// Evaluated by an adaptive periodic trapezoid rule (doubling until converged),
// which is spectrally accurate for this integrand.
struct AngularKernels {
  double k0, k1, k2;
};
AngularKernels angular_kernels_scaled(double x);

// Unscaled (a, a') pair; |x| must stay within the coefficient cap.
std::pair<double, double> a_kernel(double x);

}  // namespace defectforge
