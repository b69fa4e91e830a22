// Singular bulk energy density on the (u, v) slice and the scalar critical
// point structure eta = alpha * s2(eta).
#pragma once

#include <vector>

#include "defectforge/bingham_closure.hpp"

namespace defectforge {

// s2(eta) = Int_{-1}^{1} (3x^2 - 1) e^{eta x^2} dx / (2 Int_{-1}^{1} e^{eta x^2} dx),
// monotone increasing from -1/2 to 1.  |eta| capped at 500 (saturates long before).
inline constexpr double kEtaCap = 500.0;
double s2(double eta);
double s2_prime(double eta);

enum class CriticalStability { Stable, Unstable };

struct CriticalPoint {
  double eta = 0.0;
  double s2_value = 0.0;
  CriticalStability stability = CriticalStability::Unstable;
};

struct CriticalPointSet {
  double alpha = 0.0;
  std::vector<CriticalPoint> roots;  // sorted by eta; always contains eta = 0
  // Largest positive root when present (the uniaxial minimizer for alpha > 7.5).
  bool has_eta1 = false;
  double eta1 = 0.0;
  double s2_eta1 = 0.0;
};

// All roots of eta - alpha s2(eta) on [-100, 500] by sign scan + bisection +
// Newton polish.  Stability per the scalar classification: the largest
// positive root is the only stable one for alpha > 7.5; below 7.5 the origin
// is stable too (and is the only root below the bifurcation).
CriticalPointSet critical_points(double alpha);

// Bifurcation value alpha* where the pair of positive roots appears, bracketed
// by bisection on the positive-root count.  `order_factor` scales the s2
// quadrature order (for stability-under-refinement checks).
double bifurcation_alpha(double tol = 1e-8, int order_factor = 1);

// Bulk density on the slice:
//   f_S(u, v) = 2 f u + 6 g v - log Z - alpha (u^2 + 3 v^2),
// with (f, g) the matched exponent coefficients.
double bulk_density(const OrderParams& p, double alpha, const QuadratureSpec& q = {});

// d f_S/du = 2(f - alpha u), d f_S/dv = 6(g - alpha v).
struct BulkGradient {
  double du = 0.0, dv = 0.0;
};
BulkGradient bulk_gradient(const OrderParams& p, double alpha, const QuadratureSpec& q = {});

// Hessian on the slice: [[2(f_u - alpha), 2 f_v], [2 f_v, 6(g_v - alpha)]].
struct BulkHessian {
  double duu = 0.0, duv = 0.0, dvv = 0.0;
};
BulkHessian bulk_hessian(const OrderParams& p, double alpha, const QuadratureSpec& q = {});

namespace detail {
// s2 with an explicit quadrature order (used by refinement checks).
double s2_with_order(double eta, int order);
}  // namespace detail

}  // namespace defectforge
