// Quasi-equilibrium density on S^2 of the form
//   rho(m) ~ exp(f (m1^2 - m2^2) + g (2 m3^2 - m1^2 - m2^2))
// and every moment of it the rest of the library consumes.  Two independent
// quadrature paths are provided: a 2-D product rule in (cos theta, phi) and a
// 1-D rule in cos theta with the phi direction collapsed into angular kernels.
#pragma once

#include <utility>

#include "defectforge/common.hpp"

namespace defectforge {

struct BinghamCoeffs {
  double f = 0.0;
  double g = 0.0;
};

// Partition value plus second/fourth-order statistics of rho_{f,g}:
//   <m1^2 - m2^2> = 2u,  <2 m3^2 - m1^2 - m2^2> = 6v,
//   a = 2<m1^2 m3^2>, b = 2<m2^2 m3^2>, h = 2<m1^2 m2^2>,
//   c = (sqrt3/2) Cov(m3^2 - 1/3, m1^2 - m2^2),
//   d = (3/2) Var(m3^2 - 1/3),  e = (1/2) Var(m1^2 - m2^2).
struct MomentSet {
  double z = 0.0;      // partition value (may overflow to inf near the cap)
  double log_z = 0.0;  // always finite; z == exp(log_z)
  double u = 0.0, v = 0.0;
  double a = 0.0, b = 0.0, h = 0.0;
  double c = 0.0, d = 0.0, e = 0.0;
};

enum class QuadScheme { ProductGauss2D, ThetaReduced1D };

struct QuadratureSpec {
  QuadScheme scheme = QuadScheme::ThetaReduced1D;
  int order = 64;  // nodes per dimension; >= 16 for acceptance-grade runs
};

MomentSet moments(const BinghamCoeffs& b, const QuadratureSpec& q = {});
MomentSet moments_theta_reduced(const BinghamCoeffs& b, const QuadratureSpec& q = {});

// Runs both paths and throws QUADRATURE_UNDERRESOLVED if any field disagrees
// beyond rel_tol (absolute floor 1e-13 on near-zero fields).
MomentSet moments_cross_checked(const BinghamCoeffs& b, const QuadratureSpec& q = {},
                                double rel_tol = 1e-9);

// Dispatch on q.scheme.
MomentSet moments_any(const BinghamCoeffs& b, const QuadratureSpec& q);

}  // namespace defectforge
