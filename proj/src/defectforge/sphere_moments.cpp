#include "defectforge/sphere_moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "defectforge/quadrature.hpp"

namespace defectforge {

namespace {

void check_cap(const BinghamCoeffs& b) {
  if (!(std::isfinite(b.f) && std::isfinite(b.g)) || std::abs(b.f) > kCoeffCap ||
      std::abs(b.g) > kCoeffCap)
    throw Error(ErrorCode::CapExceeded, "moments: |f| or |g| exceeds coefficient cap");
}

void check_order(const QuadratureSpec& q) {
  if (q.order < 4) throw Error(ErrorCode::UsageError, "quadrature order too small");
}

// Raw averaged integrals shared by both paths.  Each field is the integral of
// the named observable against exp(E - shift); `base` carries the normalizer.
struct RawSums {
  double shift = 0.0;
  Kahan base;       // 1
  Kahan p1;         // m1^2 - m2^2
  Kahan p2;         // 3 m3^2 - 1
  Kahan m13;        // m1^2 m3^2
  Kahan m23;        // m2^2 m3^2
  Kahan m12;        // m1^2 m2^2
  Kahan pp;         // (m1^2 - m2^2)^2
  Kahan p3p;        // (m3^2 - 1/3)(m1^2 - m2^2)
  Kahan p33;        // (m3^2 - 1/3)^2
};

// Centered covariances are formed once here so their prefactors live in a
// single place.
MomentSet finalize(const RawSums& s) {
  MomentSet m;
  const double z0 = s.base.value();
  m.log_z = s.shift + std::log(z0);
  m.z = std::exp(m.log_z);
  m.u = s.p1.value() / z0 / 2.0;
  m.v = s.p2.value() / z0 / 6.0;
  m.a = 2.0 * s.m13.value() / z0;
  m.b = 2.0 * s.m23.value() / z0;
  m.h = 2.0 * s.m12.value() / z0;
  const double mean_p1 = 2.0 * m.u;       // <m1^2 - m2^2>
  const double mean_c3 = 2.0 * m.v;       // <m3^2 - 1/3>
  m.c = std::numbers::sqrt3 / 2.0 * (s.p3p.value() / z0 - mean_c3 * mean_p1);
  m.d = 1.5 * (s.p33.value() / z0 - mean_c3 * mean_c3);
  m.e = 0.5 * (s.pp.value() / z0 - mean_p1 * mean_p1);
  return m;
}

}  // namespace

MomentSet moments(const BinghamCoeffs& b, const QuadratureSpec& q) {
  check_cap(b);
  check_order(q);
  const GaussRule& gt = gauss_legendre(q.order);
  const GaussRule& gp = gauss_legendre(q.order);

  // Exponent E(t, phi) = f (1 - t^2) cos 2phi + g (3 t^2 - 1), t = cos theta.
  // Shift by the max over nodes before exponentiating.
  const double pi = std::numbers::pi;
  double shift = -1e300;
  for (int i = 0; i < q.order; ++i) {
    double t = gt.x[i];
    double eg = b.g * (3.0 * t * t - 1.0);
    shift = std::max(shift, eg + std::abs(b.f) * (1.0 - t * t));
  }

  RawSums s;
  s.shift = shift;
  for (int i = 0; i < q.order; ++i) {
    const double t = gt.x[i];
    const double t2 = t * t;
    const double st2 = 1.0 - t2;  // sin^2 theta
    const double eg = b.g * (3.0 * t2 - 1.0);
    for (int j = 0; j < q.order; ++j) {
      const double phi = pi * (gp.x[j] + 1.0);  // map [-1,1] -> [0, 2pi]
      const double c2 = std::cos(2.0 * phi);
      const double w = gt.w[i] * gp.w[j] * pi;
      const double e = w * std::exp(eg + b.f * st2 * c2 - shift);
      const double m1sq = st2 * (1.0 + c2) / 2.0;
      const double m2sq = st2 * (1.0 - c2) / 2.0;
      const double p1 = st2 * c2;  // m1^2 - m2^2
      s.base.add(e);
      s.p1.add(e * p1);
      s.p2.add(e * (3.0 * t2 - 1.0));
      s.m13.add(e * m1sq * t2);
      s.m23.add(e * m2sq * t2);
      s.m12.add(e * m1sq * m2sq);
      s.pp.add(e * p1 * p1);
      s.p3p.add(e * (t2 - 1.0 / 3.0) * p1);
      s.p33.add(e * (t2 - 1.0 / 3.0) * (t2 - 1.0 / 3.0));
    }
  }
  return finalize(s);
}

MomentSet moments_theta_reduced(const BinghamCoeffs& b, const QuadratureSpec& q) {
  check_cap(b);
  check_order(q);
  const GaussRule& gt = gauss_legendre(q.order);

  // Per t-node the phi integral collapses onto the kernels
  //   k0 + k1 terms: Int (1, cos 2phi, cos 4phi) exp(f sin^2th cos 2phi) dphi,
  // scaled by e^{-|x|} with x = f sin^2 theta.  The remaining exponent is
  // g (3t^2 - 1) + |x|, shifted by its max over nodes.
  double shift = -1e300;
  for (int i = 0; i < q.order; ++i) {
    double t2 = gt.x[i] * gt.x[i];
    shift = std::max(shift, b.g * (3.0 * t2 - 1.0) + std::abs(b.f) * (1.0 - t2));
  }

  RawSums s;
  s.shift = shift;
  for (int i = 0; i < q.order; ++i) {
    const double t2 = gt.x[i] * gt.x[i];
    const double st2 = 1.0 - t2;
    const double x = b.f * st2;
    const AngularKernels k = angular_kernels_scaled(x);
    const double w = gt.w[i] * std::exp(b.g * (3.0 * t2 - 1.0) + std::abs(x) - shift);
    // phi-averages of the observables against exp(x cos 2phi):
    //   m1^2 - m2^2        -> st2 k1
    //   (m1^2 - m2^2)^2    -> st2^2 (k0 + k2)/2
    //   m1^2 m3^2          -> t2 st2 (k0 + k1)/2
    //   m2^2 m3^2          -> t2 st2 (k0 - k1)/2
    //   m1^2 m2^2          -> st2^2 (k0 - k2)/8
    s.base.add(w * k.k0);
    s.p1.add(w * st2 * k.k1);
    s.p2.add(w * (3.0 * t2 - 1.0) * k.k0);
    s.m13.add(w * t2 * st2 * (k.k0 + k.k1) / 2.0);
    s.m23.add(w * t2 * st2 * (k.k0 - k.k1) / 2.0);
    s.m12.add(w * st2 * st2 * (k.k0 - k.k2) / 8.0);
    s.pp.add(w * st2 * st2 * (k.k0 + k.k2) / 2.0);
    s.p3p.add(w * (t2 - 1.0 / 3.0) * st2 * k.k1);
    s.p33.add(w * (t2 - 1.0 / 3.0) * (t2 - 1.0 / 3.0) * k.k0);
  }
  return finalize(s);
}

MomentSet moments_any(const BinghamCoeffs& b, const QuadratureSpec& q) {
  return q.scheme == QuadScheme::ProductGauss2D ? moments(b, q) : moments_theta_reduced(b, q);
}

MomentSet moments_cross_checked(const BinghamCoeffs& b, const QuadratureSpec& q, double rel_tol) {
  MomentSet m2d = moments(b, q);
  MomentSet m1d = moments_theta_reduced(b, q);
  auto close = [&](double x, double y) {
    return std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y)) + 1e-13;
  };
  bool ok = close(m2d.log_z, m1d.log_z) && close(m2d.u, m1d.u) && close(m2d.v, m1d.v) &&
            close(m2d.a, m1d.a) && close(m2d.b, m1d.b) && close(m2d.h, m1d.h) &&
            close(m2d.c, m1d.c) && close(m2d.d, m1d.d) && close(m2d.e, m1d.e);
  if (!ok)
    throw Error(ErrorCode::QuadratureUnderresolved,
                "moments: product and theta-reduced paths disagree at order " +
                    std::to_string(q.order) + "; raise the order");
  return m1d;
}

}  // namespace defectforge
