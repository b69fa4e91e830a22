#include "defectforge/bingham_closure.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace defectforge {

namespace {
constexpr double kLo = -1.0 / 3.0;
constexpr double kHi = 2.0 / 3.0;
}  // namespace

bool in_physical_region(const OrderParams& p, double margin) {
  const double lam[3] = {p.u - p.v, -p.u - p.v, 2.0 * p.v};
  for (double l : lam)
    if (!(l >= kLo + margin && l <= kHi - margin)) return false;
  return true;
}

void require_physical(const OrderParams& p, double margin) {
  if (!in_physical_region(p, margin))
    throw Error(ErrorCode::OutOfPhysicalRegion,
                "(u, v) eigenvalues leave the physical region (margin " + std::to_string(margin) +
                    ")");
}

ClosureJacobian jacobian_from_moments(const MomentSet& m) {
  const double delta = m.d * m.e - m.c * m.c;
  ClosureJacobian j;
  j.f_u = m.d / delta;
  j.f_v = -std::numbers::sqrt3 * m.c / delta;
  j.g_u = -m.c / (std::numbers::sqrt3 * delta);
  j.g_v = m.e / delta;
  return j;
}

ClosureJacobian jacobian(const BinghamCoeffs& b, const QuadratureSpec& q) {
  return jacobian_from_moments(moments_theta_reduced(b, q));
}

namespace {

SolveTrace newton_invert(const OrderParams& target, const InvertOptions& opt, bool keep_trace) {
  require_physical(target, opt.margin);

  SolveTrace trace;
  // Linearization at the isotropic state: f_u = g_v = 15/2 there.
  BinghamCoeffs b{7.5 * target.u, 7.5 * target.v};
  MomentSet m = moments_any(b, opt.quad);
  auto resid = [&](const MomentSet& ms) {
    return std::max(std::abs(ms.u - target.u), std::abs(ms.v - target.v));
  };
  double r = resid(m);

  for (int it = 0; it < opt.max_iter && r > opt.tol; ++it) {
    // Forward-map Jacobian d(u,v)/d(f,g) = [[e, sqrt3 c], [c/sqrt3, d]].
    const double ju_f = m.e, ju_g = std::numbers::sqrt3 * m.c;
    const double jv_f = m.c / std::numbers::sqrt3, jv_g = m.d;
    const double det = ju_f * jv_g - ju_g * jv_f;  // = de - c^2 > 0
    const double ru = target.u - m.u, rv = target.v - m.v;
    const double df = (jv_g * ru - ju_g * rv) / det;
    const double dg = (-jv_f * ru + ju_f * rv) / det;

    // Damping: halve until the residual drops (full step wins near the root).
    double scale = 1.0;
    int halvings = 0;
    BinghamCoeffs b_new;
    MomentSet m_new;
    double r_new = r;
    for (; halvings <= 8; ++halvings, scale *= 0.5) {
      b_new = {b.f + scale * df, b.g + scale * dg};
      if (std::abs(b_new.f) > kCoeffCap || std::abs(b_new.g) > kCoeffCap) continue;
      m_new = moments_any(b_new, opt.quad);
      r_new = resid(m_new);
      if (r_new < r) break;
    }
    if (r_new >= r) {
      trace.result = b;
      trace.residual = r;
      trace.converged = false;
      throw Error(ErrorCode::NoConvergence,
                  "invert: stalled at residual " + std::to_string(r) +
                      " (margin too small or tolerance below quadrature accuracy)");
    }
    b = b_new;
    m = m_new;
    r = r_new;
    if (keep_trace) trace.steps.push_back({it, r, scale, halvings});
  }

  trace.result = b;
  trace.residual = r;
  trace.converged = r <= opt.tol;
  if (!trace.converged)
    throw Error(ErrorCode::NoConvergence,
                "invert: residual " + std::to_string(r) + " after " +
                    std::to_string(opt.max_iter) + " iterations");
  return trace;
}

}  // namespace

BinghamCoeffs invert(const OrderParams& target, const InvertOptions& opt) {
  return newton_invert(target, opt, false).result;
}

bool refine_closure(BinghamCoeffs& b, MomentSet& m, const OrderParams& target,
                    const QuadratureSpec& quad, double tol, int max_iter) {
  auto resid = [&](const MomentSet& ms) {
    return std::max(std::abs(ms.u - target.u), std::abs(ms.v - target.v));
  };
  double r = resid(m);
  for (int it = 0; it < max_iter && r > tol; ++it) {
    const double det = m.e * m.d - m.c * m.c;
    if (!(det > 0.0)) return false;
    const double ru = target.u - m.u, rv = target.v - m.v;
    const double df = (m.d * ru - std::numbers::sqrt3 * m.c * rv) / det;
    const double dg = (-m.c / std::numbers::sqrt3 * ru + m.e * rv) / det;
    double scale = 1.0;
    bool moved = false;
    for (int halvings = 0; halvings <= 8; ++halvings, scale *= 0.5) {
      BinghamCoeffs bn{b.f + scale * df, b.g + scale * dg};
      if (std::abs(bn.f) > kCoeffCap || std::abs(bn.g) > kCoeffCap) continue;
      MomentSet mn = moments_any(bn, quad);
      if (resid(mn) < r) {
        b = bn;
        m = mn;
        r = resid(mn);
        moved = true;
        break;
      }
    }
    if (!moved) return false;
  }
  return r <= tol;
}

SolveTrace solve_trace(const OrderParams& target, const InvertOptions& opt) {
  return newton_invert(target, opt, true);
}

}  // namespace defectforge
