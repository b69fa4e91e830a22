// Inversion of the moment map: given (u, v) with u F1 + v F2 inside the
// physical eigenvalue region, find the unique exponent pair (f, g) whose
// density reproduces them, plus the exact Jacobian of both maps.
#pragma once

#include <vector>

#include "defectforge/sphere_moments.hpp"

namespace defectforge {

struct OrderParams {
  double u = 0.0;
  double v = 0.0;
};

// Eigenvalues of u F1 + v F2 are (u - v, -u - v, 2v); each must lie in
// (-1/3, 2/3).  `margin` is the distance kept from either end.
bool in_physical_region(const OrderParams& p, double margin = 0.0);
void require_physical(const OrderParams& p, double margin = 1e-9);

// Jacobian of the inverse map (f, g) as a function of (u, v):
//   f_u = d/(de - c^2)               f_v = -sqrt3 c/(de - c^2)
//   g_u = -c/(sqrt3 (de - c^2))      g_v = e/(de - c^2)
struct ClosureJacobian {
  double f_u = 0.0, f_v = 0.0, g_u = 0.0, g_v = 0.0;
};

struct NewtonStep {
  int iter = 0;
  double residual = 0.0;  // max-abs moment mismatch after the step
  double step_scale = 1.0;
  int halvings = 0;
};

struct SolveTrace {
  std::vector<NewtonStep> steps;
  BinghamCoeffs result;
  double residual = 0.0;
  bool converged = false;
};

struct InvertOptions {
  double tol = 1e-12;  // absolute tolerance on the (u, v) mismatch
  int max_iter = 50;
  double margin = 1e-9;
  QuadratureSpec quad = {};
};

BinghamCoeffs invert(const OrderParams& target, const InvertOptions& opt = {});

// Same Newton iteration with the per-iteration log kept.
SolveTrace solve_trace(const OrderParams& target, const InvertOptions& opt = {});

ClosureJacobian jacobian(const BinghamCoeffs& b, const QuadratureSpec& q = {});
ClosureJacobian jacobian_from_moments(const MomentSet& m);

// In-place damped Newton refinement from a warm start; `m` is kept matched to
// `b`.  Returns false on stall or cap violation instead of throwing (hot-loop
// variant used by the profile solver).
bool refine_closure(BinghamCoeffs& b, MomentSet& m, const OrderParams& target,
                    const QuadratureSpec& quad, double tol = 1e-12, int max_iter = 40);

}  // namespace defectforge
