// Graded radial grids on (0, R] plus the nonuniform differentiation helpers
// shared by the residual and identity checks.
#pragma once

#include <vector>

namespace defectforge {

enum class Grading { GeometricNearZero, Uniform };

struct RadialGrid {
  std::vector<double> r;  // r[0] > 0, strictly increasing, r.back() == domain end
  Grading grading = Grading::GeometricNearZero;
  bool truncated_infinite = false;  // domain stands in for R = infinity
  double domain_end() const { return r.back(); }
  int n() const { return static_cast<int>(r.size()); }
};

// Finite-domain grid: geometric cells (ratio 1.08) from ~h/100 near the
// origin, then uniform cells of size h.  Uniform grading skips the graded lead.
RadialGrid make_radial_grid(double R, int nodes, Grading grading = Grading::GeometricNearZero);

// Log-uniform grid for truncated infinite domains; first node at r_first.
RadialGrid make_log_grid(double r_eff, int nodes, double r_first = 1e-3);

// Second-order first/second derivative at interior nodes of a nonuniform grid
// (3-point stencils); one-sided at the ends.
void derivatives_3pt(const std::vector<double>& r, const std::vector<double>& y,
                     std::vector<double>& dy, std::vector<double>& d2y);

// Third derivative via the exactly-interpolating quartic through the nearest
// five nodes (second order on smooth gradings).
void third_derivative_5pt(const std::vector<double>& r, const std::vector<double>& y,
                          std::vector<double>& d3y);

// Natural cubic spline with O(h^2)-accurate first/second derivatives.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);
  double value(double t) const;
  double deriv(double t) const;
  double deriv2(double t) const;
  double deriv3(double t) const;  // piecewise constant
 private:
  int cell(double t) const;
  std::vector<double> x_, y_, m_;  // m = second derivatives at nodes
};

}  // namespace defectforge
