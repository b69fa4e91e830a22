#include "defectforge/radial_grid.hpp"

#include <algorithm>
#include <cmath>

#include "defectforge/common.hpp"

namespace defectforge {

RadialGrid make_radial_grid(double R, int nodes, Grading grading) {
  if (!(R > 0.0) || nodes < 16) throw Error(ErrorCode::UsageError, "bad grid parameters");
  RadialGrid g;
  g.grading = grading;
  g.r.reserve(nodes);
  if (grading == Grading::Uniform) {
    for (int i = 1; i <= nodes; ++i) g.r.push_back(R * i / nodes);
    return g;
  }
  // Graded lead: cells c0 * rho^j with rho = 1.08 from c0 = h/100 up to h,
  // then uniform h; h chosen so the total lands on R with `nodes` nodes.
  const double rho = 1.08;
  const int n_geo = static_cast<int>(std::ceil(std::log(100.0) / std::log(rho)));
  if (nodes <= n_geo + 8) throw Error(ErrorCode::UsageError, "too few nodes for graded grid");
  const double geo_factor = (std::pow(rho, n_geo) - 1.0) / (100.0 * (rho - 1.0));
  const double h = R / (nodes - n_geo + geo_factor);
  double r = 0.0;
  double cell = h / 100.0;
  for (int j = 0; j < n_geo; ++j) {
    r += cell;
    g.r.push_back(r);
    cell = std::min(cell * rho, h);
  }
  const int n_uni = nodes - n_geo;
  const double h_uni = (R - r) / n_uni;
  for (int i = 1; i <= n_uni; ++i) g.r.push_back(r + h_uni * i);
  g.r.back() = R;
  return g;
}

RadialGrid make_log_grid(double r_eff, int nodes, double r_first) {
  if (!(r_eff > r_first) || nodes < 16) throw Error(ErrorCode::UsageError, "bad log grid");
  RadialGrid g;
  g.grading = Grading::GeometricNearZero;
  g.truncated_infinite = true;
  const double ratio = std::pow(r_eff / r_first, 1.0 / (nodes - 1));
  if (ratio > 1.1)
    throw Error(ErrorCode::UsageError, "log grid ratio exceeds 1.1; raise the node count");
  g.r.resize(nodes);
  for (int i = 0; i < nodes; ++i) g.r[i] = r_first * std::pow(ratio, i);
  g.r.back() = r_eff;
  return g;
}

void derivatives_3pt(const std::vector<double>& r, const std::vector<double>& y,
                     std::vector<double>& dy, std::vector<double>& d2y) {
  const int n = static_cast<int>(r.size());
  dy.assign(n, 0.0);
  d2y.assign(n, 0.0);
  for (int i = 1; i + 1 < n; ++i) {
    const double hm = r[i] - r[i - 1], hp = r[i + 1] - r[i];
    dy[i] = (hm / hp * (y[i + 1] - y[i]) + hp / hm * (y[i] - y[i - 1])) / (hm + hp);
    d2y[i] = 2.0 * ((y[i + 1] - y[i]) / hp - (y[i] - y[i - 1]) / hm) / (hm + hp);
  }
  if (n >= 3) {
    // One-sided second-order ends.
    const double h0 = r[1] - r[0], h1 = r[2] - r[1];
    dy[0] = (-(2.0 * h0 + h1) * y[0] + (h0 + h1) * (h0 + h1) / h1 * y[1] -
             h0 * h0 / h1 * y[2]) /
            (h0 * (h0 + h1));
    d2y[0] = d2y[1];
    const double hn = r[n - 1] - r[n - 2], hn1 = r[n - 2] - r[n - 3];
    dy[n - 1] = ((2.0 * hn + hn1) * y[n - 1] - (hn + hn1) * (hn + hn1) / hn1 * y[n - 2] +
                 hn * hn / hn1 * y[n - 3]) /
                (hn * (hn + hn1));
    d2y[n - 1] = d2y[n - 2];
  }
}

namespace {

// Derivatives of the interpolating polynomial through (x[j], y[j]) at t,
// via repeated synthetic division of the Newton form.
void newton_poly_derivs(const double* x, const double* y, int m, double t, double out[4]) {
  double coef[8];
  double xs[8];
  for (int i = 0; i < m; ++i) {
    coef[i] = y[i];
    xs[i] = x[i];
  }
  for (int j = 1; j < m; ++j)
    for (int i = m - 1; i >= j; --i) coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j]);
  // Evaluate value and first three derivatives by nested multiplication.
  double d[4] = {coef[m - 1], 0.0, 0.0, 0.0};
  for (int i = m - 2; i >= 0; --i) {
    const double dx = t - xs[i];
    d[3] = d[3] * dx + 3.0 * d[2];
    d[2] = d[2] * dx + 2.0 * d[1];
    d[1] = d[1] * dx + d[0];
    d[0] = d[0] * dx + coef[i];
  }
  for (int i = 0; i < 4; ++i) out[i] = d[i];
}

}  // namespace

void third_derivative_5pt(const std::vector<double>& r, const std::vector<double>& y,
                          std::vector<double>& d3y) {
  const int n = static_cast<int>(r.size());
  d3y.assign(n, 0.0);
  if (n < 5) return;
  for (int i = 0; i < n; ++i) {
    int j0 = std::clamp(i - 2, 0, n - 5);
    double out[4];
    newton_poly_derivs(&r[j0], &y[j0], 5, r[i], out);
    d3y[i] = out[3];
  }
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const int n = static_cast<int>(x_.size());
  m_.assign(n, 0.0);
  if (n < 3) return;
  // Natural spline: tridiagonal solve for the interior second derivatives.
  std::vector<double> diag(n, 0.0), rhs(n, 0.0), sub(n, 0.0), sup(n, 0.0);
  for (int i = 1; i + 1 < n; ++i) {
    const double hm = x_[i] - x_[i - 1], hp = x_[i + 1] - x_[i];
    sub[i] = hm / 6.0;
    diag[i] = (hm + hp) / 3.0;
    sup[i] = hp / 6.0;
    rhs[i] = (y_[i + 1] - y_[i]) / hp - (y_[i] - y_[i - 1]) / hm;
  }
  for (int i = 2; i + 1 < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (int i = n - 2; i >= 1; --i)
    m_[i] = (rhs[i] - sup[i] * (i + 2 < n ? m_[i + 1] : 0.0)) / diag[i];
}

int CubicSpline::cell(double t) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  int i = static_cast<int>(it - x_.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
}

double CubicSpline::value(double t) const {
  const int i = cell(t);
  const double h = x_[i + 1] - x_[i], A = (x_[i + 1] - t) / h, B = (t - x_[i]) / h;
  return A * y_[i] + B * y_[i + 1] +
         ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::deriv(double t) const {
  const int i = cell(t);
  const double h = x_[i + 1] - x_[i], A = (x_[i + 1] - t) / h, B = (t - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h -
         (3.0 * A * A - 1.0) / 6.0 * h * m_[i] + (3.0 * B * B - 1.0) / 6.0 * h * m_[i + 1];
}

double CubicSpline::deriv2(double t) const {
  const int i = cell(t);
  const double h = x_[i + 1] - x_[i], A = (x_[i + 1] - t) / h, B = (t - x_[i]) / h;
  return A * m_[i] + B * m_[i + 1];
}

double CubicSpline::deriv3(double t) const {
  const int i = cell(t);
  return (m_[i + 1] - m_[i]) / (x_[i + 1] - x_[i]);
}

}  // namespace defectforge
