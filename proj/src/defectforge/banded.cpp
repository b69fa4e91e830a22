#include "defectforge/banded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace defectforge {

double& BandedSym::at(int i, int j) {
  if (i > j) std::swap(i, j);
  return data_[static_cast<std::size_t>(j - i) * n_ + i];
}

double BandedSym::get(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (j - i > bw_) return 0.0;
  return data_[static_cast<std::size_t>(j - i) * n_ + i];
}

void BandedSym::add(int i, int j, double v) { at(i, j) += v; }

void BandedSym::mul(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    double yi = data_[i] * x[i];
    const int jmax = std::min(n_ - 1, i + bw_);
    for (int j = i + 1; j <= jmax; ++j) {
      const double a = data_[static_cast<std::size_t>(j - i) * n_ + i];
      yi += a * x[j];
      y[j] += a * x[i];
    }
    y[i] += yi;
  }
}

double BandedSym::quad(const std::vector<double>& x) const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) {
    s += data_[i] * x[i] * x[i];
    const int jmax = std::min(n_ - 1, i + bw_);
    for (int j = i + 1; j <= jmax; ++j)
      s += 2.0 * data_[static_cast<std::size_t>(j - i) * n_ + i] * x[i] * x[j];
  }
  return s;
}

double BandedSym::max_abs_diag() const {
  double m = 0.0;
  for (int i = 0; i < n_; ++i) m = std::max(m, std::abs(data_[i]));
  return m;
}

double BandedSym::symmetry_defect() const { return 0.0; }

LDLTResult BandedLDLT::factor(const BandedSym& a) {
  n_ = a.n();
  bw_ = a.bandwidth();
  l_.assign(static_cast<std::size_t>(bw_ + 1) * n_, 0.0);
  d_.assign(n_, 0.0);
  auto lref = [&](int i, int j) -> double& {  // i > j, i - j <= bw
    return l_[static_cast<std::size_t>(i - j) * n_ + j];
  };

  LDLTResult res;
  res.ok = true;
  const double tiny = 1e-300;
  for (int j = 0; j < n_; ++j) {
    double dj = a.get(j, j);
    const int kmin = std::max(0, j - bw_);
    for (int k = kmin; k < j; ++k) {
      const double ljk = lref(j, k);
      dj -= ljk * ljk * d_[k];
    }
    if (std::abs(dj) < tiny) {
      res.ok = false;
      dj = (dj < 0.0 ? -tiny : tiny);
    }
    if (dj < 0.0) ++res.negative_pivots;
    d_[j] = dj;
    const int imax = std::min(n_ - 1, j + bw_);
    for (int i = j + 1; i <= imax; ++i) {
      double s = a.get(i, j);
      const int k0 = std::max(0, i - bw_);
      for (int k = k0; k < j; ++k) s -= lref(i, k) * lref(j, k) * d_[k];
      lref(i, j) = s / dj;
    }
  }
  return res;
}

void BandedLDLT::solve(std::vector<double>& b) const {
  auto lval = [&](int i, int j) { return l_[static_cast<std::size_t>(i - j) * n_ + j]; };
  for (int j = 0; j < n_; ++j) {
    const int imax = std::min(n_ - 1, j + bw_);
    for (int i = j + 1; i <= imax; ++i) b[i] -= lval(i, j) * b[j];
  }
  for (int i = 0; i < n_; ++i) b[i] /= d_[i];
  for (int j = n_ - 1; j >= 0; --j) {
    const int imax = std::min(n_ - 1, j + bw_);
    for (int i = j + 1; i <= imax; ++i) b[j] -= lval(i, j) * b[i];
  }
}

}  // namespace defectforge
