// Symmetric banded matrices with LDL^T factorization (no pivoting; callers
// keep shifts away from exact singularity) and inertia counts.
#pragma once

#include <cstdint>
#include <vector>

namespace defectforge {

// Storage: diagonals d = 0..bw, entry (i, i+d) at diag(d)[i].
class BandedSym {
 public:
  BandedSym() = default;
  BandedSym(int n, int bw) : n_(n), bw_(bw), data_((bw + 1) * static_cast<std::size_t>(n), 0.0) {}

  int n() const { return n_; }
  int bandwidth() const { return bw_; }

  double& at(int i, int j);          // requires |i - j| <= bw; symmetric access
  double get(int i, int j) const;    // 0 outside the band
  void add(int i, int j, double v);  // accumulate, symmetric

  void mul(const std::vector<double>& x, std::vector<double>& y) const;  // y = A x
  double quad(const std::vector<double>& x) const;                       // x^T A x
  double max_abs_diag() const;
  double symmetry_defect() const;  // always 0 by construction; kept for report plumbing

  const std::vector<double>& raw() const { return data_; }

 private:
  int n_ = 0;
  int bw_ = 0;
  std::vector<double> data_;
  friend class BandedLDLT;
};

struct LDLTResult {
  bool ok = false;          // no vanishing pivot encountered
  int negative_pivots = 0;  // inertia: # eigenvalues below the shift
};

class BandedLDLT {
 public:
  // Factor A in banded form; returns pivot signs.  `a` is not modified.
  LDLTResult factor(const BandedSym& a);
  void solve(std::vector<double>& b) const;  // in place

 private:
  int n_ = 0;
  int bw_ = 0;
  std::vector<double> l_;  // unit lower triangle, banded (diag d = 1..bw)
  std::vector<double> d_;
};

}  // namespace defectforge
