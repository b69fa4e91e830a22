#include "defectforge/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "defectforge/common.hpp"

namespace defectforge {

namespace {

BandedSym shifted(const BandedSym& a, const BandedSym& b, double lambda) {
  const int bw = std::max(a.bandwidth(), b.bandwidth());
  BandedSym s(a.n(), bw);
  for (int i = 0; i < a.n(); ++i)
    for (int j = i; j <= std::min(a.n() - 1, i + bw); ++j) {
      double v = a.get(i, j) - lambda * b.get(i, j);
      if (v != 0.0) s.at(i, j) = v;
    }
  return s;
}

int count_below(const BandedSym& a, const BandedSym& b, double lambda) {
  BandedLDLT f;
  LDLTResult r = f.factor(shifted(a, b, lambda));
  if (!r.ok) {
    // Hit a (near-)zero pivot: nudge the shift by one ulp-scale step.
    double eps = 1e-11 * (std::abs(lambda) + 1.0);
    r = f.factor(shifted(a, b, lambda + eps));
  }
  return r.negative_pivots;
}

}  // namespace

int eigen_count_below(const BandedSym& a, const BandedSym& b, double lambda) {
  return count_below(a, b, lambda);
}

std::vector<EigenPair> smallest_eigenpairs(const BandedSym& a, const BandedSym& b,
                                           const EigenOptions& opt) {
  const int n = a.n();
  const int nev = std::min(opt.nev, n);

  // Scale from unit-vector Rayleigh quotients.
  double scale = 1.0;
  for (int i = 0; i < n; ++i) {
    double bi = b.get(i, i);
    if (bi > 0.0) scale = std::max(scale, std::abs(a.get(i, i)) / bi);
  }

  double lo = -scale, hi = scale;
  for (int it = 0; it < opt.max_expand && count_below(a, b, lo) > 0; ++it) lo *= 4.0;
  for (int it = 0; it < opt.max_expand && count_below(a, b, hi) < nev; ++it) hi *= 4.0;

  // Bisect for the k-th smallest eigenvalue, k = 1..nev.
  std::vector<double> values(nev);
  for (int k = 1; k <= nev; ++k) {
    double a0 = lo, b0 = hi;
    while (b0 - a0 > opt.bisect_rel_tol * std::max(1.0, std::abs(a0) + std::abs(b0))) {
      double mid = 0.5 * (a0 + b0);
      if (count_below(a, b, mid) >= k)
        b0 = mid;
      else
        a0 = mid;
    }
    values[k - 1] = 0.5 * (a0 + b0);
  }

  // Inverse iteration per eigenvalue with a tiny relative shift-off.
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<EigenPair> out(nev);
  std::vector<double> x(n), y(n), bx(n);
  for (int k = 0; k < nev; ++k) {
    double sigma = values[k] - 1e-9 * (std::abs(values[k]) + 1.0);
    BandedLDLT f;
    LDLTResult fr = f.factor(shifted(a, b, sigma));
    for (int tries = 0; !fr.ok && tries < 4; ++tries) {
      sigma -= 1e-8 * (std::abs(values[k]) + 1.0);
      fr = f.factor(shifted(a, b, sigma));
    }
    for (int i = 0; i < n; ++i) x[i] = unif(rng);
    double lam = values[k];
    for (int it = 0; it < 8; ++it) {
      b.mul(x, y);
      f.solve(y);
      // B-normalize.
      b.mul(y, bx);
      double nb = 0.0;
      for (int i = 0; i < n; ++i) nb += y[i] * bx[i];
      nb = std::sqrt(std::max(nb, 1e-300));
      for (int i = 0; i < n; ++i) x[i] = y[i] / nb;
      // Rayleigh quotient.
      a.mul(x, y);
      double num = 0.0;
      for (int i = 0; i < n; ++i) num += x[i] * y[i];
      b.mul(x, bx);
      double den = 0.0;
      for (int i = 0; i < n; ++i) den += x[i] * bx[i];
      double lam_new = num / den;
      if (std::abs(lam_new - lam) <= 1e-14 * std::max(1.0, std::abs(lam_new)) && it >= 2) {
        lam = lam_new;
        break;
      }
      lam = lam_new;
    }
    out[k].value = lam;
    out[k].vector = x;
  }
  std::sort(out.begin(), out.end(),
            [](const EigenPair& p, const EigenPair& q) { return p.value < q.value; });
  return out;
}

double spd_smallest_eigenvalue(const BandedSym& b) {
  const int n = b.n();
  BandedSym ident(n, 0);
  for (int i = 0; i < n; ++i) ident.at(i, i) = 1.0;
  double hi = b.max_abs_diag() * (b.bandwidth() + 1.0) + 1.0;
  double lo = -hi;
  for (int k = 0; k < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++k) {
    double mid = 0.5 * (lo + hi);
    if (count_below(b, ident, mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace defectforge
