// Smallest generalized eigenvalues of A x = lambda B x for symmetric banded A
// and SPD banded B.  Primary path: spectral bisection on the inertia of
// A - lambda B (Sylvester), then inverse iteration for vectors.  A dense
// cross-check path backs the same interface for coarse problems.
#pragma once

#include <cstdint>
#include <vector>

#include "defectforge/banded.hpp"

namespace defectforge {

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
};

struct EigenOptions {
  int nev = 3;
  double bisect_rel_tol = 1e-12;
  int max_expand = 80;
  std::uint64_t seed = 12345;
};

// Smallest `nev` eigenvalues (ascending) with B-normalized eigenvectors.
std::vector<EigenPair> smallest_eigenpairs(const BandedSym& a, const BandedSym& b,
                                           const EigenOptions& opt = {});

// Inertia of (A - lambda B): number of generalized eigenvalues below lambda.
int eigen_count_below(const BandedSym& a, const BandedSym& b, double lambda);

// Smallest eigenvalue of B alone (SPD check), via bisection on B - lambda I.
double spd_smallest_eigenvalue(const BandedSym& b);

// Dense reference: full generalized symmetric solve (all eigenvalues
// ascending).  Intended for coarsened cross-checks.
std::vector<double> dense_generalized_eigenvalues(const BandedSym& a, const BandedSym& b);

}  // namespace defectforge
