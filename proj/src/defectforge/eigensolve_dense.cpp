// Dense reference path, kept in its own TU so Eigen stays out of the hot
// headers.
#include <Eigen/Dense>

#include "defectforge/eigensolve.hpp"

namespace defectforge {

std::vector<double> dense_generalized_eigenvalues(const BandedSym& a, const BandedSym& b) {
  const int n = a.n();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n), B = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j <= std::min(n - 1, i + std::max(a.bandwidth(), b.bandwidth())); ++j) {
      A(i, j) = A(j, i) = a.get(i, j);
      B(i, j) = B(j, i) = b.get(i, j);
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::EigenvaluesOnly);
  std::vector<double> vals(es.eigenvalues().data(), es.eigenvalues().data() + n);
  return vals;
}

}  // namespace defectforge
