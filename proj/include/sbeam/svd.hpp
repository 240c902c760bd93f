/**
 * @file svd.hpp
 * @brief Singular value decomposition for small dense complex matrices.
 */
#ifndef SBEAM_SVD_HPP
#define SBEAM_SVD_HPP

#include <vector>

#include "sbeam/cmatrix.hpp"

namespace sbeam {

struct SvdResult {
  CMatrix u;                  ///< m x m unitary
  std::vector<double> sigma;  ///< min(m, n) non-negative, non-increasing
  CMatrix vdag;               ///< n x n unitary, stored as V-dagger

  /// Right singular vectors as columns (adjoint of vdag).
  CMatrix v() const { return vdag.adjoint(); }
};

/// One-sided Jacobi SVD: a = u * diag(sigma) * vdag.
///
/// Right singular vectors are phase-canonical: each column of V is rotated so
/// its largest-magnitude entry is real non-negative (ties broken by lowest
/// index), with the paired U column rotated to compensate. An all-zero input
/// returns sigma = 0 with u and v set to identity. Throws InvalidInput on
/// empty or non-finite input.
SvdResult svd(const CMatrix& a);

}  // namespace sbeam

#endif  // SBEAM_SVD_HPP
