/**
 * @file cmatrix.hpp
 * @brief Dense complex matrix with the handful of kernels the pipeline needs.
 */
#ifndef SBEAM_CMATRIX_HPP
#define SBEAM_CMATRIX_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace sbeam {

using cplx = std::complex<double>;

/// Row-major dense complex matrix. Dimensions here never exceed a few
/// hundred, so everything is plain loops over contiguous storage.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, cplx(0.0, 0.0)) {}

  static CMatrix identity(std::size_t n);
  /// n x m generalized identity (ones on the main diagonal).
  static CMatrix identity(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  cplx& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& at(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  cplx& operator()(std::size_t r, std::size_t c) { return at(r, c); }
  const cplx& operator()(std::size_t r, std::size_t c) const {
    return at(r, c);
  }

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  CMatrix adjoint() const;
  CMatrix transpose() const;
  CMatrix conj() const;

  CMatrix operator*(const CMatrix& rhs) const;
  CMatrix operator+(const CMatrix& rhs) const;
  CMatrix operator-(const CMatrix& rhs) const;
  CMatrix operator*(cplx scalar) const;

  /// Matrix-vector product (x.size() must equal cols()).
  std::vector<cplx> apply(const std::vector<cplx>& x) const;

  CMatrix col(std::size_t c) const;
  /// Columns [first, first + count).
  CMatrix cols_block(std::size_t first, std::size_t count) const;
  void set_col(std::size_t c, const CMatrix& column);

  double frobenius() const;
  /// Largest entry magnitude.
  double max_abs() const;
  bool all_finite() const;

  /// max_rc |(A'A - I)_rc|, the column-orthonormality residual.
  double orthonormality_residual() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Solve G * X = B for Hermitian positive-definite G via Gauss-Jordan with
/// partial pivoting. Throws InvalidInput on dimension mismatch or a
/// numerically zero pivot.
CMatrix solve_hermitian(const CMatrix& g, const CMatrix& b);

}  // namespace sbeam

#endif  // SBEAM_CMATRIX_HPP
