#include "sbeam/cmatrix.hpp"

#include <cmath>

#include "sbeam/errors.hpp"

namespace sbeam {

CMatrix CMatrix::identity(std::size_t n) { return identity(n, n); }

CMatrix CMatrix::identity(std::size_t rows, std::size_t cols) {
  CMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows && i < cols; ++i) m.at(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c)
      out.at(c, r) = std::conj(at(r, c));
  return out;
}

CMatrix CMatrix::transpose() const {
  CMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out.at(c, r) = at(r, c);
  return out;
}

CMatrix CMatrix::conj() const {
  CMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i)
    out.data_[i] = std::conj(data_[i]);
  return out;
}

CMatrix CMatrix::operator*(const CMatrix& rhs) const {
  if (cols_ != rhs.rows_)
    throw InvalidInput("matrix product dimension mismatch");
  CMatrix out(rows_, rhs.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const cplx a = at(r, k);
      if (a == cplx(0.0, 0.0)) continue;
      const cplx* brow = &rhs.data_[k * rhs.cols_];
      cplx* orow = &out.data_[r * rhs.cols_];
      for (std::size_t c = 0; c < rhs.cols_; ++c) orow[c] += a * brow[c];
    }
  }
  return out;
}

CMatrix CMatrix::operator+(const CMatrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
    throw InvalidInput("matrix sum dimension mismatch");
  CMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i)
    out.data_[i] = data_[i] + rhs.data_[i];
  return out;
}

CMatrix CMatrix::operator-(const CMatrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
    throw InvalidInput("matrix difference dimension mismatch");
  CMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i)
    out.data_[i] = data_[i] - rhs.data_[i];
  return out;
}

CMatrix CMatrix::operator*(cplx scalar) const {
  CMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i)
    out.data_[i] = data_[i] * scalar;
  return out;
}

std::vector<cplx> CMatrix::apply(const std::vector<cplx>& x) const {
  if (x.size() != cols_) throw InvalidInput("matrix-vector size mismatch");
  std::vector<cplx> y(rows_, cplx(0.0, 0.0));
  for (std::size_t r = 0; r < rows_; ++r) {
    cplx acc(0.0, 0.0);
    const cplx* row = &data_[r * cols_];
    for (std::size_t c = 0; c < cols_; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

CMatrix CMatrix::col(std::size_t c) const { return cols_block(c, 1); }

CMatrix CMatrix::cols_block(std::size_t first, std::size_t count) const {
  if (first + count > cols_) throw InvalidInput("column block out of range");
  CMatrix out(rows_, count);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < count; ++c) out.at(r, c) = at(r, first + c);
  return out;
}

void CMatrix::set_col(std::size_t c, const CMatrix& column) {
  if (column.rows() != rows_ || column.cols() != 1 || c >= cols_)
    throw InvalidInput("set_col dimension mismatch");
  for (std::size_t r = 0; r < rows_; ++r) at(r, c) = column.at(r, 0);
}

double CMatrix::frobenius() const {
  double s = 0.0;
  for (const cplx& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

double CMatrix::max_abs() const {
  double m = 0.0;
  for (const cplx& v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool CMatrix::all_finite() const {
  for (const cplx& v : data_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

double CMatrix::orthonormality_residual() const {
  double worst = 0.0;
  for (std::size_t a = 0; a < cols_; ++a) {
    for (std::size_t b = a; b < cols_; ++b) {
      cplx dot(0.0, 0.0);
      for (std::size_t r = 0; r < rows_; ++r)
        dot += std::conj(at(r, a)) * at(r, b);
      const cplx want = (a == b) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
      worst = std::max(worst, std::abs(dot - want));
    }
  }
  return worst;
}

CMatrix solve_hermitian(const CMatrix& g, const CMatrix& b) {
  const std::size_t n = g.rows();
  if (g.cols() != n || b.rows() != n)
    throw InvalidInput("solve_hermitian dimension mismatch");

  CMatrix a = g;
  CMatrix x = b;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a.at(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a.at(r, col)) > best) {
        best = std::abs(a.at(r, col));
        pivot = r;
      }
    }
    if (best == 0.0) throw InvalidInput("singular matrix in solve_hermitian");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a.at(col, c), a.at(pivot, c));
      for (std::size_t c = 0; c < x.cols(); ++c)
        std::swap(x.at(col, c), x.at(pivot, c));
    }
    const cplx inv = 1.0 / a.at(col, col);
    for (std::size_t c = 0; c < n; ++c) a.at(col, c) *= inv;
    for (std::size_t c = 0; c < x.cols(); ++c) x.at(col, c) *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const cplx f = a.at(r, col);
      if (f == cplx(0.0, 0.0)) continue;
      for (std::size_t c = 0; c < n; ++c) a.at(r, c) -= f * a.at(col, c);
      for (std::size_t c = 0; c < x.cols(); ++c)
        x.at(r, c) -= f * x.at(col, c);
    }
  }
  return x;
}

}  // namespace sbeam
