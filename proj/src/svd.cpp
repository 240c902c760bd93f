#include "sbeam/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sbeam/errors.hpp"

namespace sbeam {

namespace {

constexpr double kRelTol = 1e-14;  // off-diagonal Gram convergence threshold
constexpr int kMaxSweeps = 60;

// One-sided Jacobi on the columns of a (rows >= cols). Returns the rotated
// column matrix in `b` and the accumulated right rotations in `v`.
void jacobi_sweeps(CMatrix& b, CMatrix& v) {
  const std::size_t m = b.rows();
  const std::size_t n = b.cols();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0;
        cplx gamma(0.0, 0.0);
        for (std::size_t r = 0; r < m; ++r) {
          alpha += std::norm(b.at(r, p));
          beta += std::norm(b.at(r, q));
          gamma += std::conj(b.at(r, p)) * b.at(r, q);
        }
        const double g = std::abs(gamma);
        if (g <= kRelTol * std::sqrt(alpha * beta) || g == 0.0) continue;
        rotated = true;

        // Phase-align the pair, then the classic real Jacobi rotation.
        const cplx phase = gamma / g;  // e^{i theta}
        const double tau = (beta - alpha) / (2.0 * g);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const cplx conj_phase = std::conj(phase);

        for (std::size_t r = 0; r < m; ++r) {
          const cplx bp = b.at(r, p);
          const cplx bq = b.at(r, q);
          b.at(r, p) = c * bp - s * conj_phase * bq;
          b.at(r, q) = s * bp + c * conj_phase * bq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const cplx vp = v.at(r, p);
          const cplx vq = v.at(r, q);
          v.at(r, p) = c * vp - s * conj_phase * vq;
          v.at(r, q) = s * vp + c * conj_phase * vq;
        }
      }
    }
    if (!rotated) break;
  }
}

// Fill the columns of u flagged in `missing` with an orthonormal completion
// built from identity candidates (two Gram-Schmidt passes).
void complete_basis(CMatrix& u, std::vector<bool>& missing) {
  const std::size_t m = u.rows();
  std::size_t candidate = 0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!missing[j]) continue;
    while (candidate < m) {
      std::vector<cplx> w(m, cplx(0.0, 0.0));
      w[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < m; ++k) {
          if (missing[k]) continue;
          cplx dot(0.0, 0.0);
          for (std::size_t r = 0; r < m; ++r)
            dot += std::conj(u.at(r, k)) * w[r];
          for (std::size_t r = 0; r < m; ++r) w[r] -= dot * u.at(r, k);
        }
      }
      double nrm = 0.0;
      for (const cplx& x : w) nrm += std::norm(x);
      nrm = std::sqrt(nrm);
      ++candidate;
      if (nrm > 0.25) {
        for (std::size_t r = 0; r < m; ++r) u.at(r, j) = w[r] / nrm;
        missing[j] = false;
        break;
      }
    }
  }
}

// SVD for rows >= cols, no phase canonicalization.
void svd_tall(const CMatrix& a, CMatrix& u, std::vector<double>& sigma,
              CMatrix& v) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  CMatrix b = a;
  v = CMatrix::identity(n);
  jacobi_sweeps(b, v);

  // Column norms are the (unsorted) singular values.
  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += std::norm(b.at(r, j));
    norms[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  sigma.assign(n, 0.0);
  u = CMatrix(m, m);
  CMatrix v_sorted(n, n);
  std::vector<bool> missing(m, true);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    sigma[j] = norms[src];
    for (std::size_t r = 0; r < n; ++r) v_sorted.at(r, j) = v.at(r, src);
    if (norms[src] > 0.0) {
      for (std::size_t r = 0; r < m; ++r)
        u.at(r, j) = b.at(r, src) / norms[src];
      missing[j] = false;
    }
  }
  v = v_sorted;
  complete_basis(u, missing);
}

// Rotate column j of `mat` by the given unit-modulus scalar.
void scale_col(CMatrix& mat, std::size_t j, cplx f) {
  for (std::size_t r = 0; r < mat.rows(); ++r) mat.at(r, j) *= f;
}

cplx canonical_factor(const CMatrix& mat, std::size_t j) {
  std::size_t best = 0;
  double best_mag = std::abs(mat.at(0, j));
  for (std::size_t r = 1; r < mat.rows(); ++r) {
    const double mag = std::abs(mat.at(r, j));
    if (mag > best_mag) {
      best_mag = mag;
      best = r;
    }
  }
  if (best_mag == 0.0) return cplx(1.0, 0.0);
  return std::abs(mat.at(best, j)) / mat.at(best, j);
}

}  // namespace

SvdResult svd(const CMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m == 0 || n == 0) throw InvalidInput("svd: empty matrix");
  if (!a.all_finite()) throw InvalidInput("svd: non-finite entries");

  const std::size_t mn = std::min(m, n);
  if (a.max_abs() == 0.0) {
    SvdResult res;
    res.u = CMatrix::identity(m);
    res.sigma.assign(mn, 0.0);
    res.vdag = CMatrix::identity(n);
    return res;
  }

  CMatrix u, v;
  std::vector<double> sigma;
  if (m >= n) {
    svd_tall(a, u, sigma, v);
  } else {
    // a = (a^H)^H: run the tall path on the adjoint and swap factors.
    CMatrix u2, v2;
    svd_tall(a.adjoint(), u2, sigma, v2);
    u = v2;
    v = u2;
  }
  sigma.resize(mn);

  // Canonical phase: each right singular vector gets its largest-magnitude
  // entry rotated to the non-negative real axis; paired U columns follow.
  for (std::size_t j = 0; j < n; ++j) {
    const cplx f = canonical_factor(v, j);
    scale_col(v, j, f);
    if (j < mn) scale_col(u, j, f);
  }
  for (std::size_t j = mn; j < m; ++j) scale_col(u, j, canonical_factor(u, j));

  SvdResult res;
  res.u = std::move(u);
  res.sigma = std::move(sigma);
  res.vdag = v.adjoint();
  return res;
}

}  // namespace sbeam
