#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sbeam/cmatrix.hpp"
#include "sbeam/errors.hpp"
#include "sbeam/rng.hpp"
#include "sbeam/svd.hpp"
#include "support/oracles.hpp"

using namespace sbeam;

namespace {

double reconstruction_error(const CMatrix& a, const SvdResult& r) {
  CMatrix us = r.u.cols_block(0, r.sigma.size());
  for (std::size_t j = 0; j < r.sigma.size(); ++j)
    for (std::size_t i = 0; i < us.rows(); ++i) us.at(i, j) *= r.sigma[j];
  // First min(m, n) rows of vdag.
  CMatrix vd(r.sigma.size(), r.vdag.cols());
  for (std::size_t i = 0; i < vd.rows(); ++i)
    for (std::size_t j = 0; j < vd.cols(); ++j) vd.at(i, j) = r.vdag.at(i, j);
  return (us * vd - a).frobenius() / std::max(1.0, a.frobenius());
}

}  // namespace

TEST_CASE("svd of identity") {
  const CMatrix a = CMatrix::identity(2);
  const SvdResult r = svd(a);
  CHECK(r.sigma[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.sigma[1] == doctest::Approx(1.0).epsilon(1e-12));
  const CMatrix uv = r.u * r.vdag;
  CHECK(uv.orthonormality_residual() < 1e-10);
}

TEST_CASE("svd of scaled permutation") {
  CMatrix a(2, 2);
  a.at(0, 1) = 2.0;
  a.at(1, 0) = 1.0;
  const SvdResult r = svd(a);
  CHECK(r.sigma[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.sigma[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("svd sigma matches characteristic-polynomial oracle on A^H A") {
  Rng rng(1234, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix a = test::random_complex_matrix(3, 2, rng);
    const SvdResult r = svd(a);
    const auto eig = test::hermitian_eigenvalues(a.adjoint() * a);
    REQUIRE(eig.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
      const double want = std::sqrt(std::max(0.0, eig[k]));
      CHECK(std::abs(r.sigma[k] - want) <= 1e-8 * std::max(1.0, want));
    }
  }
}

TEST_CASE("svd round trip over random shapes") {
  Rng rng(99, 7);
  int count = 0;
  while (count < 1000) {
    const std::size_t m = 1 + rng.next_below(6);
    const std::size_t n = 1 + rng.next_below(6);
    const CMatrix a = test::random_complex_matrix(m, n, rng);
    const SvdResult r = svd(a);
    CHECK(reconstruction_error(a, r) <= 1e-9);
    CHECK(r.u.orthonormality_residual() < 1e-10);
    CHECK(r.vdag.adjoint().orthonormality_residual() < 1e-10);
    for (std::size_t k = 0; k + 1 < r.sigma.size(); ++k)
      CHECK(r.sigma[k] >= r.sigma[k + 1]);
    if (!r.sigma.empty()) CHECK(r.sigma.back() >= 0.0);
    ++count;
  }
}

TEST_CASE("svd canonical phase on right singular vectors") {
  Rng rng(5, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const CMatrix a = test::random_complex_matrix(3, 3, rng);
    const CMatrix v = svd(a).v();
    for (std::size_t j = 0; j < v.cols(); ++j) {
      std::size_t best = 0;
      for (std::size_t r = 1; r < v.rows(); ++r)
        if (std::abs(v.at(r, j)) > std::abs(v.at(best, j))) best = r;
      CHECK(std::abs(v.at(best, j).imag()) < 1e-12);
      CHECK(v.at(best, j).real() >= 0.0);
    }
  }
}

TEST_CASE("svd of zero matrix") {
  const CMatrix a(3, 2);
  const SvdResult r = svd(a);
  CHECK(r.sigma[0] == 0.0);
  CHECK(r.sigma[1] == 0.0);
  CHECK((r.u - CMatrix::identity(3)).max_abs() == 0.0);
  CHECK((r.vdag - CMatrix::identity(2)).max_abs() == 0.0);
}

TEST_CASE("svd rejects non-finite input") {
  CMatrix a(1, 1);
  a.at(0, 0) = cplx(std::nan(""), 0.0);
  CHECK_THROWS_AS(svd(a), InvalidInput);
}

TEST_CASE("rng determinism per (seed, stream)") {
  Rng a(42, 0), b(42, 0);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42, 0);
  const auto p1 = c.gaussian_pair();
  Rng d(42, 0);
  const auto p2 = d.gaussian_pair();
  CHECK(p1 == p2);
}

TEST_CASE("gaussian_pair moments") {
  Rng rng(42, 0);
  const int n = 1000000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n / 2; ++i) {
    auto [z1, z2] = rng.gaussian_pair();
    sum += z1 + z2;
    sumsq += z1 * z1 + z2 * z2;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("independent substreams are uncorrelated") {
  Rng a(7, 1), b(7, 2);
  const int n = 100000;
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.gaussian_pair().first;
    const double y = b.gaussian_pair().first;
    sa += x;
    sb += y;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double corr = cov / std::sqrt((saa / n - (sa / n) * (sa / n)) *
                                      (sbb / n - (sb / n) * (sb / n)));
  CHECK(std::abs(corr) <= 0.01);
}

TEST_CASE("solve_hermitian inverts a Gram matrix") {
  Rng rng(3, 3);
  const CMatrix a = test::random_complex_matrix(4, 3, rng);
  const CMatrix g = a.adjoint() * a;
  const CMatrix x = solve_hermitian(g, CMatrix::identity(3));
  CHECK((g * x - CMatrix::identity(3)).max_abs() < 1e-10);
}
