#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sbeam/errors.hpp"
#include "sbeam/feedback80211.hpp"
#include "sbeam/rng.hpp"
#include "sbeam/svd.hpp"
#include "support/oracles.hpp"

using namespace sbeam;

TEST_CASE("compute_bm on identity picks the first basis vector") {
  const CMatrix v = compute_bm(CMatrix::identity(2), 1);
  CHECK(std::abs(v.at(0, 0) - cplx(1.0, 0.0)) < 1e-12);
  CHECK(std::abs(v.at(1, 0)) < 1e-12);
}

TEST_CASE("compute_bm of a real 1x2 row is the normalized row") {
  CMatrix h(1, 2);
  h.at(0, 0) = 3.0;
  h.at(0, 1) = 4.0;
  const CMatrix v = compute_bm(h, 1);
  CHECK(v.at(0, 0).real() == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(v.at(1, 0).real() == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(std::abs(v.at(0, 0).imag()) < 1e-12);
}

TEST_CASE("compute_bm columns carry the top singular values") {
  Rng rng(77, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix h = test::random_complex_matrix(2, 3, rng);
    const auto full = svd(h);
    const CMatrix v = compute_bm(h, 2);
    const CMatrix hv = h * v;
    for (std::size_t k = 0; k < 2; ++k) {
      double nrm = 0.0;
      for (std::size_t r = 0; r < hv.rows(); ++r) nrm += std::norm(hv.at(r, k));
      CHECK(std::sqrt(nrm) == doctest::Approx(full.sigma[k]).epsilon(1e-8));
    }
    // H v_k = sigma_k u_k
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t r = 0; r < hv.rows(); ++r)
        CHECK(std::abs(hv.at(r, k) - full.sigma[k] * full.u.at(r, k)) < 1e-8);
  }
  CHECK_THROWS_AS(compute_bm(CMatrix::identity(2), 3), InvalidInput);
}

TEST_CASE("givens_decompose of a real unit vector gives phi=0 psi=alpha") {
  for (double alpha : {0.1, 0.45, 0.9, 1.3}) {
    CMatrix v(2, 1);
    v.at(0, 0) = std::cos(alpha);
    v.at(1, 0) = std::sin(alpha);
    const auto d = givens_decompose(v);
    REQUIRE(d.angles.phi.size() == 1);
    REQUIRE(d.angles.psi.size() == 1);
    CHECK(d.angles.phi[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d.angles.psi[0] == doctest::Approx(alpha).epsilon(1e-12));
  }
}

TEST_CASE("givens_decompose of e1 gives all-zero angles") {
  CMatrix v(2, 1);
  v.at(0, 0) = 1.0;
  const auto d = givens_decompose(v);
  CHECK(d.angles.phi[0] == 0.0);
  CHECK(d.angles.psi[0] == 0.0);
}

TEST_CASE("angle count matches the closed form") {
  CHECK(n_givens_angles(8, 8) == 56);
  CHECK(n_givens_angles(2, 1) == 2);
  CHECK(n_givens_angles(3, 1) == 4);
  CHECK(n_givens_angles(4, 2) == 10);
  Rng rng(11, 0);
  const CMatrix v = test::random_unitary(8, 8, rng);
  const auto d = givens_decompose(v);
  CHECK(d.angles.phi.size() == 28);
  CHECK(d.angles.psi.size() == 28);
}

TEST_CASE("givens_reconstruct with zero angles is the generalized identity") {
  GivensSlice s;
  s.n_tx = 4;
  s.n_ss = 2;
  s.phi.assign(n_phi_angles(4, 2), 0.0);
  s.psi.assign(n_phi_angles(4, 2), 0.0);
  const CMatrix v = givens_reconstruct(s);
  CHECK((v - CMatrix::identity(4, 2)).max_abs() < 1e-15);
}

TEST_CASE("givens_reconstruct inverts the hand example") {
  GivensSlice s;
  s.n_tx = 2;
  s.n_ss = 1;
  s.phi = {0.0};
  s.psi = {0.7};
  const CMatrix v = givens_reconstruct(s);
  CHECK(v.at(0, 0).real() == doctest::Approx(std::cos(0.7)).epsilon(1e-12));
  CHECK(v.at(1, 0).real() == doctest::Approx(std::sin(0.7)).epsilon(1e-12));
}

TEST_CASE("givens round trip over random unitary matrices") {
  Rng rng(2024, 0);
  int done = 0;
  const std::size_t nts[] = {2, 3, 4};
  const std::size_t nsss[] = {1, 2};
  while (done < 200) {
    const std::size_t nt = nts[done % 3];
    const std::size_t nss = nsss[(done / 3) % 2];
    const CMatrix v = test::random_unitary(nt, nss, rng);
    const auto d = givens_decompose(v);
    const CMatrix vt = givens_reconstruct(d.angles);

    // Last row real, non-negative.
    for (std::size_t c = 0; c < nss; ++c) {
      CHECK(std::abs(vt.at(nt - 1, c).imag()) < 1e-9);
      CHECK(vt.at(nt - 1, c).real() > -1e-12);
    }
    CHECK(vt.orthonormality_residual() < 1e-9);

    // Vtilde * Dtilde recovers V, and columns match up to a unit scalar.
    const CMatrix back = vt * d.d_tilde;
    CHECK((back - v).max_abs() < 1e-9);
    for (std::size_t c = 0; c < nss; ++c) {
      cplx dot(0.0, 0.0);
      for (std::size_t r = 0; r < nt; ++r)
        dot += std::conj(vt.at(r, c)) * v.at(r, c);
      CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-9));
    }
    ++done;
  }
}

TEST_CASE("givens_decompose rejects non-unitary input") {
  CMatrix v(2, 1);
  v.at(0, 0) = 2.0;
  CHECK_THROWS_AS(givens_decompose(v), NotUnitary);
}

TEST_CASE("givens_reconstruct rejects inconsistent angle counts") {
  GivensSlice s;
  s.n_tx = 3;
  s.n_ss = 1;
  s.phi = {0.0};
  s.psi = {0.0, 0.0};
  CHECK_THROWS_AS(givens_reconstruct(s), InvalidInput);
}

TEST_CASE("quantizer anchors and boundary clamp") {
  GivensSlice s;
  s.n_tx = 2;
  s.n_ss = 1;
  s.phi = {0.0};
  s.psi = {0.0};
  const QuantConfig q7{7};
  const auto codes = quantize_angles(s, q7);
  CHECK(codes.phi[0] == 0);
  const auto back = dequantize_angles(codes, q7);
  CHECK(back.phi[0] == doctest::Approx(M_PI / 128.0).epsilon(1e-12));

  GivensSlice edge = s;
  edge.phi = {2.0 * M_PI - 1e-9};
  CHECK(quantize_angles(edge, q7).phi[0] == 127);

  GivensSlice bad = s;
  bad.phi = {-0.1};
  CHECK_THROWS_AS(quantize_angles(bad, q7), InvalidInput);
}

TEST_CASE("quantizer error bound over a dense grid") {
  for (std::uint32_t b : {7u, 9u}) {
    const QuantConfig q{b};
    GivensSlice s;
    s.n_tx = 2;
    s.n_ss = 1;
    const int grid = 20000;
    double worst_phi = 0.0, worst_psi = 0.0;
    for (int i = 0; i < grid; ++i) {
      s.phi = {2.0 * M_PI * i / grid};
      s.psi = {(M_PI / 2.0) * i / grid};
      const auto back = dequantize_angles(quantize_angles(s, q), q);
      worst_phi = std::max(worst_phi, std::abs(back.phi[0] - s.phi[0]));
      worst_psi = std::max(worst_psi, std::abs(back.psi[0] - s.psi[0]));
    }
    CHECK(worst_phi <= 2.0 * M_PI / (1u << (b + 1)) * (1.0 + 1e-12));
    CHECK(worst_psi <= M_PI / (1u << (q.b_psi() + 2)) * (1.0 + 1e-12));
  }
}

TEST_CASE("feedback size accounting") {
  NetworkConfig c22;
  c22.n_sta = 2;
  c22.n_tx = 2;
  const auto a22 = accounting(c22, QuantConfig{9});
  CHECK(a22.n_angles == 2);
  CHECK(a22.bmr_bits == 912);
  CHECK(a22.cr == doctest::Approx(0.509).epsilon(2e-3));

  NetworkConfig c33;
  c33.n_sta = 3;
  c33.n_tx = 3;
  const auto a33 = accounting(c33, QuantConfig{9});
  CHECK(a33.bmr_bits == 1816);
  CHECK(a33.cr == doctest::Approx(0.676).epsilon(2e-3));

  NetworkConfig c88;
  c88.n_sta = 1;
  c88.n_tx = 8;
  c88.n_rx_per_sta = 8;
  c88.n_ss_per_sta = 8;
  c88.n_subcarriers = 486;
  c88.bandwidth_mhz = 160;
  const auto a88 = accounting(c88, QuantConfig{9}, 16);
  CHECK(a88.n_angles == 56);
  CHECK(a88.angle_payload_bits == 435456);
}

TEST_CASE("angle codes CSV uses the documented order") {
  Rng rng(8, 0);
  const CMatrix v = test::random_unitary(3, 1, rng);
  const auto d = givens_decompose(v);
  const auto codes = quantize_angles(d.angles, QuantConfig{7});
  const std::string csv = angle_codes_csv({codes});
  CHECK(csv.rfind("s,t,l,kind,q\n", 0) == 0);
  CHECK(csv.find("0,1,1,phi,") != std::string::npos);
  CHECK(csv.find("0,1,3,psi,") != std::string::npos);
}
