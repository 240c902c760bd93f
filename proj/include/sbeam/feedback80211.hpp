/**
 * @file feedback80211.hpp
 * @brief IEEE 802.11 compressed-beamforming baseline: SVD beam matrix,
 *        Givens angle decomposition/reconstruction, angle quantization and
 *        report-size accounting.
 */
#ifndef SBEAM_FEEDBACK80211_HPP
#define SBEAM_FEEDBACK80211_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sbeam/cmatrix.hpp"
#include "sbeam/network_config.hpp"

namespace sbeam {

/// Beam matrix for one subcarrier: the first n_ss right singular vectors of
/// the channel, in the tensor-core canonical phase.
CMatrix compute_bm(const CMatrix& h, std::size_t n_ss);

/// Half the total Givens angle count: number of phi (= number of psi) angles
/// per subcarrier for an n_tx x n_ss beam matrix.
std::size_t n_phi_angles(std::size_t n_tx, std::size_t n_ss);

/// N_a = 2 * sum_{t=1}^{min(n_ss, n_tx-1)} (n_tx - t).
std::size_t n_givens_angles(std::size_t n_tx, std::size_t n_ss);

/// Angles for one subcarrier. phi and psi are stored in (t ascending,
/// l ascending) order; phi[k] pairs rows l = t..n_tx-1, psi[k] pairs rows
/// l = t+1..n_tx, as produced by the decomposition loop.
struct GivensSlice {
  std::size_t n_tx = 0;
  std::size_t n_ss = 0;
  std::vector<double> phi;  ///< each in [0, 2*pi)
  std::vector<double> psi;  ///< each in [0, pi/2]
};

struct GivensDecomposition {
  GivensSlice angles;
  CMatrix d_tilde;  ///< n_ss x n_ss diagonal, unit modulus: V = Vtilde * Dtilde
};

/// Decompose a per-subcarrier beam matrix (columns orthonormal within 1e-6)
/// into Givens angles. V = reconstruct(angles) * d_tilde exactly.
GivensDecomposition givens_decompose(const CMatrix& v);

/// Rebuild Vtilde from angles: the product of D and G^T factors applied to
/// the generalized identity. Last row comes out real and non-negative.
CMatrix givens_reconstruct(const GivensSlice& angles);

/// Angle quantizer bit widths; the standard pairs b_psi = b_phi - 2.
struct QuantConfig {
  std::uint32_t b_phi = 9;

  std::uint32_t b_psi() const { return b_phi - 2; }
  void validate() const {
    if (b_phi < 3 || b_phi > 16)
      throw InvalidInput("b_phi out of supported range");
  }
};

struct AngleCodes {
  std::size_t n_tx = 0;
  std::size_t n_ss = 0;
  std::vector<std::uint32_t> phi;
  std::vector<std::uint32_t> psi;
};

/// Uniform midpoint quantizer over [0, 2*pi) for phi and [0, pi/2] for psi.
AngleCodes quantize_angles(const GivensSlice& angles, const QuantConfig& q);
GivensSlice dequantize_angles(const AngleCodes& codes, const QuantConfig& q);

/// One beam-report worth of angles across subcarriers.
struct GivensFeedback {
  std::size_t n_tx = 0;
  std::size_t n_ss = 0;
  std::vector<GivensSlice> per_subcarrier;
};

/// Angle codes rendered as CSV rows "s,t,l,kind,q" in the documented wire
/// order (s, then t, phi block before psi block per t, l ascending).
std::string angle_codes_csv(const std::vector<AngleCodes>& per_subcarrier);

struct FeedbackAccounting {
  std::uint64_t n_angles = 0;            ///< N_a per subcarrier
  std::uint64_t angle_payload_bits = 0;  ///< angles only, no header
  std::uint64_t bmr_bits = 0;            ///< 8*N_t header + angle payload
  double cr = 0.0;                       ///< BMR / (S * N_t * N_r * 16)
};

/// Report size of the 802.11 compressed feedback for one STA. The default
/// charges (b_phi + b_psi) / 2 bits per angle; the override charges a flat
/// per-angle width instead (the headline figure some summaries use). The
/// 8*N_t header is never part of angle_payload_bits.
FeedbackAccounting accounting(
    const NetworkConfig& config, const QuantConfig& q,
    std::optional<std::uint32_t> bits_per_angle_override = std::nullopt);

}  // namespace sbeam

#endif  // SBEAM_FEEDBACK80211_HPP
