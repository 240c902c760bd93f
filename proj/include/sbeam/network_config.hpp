/**
 * @file network_config.hpp
 * @brief MU-MIMO scenario dimensions shared across modules.
 */
#ifndef SBEAM_NETWORK_CONFIG_HPP
#define SBEAM_NETWORK_CONFIG_HPP

#include <cstdint>

#include "sbeam/errors.hpp"

namespace sbeam {

/// Scenario dimensions: one AP with n_tx antennas serving n_sta stations,
/// each with n_rx_per_sta antennas and n_ss_per_sta spatial streams.
struct NetworkConfig {
  std::uint32_t n_sta = 2;
  std::uint32_t n_tx = 2;
  std::uint32_t n_rx_per_sta = 1;
  std::uint32_t n_ss_per_sta = 1;
  std::uint32_t n_subcarriers = 56;
  std::uint32_t bandwidth_mhz = 20;  // one of 20, 40, 80, 160

  std::uint32_t total_streams() const { return n_sta * n_ss_per_sta; }

  /// Flattened real input width per STA: 2 * n_rx * n_tx * S.
  std::size_t flat_csi_width() const {
    return 2ull * n_rx_per_sta * n_tx * n_subcarriers;
  }
  /// Flattened real target width per STA: 2 * n_tx * n_ss * S.
  std::size_t flat_bm_width() const {
    return 2ull * n_tx * n_ss_per_sta * n_subcarriers;
  }

  /// Subcarrier count that goes with each supported bandwidth.
  static std::uint32_t subcarriers_for_bandwidth(std::uint32_t mhz) {
    switch (mhz) {
      case 20: return 56;
      case 40: return 114;
      case 80: return 242;
      case 160: return 486;
      default: throw InvalidInput("unsupported bandwidth");
    }
  }

  /// Full validation used at generation/evaluation entry points. Datasets in
  /// flight (single-STA capture streams) only need dimensional consistency,
  /// so this is not a constructor-level assertion.
  void validate() const {
    if (n_sta == 0 || n_tx == 0 || n_rx_per_sta == 0 || n_ss_per_sta == 0 ||
        n_subcarriers == 0)
      throw InvalidInput("all dimensions must be positive");
    if (n_tx != n_sta * n_ss_per_sta)
      throw InvalidInput("n_tx must equal n_sta * n_ss_per_sta");
    if (n_ss_per_sta > n_rx_per_sta)
      throw InvalidInput("n_ss_per_sta must not exceed n_rx_per_sta");
    if (bandwidth_mhz != 20 && bandwidth_mhz != 40 && bandwidth_mhz != 80 &&
        bandwidth_mhz != 160)
      throw InvalidInput("bandwidth must be one of 20/40/80/160 MHz");
  }

  bool operator==(const NetworkConfig&) const = default;
};

}  // namespace sbeam

#endif  // SBEAM_NETWORK_CONFIG_HPP
