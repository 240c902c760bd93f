/**
 * @file csi_data.hpp
 * @brief CSI sample containers and dataset split/profile descriptors.
 */
#ifndef SBEAM_CSI_DATA_HPP
#define SBEAM_CSI_DATA_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "sbeam/cmatrix.hpp"
#include "sbeam/network_config.hpp"

namespace sbeam {

/// One station's channel across subcarriers, stored flat in
/// (rx, tx, subcarrier) order. This matches both the wire format and the
/// real-vector flattening used by the model.
struct StaCsi {
  std::uint32_t n_rx = 0;
  std::uint32_t n_tx = 0;
  std::uint32_t n_sub = 0;
  std::vector<cplx> data;

  StaCsi() = default;
  StaCsi(std::uint32_t rx, std::uint32_t tx, std::uint32_t sub)
      : n_rx(rx), n_tx(tx), n_sub(sub),
        data(static_cast<std::size_t>(rx) * tx * sub) {}

  std::size_t index(std::uint32_t rx, std::uint32_t tx,
                    std::uint32_t sc) const {
    return (static_cast<std::size_t>(rx) * n_tx + tx) * n_sub + sc;
  }
  cplx& at(std::uint32_t rx, std::uint32_t tx, std::uint32_t sc) {
    return data[index(rx, tx, sc)];
  }
  const cplx& at(std::uint32_t rx, std::uint32_t tx, std::uint32_t sc) const {
    return data[index(rx, tx, sc)];
  }

  /// The n_rx x n_tx channel matrix for one subcarrier.
  CMatrix matrix_at(std::uint32_t sc) const {
    CMatrix h(n_rx, n_tx);
    for (std::uint32_t r = 0; r < n_rx; ++r)
      for (std::uint32_t t = 0; t < n_tx; ++t) h.at(r, t) = at(r, t, sc);
    return h;
  }
};

/// One multi-STA CSI snapshot.
struct CsiTensor {
  std::uint64_t sequence_number = 0;
  std::uint64_t timestamp_us = 0;
  std::vector<StaCsi> sta;
};

enum class Provenance : std::uint32_t {
  synthetic_rayleigh = 0,
  synthetic_clustered = 1,
  imported = 2,
};

struct CsiDataset {
  NetworkConfig config;
  std::vector<CsiTensor> samples;
  Provenance provenance = Provenance::imported;
  std::optional<std::uint64_t> seed;
};

/// Multipath tap profile for the clustered generator. Powers must sum to 1.
struct TapProfile {
  struct Tap {
    std::uint32_t cluster = 0;
    double delay_ns = 0.0;
    double power = 0.0;
  };
  std::vector<Tap> taps;

  void validate() const;
};

/// Train/validation/test fractions, 0.8/0.1/0.1 by default.
struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;

  void validate() const;
};

}  // namespace sbeam

#endif  // SBEAM_CSI_DATA_HPP
