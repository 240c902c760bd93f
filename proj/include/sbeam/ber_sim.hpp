/**
 * @file ber_sim.hpp
 * @brief Link-level BER measurement: per-subcarrier zero-forcing from any
 *        beam-matrix source, 16-QAM payloads, AWGN, optional rate-1/2
 *        convolutional coding, and error counting.
 */
#ifndef SBEAM_BER_SIM_HPP
#define SBEAM_BER_SIM_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sbeam/cmatrix.hpp"
#include "sbeam/csi_data.hpp"
#include "sbeam/feedback80211.hpp"
#include "sbeam/split_dnn.hpp"

namespace sbeam {

struct ZfResult {
  CMatrix w;                         ///< N_t x total streams
  std::vector<double> column_power;  ///< per-column squared norm
  double gram_cond = 0.0;            ///< condition estimate of H_EQ^H H_EQ
};

/// W = H_EQ (H_EQ^H H_EQ)^-1. Throws SingularEffectiveChannel when the Gram
/// condition estimate reaches 1e8.
ZfResult zf_precoder(const CMatrix& h_eq);

enum class Coding : std::uint32_t { none = 0, bcc_r12 = 1 };
enum class EqualizerMode : std::uint32_t { svd_combiner = 0, ls = 1 };
enum class PrecoderMode : std::uint32_t { zf = 0, identity_diag = 1 };

struct PhyConfig {
  double snr_db = 20.0;
  bool noise_enabled = true;  ///< false = the snr_db == +inf flag
  std::size_t n_frames = 1;
  std::size_t bits_per_frame = 0;  ///< payload bits per STA; 0 = 4*n_ss*S
  Coding coding = Coding::none;
  EqualizerMode equalizer = EqualizerMode::svd_combiner;
  PrecoderMode precoder = PrecoderMode::zf;
  bool normalize_total_power = false;  ///< scale W to unit total power
  std::uint64_t seed = 0;

  void validate() const;
};

/// A way to obtain per-subcarrier beam matrices for one STA of one sample.
struct BeamSource {
  std::string name;
  std::function<std::vector<CMatrix>(const CsiTensor&, std::size_t sta)> v_of;
};

BeamSource ideal_svd_source(std::size_t n_ss);
BeamSource givens_quantized_source(std::size_t n_ss, QuantConfig q);
/// DNN source; bottleneck_bits empty = float bottleneck (no codec).
BeamSource split_model_source(SplitModel model, std::size_t n_tx,
                              std::size_t n_ss,
                              std::optional<std::uint32_t> bottleneck_bits,
                              bool normalize_columns = false);

struct StaBer {
  std::uint64_t errors = 0;
  std::uint64_t bits = 0;
  double ber = 0.0;
};

struct BerReport {
  std::vector<StaBer> per_sta;
  double mean_ber = 0.0;  ///< total errors / total bits
  std::uint64_t skipped_samples = 0;
  double max_cross_interference = 0.0;  ///< max |H_i W_j| entry, i != j
  std::string config_digest;

  std::string to_json() const;
};

/// Run the measurement. Samples are independent; with n_threads > 1 they are
/// processed in parallel with per-sample substreams, so the totals match the
/// sequential run exactly.
BerReport simulate_ber(const CsiDataset& ds, const BeamSource& source,
                       const PhyConfig& phy, std::size_t n_threads = 1);

}  // namespace sbeam

#endif  // SBEAM_BER_SIM_HPP
