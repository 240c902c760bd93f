/**
 * @file bop_search.hpp
 * @brief FLOP/airtime/latency accounting and the bottleneck search: walk the
 *        compression ladder from the tightest bottleneck upward, training a
 *        candidate per step, until BER and delay constraints hold.
 */
#ifndef SBEAM_BOP_SEARCH_HPP
#define SBEAM_BOP_SEARCH_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sbeam/ber_sim.hpp"
#include "sbeam/csi_data.hpp"
#include "sbeam/feedback80211.hpp"
#include "sbeam/split_dnn.hpp"

namespace sbeam {

struct Flops80211 {
  std::uint64_t svd = 0;  ///< (4 N_t N_r^2 + 22 N_t^3) S
  std::uint64_t gr = 0;   ///< N_t^3 N_r^3 S
};

/// Baseline per-STA compression cost with unit big-O constants.
Flops80211 flops_80211(const NetworkConfig& config);

/// Dense multiply-accumulate counts; 1 MAC = 2 FLOPs.
std::uint64_t head_macs(const ArchSpec& arch);
std::uint64_t tail_macs(const ArchSpec& arch);
inline std::uint64_t head_flops(const ArchSpec& arch) {
  return 2 * head_macs(arch);
}
inline std::uint64_t tail_flops(const ArchSpec& arch) {
  return 2 * tail_macs(arch);
}

struct AirtimeBits {
  std::uint64_t split = 0;     ///< 64-bit quantizer header + codes
  std::uint64_t baseline = 0;  ///< 802.11 BMR
};

/// Per-STA over-the-air feedback sizes at compression level k.
AirtimeBits airtime_bits(const NetworkConfig& config, double k,
                         const QuantConfig& q = QuantConfig{9},
                         std::uint32_t bottleneck_bits = 16);

/// Throughput model turning FLOP and bit counts into milliseconds.
struct DevicePlatform {
  double sta_flops_per_s = 1e9;
  double ap_flops_per_s = 1e10;
  double link_rate_bps = 80e6;

  void validate() const;
  /// Calibrated so the 2x2 / 20 MHz / K=1/8 model lands near 0.02 ms.
  static DevicePlatform reference() { return DevicePlatform{}; }
};

struct LatencyBreakdown {
  double t_head_ms = 0.0;
  double t_air_ms = 0.0;
  double t_tail_ms = 0.0;
  double total_ms = 0.0;  ///< max over STAs of (head + air), plus tail
};

LatencyBreakdown latency(std::uint64_t head_flops_count,
                         std::uint64_t tail_flops_count,
                         std::uint64_t air_bits_per_sta,
                         const DevicePlatform& platform);

struct CostReport {
  std::uint64_t head_flops = 0;
  std::uint64_t svd_flops = 0;
  std::uint64_t gr_flops = 0;
  std::uint64_t feedback_bits_split = 0;
  std::uint64_t feedback_bits_80211 = 0;
  double t_head_ms = 0.0;
  double t_air_ms = 0.0;
  double t_tail_ms = 0.0;
  double t_total_ms = 0.0;
  double objective = 0.0;
};

/// Min-max-normalized weighted scores mu * flops + (1 - mu) * airtime over
/// one candidate set. Invariant under common positive scaling of either axis.
std::vector<double> objective_scores(
    const std::vector<std::pair<double, double>>& flops_airtime, double mu);

struct BopConfig {
  double gamma = 0.02;    ///< max tolerable BER; 0 is an unattainable sentinel
  double tau_ms = 10.0;   ///< max end-to-end delay
  double mu = 0.5;        ///< STA-compute vs airtime weight, in (0, 1)
  std::vector<double> k_ladder = {1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
  std::size_t max_depth = 2;  ///< tail-depth levels tried (1 = 3-layer only)
  double eval_snr_db = 10.0;
  std::uint32_t bottleneck_bits = 16;

  void validate() const;
};

/// Candidate architecture for (k, depth): [n_in, Kn, Kn (+depth more), n_out]
/// with the bottleneck right after the input layer.
ArchSpec bop_arch(const NetworkConfig& config, double k, std::size_t depth);

struct BopCandidate {
  ArchSpec arch;
  double k = 0.0;
  std::size_t depth = 0;
  double val_ber = 1.0;
  bool feasible = false;
  CostReport cost;
};

struct BopOutcome {
  std::optional<std::size_t> chosen_index;  ///< into candidates
  std::optional<SplitModel> chosen_model;
  std::vector<BopCandidate> candidates;

  bool feasible() const { return chosen_index.has_value(); }
  /// Candidate table as CSV (arch, K, depth, val_ber, head_flops,
  /// feedback_bits, t_total_ms, feasible, objective).
  std::string table_csv() const;
};

/// Trains/evaluates one candidate architecture; returns (val BER, model).
using CandidateEval =
    std::function<std::pair<double, SplitModel>(const ArchSpec&)>;

/// Core search walking (depth, K) in lexicographic order, returning at the
/// first candidate meeting both the BER and latency constraints.
BopOutcome solve_bop(const NetworkConfig& config, const BopConfig& bop,
                     const DevicePlatform& platform,
                     const CandidateEval& evaluate);

/// Flattened (CSI -> SVD beam matrix) sample pairs for one dataset, pooled
/// across STAs.
TrainingSet build_training_set(const CsiDataset& ds);

/// Full search: trains each candidate on the given splits and probes
/// validation BER with the split-model source at bop.eval_snr_db.
BopOutcome solve_bop(const CsiDataset& train_ds, const CsiDataset& val_ds,
                     const BopConfig& bop, const TrainConfig& train_cfg,
                     const DevicePlatform& platform);

}  // namespace sbeam

#endif  // SBEAM_BOP_SEARCH_HPP
