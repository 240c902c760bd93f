/**
 * @file channel_sim.hpp
 * @brief Synthetic CSI generation and the dataset preprocessing pipeline:
 *        amplitude normalization, moving-median smoothing, sequence-number
 *        alignment and deterministic splits.
 */
#ifndef SBEAM_CHANNEL_SIM_HPP
#define SBEAM_CHANNEL_SIM_HPP

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "sbeam/csi_data.hpp"

namespace sbeam {

/// i.i.d. CN(0,1) entries, one derived RNG substream per (sample, STA).
CsiDataset gen_rayleigh(const NetworkConfig& config, std::size_t n_samples,
                        std::uint64_t seed);

/// Clustered multipath channel: per (rx, tx) pair, complex Gaussian taps with
/// the profile's delays/powers; frequency response is the tap DFT on the
/// grid f_s = (s - S/2) * bandwidth / S. STAs are independent.
CsiDataset gen_clustered(const NetworkConfig& config, std::size_t n_samples,
                         const TapProfile& profile, std::uint64_t seed);

/// Load a tap profile from CSV with header "tap,cluster,delay_ns,power".
TapProfile load_tap_profile(const std::string& path);

/// Divide every entry by that (sample, STA)'s mean amplitude over all
/// antenna pairs and subcarriers. Throws ZeroSample on an all-zero sample.
CsiDataset normalize(const CsiDataset& ds);

/// Trailing moving median (length `window`) applied independently to the
/// real and imaginary parts of each (STA, rx, tx, subcarrier) time series.
/// The window shrinks at the start of the sequence.
CsiDataset median_smooth(const CsiDataset& ds, std::size_t window = 10);

/// Merge one single-STA capture stream per STA, keeping only sequence
/// numbers present in every stream. Throws NoCommonSamples when empty.
CsiDataset align_by_sequence(const std::vector<CsiDataset>& streams);

/// Deterministic shuffled partition; val/test sizes round(fraction * N),
/// remainder to train. Each part keeps ascending sequence order.
std::tuple<CsiDataset, CsiDataset, CsiDataset> split_dataset(
    const CsiDataset& ds, const SplitSpec& spec, std::uint64_t seed);

}  // namespace sbeam

#endif  // SBEAM_CHANNEL_SIM_HPP
