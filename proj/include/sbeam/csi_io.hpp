/**
 * @file csi_io.hpp
 * @brief SBCSI1 dataset serialization and the CSV import path.
 *
 * SBCSI1, little-endian:
 *   magic "SBCSI1\0\0" | version u32 | n_sta u32 | n_rx u32 | n_tx u32 |
 *   n_sub u32 | n_samples u64 | seed u64 | provenance u32 | samples...
 * Each sample: seq u64 | timestamp u64 | complex entries as f32 (re, im)
 * pairs in STA-major, rx, tx, subcarrier order.
 */
#ifndef SBEAM_CSI_IO_HPP
#define SBEAM_CSI_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sbeam/csi_data.hpp"

namespace sbeam {

std::vector<std::uint8_t> save_dataset(const CsiDataset& ds);
CsiDataset load_dataset(const std::vector<std::uint8_t>& bytes);

void save_dataset_file(const CsiDataset& ds, const std::string& path);
CsiDataset load_dataset_file(const std::string& path);

/// Import CSV with header "seq,sta,rx,tx,sc,re,im", one row per entry.
/// Dimensions are inferred from the largest indices; every (sta, rx, tx, sc)
/// slot must be present for every sequence number.
CsiDataset import_csv(const std::string& text);
CsiDataset import_csv_file(const std::string& path);

}  // namespace sbeam

#endif  // SBEAM_CSI_IO_HPP
