/**
 * @file harness.hpp
 * @brief Experiment orchestration: config loading, stage execution
 *        (gen / train / eval / bop / account / report) and the run manifest.
 */
#ifndef SBEAM_HARNESS_HPP
#define SBEAM_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sbeam/ber_sim.hpp"
#include "sbeam/bop_search.hpp"
#include "sbeam/channel_sim.hpp"
#include "sbeam/config_file.hpp"
#include "sbeam/split_dnn.hpp"

namespace sbeam {

/// A required input produced by an earlier stage is absent.
class MissingArtifact : public Error {
 public:
  explicit MissingArtifact(const std::string& path)
      : Error("missing artifact: " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ChannelModel : std::uint32_t { rayleigh = 0, clustered = 1 };

struct ExperimentConfig {
  NetworkConfig network;
  ChannelModel channel_model = ChannelModel::clustered;
  std::string channel_profile;  ///< tap profile CSV for the clustered model
  std::size_t n_samples = 10000;
  bool normalize_data = true;
  std::size_t median_window = 0;  ///< 0 = no smoothing
  SplitSpec split;
  TrainConfig train_cfg;
  std::vector<double> k_levels = {1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
  BopConfig bop;
  PhyConfig phy;
  std::vector<std::uint32_t> b_phi_levels = {7, 9};
  DevicePlatform platform;
  std::string output_dir;
  std::uint64_t master_seed = 0;
  std::string config_digest;  ///< hash of the canonical config text
};

/// Parse + schema-check + semantic validation. Relative file references
/// resolve against the config file's directory.
ExperimentConfig load_experiment_config(const std::string& path);

/// Stage entry points. Each writes its outputs under cfg.output_dir, updates
/// manifest.json, and removes partial outputs if it fails.
void run_gen(const ExperimentConfig& cfg);
void run_train(const ExperimentConfig& cfg, std::size_t threads = 1);
void run_eval(const ExperimentConfig& cfg, std::size_t threads = 1);
void run_bop(const ExperimentConfig& cfg, bool fast_mode = false,
             std::size_t threads = 1);
void run_account(const ExperimentConfig& cfg);
void run_report(const ExperimentConfig& cfg);

/// CLI driver (verbs gen/train/eval/bop/account/report). Returns the process
/// exit code: 0 ok, 2 config error, 3 missing artifact, 4 numeric failure.
int run_cli(int argc, char** argv);

/// FNV-1a 64 over a byte string, in fixed-width hex.
std::string fnv1a_hex(const std::string& data);

}  // namespace sbeam

#endif  // SBEAM_HARNESS_HPP
