#include "sbeam/bop_search.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sbeam/errors.hpp"

namespace sbeam {

Flops80211 flops_80211(const NetworkConfig& config) {
  const std::uint64_t nt = config.n_tx;
  const std::uint64_t nr = config.n_rx_per_sta;
  const std::uint64_t s = config.n_subcarriers;
  Flops80211 out;
  out.svd = (4 * nt * nr * nr + 22 * nt * nt * nt) * s;
  out.gr = nt * nt * nt * nr * nr * nr * s;
  return out;
}

std::uint64_t head_macs(const ArchSpec& arch) {
  arch.validate_structure();
  std::uint64_t macs = 0;
  for (std::size_t l = 0; l < arch.bottleneck_index; ++l)
    macs += static_cast<std::uint64_t>(arch.layer_widths[l]) *
            arch.layer_widths[l + 1];
  return macs;
}

std::uint64_t tail_macs(const ArchSpec& arch) {
  arch.validate_structure();
  std::uint64_t macs = 0;
  for (std::size_t l = arch.bottleneck_index; l + 1 < arch.layer_widths.size();
       ++l)
    macs += static_cast<std::uint64_t>(arch.layer_widths[l]) *
            arch.layer_widths[l + 1];
  return macs;
}

AirtimeBits airtime_bits(const NetworkConfig& config, double k,
                         const QuantConfig& q,
                         std::uint32_t bottleneck_bits) {
  if (k <= 0.0 || k > 1.0) throw InvalidInput("k must be in (0, 1]");
  AirtimeBits out;
  const double flat_in = static_cast<double>(config.flat_csi_width());
  const std::uint64_t n_elem = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::llround(k * flat_in)));
  out.split = 64 + n_elem * bottleneck_bits;
  out.baseline = accounting(config, q).bmr_bits;
  return out;
}

void DevicePlatform::validate() const {
  if (sta_flops_per_s <= 0.0 || ap_flops_per_s <= 0.0 || link_rate_bps <= 0.0)
    throw InvalidInput("platform rates must be positive");
}

LatencyBreakdown latency(std::uint64_t head_flops_count,
                         std::uint64_t tail_flops_count,
                         std::uint64_t air_bits_per_sta,
                         const DevicePlatform& platform) {
  platform.validate();
  LatencyBreakdown out;
  out.t_head_ms =
      1e3 * static_cast<double>(head_flops_count) / platform.sta_flops_per_s;
  out.t_air_ms =
      1e3 * static_cast<double>(air_bits_per_sta) / platform.link_rate_bps;
  out.t_tail_ms =
      1e3 * static_cast<double>(tail_flops_count) / platform.ap_flops_per_s;
  // Homogeneous STAs: the max over stations of (head + air) is just the sum.
  out.total_ms = out.t_head_ms + out.t_air_ms + out.t_tail_ms;
  return out;
}

std::vector<double> objective_scores(
    const std::vector<std::pair<double, double>>& flops_airtime, double mu) {
  if (mu <= 0.0 || mu >= 1.0) throw InvalidInput("mu must be in (0, 1)");
  if (flops_airtime.empty()) return {};
  auto normalized = [&](auto get) {
    double lo = get(flops_airtime.front()), hi = lo;
    for (const auto& fa : flops_airtime) {
      lo = std::min(lo, get(fa));
      hi = std::max(hi, get(fa));
    }
    std::vector<double> norm;
    norm.reserve(flops_airtime.size());
    for (const auto& fa : flops_airtime)
      norm.push_back(hi > lo ? (get(fa) - lo) / (hi - lo) : 0.0);
    return norm;
  };
  const std::vector<double> nf =
      normalized([](const auto& fa) { return fa.first; });
  const std::vector<double> na =
      normalized([](const auto& fa) { return fa.second; });
  std::vector<double> scores(flops_airtime.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    scores[i] = mu * nf[i] + (1.0 - mu) * na[i];
  return scores;
}

void BopConfig::validate() const {
  if (gamma < 0.0 || gamma > 0.5)
    throw InvalidInput("gamma must be in [0, 0.5]");
  if (tau_ms <= 0.0) throw InvalidInput("tau must be positive");
  if (mu <= 0.0 || mu >= 1.0) throw InvalidInput("mu must be in (0, 1)");
  if (k_ladder.empty()) throw InvalidInput("empty compression ladder");
  for (std::size_t i = 0; i < k_ladder.size(); ++i) {
    if (k_ladder[i] <= 0.0 || k_ladder[i] >= 1.0)
      throw InvalidInput("ladder entries must be in (0, 1)");
    if (i > 0 && k_ladder[i] <= k_ladder[i - 1])
      throw InvalidInput("ladder must be strictly increasing");
  }
  if (max_depth == 0) throw InvalidInput("max_depth must be >= 1");
}

ArchSpec bop_arch(const NetworkConfig& config, double k, std::size_t depth) {
  const std::size_t n_in = config.flat_csi_width();
  const std::size_t n_out = config.flat_bm_width();
  const std::size_t n_bneck = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(k * n_in)));
  ArchSpec arch;
  arch.layer_widths.push_back(n_in);
  for (std::size_t i = 0; i < 2 + depth; ++i)
    arch.layer_widths.push_back(n_bneck);
  arch.layer_widths.push_back(n_out);
  arch.bottleneck_index = 1;
  arch.validate();
  return arch;
}

std::string BopOutcome::table_csv() const {
  std::ostringstream os;
  os << "arch,K,depth,val_ber,head_flops,feedback_bits,t_total_ms,feasible,"
        "objective\n";
  for (const BopCandidate& c : candidates) {
    for (std::size_t i = 0; i < c.arch.layer_widths.size(); ++i)
      os << (i ? "-" : "") << c.arch.layer_widths[i];
    os << ',' << c.k << ',' << c.depth << ',' << c.val_ber << ','
       << c.cost.head_flops << ',' << c.cost.feedback_bits_split << ','
       << c.cost.t_total_ms << ',' << (c.feasible ? 1 : 0) << ','
       << c.cost.objective << '\n';
  }
  return os.str();
}

BopOutcome solve_bop(const NetworkConfig& config, const BopConfig& bop,
                     const DevicePlatform& platform,
                     const CandidateEval& evaluate) {
  config.validate();
  bop.validate();
  platform.validate();

  BopOutcome outcome;
  const Flops80211 baseline = flops_80211(config);
  for (std::size_t depth = 0; depth < bop.max_depth && !outcome.feasible();
       ++depth) {
    for (double k : bop.k_ladder) {
      BopCandidate cand;
      cand.arch = bop_arch(config, k, depth);
      cand.k = k;
      cand.depth = depth;

      auto [ber, model] = evaluate(cand.arch);
      cand.val_ber = ber;

      cand.cost.head_flops = head_flops(cand.arch);
      cand.cost.svd_flops = baseline.svd;
      cand.cost.gr_flops = baseline.gr;
      const AirtimeBits air =
          airtime_bits(config, k, QuantConfig{9}, bop.bottleneck_bits);
      cand.cost.feedback_bits_split = air.split;
      cand.cost.feedback_bits_80211 = air.baseline;
      const LatencyBreakdown lat = latency(
          cand.cost.head_flops, tail_flops(cand.arch), air.split, platform);
      cand.cost.t_head_ms = lat.t_head_ms;
      cand.cost.t_air_ms = lat.t_air_ms;
      cand.cost.t_tail_ms = lat.t_tail_ms;
      cand.cost.t_total_ms = lat.total_ms;

      cand.feasible = (ber <= bop.gamma) && (lat.total_ms <= bop.tau_ms);
      outcome.candidates.push_back(std::move(cand));
      if (outcome.candidates.back().feasible) {
        outcome.chosen_index = outcome.candidates.size() - 1;
        outcome.chosen_model = std::move(model);
        break;
      }
    }
  }

  std::vector<std::pair<double, double>> fa;
  fa.reserve(outcome.candidates.size());
  for (const BopCandidate& c : outcome.candidates)
    fa.emplace_back(static_cast<double>(c.cost.head_flops),
                    static_cast<double>(c.cost.feedback_bits_split));
  const std::vector<double> scores = objective_scores(fa, bop.mu);
  for (std::size_t i = 0; i < scores.size(); ++i)
    outcome.candidates[i].cost.objective = scores[i];
  return outcome;
}

TrainingSet build_training_set(const CsiDataset& ds) {
  ds.config.validate();
  if (ds.samples.empty()) throw InvalidInput("empty dataset");
  TrainingSet set;
  set.dim_in = ds.config.flat_csi_width();
  set.dim_out = ds.config.flat_bm_width();
  set.n = ds.samples.size() * ds.config.n_sta;
  set.x.resize(set.n * set.dim_in);
  set.y.resize(set.n * set.dim_out);
  std::size_t row = 0;
  for (const CsiTensor& sample : ds.samples) {
    for (std::uint32_t i = 0; i < ds.config.n_sta; ++i) {
      const std::vector<double> x = flatten_csi(sample.sta[i]);
      std::vector<CMatrix> v;
      v.reserve(ds.config.n_subcarriers);
      for (std::uint32_t s = 0; s < ds.config.n_subcarriers; ++s)
        v.push_back(compute_bm(sample.sta[i].matrix_at(s),
                               ds.config.n_ss_per_sta));
      const std::vector<double> y = flatten_bm(v);
      std::copy(x.begin(), x.end(), &set.x[row * set.dim_in]);
      std::copy(y.begin(), y.end(), &set.y[row * set.dim_out]);
      ++row;
    }
  }
  return set;
}

BopOutcome solve_bop(const CsiDataset& train_ds, const CsiDataset& val_ds,
                     const BopConfig& bop, const TrainConfig& train_cfg,
                     const DevicePlatform& platform) {
  const TrainingSet train_set = build_training_set(train_ds);
  const TrainingSet val_set = build_training_set(val_ds);
  const NetworkConfig& config = train_ds.config;

  PhyConfig probe_phy;
  probe_phy.snr_db = bop.eval_snr_db;
  probe_phy.seed = train_cfg.seed;

  CandidateEval evaluate = [&](const ArchSpec& arch) {
    const SplitModel init = build_model(arch, train_cfg.seed);
    BerProbe probe = [&](const SplitModel& m) {
      return simulate_ber(val_ds,
                          split_model_source(m, config.n_tx,
                                             config.n_ss_per_sta,
                                             bop.bottleneck_bits),
                          probe_phy)
          .mean_ber;
    };
    TrainResult result = train(init, train_set, val_set, train_cfg, probe);
    const double best_ber = result.history[result.best_epoch].val_ber;
    return std::make_pair(best_ber, std::move(result.best_model));
  };
  return solve_bop(config, bop, platform, evaluate);
}

}  // namespace sbeam
