#include "sbeam/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbeam/csi_io.hpp"
#include "sbeam/rng.hpp"

namespace fs = std::filesystem;

namespace sbeam {

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw MissingArtifact(path);
}

// Collects one stage's outputs; deletes them again unless committed, and
// records names + checksums into manifest.json on commit.
class StageOutputs {
 public:
  StageOutputs(const ExperimentConfig& cfg, std::string stage)
      : dir_(cfg.output_dir), stage_(std::move(stage)),
        digest_(cfg.config_digest) {
    fs::create_directories(dir_);
  }

  ~StageOutputs() {
    if (committed_) return;
    for (const auto& [name, checksum] : outputs_) {
      (void)checksum;
      std::error_code ec;
      fs::remove(fs::path(dir_) / name, ec);
    }
  }

  std::string path_of(const std::string& name) const {
    return (fs::path(dir_) / name).string();
  }

  void write(const std::string& name, const std::string& data) {
    write_file(path_of(name), data);
    outputs_.emplace_back(name, fnv1a_hex(data));
  }

  void write(const std::string& name, const std::vector<std::uint8_t>& data) {
    write(name, std::string(data.begin(), data.end()));
  }

  void commit() {
    nlohmann::json manifest;
    const std::string manifest_path = path_of("manifest.json");
    if (fs::exists(manifest_path)) {
      try {
        manifest = nlohmann::json::parse(read_file(manifest_path));
      } catch (const std::exception&) {
        manifest = nlohmann::json::object();
      }
    }
    manifest["tool_version"] = kToolVersion;
    manifest["config_digest"] = digest_;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& [name, checksum] : outputs_)
      outs.push_back({{"path", name}, {"checksum", checksum}});
    manifest["stages"][stage_]["outputs"] = outs;
    write_file(manifest_path, manifest.dump(2));
    committed_ = true;
  }

 private:
  std::string dir_;
  std::string stage_;
  std::string digest_;
  std::vector<std::pair<std::string, std::string>> outputs_;
  bool committed_ = false;
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "network.n_sta", "network.n_tx", "network.n_rx_per_sta",
      "network.n_ss_per_sta", "network.n_subcarriers", "network.bandwidth_mhz",
      "channel.model", "channel.profile",
      "data.n_samples", "data.normalize", "data.median_window",
      "split.train", "split.val", "split.test",
      "train.epochs", "train.batch_size", "train.lr0", "train.optimizer",
      "train.k_levels",
      "bop.gamma", "bop.tau_ms", "bop.mu", "bop.k_ladder", "bop.max_depth",
      "bop.eval_snr_db", "bop.bottleneck_bits",
      "phy.snr_db", "phy.n_frames", "phy.bits_per_frame", "phy.coding",
      "phy.b_phi_levels",
      "platform.sta_flops_per_s", "platform.ap_flops_per_s",
      "platform.link_rate_bps",
      "output_dir", "master_seed",
  };
  return keys;
}

std::string dataset_path(const ExperimentConfig& cfg, const char* part) {
  return (fs::path(cfg.output_dir) / ("dataset_" + std::string(part) +
                                      ".sbcsi"))
      .string();
}

std::string model_name(double k) { return "model_" + k_level_name(k) + ".sbnn"; }
std::string history_name(double k) {
  return "history_" + k_level_name(k) + ".csv";
}

std::string history_csv(const TrainResult& result) {
  std::ostringstream os;
  os << "epoch,lr,train_loss,val_loss,val_ber\n";
  for (const EpochStats& e : result.history)
    os << e.epoch << ',' << e.lr << ',' << e.train_loss << ',' << e.val_loss
       << ',' << e.val_ber << '\n';
  return os.str();
}

PhyConfig probe_phy(const ExperimentConfig& cfg, double snr_db) {
  PhyConfig phy = cfg.phy;
  phy.snr_db = snr_db;
  return phy;
}

}  // namespace

std::string fnv1a_hex(const std::string& data) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  const FlatConfig raw = FlatConfig::parse_file(path);
  raw.require_known_keys(known_keys());
  const fs::path base = fs::path(path).parent_path();

  ExperimentConfig cfg;
  cfg.config_digest = fnv1a_hex(raw.canonical_text());

  NetworkConfig& net = cfg.network;
  net.n_sta = static_cast<std::uint32_t>(raw.get_u64("network.n_sta", 2));
  net.n_ss_per_sta =
      static_cast<std::uint32_t>(raw.get_u64("network.n_ss_per_sta", 1));
  net.n_rx_per_sta =
      static_cast<std::uint32_t>(raw.get_u64("network.n_rx_per_sta", 1));
  net.n_tx = static_cast<std::uint32_t>(
      raw.get_u64("network.n_tx", net.n_sta * net.n_ss_per_sta));
  net.bandwidth_mhz =
      static_cast<std::uint32_t>(raw.get_u64("network.bandwidth_mhz", 20));
  net.n_subcarriers = static_cast<std::uint32_t>(raw.get_u64(
      "network.n_subcarriers",
      NetworkConfig::subcarriers_for_bandwidth(net.bandwidth_mhz)));
  net.validate();

  const std::string model = raw.get_string("channel.model", "clustered");
  if (model == "rayleigh") {
    cfg.channel_model = ChannelModel::rayleigh;
  } else if (model == "clustered") {
    cfg.channel_model = ChannelModel::clustered;
  } else {
    throw InvalidInput("channel.model must be rayleigh or clustered");
  }
  if (cfg.channel_model == ChannelModel::clustered) {
    const std::string profile =
        raw.get_string("channel.profile", "profiles/model_b_9tap.csv");
    fs::path p(profile);
    if (p.is_relative()) p = base / p;
    cfg.channel_profile = p.string();
    if (!fs::exists(cfg.channel_profile))
      throw InvalidInput("channel.profile does not exist: " +
                         cfg.channel_profile);
  }

  cfg.n_samples = raw.get_u64("data.n_samples", 10000);
  cfg.normalize_data = raw.get_bool("data.normalize", true);
  cfg.median_window = raw.get_u64("data.median_window", 0);

  cfg.split.train_fraction = raw.get_double("split.train", 0.8);
  cfg.split.val_fraction = raw.get_double("split.val", 0.1);
  cfg.split.test_fraction = raw.get_double("split.test", 0.1);
  cfg.split.validate();

  cfg.train_cfg.epochs = raw.get_u64("train.epochs", 40);
  cfg.train_cfg.batch_size = raw.get_u64("train.batch_size", 16);
  cfg.train_cfg.lr0 = raw.get_double("train.lr0", 1e-3);
  const std::string opt = raw.get_string("train.optimizer", "adam");
  if (opt == "sgd") {
    cfg.train_cfg.optimizer = Optimizer::sgd;
  } else if (opt == "adam") {
    cfg.train_cfg.optimizer = Optimizer::adam;
  } else {
    throw InvalidInput("train.optimizer must be sgd or adam");
  }
  cfg.k_levels = raw.get_fraction_list("train.k_levels", "1/32,1/16,1/8,1/4");

  cfg.bop.gamma = raw.get_double("bop.gamma", 0.02);
  cfg.bop.tau_ms = raw.get_double("bop.tau_ms", 10.0);
  cfg.bop.mu = raw.get_double("bop.mu", 0.5);
  cfg.bop.k_ladder = raw.get_fraction_list("bop.k_ladder", "1/32,1/16,1/8,1/4");
  cfg.bop.max_depth = raw.get_u64("bop.max_depth", 2);
  cfg.bop.eval_snr_db = raw.get_double("bop.eval_snr_db", 10.0);
  cfg.bop.bottleneck_bits =
      static_cast<std::uint32_t>(raw.get_u64("bop.bottleneck_bits", 16));
  cfg.bop.validate();

  cfg.phy.snr_db = raw.get_double("phy.snr_db", 20.0);
  cfg.phy.n_frames = raw.get_u64("phy.n_frames", 1);
  cfg.phy.bits_per_frame = raw.get_u64("phy.bits_per_frame", 0);
  const std::string coding = raw.get_string("phy.coding", "none");
  if (coding == "none") {
    cfg.phy.coding = Coding::none;
  } else if (coding == "bcc_r12") {
    cfg.phy.coding = Coding::bcc_r12;
  } else {
    throw InvalidInput("phy.coding must be none or bcc_r12");
  }
  cfg.phy.validate();
  for (std::uint64_t b : raw.get_u64_list("phy.b_phi_levels", "7,9"))
    QuantConfig{static_cast<std::uint32_t>(b)}.validate();
  cfg.b_phi_levels.clear();
  for (std::uint64_t b : raw.get_u64_list("phy.b_phi_levels", "7,9"))
    cfg.b_phi_levels.push_back(static_cast<std::uint32_t>(b));

  cfg.platform.sta_flops_per_s =
      raw.get_double("platform.sta_flops_per_s", 1e9);
  cfg.platform.ap_flops_per_s = raw.get_double("platform.ap_flops_per_s", 1e10);
  cfg.platform.link_rate_bps = raw.get_double("platform.link_rate_bps", 80e6);
  cfg.platform.validate();

  fs::path out(raw.get_string("output_dir"));
  if (out.is_relative()) out = base / out;
  cfg.output_dir = out.string();
  cfg.master_seed = raw.get_u64("master_seed");

  // Child seeds flow from the master through the documented derivation.
  cfg.train_cfg.seed = derive_seed(cfg.master_seed, "train", 0);
  cfg.phy.seed = derive_seed(cfg.master_seed, "phy", 0);
  return cfg;
}

void run_gen(const ExperimentConfig& cfg) {
  StageOutputs stage(cfg, "gen");
  const std::uint64_t gen_seed = derive_seed(cfg.master_seed, "gen", 0);
  CsiDataset ds;
  if (cfg.channel_model == ChannelModel::rayleigh) {
    ds = gen_rayleigh(cfg.network, cfg.n_samples, gen_seed);
  } else {
    const TapProfile profile = load_tap_profile(cfg.channel_profile);
    ds = gen_clustered(cfg.network, cfg.n_samples, profile, gen_seed);
  }
  if (cfg.normalize_data) ds = normalize(ds);
  if (cfg.median_window > 0) ds = median_smooth(ds, cfg.median_window);

  const auto [train_part, val_part, test_part] =
      split_dataset(ds, cfg.split, derive_seed(cfg.master_seed, "split", 0));
  stage.write("dataset_full.sbcsi", save_dataset(ds));
  stage.write("dataset_train.sbcsi", save_dataset(train_part));
  stage.write("dataset_val.sbcsi", save_dataset(val_part));
  stage.write("dataset_test.sbcsi", save_dataset(test_part));
  stage.commit();
}

void run_train(const ExperimentConfig& cfg, std::size_t threads) {
  require_file(dataset_path(cfg, "train"));
  require_file(dataset_path(cfg, "val"));
  const CsiDataset train_ds = load_dataset_file(dataset_path(cfg, "train"));
  const CsiDataset val_ds = load_dataset_file(dataset_path(cfg, "val"));
  const TrainingSet train_set = build_training_set(train_ds);
  const TrainingSet val_set = build_training_set(val_ds);

  StageOutputs stage(cfg, "train");
  for (std::size_t i = 0; i < cfg.k_levels.size(); ++i) {
    const double k = cfg.k_levels[i];
    const ArchSpec arch = bop_arch(cfg.network, k, 0);
    TrainConfig tcfg = cfg.train_cfg;
    tcfg.seed = derive_seed(cfg.master_seed, "train", i);
    const SplitModel init = build_model(arch, tcfg.seed);
    const PhyConfig phy = probe_phy(cfg, cfg.phy.snr_db);
    BerProbe probe = [&](const SplitModel& m) {
      return simulate_ber(val_ds,
                          split_model_source(m, cfg.network.n_tx,
                                             cfg.network.n_ss_per_sta,
                                             cfg.bop.bottleneck_bits),
                          phy, threads)
          .mean_ber;
    };
    const TrainResult result = train(init, train_set, val_set, tcfg, probe);
    stage.write(model_name(k), save_model(result.best_model));
    stage.write(history_name(k), history_csv(result));
  }
  stage.commit();
}

void run_eval(const ExperimentConfig& cfg, std::size_t threads) {
  require_file(dataset_path(cfg, "test"));
  const CsiDataset test_ds = load_dataset_file(dataset_path(cfg, "test"));
  const std::size_t n_ss = cfg.network.n_ss_per_sta;

  std::vector<std::pair<std::string, BeamSource>> sources;
  sources.emplace_back("ber_ideal.json", ideal_svd_source(n_ss));
  for (std::uint32_t b : cfg.b_phi_levels)
    sources.emplace_back("ber_givens_b" + std::to_string(b) + ".json",
                         givens_quantized_source(n_ss, QuantConfig{b}));
  for (double k : cfg.k_levels) {
    const std::string model_file =
        (fs::path(cfg.output_dir) / model_name(k)).string();
    require_file(model_file);
    sources.emplace_back(
        "ber_split_" + k_level_name(k) + ".json",
        split_model_source(load_model_file(model_file), cfg.network.n_tx,
                           n_ss, cfg.bop.bottleneck_bits));
  }

  StageOutputs stage(cfg, "eval");
  for (const auto& [file, source] : sources) {
    const BerReport report = simulate_ber(test_ds, source, cfg.phy, threads);
    stage.write(file, report.to_json());
  }
  stage.commit();
}

void run_bop(const ExperimentConfig& cfg, bool fast_mode,
             std::size_t threads) {
  (void)threads;
  require_file(dataset_path(cfg, "train"));
  require_file(dataset_path(cfg, "val"));
  const CsiDataset train_ds = load_dataset_file(dataset_path(cfg, "train"));
  const CsiDataset val_ds = load_dataset_file(dataset_path(cfg, "val"));

  TrainConfig tcfg = cfg.train_cfg;
  tcfg.seed = derive_seed(cfg.master_seed, "bop", 0);
  if (fast_mode) {
    tcfg.epochs = std::min<std::size_t>(tcfg.epochs, 8);
    tcfg.lr_drop_epochs = {tcfg.epochs / 2, (3 * tcfg.epochs) / 4};
  }

  const BopOutcome outcome =
      solve_bop(train_ds, val_ds, cfg.bop, tcfg, cfg.platform);

  StageOutputs stage(cfg, "bop");
  stage.write("bop_candidates.csv", outcome.table_csv());
  nlohmann::json j;
  j["feasible"] = outcome.feasible();
  j["n_candidates"] = outcome.candidates.size();
  if (outcome.feasible()) {
    const BopCandidate& c = outcome.candidates[*outcome.chosen_index];
    j["chosen"] = {{"k", c.k},
                   {"depth", c.depth},
                   {"val_ber", c.val_ber},
                   {"head_flops", c.cost.head_flops},
                   {"feedback_bits", c.cost.feedback_bits_split},
                   {"t_total_ms", c.cost.t_total_ms}};
    stage.write("bop_model.sbnn", save_model(*outcome.chosen_model));
  }
  stage.write("bop_summary.json", j.dump(2));
  stage.commit();
}

void run_account(const ExperimentConfig& cfg) {
  StageOutputs stage(cfg, "account");
  std::ostringstream os;
  os << "n_sta,n_tx,n_rx,n_sub,k,svd_flops,gr_flops,head_macs,head_flops,"
        "flop_ratio,bmr_bits,split_bits,air_ratio,cr\n";
  const QuantConfig q{9};
  for (std::uint32_t nt : {2u, 3u, 4u, 8u}) {
    for (std::uint32_t s : {56u, 114u, 242u, 486u}) {
      NetworkConfig net;
      net.n_sta = nt;
      net.n_tx = nt;
      net.n_rx_per_sta = 1;
      net.n_ss_per_sta = 1;
      net.n_subcarriers = s;
      switch (s) {
        case 56: net.bandwidth_mhz = 20; break;
        case 114: net.bandwidth_mhz = 40; break;
        case 242: net.bandwidth_mhz = 80; break;
        case 486: net.bandwidth_mhz = 160; break;
      }
      const Flops80211 base = flops_80211(net);
      const FeedbackAccounting acct = accounting(net, q);
      for (double k : cfg.bop.k_ladder) {
        const ArchSpec arch = bop_arch(net, k, 0);
        const std::uint64_t macs = head_macs(arch);
        const std::uint64_t flops = head_flops(arch);
        const AirtimeBits air =
            airtime_bits(net, k, q, cfg.bop.bottleneck_bits);
        os << nt << ',' << nt << ',' << 1 << ',' << s << ',' << k << ','
           << base.svd << ',' << base.gr << ',' << macs << ',' << flops << ','
           << static_cast<double>(flops) /
                  static_cast<double>(base.svd + base.gr)
           << ',' << air.baseline << ',' << air.split << ','
           << static_cast<double>(air.split) /
                  static_cast<double>(air.baseline)
           << ',' << acct.cr << '\n';
      }
    }
  }
  stage.write("account.csv", os.str());
  stage.commit();
}

void run_report(const ExperimentConfig& cfg) {
  nlohmann::json summary;
  summary["config_digest"] = cfg.config_digest;
  summary["tool_version"] = kToolVersion;

  std::vector<std::string> ber_files;
  if (fs::exists(cfg.output_dir))
    for (const auto& entry : fs::directory_iterator(cfg.output_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("ber_", 0) == 0 && name.size() > 5 &&
          name.substr(name.size() - 5) == ".json")
        ber_files.push_back(name);
    }
  std::sort(ber_files.begin(), ber_files.end());
  if (ber_files.empty())
    throw MissingArtifact((fs::path(cfg.output_dir) / "ber_*.json").string());

  const Flops80211 base = flops_80211(cfg.network);
  const FeedbackAccounting acct = accounting(cfg.network, QuantConfig{9});

  std::ostringstream csv;
  csv << "source,mean_ber,skipped_samples,feedback_bits_per_sta,"
         "sta_flops\n";
  for (const std::string& file : ber_files) {
    const nlohmann::json rep = nlohmann::json::parse(
        read_file((fs::path(cfg.output_dir) / file).string()));
    const std::string source = file.substr(4, file.size() - 9);
    summary["ber"][source] = rep;

    std::uint64_t bits = acct.bmr_bits;
    std::uint64_t flops = base.svd + base.gr;
    if (source.rfind("split_", 0) == 0) {
      const double k = parse_fraction([&] {
        std::string kpart = source.substr(7);  // strip "split_k"
        const std::size_t underscore = kpart.find('_');
        if (underscore != std::string::npos) kpart[underscore] = '/';
        return kpart;
      }());
      const AirtimeBits air = airtime_bits(cfg.network, k, QuantConfig{9},
                                           cfg.bop.bottleneck_bits);
      bits = air.split;
      flops = head_flops(bop_arch(cfg.network, k, 0));
    }
    csv << source << ',' << rep.value("mean_ber", 0.0) << ','
        << rep.value("skipped_samples", 0) << ',' << bits << ',' << flops
        << '\n';
  }

  StageOutputs stage(cfg, "report");
  stage.write("summary.csv", csv.str());
  stage.write("summary.json", summary.dump(2));
  stage.commit();
}

int run_cli(int argc, char** argv) {
  CLI::App app{"MU-MIMO beamforming feedback compression testbench"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool have_seed_override = false;
  std::size_t threads = 1;
  bool fast_mode = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option("--out", out_override, "override output_dir");
    sub->add_option("--seed", seed_override, "override master_seed")
        ->each([&](const std::string&) { have_seed_override = true; });
    sub->add_option("--threads", threads, "worker threads for evaluation");
  };

  CLI::App* cmd_gen = app.add_subcommand("gen", "generate + split datasets");
  CLI::App* cmd_train = app.add_subcommand("train", "train one model per K");
  CLI::App* cmd_eval =
      app.add_subcommand("eval", "measure BER for every feedback source");
  CLI::App* cmd_bop = app.add_subcommand("bop", "run the bottleneck search");
  CLI::App* cmd_account =
      app.add_subcommand("account", "FLOP/airtime tables across configs");
  CLI::App* cmd_report = app.add_subcommand("report", "collate results");
  for (CLI::App* sub :
       {cmd_gen, cmd_train, cmd_eval, cmd_bop, cmd_account, cmd_report})
    add_common(sub);
  cmd_bop->add_flag("--fast", fast_mode, "reduced-epoch candidate training");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (have_seed_override) {
      cfg.master_seed = seed_override;
      cfg.train_cfg.seed = derive_seed(cfg.master_seed, "train", 0);
      cfg.phy.seed = derive_seed(cfg.master_seed, "phy", 0);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  try {
    if (cmd_gen->parsed()) run_gen(cfg);
    if (cmd_train->parsed()) run_train(cfg, threads);
    if (cmd_eval->parsed()) run_eval(cfg, threads);
    if (cmd_bop->parsed()) run_bop(cfg, fast_mode, threads);
    if (cmd_account->parsed()) run_account(cfg);
    if (cmd_report->parsed()) run_report(cfg);
  } catch (const MissingArtifact& e) {
    std::fprintf(stderr, "missing artifact: %s\n", e.what());
    return 3;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "artifact format error: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}

}  // namespace sbeam

namespace sbeam {

std::uint64_t derive_seed(std::uint64_t master_seed, const char* module_name,
                          std::uint64_t index) {
  // child = splitmix64(splitmix64(master ^ fnv1a(module)) + index)
  std::uint64_t h = fnv1a64(module_name);
  std::uint64_t state = master_seed ^ h;
  (void)detail::splitmix64(state);
  state += index;
  return detail::splitmix64(state);
}

}  // namespace sbeam
