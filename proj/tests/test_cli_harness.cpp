#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sbeam/config_file.hpp"
#include "sbeam/csi_io.hpp"
#include "sbeam/errors.hpp"
#include "sbeam/harness.hpp"
#include "sbeam/rng.hpp"

namespace fs = std::filesystem;
using namespace sbeam;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sbeam_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string tiny_config(const std::string& out_dir,
                        std::uint64_t seed = 12345) {
  return "network.n_sta = 2\n"
         "network.n_subcarriers = 4\n"
         "channel.model = rayleigh\n"
         "data.n_samples = 60\n"
         "train.epochs = 1\n"
         "train.k_levels = 1/4\n"
         "bop.max_depth = 1\n"
         "bop.gamma = 0.5\n"
         "phy.snr_db = 10\n"
         "phy.b_phi_levels = 9\n"
         "output_dir = " + out_dir + "\n"
         "master_seed = " + std::to_string(seed) + "\n";
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int call_cli(std::vector<std::string> args) {
  std::vector<char*> argv;
  args.insert(args.begin(), "sbeam");
  for (std::string& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("flat config parsing") {
  const FlatConfig cfg = FlatConfig::parse(
      "# comment\n"
      "a.b = 3\n"
      "name = hello world  # trailing\n"
      "list = 1/2, 1/4\n");
  CHECK(cfg.get_u64("a.b") == 3);
  CHECK(cfg.get_string("name") == "hello world");
  const auto fr = cfg.get_fraction_list("list", "");
  REQUIRE(fr.size() == 2);
  CHECK(fr[0] == 0.5);
  CHECK(fr[1] == 0.25);
  CHECK(cfg.get_u64("absent", 9) == 9);
  CHECK_THROWS_AS(cfg.get_string("absent"), InvalidInput);
  CHECK_THROWS_AS(FlatConfig::parse("a = 1\na = 2\n"), InvalidInput);
  CHECK_THROWS_AS(FlatConfig::parse("just text\n"), InvalidInput);
  CHECK_THROWS_AS(cfg.require_known_keys({"a.b"}), InvalidInput);
}

TEST_CASE("fraction and level names") {
  CHECK(parse_fraction("1/32") == doctest::Approx(0.03125));
  CHECK(parse_fraction("0.5") == 0.5);
  CHECK_THROWS_AS(parse_fraction("1/0"), InvalidInput);
  CHECK(k_level_name(0.25) == "k1_4");
  CHECK(k_level_name(1.0 / 32) == "k1_32");
  CHECK(k_level_name(3.0 / 8) == "k3_8");
}

TEST_CASE("seed derivation is stable and keyed") {
  CHECK(derive_seed(1, "gen", 0) == derive_seed(1, "gen", 0));
  CHECK(derive_seed(1, "gen", 0) != derive_seed(1, "gen", 1));
  CHECK(derive_seed(1, "gen", 0) != derive_seed(1, "train", 0));
  CHECK(derive_seed(1, "gen", 0) != derive_seed(2, "gen", 0));
}

TEST_CASE("experiment config load with schema checks") {
  const fs::path dir = fresh_dir("cfgload");
  const fs::path cfg_file = dir / "exp.cfg";
  write_text(cfg_file, tiny_config((dir / "out").string()));
  const ExperimentConfig cfg = load_experiment_config(cfg_file.string());
  CHECK(cfg.network.n_sta == 2);
  CHECK(cfg.network.n_tx == 2);
  CHECK(cfg.network.n_subcarriers == 4);
  CHECK(cfg.channel_model == ChannelModel::rayleigh);
  CHECK(cfg.k_levels == std::vector<double>{0.25});
  CHECK(cfg.master_seed == 12345);
  CHECK(!cfg.config_digest.empty());

  write_text(cfg_file, tiny_config((dir / "out").string()) + "bogus.key = 1\n");
  CHECK_THROWS_AS(load_experiment_config(cfg_file.string()), InvalidInput);

  write_text(cfg_file, "network.n_sta = 2\noutput_dir = x\n");
  CHECK_THROWS_AS(load_experiment_config(cfg_file.string()), InvalidInput);
}

TEST_CASE("full pipeline stages produce the documented artifacts") {
  const fs::path dir = fresh_dir("pipeline");
  const fs::path out = dir / "out";
  const fs::path cfg_file = dir / "exp.cfg";
  write_text(cfg_file, tiny_config(out.string()));
  const ExperimentConfig cfg = load_experiment_config(cfg_file.string());

  // Dependent stages refuse to run before gen.
  CHECK_THROWS_AS(run_train(cfg), MissingArtifact);
  CHECK_THROWS_AS(run_eval(cfg), MissingArtifact);
  CHECK_THROWS_AS(run_report(cfg), MissingArtifact);

  run_gen(cfg);
  for (const char* f : {"dataset_full.sbcsi", "dataset_train.sbcsi",
                        "dataset_val.sbcsi", "dataset_test.sbcsi"})
    CHECK(fs::exists(out / f));
  const CsiDataset train_ds =
      load_dataset_file((out / "dataset_train.sbcsi").string());
  CHECK(train_ds.samples.size() == 48);

  run_train(cfg);
  CHECK(fs::exists(out / "model_k1_4.sbnn"));
  CHECK(fs::exists(out / "history_k1_4.csv"));

  run_eval(cfg);
  CHECK(fs::exists(out / "ber_ideal.json"));
  CHECK(fs::exists(out / "ber_givens_b9.json"));
  CHECK(fs::exists(out / "ber_split_k1_4.json"));

  run_account(cfg);
  CHECK(fs::exists(out / "account.csv"));
  const std::string account = read_bytes(out / "account.csv");
  CHECK(account.find("0.508929") != std::string::npos);  // CR for 2x2 @ 56
  CHECK(account.find("0.675595") != std::string::npos);  // CR for 3x3 @ 56

  run_report(cfg);
  CHECK(fs::exists(out / "summary.csv"));
  CHECK(fs::exists(out / "summary.json"));

  // Manifest lists every artifact with its checksum.
  const nlohmann::json manifest =
      nlohmann::json::parse(read_bytes(out / "manifest.json"));
  CHECK(manifest["config_digest"] == cfg.config_digest);
  for (const char* stage : {"gen", "train", "eval", "account", "report"}) {
    REQUIRE(manifest["stages"].contains(stage));
    for (const auto& entry : manifest["stages"][stage]["outputs"]) {
      const std::string name = entry["path"];
      const std::string bytes = read_bytes(out / name);
      CHECK(entry["checksum"] == fnv1a_hex(bytes));
    }
  }
}

TEST_CASE("same master seed reproduces identical artifacts") {
  const fs::path dir = fresh_dir("repro");
  const fs::path out_a = dir / "a";
  const fs::path out_b = dir / "b";
  const fs::path cfg_a = dir / "a.cfg";
  const fs::path cfg_b = dir / "b.cfg";
  write_text(cfg_a, tiny_config(out_a.string(), 777));
  write_text(cfg_b, tiny_config(out_b.string(), 777));
  const ExperimentConfig a = load_experiment_config(cfg_a.string());
  const ExperimentConfig b = load_experiment_config(cfg_b.string());
  run_gen(a);
  run_gen(b);
  run_train(a);
  run_train(b);
  run_eval(a);
  run_eval(b);
  for (const char* f :
       {"dataset_full.sbcsi", "dataset_train.sbcsi", "model_k1_4.sbnn",
        "history_k1_4.csv", "ber_ideal.json", "ber_split_k1_4.json"})
    CHECK(read_bytes(out_a / f) == read_bytes(out_b / f));
}

TEST_CASE("bop stage writes the candidate table") {
  const fs::path dir = fresh_dir("bopstage");
  const fs::path out = dir / "out";
  const fs::path cfg_file = dir / "exp.cfg";
  write_text(cfg_file, tiny_config(out.string()));
  const ExperimentConfig cfg = load_experiment_config(cfg_file.string());
  run_gen(cfg);
  run_bop(cfg, true);
  CHECK(fs::exists(out / "bop_candidates.csv"));
  const nlohmann::json j =
      nlohmann::json::parse(read_bytes(out / "bop_summary.json"));
  REQUIRE(j["feasible"].get<bool>());
  CHECK(fs::exists(out / "bop_model.sbnn"));
}

TEST_CASE("cli exit codes") {
  const fs::path dir = fresh_dir("cli");
  const fs::path out = dir / "out";
  const fs::path cfg_file = dir / "exp.cfg";

  CHECK(call_cli({"gen", "--config", (dir / "missing.cfg").string()}) == 2);

  write_text(cfg_file, "nonsense\n");
  CHECK(call_cli({"gen", "--config", cfg_file.string()}) == 2);

  write_text(cfg_file, tiny_config(out.string()));
  CHECK(call_cli({"eval", "--config", cfg_file.string()}) == 3);
  CHECK(call_cli({"gen", "--config", cfg_file.string()}) == 0);
  CHECK(call_cli({"train", "--config", cfg_file.string()}) == 0);
  CHECK(call_cli({"eval", "--config", cfg_file.string(), "--threads", "2"}) ==
        0);
  CHECK(fs::exists(out / "ber_ideal.json"));
}
