#include "sbeam/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "sbeam/errors.hpp"
#include "sbeam/rng.hpp"

namespace sbeam {

namespace {

// Entries are materialized at f32 precision so the SBCSI1 round trip is
// exact for generated datasets.
cplx to_storage_precision(cplx z) {
  // volatile defeats a GCC 11 -O3 miscompile that elides the narrowing
  // conversion when it feeds a std::complex constructor.
  volatile float re = static_cast<float>(z.real());
  volatile float im = static_cast<float>(z.imag());
  return cplx(re, im);
}

std::uint64_t sample_stream_id(std::size_t sample, std::uint32_t sta) {
  return (static_cast<std::uint64_t>(sample) << 16) | sta;
}

CsiDataset make_empty(const NetworkConfig& config, std::size_t n_samples,
                      std::uint64_t seed, Provenance prov) {
  config.validate();
  if (n_samples == 0) throw InvalidInput("n_samples must be >= 1");
  CsiDataset ds;
  ds.config = config;
  ds.provenance = prov;
  ds.seed = seed;
  ds.samples.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    ds.samples[i].sequence_number = i;
    ds.samples[i].timestamp_us = 1000ull * i;  // 1000 packets/s cadence
    ds.samples[i].sta.assign(
        config.n_sta,
        StaCsi(config.n_rx_per_sta, config.n_tx, config.n_subcarriers));
  }
  return ds;
}

}  // namespace

void TapProfile::validate() const {
  if (taps.empty()) throw InvalidInput("tap profile needs at least one tap");
  double total = 0.0;
  for (const Tap& t : taps) {
    if (t.power < 0.0) throw InvalidInput("tap power must be non-negative");
    total += t.power;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidInput("tap powers must sum to 1");
}

void SplitSpec::validate() const {
  if (train_fraction < 0.0 || val_fraction < 0.0 || test_fraction < 0.0)
    throw InvalidInput("split fractions must be non-negative");
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-12)
    throw InvalidInput("split fractions must sum to 1");
}

CsiDataset gen_rayleigh(const NetworkConfig& config, std::size_t n_samples,
                        std::uint64_t seed) {
  CsiDataset ds =
      make_empty(config, n_samples, seed, Provenance::synthetic_rayleigh);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (std::uint32_t s = 0; s < config.n_sta; ++s) {
      Rng rng(seed, sample_stream_id(i, s));
      for (cplx& h : ds.samples[i].sta[s].data) {
        auto [re, im] = rng.gaussian_pair();
        h = to_storage_precision(cplx(re * inv_sqrt2, im * inv_sqrt2));
      }
    }
  }
  return ds;
}

CsiDataset gen_clustered(const NetworkConfig& config, std::size_t n_samples,
                         const TapProfile& profile, std::uint64_t seed) {
  profile.validate();
  CsiDataset ds =
      make_empty(config, n_samples, seed, Provenance::synthetic_clustered);
  const std::size_t n_taps = profile.taps.size();
  const double delta_f_hz = config.bandwidth_mhz * 1e6 / config.n_subcarriers;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  // Per-(tap, subcarrier) phasors do not depend on the sample; precompute.
  std::vector<cplx> phasor(n_taps * config.n_subcarriers);
  for (std::size_t k = 0; k < n_taps; ++k) {
    const double tau_s = profile.taps[k].delay_ns * 1e-9;
    for (std::uint32_t sc = 0; sc < config.n_subcarriers; ++sc) {
      const double f_s =
          (static_cast<double>(sc) - config.n_subcarriers / 2.0) * delta_f_hz;
      phasor[k * config.n_subcarriers + sc] =
          std::polar(1.0, -2.0 * M_PI * f_s * tau_s);
    }
  }

  std::vector<cplx> taps(n_taps);
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (std::uint32_t s = 0; s < config.n_sta; ++s) {
      Rng rng(seed, sample_stream_id(i, s));
      StaCsi& csi = ds.samples[i].sta[s];
      for (std::uint32_t rx = 0; rx < config.n_rx_per_sta; ++rx) {
        for (std::uint32_t tx = 0; tx < config.n_tx; ++tx) {
          for (std::size_t k = 0; k < n_taps; ++k) {
            auto [re, im] = rng.gaussian_pair();
            const double amp = std::sqrt(profile.taps[k].power);
            taps[k] = cplx(re * amp * inv_sqrt2, im * amp * inv_sqrt2);
          }
          for (std::uint32_t sc = 0; sc < config.n_subcarriers; ++sc) {
            cplx h(0.0, 0.0);
            for (std::size_t k = 0; k < n_taps; ++k)
              h += taps[k] * phasor[k * config.n_subcarriers + sc];
            csi.at(rx, tx, sc) = to_storage_precision(h);
          }
        }
      }
    }
  }
  return ds;
}

TapProfile load_tap_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open tap profile: " + path);
  TapProfile profile;
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 4)
      throw InvalidInput("tap profile line " + std::to_string(line_no) +
                         ": expected 4 columns");
    TapProfile::Tap tap;
    tap.cluster = static_cast<std::uint32_t>(std::stoul(fields[1]));
    tap.delay_ns = std::stod(fields[2]);
    tap.power = std::stod(fields[3]);
    profile.taps.push_back(tap);
  }
  profile.validate();
  return profile;
}

CsiDataset normalize(const CsiDataset& ds) {
  CsiDataset out = ds;
  for (CsiTensor& sample : out.samples) {
    for (StaCsi& sta : sample.sta) {
      double mean = 0.0;
      for (const cplx& h : sta.data) mean += std::abs(h);
      mean /= static_cast<double>(sta.data.size());
      if (mean == 0.0) throw ZeroSample(sample.sequence_number);
      for (cplx& h : sta.data) h /= mean;
    }
  }
  return out;
}

CsiDataset median_smooth(const CsiDataset& ds, std::size_t window) {
  if (window == 0) throw InvalidInput("window must be >= 1");
  if (window == 1 || ds.samples.size() <= 1) return ds;
  CsiDataset out = ds;
  const std::size_t n = ds.samples.size();
  const std::size_t n_sta = ds.samples.empty() ? 0 : ds.samples[0].sta.size();

  std::vector<double> buf;
  buf.reserve(window);
  auto median_of = [&buf]() {
    std::sort(buf.begin(), buf.end());
    const std::size_t m = buf.size();
    return (m % 2 == 1) ? buf[m / 2] : 0.5 * (buf[m / 2 - 1] + buf[m / 2]);
  };

  for (std::size_t s = 0; s < n_sta; ++s) {
    const std::size_t slots = ds.samples[0].sta[s].data.size();
    for (std::size_t slot = 0; slot < slots; ++slot) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t first = (i + 1 >= window) ? i + 1 - window : 0;
        buf.clear();
        for (std::size_t j = first; j <= i; ++j)
          buf.push_back(ds.samples[j].sta[s].data[slot].real());
        const double re = median_of();
        buf.clear();
        for (std::size_t j = first; j <= i; ++j)
          buf.push_back(ds.samples[j].sta[s].data[slot].imag());
        const double im = median_of();
        out.samples[i].sta[s].data[slot] = cplx(re, im);
      }
    }
  }
  return out;
}

CsiDataset align_by_sequence(const std::vector<CsiDataset>& streams) {
  if (streams.empty()) throw InvalidInput("no streams to align");
  const NetworkConfig& base = streams[0].config;
  for (const CsiDataset& s : streams) {
    if (s.config.n_sta != 1)
      throw InvalidInput("each capture stream must hold exactly one STA");
    if (s.config.n_rx_per_sta != base.n_rx_per_sta ||
        s.config.n_tx != base.n_tx ||
        s.config.n_subcarriers != base.n_subcarriers)
      throw InvalidInput("stream dimensions differ");
  }

  std::map<std::uint64_t, std::size_t> common;
  for (const CsiTensor& t : streams[0].samples)
    common.emplace(t.sequence_number, 0);
  for (std::size_t k = 1; k < streams.size(); ++k) {
    std::set<std::uint64_t> seqs;
    for (const CsiTensor& t : streams[k].samples)
      seqs.insert(t.sequence_number);
    for (auto it = common.begin(); it != common.end();)
      it = seqs.count(it->first) ? std::next(it) : common.erase(it);
  }
  if (common.empty()) throw NoCommonSamples();

  CsiDataset out;
  out.config = base;
  out.config.n_sta = static_cast<std::uint32_t>(streams.size());
  out.provenance = Provenance::imported;

  std::vector<std::map<std::uint64_t, const CsiTensor*>> by_seq(
      streams.size());
  for (std::size_t k = 0; k < streams.size(); ++k)
    for (const CsiTensor& t : streams[k].samples)
      by_seq[k].emplace(t.sequence_number, &t);

  for (const auto& [seq, unused] : common) {
    (void)unused;
    CsiTensor merged;
    merged.sequence_number = seq;
    merged.timestamp_us = by_seq[0].at(seq)->timestamp_us;
    for (std::size_t k = 0; k < streams.size(); ++k)
      merged.sta.push_back(by_seq[k].at(seq)->sta[0]);
    out.samples.push_back(std::move(merged));
  }
  return out;
}

std::tuple<CsiDataset, CsiDataset, CsiDataset> split_dataset(
    const CsiDataset& ds, const SplitSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n = ds.samples.size();
  if (n < 10) throw InvalidInput("dataset too small to split");

  const std::size_t n_val =
      static_cast<std::size_t>(std::llround(spec.val_fraction * n));
  const std::size_t n_test =
      static_cast<std::size_t>(std::llround(spec.test_fraction * n));
  if (n_val + n_test > n) throw InvalidInput("split fractions leave no data");
  const std::size_t n_train = n - n_val - n_test;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, 0);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.next_below(i + 1);
    std::swap(order[i], order[j]);
  }

  auto take = [&](std::size_t first, std::size_t count) {
    std::vector<std::size_t> idx(order.begin() + first,
                                 order.begin() + first + count);
    std::sort(idx.begin(), idx.end());  // keep sequence numbers increasing
    CsiDataset part;
    part.config = ds.config;
    part.provenance = ds.provenance;
    part.seed = ds.seed;
    part.samples.reserve(count);
    for (std::size_t i : idx) part.samples.push_back(ds.samples[i]);
    return part;
  };

  return {take(0, n_train), take(n_train, n_val),
          take(n_train + n_val, n_test)};
}

}  // namespace sbeam
