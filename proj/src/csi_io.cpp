#include "sbeam/csi_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "sbeam/detail/wire.hpp"
#include "sbeam/errors.hpp"

namespace sbeam {

using wire::Reader;
using wire::put_f32;
using wire::put_u32;
using wire::put_u64;

namespace {

constexpr char kMagic[8] = {'S', 'B', 'C', 'S', 'I', '1', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::vector<std::uint8_t> save_dataset(const CsiDataset& ds) {
  std::vector<std::uint8_t> out;
  const NetworkConfig& c = ds.config;
  const std::size_t entries_per_sample =
      static_cast<std::size_t>(c.n_sta) * c.n_rx_per_sta * c.n_tx *
      c.n_subcarriers;
  out.reserve(44 + ds.samples.size() * (16 + entries_per_sample * 8));

  out.insert(out.end(), kMagic, kMagic + 8);
  put_u32(out, kVersion);
  put_u32(out, c.n_sta);
  put_u32(out, c.n_rx_per_sta);
  put_u32(out, c.n_tx);
  put_u32(out, c.n_subcarriers);
  put_u64(out, ds.samples.size());
  put_u64(out, ds.seed.value_or(0));
  put_u32(out, static_cast<std::uint32_t>(ds.provenance));

  for (const CsiTensor& t : ds.samples) {
    put_u64(out, t.sequence_number);
    put_u64(out, t.timestamp_us);
    for (const StaCsi& sta : t.sta) {
      for (const cplx& h : sta.data) {
        put_f32(out, static_cast<float>(h.real()));
        put_f32(out, static_cast<float>(h.imag()));
      }
    }
  }
  return out;
}

CsiDataset load_dataset(const std::vector<std::uint8_t>& bytes) {
  Reader rd(bytes);
  rd.need(8, "magic");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) {
    std::size_t bad = 0;
    while (bad < 8 && bytes[bad] == static_cast<std::uint8_t>(kMagic[bad]))
      ++bad;
    throw FormatError("bad SBCSI1 magic", bad);
  }
  Reader body(bytes);
  body.u64("magic");  // skip

  const std::uint32_t version = body.u32("version");
  if (version != kVersion) throw FormatError("unsupported version", 8);

  CsiDataset ds;
  NetworkConfig& c = ds.config;
  c.n_sta = body.u32("n_sta");
  c.n_rx_per_sta = body.u32("n_rx");
  c.n_tx = body.u32("n_tx");
  c.n_subcarriers = body.u32("n_sub");
  if (c.n_sta == 0 || c.n_rx_per_sta == 0 || c.n_tx == 0 ||
      c.n_subcarriers == 0)
    throw FormatError("zero dimension in header", 12);
  if (static_cast<std::uint64_t>(c.n_sta) * c.n_rx_per_sta * c.n_tx *
          c.n_subcarriers >
      (1ull << 32))
    throw FormatError("implausible dimensions in header", 12);

  const std::uint64_t n_samples = body.u64("n_samples");
  const std::uint64_t seed = body.u64("seed");
  const std::uint32_t prov = body.u32("provenance");
  if (prov > static_cast<std::uint32_t>(Provenance::imported))
    throw FormatError("unknown provenance code", 40);
  ds.provenance = static_cast<Provenance>(prov);
  if (ds.provenance != Provenance::imported) ds.seed = seed;

  // Remaining dims are derived: subcarrier count implies the bandwidth for
  // the standard grids, and streams fill n_tx across STAs when they can.
  switch (c.n_subcarriers) {
    case 56: c.bandwidth_mhz = 20; break;
    case 114: c.bandwidth_mhz = 40; break;
    case 242: c.bandwidth_mhz = 80; break;
    case 486: c.bandwidth_mhz = 160; break;
    default: c.bandwidth_mhz = 20; break;
  }
  if (c.n_tx % c.n_sta == 0 && c.n_tx / c.n_sta <= c.n_rx_per_sta)
    c.n_ss_per_sta = c.n_tx / c.n_sta;
  else
    c.n_ss_per_sta = 1;

  ds.samples.reserve(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    CsiTensor t;
    t.sequence_number = body.u64("sample seq");
    t.timestamp_us = body.u64("sample timestamp");
    for (std::uint32_t s = 0; s < c.n_sta; ++s) {
      StaCsi sta(c.n_rx_per_sta, c.n_tx, c.n_subcarriers);
      for (cplx& h : sta.data) {
        const std::size_t at = body.offset();
        const float re = body.f32("entry");
        const float im = body.f32("entry");
        if (!std::isfinite(re) || !std::isfinite(im))
          throw FormatError("non-finite CSI entry", at);
        h = cplx(re, im);
      }
      t.sta.push_back(std::move(sta));
    }
    ds.samples.push_back(std::move(t));
  }
  return ds;
}

void save_dataset_file(const CsiDataset& ds, const std::string& path) {
  const auto bytes = save_dataset(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

CsiDataset load_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open dataset: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return load_dataset(bytes);
}

CsiDataset import_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("empty CSV");
  if (line.rfind("seq,sta,rx,tx,sc,re,im", 0) != 0)
    throw InvalidInput("CSV header must be seq,sta,rx,tx,sc,re,im");

  struct Entry {
    std::uint32_t sta, rx, tx, sc;
    cplx value;
  };
  std::map<std::uint64_t, std::vector<Entry>> rows;
  std::uint32_t max_sta = 0, max_rx = 0, max_tx = 0, max_sc = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f;
    std::vector<std::string> fields;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 7)
      throw InvalidInput("CSV line " + std::to_string(line_no) +
                         ": expected 7 columns");
    Entry e;
    const std::uint64_t seq = std::stoull(fields[0]);
    e.sta = static_cast<std::uint32_t>(std::stoul(fields[1]));
    e.rx = static_cast<std::uint32_t>(std::stoul(fields[2]));
    e.tx = static_cast<std::uint32_t>(std::stoul(fields[3]));
    e.sc = static_cast<std::uint32_t>(std::stoul(fields[4]));
    e.value = cplx(std::stod(fields[5]), std::stod(fields[6]));
    if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()))
      throw InvalidInput("CSV line " + std::to_string(line_no) +
                         ": non-finite value");
    max_sta = std::max(max_sta, e.sta);
    max_rx = std::max(max_rx, e.rx);
    max_tx = std::max(max_tx, e.tx);
    max_sc = std::max(max_sc, e.sc);
    rows[seq].push_back(e);
  }
  if (rows.empty()) throw InvalidInput("CSV has no data rows");

  CsiDataset ds;
  ds.provenance = Provenance::imported;
  NetworkConfig& c = ds.config;
  c.n_sta = max_sta + 1;
  c.n_rx_per_sta = max_rx + 1;
  c.n_tx = max_tx + 1;
  c.n_subcarriers = max_sc + 1;
  c.n_ss_per_sta =
      (c.n_tx % c.n_sta == 0 && c.n_tx / c.n_sta <= c.n_rx_per_sta)
          ? c.n_tx / c.n_sta
          : 1;
  c.bandwidth_mhz = 20;

  const std::size_t per_sample =
      static_cast<std::size_t>(c.n_sta) * c.n_rx_per_sta * c.n_tx *
      c.n_subcarriers;
  for (const auto& [seq, entries] : rows) {
    if (entries.size() != per_sample)
      throw InvalidInput("sequence " + std::to_string(seq) + " has " +
                         std::to_string(entries.size()) + " entries, want " +
                         std::to_string(per_sample));
    CsiTensor t;
    t.sequence_number = seq;
    t.sta.assign(c.n_sta, StaCsi(c.n_rx_per_sta, c.n_tx, c.n_subcarriers));
    for (const Entry& e : entries)
      t.sta[e.sta].at(e.rx, e.tx, e.sc) = e.value;
    ds.samples.push_back(std::move(t));
  }
  return ds;
}

CsiDataset import_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open CSV: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return import_csv(ss.str());
}

}  // namespace sbeam
