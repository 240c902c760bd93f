#include "sbeam/ber_sim.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "sbeam/convcode.hpp"
#include "sbeam/errors.hpp"
#include "sbeam/qam16.hpp"
#include "sbeam/rng.hpp"
#include "sbeam/svd.hpp"

namespace sbeam {

namespace {

constexpr double kGramCondLimit = 1e8;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Substream namespaces: payload bits and noise per (sample, frame, STA).
std::uint64_t stream_id(std::uint64_t kind, std::uint64_t sample,
                        std::uint64_t frame, std::uint64_t sta) {
  return (kind << 56) | (sample << 24) | (frame << 12) | sta;
}

// General small dense solve A X = B by Gauss-Jordan with partial pivoting.
CMatrix solve_general(CMatrix a, CMatrix x) {
  const std::size_t n = a.rows();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a.at(col, col));
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a.at(r, col)) > best) {
        best = std::abs(a.at(r, col));
        pivot = r;
      }
    if (best < 1e-300) throw InvalidInput("singular equalizer matrix");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c)
        std::swap(a.at(col, c), a.at(pivot, c));
      for (std::size_t c = 0; c < x.cols(); ++c)
        std::swap(x.at(col, c), x.at(pivot, c));
    }
    const cplx inv = 1.0 / a.at(col, col);
    for (std::size_t c = 0; c < n; ++c) a.at(col, c) *= inv;
    for (std::size_t c = 0; c < x.cols(); ++c) x.at(col, c) *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const cplx f = a.at(r, col);
      if (f == cplx(0.0, 0.0)) continue;
      for (std::size_t c = 0; c < n; ++c) a.at(r, c) -= f * a.at(col, c);
      for (std::size_t c = 0; c < x.cols(); ++c) x.at(r, c) -= f * x.at(col, c);
    }
  }
  return x;
}

struct SamplePartial {
  std::vector<std::uint64_t> errors;
  std::vector<std::uint64_t> bits;
  std::uint64_t skipped = 0;
  double max_cross = 0.0;
};

struct SimContext {
  const CsiDataset* ds = nullptr;
  const BeamSource* source = nullptr;
  const PhyConfig* phy = nullptr;
  std::size_t payload_bits = 0;
  double scale = 1.0;
};

void process_sample(const SimContext& ctx, std::size_t idx,
                    SamplePartial& acc) {
  const NetworkConfig& cfg = ctx.ds->config;
  const CsiTensor& sample = ctx.ds->samples[idx];
  const PhyConfig& phy = *ctx.phy;
  const std::size_t n_sta = cfg.n_sta;
  const std::size_t n_ss = cfg.n_ss_per_sta;
  const std::size_t n_rx = cfg.n_rx_per_sta;
  const std::size_t n_streams = n_sta * n_ss;
  const std::size_t n_sub = cfg.n_subcarriers;

  // Per-subcarrier effective channels M_i = H_i W and equalizers E_i with
  // x_hat = E_i y. Any numerical failure skips the whole sample.
  std::vector<std::vector<CMatrix>> m_eff(n_sta);
  std::vector<std::vector<CMatrix>> eq(n_sta);
  double sample_cross = 0.0;
  try {
    std::vector<std::vector<CMatrix>> v_stacks;
    if (phy.precoder == PrecoderMode::zf) {
      v_stacks.resize(n_sta);
      for (std::size_t i = 0; i < n_sta; ++i) {
        v_stacks[i] = ctx.source->v_of(sample, i);
        if (v_stacks[i].size() != n_sub)
          throw InvalidInput("beam source returned wrong subcarrier count");
      }
    }
    for (std::size_t i = 0; i < n_sta; ++i) {
      m_eff[i].reserve(n_sub);
      eq[i].reserve(n_sub);
    }
    for (std::size_t s = 0; s < n_sub; ++s) {
      CMatrix w;
      if (phy.precoder == PrecoderMode::zf) {
        CMatrix h_eq(cfg.n_tx, n_streams);
        for (std::size_t i = 0; i < n_sta; ++i)
          for (std::size_t k = 0; k < n_ss; ++k)
            for (std::size_t r = 0; r < cfg.n_tx; ++r)
              h_eq.at(r, i * n_ss + k) = v_stacks[i][s].at(r, k);
        ZfResult zf = zf_precoder(h_eq);
        w = std::move(zf.w);
        if (phy.normalize_total_power) {
          double total = 0.0;
          for (double p : zf.column_power) total += p;
          if (total > 0.0)
            w = w * cplx(std::sqrt(static_cast<double>(n_streams) / total), 0.0);
        }
      } else {
        w = CMatrix::identity(cfg.n_tx, n_streams);
      }

      for (std::size_t i = 0; i < n_sta; ++i) {
        const CMatrix h_i = sample.sta[i].matrix_at(
            static_cast<std::uint32_t>(s));
        CMatrix m = h_i * w;

        // Receive combiner rows (n_ss x n_rx).
        CMatrix comb;
        if (phy.equalizer == EqualizerMode::svd_combiner) {
          if (n_rx == n_ss) {
            comb = CMatrix::identity(n_ss, n_rx);
          } else {
            const SvdResult dec = svd(h_i);
            comb = dec.u.cols_block(0, n_ss).adjoint();
          }
        }

        CMatrix eq_i;
        if (phy.equalizer == EqualizerMode::svd_combiner) {
          const CMatrix combined = comb * m;  // n_ss x n_streams
          CMatrix a(n_ss, n_ss);
          for (std::size_t r = 0; r < n_ss; ++r)
            for (std::size_t c = 0; c < n_ss; ++c)
              a.at(r, c) = ctx.scale * combined.at(r, i * n_ss + c);
          eq_i = solve_general(a, comb);  // A^-1 C
          // Receiver-side residual interference (foreign stream columns).
          for (std::size_t r = 0; r < n_ss; ++r)
            for (std::size_t c = 0; c < n_streams; ++c)
              if (c / n_ss != i)
                sample_cross =
                    std::max(sample_cross, std::abs(combined.at(r, c)));
        } else {
          CMatrix b(n_rx, n_ss);
          for (std::size_t r = 0; r < n_rx; ++r)
            for (std::size_t c = 0; c < n_ss; ++c)
              b.at(r, c) = ctx.scale * m.at(r, i * n_ss + c);
          const CMatrix bh = b.adjoint();
          eq_i = solve_hermitian(bh * b, bh);  // LS pseudo-inverse
          for (std::size_t r = 0; r < n_rx; ++r)
            for (std::size_t c = 0; c < n_streams; ++c)
              if (c / n_ss != i)
                sample_cross = std::max(sample_cross, std::abs(m.at(r, c)));
        }
        m_eff[i].push_back(std::move(m));
        eq[i].push_back(std::move(eq_i));
      }
    }
  } catch (const SingularEffectiveChannel&) {
    ++acc.skipped;
    return;
  } catch (const InvalidInput&) {
    ++acc.skipped;
    return;
  }
  acc.max_cross = std::max(acc.max_cross, sample_cross);

  // Payload -> wire bits -> symbols, one QAM symbol per (subcarrier, stream)
  // per OFDM instant; leftover slots in the last instant stay silent.
  const std::size_t slots = n_sub * n_ss;
  for (std::size_t frame = 0; frame < phy.n_frames; ++frame) {
    std::vector<std::vector<std::uint8_t>> payload(n_sta);
    std::vector<std::vector<cplx>> symbols(n_sta);
    std::size_t n_sym = 0;
    for (std::size_t i = 0; i < n_sta; ++i) {
      Rng bit_rng(phy.seed, stream_id(1, idx, frame, i));
      payload[i].resize(ctx.payload_bits);
      for (std::uint8_t& b : payload[i])
        b = static_cast<std::uint8_t>(bit_rng.next_u64() & 1);
      std::vector<std::uint8_t> wire = (phy.coding == Coding::bcc_r12)
                                           ? bcc_encode(payload[i])
                                           : payload[i];
      while (wire.size() % 4 != 0) wire.push_back(0);
      symbols[i] = qam16_mod(wire);
      n_sym = symbols[i].size();
    }
    const std::size_t n_instants = (n_sym + slots - 1) / slots;

    std::vector<Rng> noise_rng;
    noise_rng.reserve(n_sta);
    for (std::size_t i = 0; i < n_sta; ++i)
      noise_rng.emplace_back(phy.seed, stream_id(2, idx, frame, i));

    std::vector<std::vector<cplx>> received(n_sta,
                                            std::vector<cplx>(n_sym));
    std::vector<cplx> x(n_streams), y(n_rx), r(n_ss);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t t = 0; t < n_instants; ++t) {
      for (std::size_t s = 0; s < n_sub; ++s) {
        bool any = false;
        for (std::size_t i = 0; i < n_sta; ++i) {
          for (std::size_t k = 0; k < n_ss; ++k) {
            const std::size_t sym = t * slots + s * n_ss + k;
            x[i * n_ss + k] = (sym < n_sym) ? symbols[i][sym] : cplx(0.0, 0.0);
            any = any || sym < n_sym;
          }
        }
        if (!any) break;
        for (std::size_t i = 0; i < n_sta; ++i) {
          const CMatrix& m = m_eff[i][s];
          for (std::size_t rx = 0; rx < n_rx; ++rx) {
            cplx acc_y(0.0, 0.0);
            for (std::size_t c = 0; c < n_streams; ++c)
              acc_y += m.at(rx, c) * x[c];
            acc_y *= ctx.scale;
            if (phy.noise_enabled) {
              auto [z1, z2] = noise_rng[i].gaussian_pair();
              acc_y += cplx(z1 * inv_sqrt2, z2 * inv_sqrt2);
            }
            y[rx] = acc_y;
          }
          const CMatrix& e = eq[i][s];
          for (std::size_t row = 0; row < n_ss; ++row) {
            cplx acc_r(0.0, 0.0);
            for (std::size_t c = 0; c < e.cols(); ++c)
              acc_r += e.at(row, c) * y[c];
            r[row] = acc_r;
          }
          for (std::size_t k = 0; k < n_ss; ++k) {
            const std::size_t sym = t * slots + s * n_ss + k;
            if (sym < n_sym) received[i][sym] = r[k];
          }
        }
      }
    }

    for (std::size_t i = 0; i < n_sta; ++i) {
      std::vector<std::uint8_t> wire_hat = qam16_demod(received[i]);
      std::vector<std::uint8_t> payload_hat;
      if (phy.coding == Coding::bcc_r12) {
        wire_hat.resize(2 * (ctx.payload_bits + 6));  // drop pad bits
        payload_hat = viterbi_decode(wire_hat);
      } else {
        wire_hat.resize(ctx.payload_bits);
        payload_hat = std::move(wire_hat);
      }
      std::uint64_t errs = 0;
      for (std::size_t k = 0; k < ctx.payload_bits; ++k)
        errs += payload[i][k] != payload_hat[k];
      acc.errors[i] += errs;
      acc.bits[i] += ctx.payload_bits;
    }
  }
}

}  // namespace

void PhyConfig::validate() const {
  if (n_frames == 0) throw InvalidInput("n_frames must be >= 1");
  if (bits_per_frame % 4 != 0 && coding == Coding::none && bits_per_frame != 0)
    throw InvalidInput("uncoded bits_per_frame must be a multiple of 4");
}

ZfResult zf_precoder(const CMatrix& h_eq) {
  const std::size_t n_streams = h_eq.cols();
  if (h_eq.rows() < n_streams)
    throw InvalidInput("effective channel has more streams than antennas");
  const SvdResult dec = svd(h_eq);
  const double smax = dec.sigma.front();
  const double smin = dec.sigma.back();
  const double cond2 =
      (smin > 0.0) ? (smax / smin) * (smax / smin)
                   : std::numeric_limits<double>::infinity();
  if (!(cond2 < kGramCondLimit)) throw SingularEffectiveChannel(cond2);

  ZfResult out;
  out.gram_cond = cond2;
  const CMatrix hh = h_eq.adjoint();
  out.w = h_eq * solve_hermitian(hh * h_eq, CMatrix::identity(n_streams));
  out.column_power.resize(n_streams);
  for (std::size_t c = 0; c < n_streams; ++c) {
    double p = 0.0;
    for (std::size_t r = 0; r < out.w.rows(); ++r)
      p += std::norm(out.w.at(r, c));
    out.column_power[c] = p;
  }
  return out;
}

BeamSource ideal_svd_source(std::size_t n_ss) {
  BeamSource src;
  src.name = "ideal_svd";
  src.v_of = [n_ss](const CsiTensor& sample, std::size_t sta) {
    const StaCsi& csi = sample.sta[sta];
    std::vector<CMatrix> v;
    v.reserve(csi.n_sub);
    for (std::uint32_t s = 0; s < csi.n_sub; ++s)
      v.push_back(compute_bm(csi.matrix_at(s), n_ss));
    return v;
  };
  return src;
}

BeamSource givens_quantized_source(std::size_t n_ss, QuantConfig q) {
  BeamSource src;
  src.name = "givens_b" + std::to_string(q.b_phi);
  src.v_of = [n_ss, q](const CsiTensor& sample, std::size_t sta) {
    const StaCsi& csi = sample.sta[sta];
    std::vector<CMatrix> v;
    v.reserve(csi.n_sub);
    for (std::uint32_t s = 0; s < csi.n_sub; ++s) {
      const CMatrix exact = compute_bm(csi.matrix_at(s), n_ss);
      const GivensDecomposition dec = givens_decompose(exact);
      const AngleCodes codes = quantize_angles(dec.angles, q);
      const GivensSlice back = dequantize_angles(codes, q);
      v.push_back(givens_reconstruct(back));
    }
    return v;
  };
  return src;
}

BeamSource split_model_source(SplitModel model, std::size_t n_tx,
                              std::size_t n_ss,
                              std::optional<std::uint32_t> bottleneck_bits,
                              bool normalize_columns) {
  BeamSource src;
  src.name = "split_k" + std::to_string(model.arch.bottleneck_width()) + "of" +
             std::to_string(model.arch.layer_widths.front());
  src.v_of = [model = std::move(model), n_tx, n_ss, bottleneck_bits,
              normalize_columns](const CsiTensor& sample, std::size_t sta) {
    const StaCsi& csi = sample.sta[sta];
    std::vector<double> z = infer_head(model, flatten_csi(csi));
    if (bottleneck_bits)
      z = dequantize_bottleneck(quantize_bottleneck(z, *bottleneck_bits));
    const std::vector<double> flat = infer_tail(model, z);
    std::vector<CMatrix> v = unflatten_bm(flat, n_tx, n_ss, csi.n_sub);
    if (normalize_columns) {
      for (CMatrix& mat : v) {
        for (std::size_t c = 0; c < mat.cols(); ++c) {
          double nrm = 0.0;
          for (std::size_t r = 0; r < mat.rows(); ++r)
            nrm += std::norm(mat.at(r, c));
          nrm = std::sqrt(nrm);
          if (nrm > 0.0)
            for (std::size_t r = 0; r < mat.rows(); ++r) mat.at(r, c) /= nrm;
        }
      }
    }
    return v;
  };
  return src;
}

std::string BerReport::to_json() const {
  nlohmann::json j;
  j["per_sta"] = nlohmann::json::array();
  for (const StaBer& s : per_sta)
    j["per_sta"].push_back(
        {{"errors", s.errors}, {"bits", s.bits}, {"ber", s.ber}});
  j["mean_ber"] = mean_ber;
  j["skipped_samples"] = skipped_samples;
  j["max_cross_interference"] = max_cross_interference;
  j["config_digest"] = config_digest;
  return j.dump(2);
}

BerReport simulate_ber(const CsiDataset& ds, const BeamSource& source,
                       const PhyConfig& phy, std::size_t n_threads) {
  ds.config.validate();
  phy.validate();
  if (ds.samples.empty()) throw InvalidInput("empty dataset");

  SimContext ctx;
  ctx.ds = &ds;
  ctx.source = &source;
  ctx.phy = &phy;
  ctx.payload_bits = phy.bits_per_frame
                         ? phy.bits_per_frame
                         : 4ull * ds.config.n_ss_per_sta *
                               ds.config.n_subcarriers;
  const double rho = std::pow(10.0, phy.snr_db / 10.0);
  ctx.scale = std::sqrt(rho / ds.config.n_tx);

  const std::size_t n = ds.samples.size();
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(n_threads, n));
  std::vector<SamplePartial> partials(workers);
  for (SamplePartial& p : partials) {
    p.errors.assign(ds.config.n_sta, 0);
    p.bits.assign(ds.config.n_sta, 0);
  }

  auto run_range = [&](std::size_t worker, std::size_t first,
                       std::size_t last) {
    for (std::size_t i = first; i < last; ++i)
      process_sample(ctx, i, partials[worker]);
  };
  if (workers == 1) {
    run_range(0, 0, n);
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w)
      threads.emplace_back(run_range, w, std::min(n, w * chunk),
                           std::min(n, (w + 1) * chunk));
    for (std::thread& t : threads) t.join();
  }

  BerReport report;
  report.per_sta.resize(ds.config.n_sta);
  std::uint64_t total_err = 0, total_bits = 0;
  for (const SamplePartial& p : partials) {
    report.skipped_samples += p.skipped;
    report.max_cross_interference =
        std::max(report.max_cross_interference, p.max_cross);
    for (std::size_t i = 0; i < report.per_sta.size(); ++i) {
      report.per_sta[i].errors += p.errors[i];
      report.per_sta[i].bits += p.bits[i];
    }
  }
  for (StaBer& s : report.per_sta) {
    s.ber = s.bits ? static_cast<double>(s.errors) /
                         static_cast<double>(s.bits)
                   : 0.0;
    total_err += s.errors;
    total_bits += s.bits;
  }
  report.mean_ber =
      total_bits ? static_cast<double>(total_err) /
                       static_cast<double>(total_bits)
                 : 0.0;

  std::string key = source.name + "|" + std::to_string(ds.config.n_sta) +
                    "x" + std::to_string(ds.config.n_tx) + "x" +
                    std::to_string(ds.config.n_subcarriers) + "|" +
                    std::to_string(phy.snr_db) + "|" +
                    std::to_string(phy.n_frames) + "|" +
                    std::to_string(ctx.payload_bits) + "|" +
                    std::to_string(static_cast<int>(phy.coding)) + "|" +
                    std::to_string(phy.seed) + "|" +
                    std::to_string(ds.samples.size());
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(key)));
  report.config_digest = buf;
  return report;
}

}  // namespace sbeam
