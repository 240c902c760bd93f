#include "sbeam/split_dnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "sbeam/detail/wire.hpp"
#include "sbeam/errors.hpp"
#include "sbeam/rng.hpp"

namespace sbeam {

using wire::Reader;
using wire::put_f32;
using wire::put_u32;

namespace {

constexpr char kMagic[8] = {'S', 'B', 'N', 'N', '1', '\0', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

double activate(Activation a, double z) {
  return (a == Activation::relu) ? (z > 0.0 ? z : 0.0) : z;
}
double activate_deriv(Activation a, double z) {
  return (a == Activation::relu) ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

void apply_layer(const DenseLayer& layer, const std::vector<double>& in,
                 std::vector<double>& out) {
  out.assign(layer.out, 0.0);
  for (std::size_t o = 0; o < layer.out; ++o) {
    const double* row = &layer.w[o * layer.in];
    double acc = layer.b[o];
    for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * in[i];
    out[o] = acc;
  }
}

double l1_norm(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(v[i]);
  return s;
}

// Forward pass that keeps pre-activations and activations for backprop.
struct ForwardTrace {
  std::vector<std::vector<double>> pre;   // z_l per weight layer
  std::vector<std::vector<double>> post;  // a_0 = x, then a_l
};

void forward_trace(const SplitModel& m, const double* x, ForwardTrace& tr) {
  const std::size_t n_layers = m.layers.size();
  tr.pre.resize(n_layers);
  tr.post.resize(n_layers + 1);
  tr.post[0].assign(x, x + m.input_width());
  for (std::size_t l = 0; l < n_layers; ++l) {
    apply_layer(m.layers[l], tr.post[l], tr.pre[l]);
    tr.post[l + 1] = tr.pre[l];
    if (l + 1 < n_layers)
      for (double& v : tr.post[l + 1])
        v = activate(m.arch.hidden_activation, v);
  }
}

}  // namespace

void ArchSpec::validate_structure() const {
  if (layer_widths.size() < 3)
    throw InvalidInput("need at least input, bottleneck and output layers");
  for (std::size_t w : layer_widths)
    if (w == 0) throw InvalidInput("layer widths must be >= 1");
  if (bottleneck_index < 1 || bottleneck_index + 1 >= layer_widths.size())
    throw InvalidInput("bottleneck index must satisfy 1 <= e < L");
}

void ArchSpec::validate() const {
  validate_structure();
  if (bottleneck_width() >= layer_widths.front())
    throw InvalidInput("bottleneck must be smaller than the input (K < 1)");
}

SplitModel build_model(const ArchSpec& arch, std::uint64_t seed) {
  arch.validate();
  SplitModel m;
  m.arch = arch;
  for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
    DenseLayer layer;
    layer.in = arch.layer_widths[l];
    layer.out = arch.layer_widths[l + 1];
    layer.w.resize(layer.in * layer.out);
    layer.b.assign(layer.out, 0.0);
    const double limit =
        std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    Rng rng(seed, l);
    for (double& w : layer.w) w = limit * (2.0 * rng.uniform01() - 1.0);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

std::vector<double> infer_head(const SplitModel& m,
                               const std::vector<double>& x) {
  if (x.size() != m.input_width())
    throw InvalidInput("input width mismatch");
  std::vector<double> cur = x, next;
  for (std::size_t l = 0; l < m.arch.bottleneck_index; ++l) {
    apply_layer(m.layers[l], cur, next);
    for (double& v : next) v = activate(m.arch.hidden_activation, v);
    cur.swap(next);
  }
  return cur;
}

std::vector<double> infer_tail(const SplitModel& m,
                               const std::vector<double>& z) {
  if (z.size() != m.arch.bottleneck_width())
    throw InvalidInput("bottleneck width mismatch");
  std::vector<double> cur = z, next;
  for (std::size_t l = m.arch.bottleneck_index; l < m.layers.size(); ++l) {
    apply_layer(m.layers[l], cur, next);
    if (l + 1 < m.layers.size())
      for (double& v : next) v = activate(m.arch.hidden_activation, v);
    cur.swap(next);
  }
  return cur;
}

std::vector<double> forward(const SplitModel& m,
                            const std::vector<double>& x) {
  return infer_tail(m, infer_head(m, x));
}

double batch_loss(const std::vector<std::vector<double>>& preds,
                  const std::vector<std::vector<double>>& targets) {
  if (preds.size() != targets.size() || preds.empty())
    throw InvalidInput("batch size mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < preds.size(); ++j) {
    if (preds[j].size() != targets[j].size())
      throw InvalidInput("prediction/target width mismatch");
    const double l1 = l1_norm(targets[j].data(), targets[j].size());
    if (l1 == 0.0) throw DegenerateTarget();
    double ssq = 0.0;
    for (std::size_t k = 0; k < preds[j].size(); ++k) {
      const double d = preds[j][k] - targets[j][k];
      ssq += d * d;
    }
    total += ssq / l1;
  }
  return total / static_cast<double>(preds.size());
}

Gradients gradient(const SplitModel& m, const TrainingSet& data,
                   const std::vector<std::size_t>& batch_indices) {
  if (batch_indices.empty()) throw InvalidInput("empty batch");
  Gradients g;
  g.layers.resize(m.layers.size());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    g.layers[l].in = m.layers[l].in;
    g.layers[l].out = m.layers[l].out;
    g.layers[l].w.assign(m.layers[l].w.size(), 0.0);
    g.layers[l].b.assign(m.layers[l].b.size(), 0.0);
  }

  ForwardTrace tr;
  std::vector<double> delta, delta_prev;
  const std::size_t n_layers = m.layers.size();
  for (std::size_t idx : batch_indices) {
    if (idx >= data.n) throw InvalidInput("batch index out of range");
    forward_trace(m, data.x_row(idx), tr);
    const double* target = data.y_row(idx);
    const double l1 = l1_norm(target, data.dim_out);
    if (l1 == 0.0) throw DegenerateTarget();

    delta.assign(data.dim_out, 0.0);
    for (std::size_t k = 0; k < data.dim_out; ++k)
      delta[k] = 2.0 * (tr.post[n_layers][k] - target[k]) / l1;

    for (std::size_t l = n_layers; l-- > 0;) {
      const DenseLayer& layer = m.layers[l];
      DenseLayer& grad = g.layers[l];
      const std::vector<double>& a_prev = tr.post[l];
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        grad.b[o] += d;
        double* grow = &grad.w[o * layer.in];
        for (std::size_t i = 0; i < layer.in; ++i) grow[i] += d * a_prev[i];
      }
      if (l == 0) break;
      delta_prev.assign(layer.in, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* row = &layer.w[o * layer.in];
        for (std::size_t i = 0; i < layer.in; ++i)
          delta_prev[i] += d * row[i];
      }
      for (std::size_t i = 0; i < layer.in; ++i)
        delta_prev[i] *=
            activate_deriv(m.arch.hidden_activation, tr.pre[l - 1][i]);
      delta.swap(delta_prev);
    }
  }

  const double inv_b = 1.0 / static_cast<double>(batch_indices.size());
  for (DenseLayer& layer : g.layers) {
    for (double& v : layer.w) v *= inv_b;
    for (double& v : layer.b) v *= inv_b;
  }
  return g;
}

double evaluate_loss(const SplitModel& m, const TrainingSet& data) {
  if (data.n == 0) throw InvalidInput("empty dataset");
  double total = 0.0;
  ForwardTrace tr;
  for (std::size_t i = 0; i < data.n; ++i) {
    forward_trace(m, data.x_row(i), tr);
    const double* target = data.y_row(i);
    const double l1 = l1_norm(target, data.dim_out);
    if (l1 == 0.0) throw DegenerateTarget();
    double ssq = 0.0;
    const std::vector<double>& out = tr.post[m.layers.size()];
    for (std::size_t k = 0; k < data.dim_out; ++k) {
      const double d = out[k] - target[k];
      ssq += d * d;
    }
    total += ssq / l1;
  }
  return total / static_cast<double>(data.n);
}

TrainResult train(const SplitModel& init, const TrainingSet& train_set,
                  const TrainingSet& val_set, const TrainConfig& cfg,
                  const BerProbe& ber_probe) {
  if (train_set.n == 0 || val_set.n == 0)
    throw InvalidInput("training and validation sets must be non-empty");
  if (cfg.batch_size == 0 || cfg.epochs == 0)
    throw InvalidInput("batch size and epochs must be >= 1");
  if (train_set.dim_in != init.input_width() ||
      train_set.dim_out != init.output_width())
    throw InvalidInput("dataset dimensions do not match the model");

  SplitModel m = init;

  // Adam moment buffers (unused for plain SGD).
  std::vector<DenseLayer> mom1(m.layers.size()), mom2(m.layers.size());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    mom1[l].w.assign(m.layers[l].w.size(), 0.0);
    mom1[l].b.assign(m.layers[l].b.size(), 0.0);
    mom2[l].w.assign(m.layers[l].w.size(), 0.0);
    mom2[l].b.assign(m.layers[l].b.size(), 0.0);
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::uint64_t step = 0;

  auto update = [&](const Gradients& g, double lr) {
    ++step;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      auto apply = [&](std::vector<double>& theta,
                       const std::vector<double>& grad,
                       std::vector<double>& m1, std::vector<double>& m2) {
        if (cfg.optimizer == Optimizer::sgd) {
          for (std::size_t k = 0; k < theta.size(); ++k)
            theta[k] -= lr * grad[k];
          return;
        }
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
        for (std::size_t k = 0; k < theta.size(); ++k) {
          m1[k] = kBeta1 * m1[k] + (1.0 - kBeta1) * grad[k];
          m2[k] = kBeta2 * m2[k] + (1.0 - kBeta2) * grad[k] * grad[k];
          theta[k] -= lr * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + kEps);
        }
      };
      apply(m.layers[l].w, g.layers[l].w, mom1[l].w, mom2[l].w);
      apply(m.layers[l].b, g.layers[l].b, mom1[l].b, mom2[l].b);
    }
  };

  TrainResult result;
  result.best_model = m;
  double best_ber = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train_set.n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> batch;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr_at_epoch(epoch);
    Rng shuffle_rng(cfg.seed, epoch + 1);
    for (std::size_t i = train_set.n - 1; i > 0; --i) {
      const std::size_t j = shuffle_rng.next_below(i + 1);
      std::swap(order[i], order[j]);
    }

    for (std::size_t first = 0; first < train_set.n;
         first += cfg.batch_size) {
      const std::size_t count =
          std::min(cfg.batch_size, train_set.n - first);
      batch.assign(order.begin() + first, order.begin() + first + count);
      update(gradient(m, train_set, batch), lr);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.train_loss = evaluate_loss(m, train_set);
    stats.val_loss = evaluate_loss(m, val_set);
    stats.val_ber = ber_probe ? ber_probe(m) : stats.val_loss;
    result.history.push_back(stats);

    if (stats.val_ber < best_ber) {
      best_ber = stats.val_ber;
      result.best_model = m;
      result.best_epoch = epoch;
    }
  }
  return result;
}

std::vector<double> flatten_csi(const StaCsi& csi) {
  std::vector<double> v(2 * csi.data.size());
  const std::size_t half = csi.data.size();
  for (std::size_t i = 0; i < half; ++i) {
    v[i] = csi.data[i].real();
    v[half + i] = csi.data[i].imag();
  }
  return v;
}

StaCsi unflatten_csi(const std::vector<double>& v, std::uint32_t n_rx,
                     std::uint32_t n_tx, std::uint32_t n_sub) {
  StaCsi csi(n_rx, n_tx, n_sub);
  const std::size_t half = csi.data.size();
  if (v.size() != 2 * half) throw InvalidInput("flattened size mismatch");
  for (std::size_t i = 0; i < half; ++i)
    csi.data[i] = cplx(v[i], v[half + i]);
  return csi;
}

std::vector<double> flatten_bm(const std::vector<CMatrix>& v_per_subcarrier) {
  if (v_per_subcarrier.empty()) throw InvalidInput("no subcarriers");
  const std::size_t n_sub = v_per_subcarrier.size();
  const std::size_t n_tx = v_per_subcarrier[0].rows();
  const std::size_t n_ss = v_per_subcarrier[0].cols();
  std::vector<double> v(2 * n_tx * n_ss * n_sub);
  const std::size_t half = n_tx * n_ss * n_sub;
  for (std::size_t s = 0; s < n_sub; ++s) {
    const CMatrix& mat = v_per_subcarrier[s];
    if (mat.rows() != n_tx || mat.cols() != n_ss)
      throw InvalidInput("inconsistent beam matrix shapes");
    for (std::size_t r = 0; r < n_tx; ++r) {
      for (std::size_t c = 0; c < n_ss; ++c) {
        const std::size_t slot = (r * n_ss + c) * n_sub + s;
        v[slot] = mat.at(r, c).real();
        v[half + slot] = mat.at(r, c).imag();
      }
    }
  }
  return v;
}

std::vector<CMatrix> unflatten_bm(const std::vector<double>& v,
                                  std::size_t n_tx, std::size_t n_ss,
                                  std::size_t n_sub) {
  const std::size_t half = n_tx * n_ss * n_sub;
  if (v.size() != 2 * half) throw InvalidInput("flattened size mismatch");
  std::vector<CMatrix> out(n_sub, CMatrix(n_tx, n_ss));
  for (std::size_t s = 0; s < n_sub; ++s)
    for (std::size_t r = 0; r < n_tx; ++r)
      for (std::size_t c = 0; c < n_ss; ++c) {
        const std::size_t slot = (r * n_ss + c) * n_sub + s;
        out[s].at(r, c) = cplx(v[slot], v[half + slot]);
      }
  return out;
}

QuantizedVec quantize_bottleneck(const std::vector<double>& z,
                                 std::uint32_t bits) {
  if (bits != 8 && bits != 16 && bits != 32)
    throw InvalidInput("bottleneck bits must be 8, 16 or 32");
  if (z.empty()) throw InvalidInput("empty bottleneck vector");
  QuantizedVec q;
  q.bits = bits;
  const auto [lo_it, hi_it] = std::minmax_element(z.begin(), z.end());
  q.lo = static_cast<float>(*lo_it);
  const double levels = std::pow(2.0, bits) - 1.0;
  q.scale = static_cast<float>((*hi_it - *lo_it) / levels);
  q.codes.reserve(z.size());
  for (double v : z) {
    double code = 0.0;
    if (q.scale > 0.0f)
      code = std::round((v - q.lo) / static_cast<double>(q.scale));
    q.codes.push_back(
        static_cast<std::uint32_t>(std::clamp(code, 0.0, levels)));
  }
  return q;
}

std::vector<double> dequantize_bottleneck(const QuantizedVec& q) {
  std::vector<double> z;
  z.reserve(q.codes.size());
  for (std::uint32_t c : q.codes)
    z.push_back(static_cast<double>(q.lo) +
                static_cast<double>(c) * static_cast<double>(q.scale));
  return z;
}

namespace {

void write_model_payload(std::vector<std::uint8_t>& out,
                         const std::vector<std::size_t>& widths,
                         std::size_t e, Activation act, ModelRole role,
                         const std::vector<const DenseLayer*>& layers) {
  out.insert(out.end(), kMagic, kMagic + 8);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(widths.size()));
  put_u32(out, static_cast<std::uint32_t>(e));
  put_u32(out, static_cast<std::uint32_t>(act));
  put_u32(out, static_cast<std::uint32_t>(role));
  for (std::size_t w : widths)
    put_u32(out, static_cast<std::uint32_t>(w));
  for (const DenseLayer* layer : layers) {
    for (double w : layer->w) put_f32(out, static_cast<float>(w));
    for (double b : layer->b) put_f32(out, static_cast<float>(b));
  }
}

}  // namespace

std::vector<std::uint8_t> save_model(const SplitModel& m) {
  std::vector<const DenseLayer*> layers;
  for (const DenseLayer& l : m.layers) layers.push_back(&l);
  std::vector<std::uint8_t> out;
  write_model_payload(out, m.arch.layer_widths, m.arch.bottleneck_index,
                      m.arch.hidden_activation, ModelRole::full, layers);
  return out;
}

std::vector<std::uint8_t> export_model_part(const SplitModel& m,
                                            ModelRole role) {
  if (role == ModelRole::full) return save_model(m);
  const std::size_t e = m.arch.bottleneck_index;
  std::vector<std::size_t> widths;
  std::vector<const DenseLayer*> layers;
  if (role == ModelRole::head) {
    widths.assign(m.arch.layer_widths.begin(),
                  m.arch.layer_widths.begin() + e + 1);
    for (std::size_t l = 0; l < e; ++l) layers.push_back(&m.layers[l]);
  } else {
    widths.assign(m.arch.layer_widths.begin() + e,
                  m.arch.layer_widths.end());
    for (std::size_t l = e; l < m.layers.size(); ++l)
      layers.push_back(&m.layers[l]);
  }
  std::vector<std::uint8_t> out;
  write_model_payload(out, widths, role == ModelRole::head ? e : 0,
                      m.arch.hidden_activation, role, layers);
  return out;
}

namespace {

struct ParsedModel {
  std::vector<std::size_t> widths;
  std::size_t e = 0;
  Activation act = Activation::relu;
  ModelRole role = ModelRole::full;
  std::vector<DenseLayer> layers;
};

ParsedModel parse_model(const std::vector<std::uint8_t>& bytes) {
  Reader rd(bytes);
  rd.need(8, "magic");
  for (std::size_t i = 0; i < 8; ++i)
    if (bytes[i] != static_cast<std::uint8_t>(kMagic[i]))
      throw FormatError("bad SBNN1 magic", i);
  rd.u64("magic");

  if (rd.u32("version") != kVersion)
    throw FormatError("unsupported version", 8);
  ParsedModel pm;
  const std::uint32_t n_widths = rd.u32("layer count");
  if (n_widths < 2 || n_widths > 64)
    throw FormatError("implausible layer count", 12);
  pm.e = rd.u32("bottleneck index");
  const std::uint32_t act = rd.u32("activation");
  if (act > static_cast<std::uint32_t>(Activation::linear))
    throw FormatError("unknown activation code", 20);
  pm.act = static_cast<Activation>(act);
  const std::uint32_t role = rd.u32("role");
  if (role > static_cast<std::uint32_t>(ModelRole::tail))
    throw FormatError("unknown role code", 24);
  pm.role = static_cast<ModelRole>(role);

  pm.widths.resize(n_widths);
  for (std::uint32_t i = 0; i < n_widths; ++i) {
    pm.widths[i] = rd.u32("width");
    if (pm.widths[i] == 0) throw FormatError("zero layer width", 28 + 4 * i);
  }
  for (std::uint32_t l = 0; l + 1 < n_widths; ++l) {
    DenseLayer layer;
    layer.in = pm.widths[l];
    layer.out = pm.widths[l + 1];
    layer.w.resize(layer.in * layer.out);
    layer.b.resize(layer.out);
    for (double& w : layer.w) {
      const std::size_t at = rd.offset();
      w = rd.f32("weight");
      if (!std::isfinite(w)) throw FormatError("non-finite weight", at);
    }
    for (double& b : layer.b) {
      const std::size_t at = rd.offset();
      b = rd.f32("bias");
      if (!std::isfinite(b)) throw FormatError("non-finite bias", at);
    }
    pm.layers.push_back(std::move(layer));
  }
  if (rd.offset() != bytes.size())
    throw FormatError("trailing bytes after model payload", rd.offset());
  return pm;
}

}  // namespace

SplitModel load_model(const std::vector<std::uint8_t>& bytes) {
  ParsedModel pm = parse_model(bytes);
  if (pm.role != ModelRole::full)
    throw FormatError("expected a full model, got a part", 24);
  SplitModel m;
  m.arch.layer_widths = pm.widths;
  m.arch.bottleneck_index = pm.e;
  m.arch.hidden_activation = pm.act;
  m.arch.validate();
  m.layers = std::move(pm.layers);
  return m;
}

ModelPart load_model_part(const std::vector<std::uint8_t>& bytes) {
  ParsedModel pm = parse_model(bytes);
  ModelPart part;
  part.role = pm.role;
  part.hidden_activation = pm.act;
  part.output_is_linear = (pm.role != ModelRole::head);
  part.layers = std::move(pm.layers);
  return part;
}

std::vector<double> run_part(const ModelPart& part,
                             const std::vector<double>& x) {
  std::vector<double> cur = x, next;
  for (std::size_t l = 0; l < part.layers.size(); ++l) {
    if (cur.size() != part.layers[l].in)
      throw InvalidInput("part input width mismatch");
    apply_layer(part.layers[l], cur, next);
    const bool last = (l + 1 == part.layers.size());
    if (!(last && part.output_is_linear))
      for (double& v : next) v = activate(part.hidden_activation, v);
    cur.swap(next);
  }
  return cur;
}

void save_model_file(const SplitModel& m, const std::string& path) {
  const auto bytes = save_model(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

SplitModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open model: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return load_model(bytes);
}

}  // namespace sbeam
