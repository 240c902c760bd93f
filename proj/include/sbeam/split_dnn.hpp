/**
 * @file split_dnn.hpp
 * @brief Dense network mapping flattened CSI to flattened beam matrices,
 *        split at a bottleneck layer into a station-side head and an
 *        AP-side tail. Includes training, the bottleneck codec and the
 *        SBNN1 model format.
 */
#ifndef SBEAM_SPLIT_DNN_HPP
#define SBEAM_SPLIT_DNN_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sbeam/cmatrix.hpp"
#include "sbeam/csi_data.hpp"

namespace sbeam {

enum class Activation : std::uint32_t { relu = 0, linear = 1 };

/// Layer widths (input first, output last) plus the bottleneck position e.
/// The layer at index e is the bottleneck; head = layers [1, e], tail =
/// layers (e, L]. Hidden layers share one activation; the output is linear.
struct ArchSpec {
  std::vector<std::size_t> layer_widths;
  std::size_t bottleneck_index = 1;
  Activation hidden_activation = Activation::relu;

  std::size_t n_weight_layers() const { return layer_widths.size() - 1; }
  std::size_t bottleneck_width() const {
    return layer_widths[bottleneck_index];
  }
  /// K = bottleneck width / input width.
  double compression() const {
    return static_cast<double>(bottleneck_width()) /
           static_cast<double>(layer_widths.front());
  }
  /// Shape consistency only (widths positive, e in range).
  void validate_structure() const;
  /// Structure plus the compression invariant K < 1 required of models.
  void validate() const;
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;  ///< row-major, out x in
  std::vector<double> b;  ///< out
};

struct SplitModel {
  ArchSpec arch;
  std::vector<DenseLayer> layers;

  std::size_t input_width() const { return arch.layer_widths.front(); }
  std::size_t output_width() const { return arch.layer_widths.back(); }
};

/// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases,
/// deterministic per seed.
SplitModel build_model(const ArchSpec& arch, std::uint64_t seed);

std::vector<double> forward(const SplitModel& m, const std::vector<double>& x);
std::vector<double> infer_head(const SplitModel& m,
                               const std::vector<double>& x);
std::vector<double> infer_tail(const SplitModel& m,
                               const std::vector<double>& z);

/// Eq.-style normalized squared error: mean over the batch of
/// sum((pred - target)^2) / l1(target). Throws DegenerateTarget when a
/// target has zero L1 norm.
double batch_loss(const std::vector<std::vector<double>>& preds,
                  const std::vector<std::vector<double>>& targets);

/// Flat sample storage for training: row-major n x dim arrays.
struct TrainingSet {
  std::size_t n = 0;
  std::size_t dim_in = 0;
  std::size_t dim_out = 0;
  std::vector<double> x;
  std::vector<double> y;

  const double* x_row(std::size_t i) const { return &x[i * dim_in]; }
  const double* y_row(std::size_t i) const { return &y[i * dim_out]; }
};

struct Gradients {
  std::vector<DenseLayer> layers;  ///< same shapes as the model, w/b = dL/d.
};

/// Analytic batch gradient of the normalized loss (averaged over the batch).
Gradients gradient(const SplitModel& m, const TrainingSet& data,
                   const std::vector<std::size_t>& batch_indices);

/// Loss of the model over a whole set (no gradient).
double evaluate_loss(const SplitModel& m, const TrainingSet& data);

enum class Optimizer : std::uint32_t { sgd = 0, adam = 1 };

struct TrainConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 16;
  double lr0 = 1e-3;
  std::vector<std::size_t> lr_drop_epochs = {20, 30};  // drop by 10x at each
  double lr_drop_factor = 10.0;
  Optimizer optimizer = Optimizer::adam;
  std::uint64_t seed = 0;

  double lr_at_epoch(std::size_t epoch) const {
    double lr = lr0;
    for (std::size_t drop : lr_drop_epochs)
      if (epoch >= drop) lr /= lr_drop_factor;
    return lr;
  }
};

struct EpochStats {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_ber = 0.0;
};

struct TrainResult {
  SplitModel best_model;
  std::size_t best_epoch = 0;
  std::vector<EpochStats> history;
};

/// Probe called after each epoch; returns validation BER for model selection.
using BerProbe = std::function<double(const SplitModel&)>;

/// Mini-batch training with the configured optimizer and step schedule.
/// Keeps the parameters that achieve the lowest validation BER (earliest
/// epoch wins ties). Fully deterministic for a fixed config and data order.
TrainResult train(const SplitModel& init, const TrainingSet& train_set,
                  const TrainingSet& val_set, const TrainConfig& cfg,
                  const BerProbe& ber_probe);

// Real-vector bridging between complex tensors and model vectors: real parts
// first, then imaginary parts, each block in (row, col, subcarrier) order.

std::vector<double> flatten_csi(const StaCsi& csi);
StaCsi unflatten_csi(const std::vector<double>& v, std::uint32_t n_rx,
                     std::uint32_t n_tx, std::uint32_t n_sub);
std::vector<double> flatten_bm(const std::vector<CMatrix>& v_per_subcarrier);
std::vector<CMatrix> unflatten_bm(const std::vector<double>& v,
                                  std::size_t n_tx, std::size_t n_ss,
                                  std::size_t n_sub);

/// Per-vector min/max affine bottleneck codec. The two range parameters
/// travel as f32, so the airtime cost is 64 + codes * bits.
struct QuantizedVec {
  float lo = 0.0f;
  float scale = 0.0f;
  std::uint32_t bits = 16;
  std::vector<std::uint32_t> codes;

  std::uint64_t airtime_bits() const { return 64 + codes.size() * bits; }
};

QuantizedVec quantize_bottleneck(const std::vector<double>& z,
                                 std::uint32_t bits = 16);
std::vector<double> dequantize_bottleneck(const QuantizedVec& q);

// SBNN1 format, little-endian:
//   magic "SBNN1\0\0\0" | version u32 | n_widths u32 | e u32 |
//   activation u32 | role u32 (0 full, 1 head, 2 tail) | widths u32[] |
//   per layer: weights f32 row-major then biases f32.
enum class ModelRole : std::uint32_t { full = 0, head = 1, tail = 2 };

std::vector<std::uint8_t> save_model(const SplitModel& m);
SplitModel load_model(const std::vector<std::uint8_t>& bytes);
void save_model_file(const SplitModel& m, const std::string& path);
SplitModel load_model_file(const std::string& path);

/// Head/tail wire exports share the header with a role flag; they load back
/// as bare layer stacks for inference.
std::vector<std::uint8_t> export_model_part(const SplitModel& m,
                                            ModelRole role);
struct ModelPart {
  ModelRole role = ModelRole::full;
  Activation hidden_activation = Activation::relu;
  bool output_is_linear = false;  ///< true for tail (network output layer)
  std::vector<DenseLayer> layers;
};
ModelPart load_model_part(const std::vector<std::uint8_t>& bytes);
std::vector<double> run_part(const ModelPart& part,
                             const std::vector<double>& x);

}  // namespace sbeam

#endif  // SBEAM_SPLIT_DNN_HPP
