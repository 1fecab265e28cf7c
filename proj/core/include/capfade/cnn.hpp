#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "capfade/rng.hpp"

// A small 1-D convolutional regressor with hand-written forward and backward
// passes. Convolutions follow y[n] = sum_{k=-p..p} x[n-k] w[k] with zero
// padding, so every convolution keeps its input length.
namespace capfade::cnn {

/// Same-length convolution of one channel; `kernel` holds w[-p..p] and must
/// have odd width no larger than the input.
std::vector<double> conv1d(std::span<const double> x, std::span<const double> kernel);

struct ConvStage {
  int kernel_width = 3;   // odd
  int channels = 8;
  int pool_width = 2;     // 1 disables pooling
  double dropout = 0.0;   // applied after pooling, training only
};

struct CnnArch {
  std::size_t input_length = 0;
  std::vector<ConvStage> stages;
  /// Hidden widths followed by the output width, which must be 1.
  std::vector<int> dense_widths{1};

  /// Two conv stages (width 3, 8 channels, pool 2, dropout 0.10) and one
  /// hidden dense layer of 16 units.
  static CnnArch standard(std::size_t input_length);
};

void require_valid(const CnnArch& arch);

enum class Mode { Train, Infer };

/// Intermediate values of one forward pass, kept for backpropagation.
struct ForwardCache {
  struct Stage {
    std::vector<double> input;      // in_channels x length
    std::vector<double> pre;        // out_channels x length, before ReLU
    std::vector<std::size_t> argmax;
    std::vector<double> mask;       // dropout scale per pooled value
    std::size_t length = 0;         // conv length
    std::size_t pooled_length = 0;
  };
  struct Dense {
    std::vector<double> input;
    std::vector<double> pre;
  };
  std::vector<Stage> stages;
  std::vector<Dense> dense;
  double output = 0.0;

  /// ReLU on/off pattern and pooling winners; equal patterns mean the network
  /// is locally linear between the two evaluations.
  std::vector<std::uint8_t> activation_pattern() const;
};

class Network {
 public:
  explicit Network(CnnArch arch);

  /// He-uniform weights, zero biases.
  void initialize(Rng& rng);

  const CnnArch& arch() const noexcept { return arch_; }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }
  std::size_t param_count() const noexcept { return params_.size(); }

  /// `rng` is required in Train mode when any dropout rate is positive.
  double forward(std::span<const double> x, Mode mode, Rng* rng = nullptr,
                 ForwardCache* cache = nullptr) const;

  /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
  void backward(const ForwardCache& cache, double d_output, std::span<double> grad) const;

 private:
  struct StageLayout {
    std::size_t in_channels, weights, biases, length, pooled_length;
  };
  struct DenseLayout {
    std::size_t in, out, weights, biases;
  };

  CnnArch arch_;
  std::vector<StageLayout> stage_layout_;
  std::vector<DenseLayout> dense_layout_;
  std::vector<double> params_;
};

struct TrainConfig {
  std::size_t epochs = 700;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 8;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  /// Inputs are multiplied by this before the network sees them
  /// (1 / nominal capacity by default in the experiment harness).
  double feature_scale = 1.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_mae = 0.0;
};

class CnnModel {
 public:
  CnnModel(Network network, double feature_scale, double target_scale)
      : network_(std::move(network)), feature_scale_{feature_scale}, target_scale_{target_scale} {}

  /// Prediction in target units (cycles); inference mode.
  double predict(std::span<const double> row) const;

  const Network& network() const noexcept { return network_; }
  Network& network() noexcept { return network_; }
  double feature_scale() const noexcept { return feature_scale_; }
  double target_scale() const noexcept { return target_scale_; }

  std::size_t best_epoch = 0;
  double best_val_mae = 0.0;
  std::vector<EpochRecord> history;

 private:
  Network network_;
  double feature_scale_;
  double target_scale_;
};

/// Model output in target units for `x`; dropout is active only in Train mode.
double forward(const CnnModel& model, std::span<const double> x, Mode mode, Rng* rng = nullptr);

/// Mini-batch momentum gradient descent on mean squared error of targets
/// scaled by 1 / max |target|. A stable seeded shuffle sends the last
/// `validation_fraction` of the validation-eligible rows (all rows when
/// `validation_eligible` is empty) to validation; after each epoch the
/// validation MAE (target units) is recorded and the best weights are kept.
CnnModel train(std::span<const std::vector<double>> rows, std::span<const double> targets,
               const CnnArch& arch, const TrainConfig& cfg,
               std::span<const bool> validation_eligible = {});

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  /// Parameters whose perturbation crossed a ReLU or pooling kink.
  std::vector<std::size_t> excluded;
  bool passed = false;
};

using GradientHook = std::function<void(std::span<double>)>;

/// Compares backpropagated gradients of 0.5 (f(x) - target)^2 with central
/// differences (step 1e-5). Relative error is |a - n| / max(|a|, |n|, 1e-6).
/// `tamper` may modify the analytic gradient before comparison.
GradCheckReport gradient_check(const Network& network, std::span<const double> x,
                               double target, double tolerance,
                               const GradientHook& tamper = {});

/// Randomly initialized network; all dropout must be zero.
GradCheckReport gradient_check(const CnnArch& arch, std::span<const double> x,
                               double target, double tolerance, std::uint64_t seed);

/// Versioned binary snapshot with a CRC-32 trailer.
void save_model(std::ostream& out, const CnnModel& model);
CnnModel load_model(std::istream& in);
void save_model(const std::filesystem::path& path, const CnnModel& model);
CnnModel load_model(const std::filesystem::path& path);

/// `epoch,train_loss,val_mae`.
void write_training_curve_csv(std::ostream& out, std::span<const EpochRecord> history);

}  // namespace capfade::cnn
