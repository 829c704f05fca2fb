#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "deckmotion/wavegen.hpp"

namespace deckmotion {

/// Shape of the composite network: 3 inputs, one LSTM layer, 3 outputs.
struct LstmConfig {
  int input_dim = 3;
  int hidden_dim = 64;
  int output_dim = 3;
  int lookback = 40;

  void validate() const;
  bool operator==(const LstmConfig&) const = default;
};

enum class Gate { input = 0, forget = 1, candidate = 2, output = 3 };

/// All weights in one contiguous buffer so optimizers and gradient checks can
/// treat them as a flat vector. Layout (column-major blocks):
///   W   4H x 3   input weights, gate rows stacked i, f, g, o
///   U   4H x H   recurrent weights
///   b   4H       gate biases
///   Wy  3 x H    output head
///   by  3        output bias
class LstmParams {
 public:
  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
  using VectorMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

  LstmParams() = default;
  /// All-zero parameters.
  explicit LstmParams(const LstmConfig& config);

  static std::size_t count_for(int hidden_dim);

  const LstmConfig& config() const { return config_; }
  int hidden() const { return config_.hidden_dim; }
  std::size_t size() const { return data_.size(); }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  MatrixMap input_weights() { return {data_.data() + w_offset(), 4 * hidden(), 3}; }
  ConstMatrixMap input_weights() const { return {data_.data() + w_offset(), 4 * hidden(), 3}; }
  MatrixMap recurrent_weights() { return {data_.data() + u_offset(), 4 * hidden(), hidden()}; }
  ConstMatrixMap recurrent_weights() const {
    return {data_.data() + u_offset(), 4 * hidden(), hidden()};
  }
  VectorMap bias() { return {data_.data() + b_offset(), 4 * hidden()}; }
  ConstVectorMap bias() const { return {data_.data() + b_offset(), 4 * hidden()}; }
  MatrixMap head_weights() { return {data_.data() + wy_offset(), 3, hidden()}; }
  ConstMatrixMap head_weights() const { return {data_.data() + wy_offset(), 3, hidden()}; }
  VectorMap head_bias() { return {data_.data() + by_offset(), 3}; }
  ConstVectorMap head_bias() const { return {data_.data() + by_offset(), 3}; }

  // Per-gate views (H rows of the stacked blocks).
  auto gate_input_weights(Gate g) { return input_weights().middleRows(gate_row(g), hidden()); }
  auto gate_input_weights(Gate g) const {
    return input_weights().middleRows(gate_row(g), hidden());
  }
  auto gate_recurrent_weights(Gate g) {
    return recurrent_weights().middleRows(gate_row(g), hidden());
  }
  auto gate_recurrent_weights(Gate g) const {
    return recurrent_weights().middleRows(gate_row(g), hidden());
  }
  auto gate_bias(Gate g) { return bias().segment(gate_row(g), hidden()); }
  auto gate_bias(Gate g) const { return bias().segment(gate_row(g), hidden()); }

  bool all_finite() const;

  bool operator==(const LstmParams&) const = default;

 private:
  int gate_row(Gate g) const { return static_cast<int>(g) * hidden(); }
  std::size_t w_offset() const { return 0; }
  std::size_t u_offset() const { return 12 * static_cast<std::size_t>(hidden()); }
  std::size_t b_offset() const { return u_offset() + 4 * sq(hidden()); }
  std::size_t wy_offset() const { return b_offset() + 4 * static_cast<std::size_t>(hidden()); }
  std::size_t by_offset() const { return wy_offset() + 3 * static_cast<std::size_t>(hidden()); }
  static std::size_t sq(int h) { return static_cast<std::size_t>(h) * static_cast<std::size_t>(h); }

  LstmConfig config_;
  // Aligned so vectorized kernels see the same layout in every copy, which
  // keeps results bitwise reproducible.
  std::vector<double, Eigen::aligned_allocator<double>> data_;
};

/// d(loss)/d(parameter), same layout as the parameters.
using Gradients = LstmParams;

struct LstmState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;

  static LstmState zeros(int hidden) {
    return {Eigen::VectorXd::Zero(hidden), Eigen::VectorXd::Zero(hidden)};
  }
};

/// One training example: a lookback x 3 row-major window and its next sample.
struct Example {
  std::span<const double> window;
  Motion target;
};

struct LossAndGradients {
  double loss = 0.0;
  Gradients grads;
};

/// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero biases except forget = 1.
LstmParams init_params(const LstmConfig& config, std::uint64_t seed);

LstmState cell_forward(const LstmParams& params, const Motion& x, const LstmState& state);

/// Runs the window from a zero state and applies the head to the last h.
/// Throws std::invalid_argument unless window.size() == lookback * 3.
Motion forward_window(const LstmParams& params, std::span<const double> window);

/// Mean squared error over the batch and the 3 outputs.
double batch_loss(const LstmParams& params, std::span<const Example> batch);

/// Loss and exact BPTT gradients. Batch members are evaluated in parallel;
/// per-example gradients are summed in index order, so the result is
/// bitwise identical to loss_and_gradients_serial.
LossAndGradients loss_and_gradients(const LstmParams& params, std::span<const Example> batch);

/// Single-threaded reference for loss_and_gradients.
LossAndGradients loss_and_gradients_serial(const LstmParams& params,
                                           std::span<const Example> batch);

/// Reusable buffers for repeated gradient evaluations of one network shape.
class GradientKernel {
 public:
  explicit GradientKernel(const LstmConfig& config);
  ~GradientKernel();
  GradientKernel(GradientKernel&&) noexcept;
  GradientKernel& operator=(GradientKernel&&) noexcept;

  /// Writes the mean gradient into `out` (resized as needed), returns the loss.
  double compute(const LstmParams& params, std::span<const Example> batch, Gradients& out);
  double compute_serial(const LstmParams& params, std::span<const Example> batch,
                        Gradients& out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace deckmotion
