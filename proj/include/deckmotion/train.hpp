#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deckmotion/lstm.hpp"
#include "deckmotion/series.hpp"
#include "json.hpp"

namespace deckmotion {

enum class Optimizer { sgd, adam };

struct TrainConfig {
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t shuffle_seed = 0;
  int hidden_dim = 64;
  int lookback = 40;

  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_losses;
  double final_test_loss = 0.0;
  double wall_time_seconds = 0.0;
  TrainConfig config;
};

inline constexpr int kModelFormatVersion = 1;

/// Everything needed to predict: shape, weights and the input normalizer.
struct ModelArtifact {
  int format_version = kModelFormatVersion;
  LstmConfig config;
  LstmParams params;
  Normalizer normalizer;
  std::string provenance;
};

/// Raised when the loss becomes non-finite during training.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, std::size_t batch, double loss);
  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  int epoch_;
  std::size_t batch_;
};

class ModelFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class UnknownVersionError : public ModelFileError {
 public:
  using ModelFileError::ModelFileError;
};
class ShapeMismatchError : public ModelFileError {
 public:
  using ModelFileError::ModelFileError;
};
class MalformedModelError : public ModelFileError {
 public:
  using ModelFileError::ModelFileError;
};

/// Normalized windows split at round(fraction * n) together with the
/// normalizer fitted on the samples before the boundary.
struct PreparedData {
  Normalizer normalizer;
  SplitDataset split;
};

PreparedData prepare_training_data(const MotionSeries& series, std::size_t lookback,
                                   double train_fraction);

struct TrainResult {
  ModelArtifact artifact;
  TrainReport report;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

/// Mini-batch training on `split.train` (already normalized). The epoch
/// order is a function of (shuffle_seed, epoch); weights start from
/// init_params(config, seed).
TrainResult train(const SplitDataset& split, const Normalizer& normalizer,
                  const TrainConfig& config, std::uint64_t seed,
                  const EpochCallback& on_epoch = {});

/// One plain gradient step: p -= lr * g.
void sgd_step(LstmParams& params, const Gradients& grads, double learning_rate);

std::vector<Example> examples_of(const WindowedDataset& ds);

nlohmann::json to_json(const LstmConfig& config);
nlohmann::json to_json(const Normalizer& norm);
nlohmann::json to_json(const TrainConfig& config);
nlohmann::json to_json(const TrainReport& report, bool include_timing);
nlohmann::json to_json(const ModelArtifact& artifact);

ModelArtifact artifact_from_json_text(const std::string& text);

void save_model(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_model(const std::string& path);

}  // namespace deckmotion
