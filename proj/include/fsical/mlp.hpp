#pragma once

#include "fsical/dataset.hpp"
#include "fsical/normalization.hpp"
#include "fsical/types.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace fsical {

/// Fully connected network: ReLU on hidden layers, identity on the output.
struct MlpArchitecture {
  int input = 0;
  std::vector<int> hidden;
  int output = 3;

  void validate() const;
  /// input, hidden..., output
  std::vector<int> widths() const;
  /// Parse "100" or "50,10,50" into hidden widths.
  static std::vector<int> parse_hidden(const std::string& spec);

  bool operator==(const MlpArchitecture&) const = default;
};

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;
};

/// Layer weights and biases. The same type carries gradients.
struct MlpParams {
  std::vector<DenseLayer> layers;

  MlpParams zeros_like() const;
  bool all_finite() const;
  std::size_t parameter_count() const;
};

/// He initialization: weights ~ N(0, 2 / fan_in), biases 0.
MlpParams init_params(const MlpArchitecture& arch, std::uint64_t seed);

/// Columns of x are inputs; returns one output column per input.
Matrix forward(const MlpParams& params, const Matrix& x);
Vector forward(const MlpParams& params, const Vector& x);

struct LossGradient {
  double loss = 0.0;
  MlpParams gradient;
};

/// Mean over samples and outputs of the squared error, with its gradient by
/// reverse accumulation (ReLU derivative at 0 taken as 0).
LossGradient loss_and_gradient(const MlpParams& params, const Matrix& x, const Matrix& y);
double mean_squared_loss(const MlpParams& params, const Matrix& x, const Matrix& y);

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int max_epochs = 2000;
  int patience = 20;
  double min_delta = 0.0;
  bool early_stopping = true;  // false: run max_epochs, keep final weights
  double validation_fraction = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EpochRecord {
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct TrainReport {
  int epochs_run = 0;
  int best_epoch = 0;  // 1-based
  double best_validation_loss = std::numeric_limits<double>::infinity();
  double best_train_loss = 0.0;
  double final_train_loss = 0.0;
  std::vector<EpochRecord> history;
};

/// Patience-based stopping rule on a validation loss sequence.
class EarlyStopping {
 public:
  EarlyStopping(int patience, double min_delta) : patience_(patience), min_delta_(min_delta) {}

  /// Record the loss of the next epoch; returns true when training should stop.
  bool update(double validation_loss);
  bool last_improved() const { return last_improved_; }
  double best() const { return best_; }
  int best_epoch() const { return best_epoch_; }
  int epochs() const { return epoch_; }

 private:
  int patience_;
  double min_delta_;
  double best_ = std::numeric_limits<double>::infinity();
  int best_epoch_ = 0;
  int epoch_ = 0;
  int stale_ = 0;
  bool last_improved_ = false;
};

struct TrainResult {
  MlpParams params;
  TrainReport report;
};

/// Adam on mini-batches of the training split; features and labels are
/// already normalized, columns are samples. The validation split is drawn
/// with config.seed; weights from the best validation epoch are returned.
TrainResult train(const Matrix& features, const Matrix& labels, const MlpArchitecture& arch,
                  const TrainConfig& config);

/// Train on explicit splits.
TrainResult train(const Matrix& x_train, const Matrix& y_train, const Matrix& x_val,
                  const Matrix& y_val, const MlpArchitecture& arch, const TrainConfig& config);

/// A trained inverter with the input/label scaling it was trained with.
struct InverterModel {
  MlpArchitecture arch;
  MlpParams params;
  NormalizationStats stats;
  std::string dataset_fingerprint;
};

struct FitResult {
  InverterModel model;
  TrainReport report;
};

/// Normalize the corpus, train, and bundle the stats with the weights.
FitResult fit_inverter(const Dataset& dataset, const std::vector<int>& hidden,
                       const TrainConfig& config);

/// normalize -> forward -> denormalize.
PhysicalParams predict(const InverterModel& model, const Vector& observations);

void save_model(const std::filesystem::path& path, const InverterModel& model);
InverterModel load_model(const std::filesystem::path& path);

}  // namespace fsical
