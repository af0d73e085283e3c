#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "h2ad/nn_layers.hpp"

namespace h2ad::nn {

/// Sequential classifier producing logits; softmax is applied by callers.
class Network {
 public:
  Network() = default;
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  /// Appends a layer; its input shape must equal the previous output shape.
  void add(std::unique_ptr<Layer> layer);

  Shape input_shape() const;
  int num_classes() const;
  size_t num_layers() const { return layers_.size(); }
  Layer& layer(size_t i) { return *layers_.at(i); }
  const Layer& layer(size_t i) const { return *layers_.at(i); }

  Matrix forward(const Matrix& x, Mode mode);
  Matrix backward(const Matrix& grad_logits);
  /// Softmax probabilities in eval mode, evaluated in chunks.
  Matrix predict_proba(const Matrix& x);
  std::vector<int> predict(const Matrix& x);

  std::vector<ParamRef> params();
  void set_dropout(double rate);

  /// "H2ADNN01", u32 layer count, then per layer: u8 type tag, u32 dim count,
  /// u32 dims, and every state matrix as row-major float64 (little-endian).
  void save(const std::filesystem::path& path) const;
  static Network load(const std::filesystem::path& path);

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Packs N samples (one per row, laid out position-major then channel) into
/// the (N * length) x channels activation layout.
Matrix pack_inputs(const RMatrix& rows, Shape shape);

Matrix softmax(const Matrix& logits);
/// Mean cross-entropy over the batch; labels are class indices.
double cross_entropy(const Matrix& probs, std::span<const int> labels);
/// d(mean cross-entropy)/d(logits) = (p - y) / batch.
Matrix cross_entropy_grad(const Matrix& probs, std::span<const int> labels);

struct DenseArch {
  int inputs = 5;
  int classes = 4;
  int hidden = 64;
  int hidden_layers = 3;
  double dropout = 0.2;
};

struct CnnArch {
  int length = 97;
  int classes = 4;
  int conv1_channels = 64;
  int conv2_channels = 128;
  int kernel = 3;
};

/// Standardize -> [Dense -> ReLU -> Dropout] x hidden_layers -> Dense.
Network make_dense_network(const DenseArch& arch, std::uint64_t seed);
/// Standardize -> Conv -> BatchNorm -> ReLU -> MaxPool -> Conv -> ReLU -> GAP -> Dense.
Network make_cnn(const CnnArch& arch, std::uint64_t seed);

/// Fits the leading Standardize layer (if any) on raw training rows.
void fit_input_standardizer(Network& net, const RMatrix& rows);

/// Class probabilities of a dense classifier for feature rows.
Matrix dense_forward(Network& net, const RMatrix& features);
/// Class probabilities of a 1-D CNN for log-eigenvalue rows.
Matrix cnn_forward(Network& net, const RMatrix& log_eigenvalues);

struct TrainHyper {
  double learning_rate = 1e-2;
  double momentum = 0.9;
  int epochs = 60;
  int batch = 64;
  int lr_step_epochs = 20;
  double lr_decay = 0.5;
  double dropout = -1.0;  // < 0 keeps the rates set at construction
  std::uint64_t seed = 1;
  bool restore_best = true;  // keep the parameters with the lowest val loss
};

struct TrainReport {
  // Index 0 holds the loss before the first update.
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> val_accuracy;
  int best_epoch = 0;
};

/// Mini-batch SGD with momentum on the mean cross-entropy.
TrainReport train(Network& net, const RMatrix& train_x, std::span<const int> train_y, const RMatrix& val_x,
                  std::span<const int> val_y, const TrainHyper& hyper);

double evaluate_loss(Network& net, const RMatrix& x, std::span<const int> y);
double evaluate_accuracy(Network& net, const RMatrix& x, std::span<const int> y);

}  // namespace h2ad::nn
