#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "h2ad/rng.hpp"
#include "h2ad/types.hpp"

namespace h2ad::nn {

// Activations are (batch * length) x channels; row b * length + l holds
// position l of sample b. Dense layers see length == 1.
using Matrix = Eigen::MatrixXd;

enum class Mode { Train, Eval };

enum class LayerType : std::uint8_t {
  Dense = 1,
  Relu = 2,
  Dropout = 3,
  Conv1d = 4,
  BatchNorm = 5,
  MaxPool = 6,
  GlobalAvgPool = 7,
  Standardize = 8,
};

struct Shape {
  int length = 1;
  int channels = 0;

  int size() const { return length * channels; }
  bool operator==(const Shape&) const = default;
};

struct ParamRef {
  Matrix* value;
  Matrix* grad;
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerType type() const = 0;
  virtual Shape input_shape() const = 0;
  virtual Shape output_shape() const = 0;
  virtual Matrix forward(const Matrix& x, Mode mode) = 0;
  /// Gradient w.r.t. the input of the last forward(); fills parameter grads.
  virtual Matrix backward(const Matrix& grad_out) = 0;
  virtual std::vector<ParamRef> params() { return {}; }
  /// Everything persisted in a model file, in file order.
  virtual std::vector<Matrix*> state() { return {}; }
  virtual std::vector<std::uint32_t> dims() const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;
};

class Dense final : public Layer {
 public:
  Dense(int inputs, int outputs);
  LayerType type() const override { return LayerType::Dense; }
  Shape input_shape() const override { return {1, static_cast<int>(weight_.rows())}; }
  Shape output_shape() const override { return {1, static_cast<int>(weight_.cols())}; }
  Matrix forward(const Matrix& x, Mode mode) override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<ParamRef> params() override { return {{&weight_, &dweight_}, {&bias_, &dbias_}}; }
  std::vector<Matrix*> state() override { return {&weight_, &bias_}; }
  std::vector<std::uint32_t> dims() const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  void init(Engine& eng, double stddev);
  Matrix& weight() { return weight_; }  // inputs x outputs
  Matrix& bias() { return bias_; }      // 1 x outputs

 private:
  Matrix weight_, bias_, dweight_, dbias_, input_;
};

class Relu final : public Layer {
 public:
  explicit Relu(Shape shape) : shape_(shape) {}
  LayerType type() const override { return LayerType::Relu; }
  Shape input_shape() const override { return shape_; }
  Shape output_shape() const override { return shape_; }
  Matrix forward(const Matrix& x, Mode mode) override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<std::uint32_t> dims() const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }

 private:
  Shape shape_;
  Matrix mask_;
};

/// Inverted dropout; identity in eval mode or at rate 0.
class Dropout final : public Layer {
 public:
  Dropout(Shape shape, double rate, std::uint64_t seed);
  LayerType type() const override { return LayerType::Dropout; }
  Shape input_shape() const override { return shape_; }
  Shape output_shape() const override { return shape_; }
  Matrix forward(const Matrix& x, Mode mode) override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<Matrix*> state() override { return {&rate_}; }
  std::vector<std::uint32_t> dims() const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }

  double rate() const { return rate_(0, 0); }
  void set_rate(double rate);
  void reseed(std::uint64_t seed) { eng_ = make_engine(seed, 0xD0); }

 private:
  Shape shape_;
  Matrix rate_;  // 1x1, kept as a matrix so it serializes like other state
  Matrix mask_;
  Engine eng_;
};

/// Stride-1 convolution with zero "same" padding (odd kernel).
class Conv1d final : public Layer {
 public:
  Conv1d(int length, int in_channels, int out_channels, int kernel);
  LayerType type() const override { return LayerType::Conv1d; }
  Shape input_shape() const override { return {length_, in_}; }
  Shape output_shape() const override { return {length_, out_}; }
  Matrix forward(const Matrix& x, Mode mode) override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<ParamRef> params() override { return {{&weight_, &dweight_}, {&bias_, &dbias_}}; }
  std::vector<Matrix*> state() override { return {&weight_, &bias_}; }
  std::vector<std::uint32_t> dims() const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1d>(*this); }

  void init(Engine& eng, double stddev);
  Matrix& weight() { return weight_; }  // (kernel * in) x out, row t * in + c
  Matrix& bias() { return bias_; }

 private:
  int length_, in_, out_, kernel_;
  Matrix weight_, bias_, dweight_, dbias_, cols_;
};

/// Per-channel normalization over batch and positions.
class BatchNorm final : public Layer {
 public:
  BatchNorm(Shape shape, double momentum = 0.1, double epsilon = 1e-5);
  LayerType type() const override { return LayerType::BatchNorm; }
  Shape input_shape() const override { return shape_; }
  Shape output_shape() const override { return shape_; }
  Matrix forward(const Matrix& x, Mode mode) override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<ParamRef> params() override { return {{&gamma_, &dgamma_}, {&beta_, &dbeta_}}; }
  std::vector<Matrix*> state() override { return {&gamma_, &beta_, &running_mean_, &running_var_, &hyper_}; }
  std::vector<std::uint32_t> dims() const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm>(*this); }

  Matrix& gamma() { return gamma_; }
  Matrix& beta() { return beta_; }
  Matrix& running_mean() { return running_mean_; }
  Matrix& running_var() { return running_var_; }

 private:
  Shape shape_;
  Matrix gamma_, beta_, dgamma_, dbeta_, running_mean_, running_var_;
  Matrix hyper_;  // [momentum, epsilon]
  Matrix xhat_;
  Eigen::RowVectorXd inv_std_;
  Mode last_mode_ = Mode::Eval;
};

/// Window 2, stride 2; an odd trailing position is dropped.
class MaxPool final : public Layer {
 public:
  explicit MaxPool(Shape shape) : shape_(shape) {}
  LayerType type() const override { return LayerType::MaxPool; }
  Shape input_shape() const override { return shape_; }
  Shape output_shape() const override { return {shape_.length / 2, shape_.channels}; }
  Matrix forward(const Matrix& x, Mode mode) override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<std::uint32_t> dims() const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool>(*this); }

 private:
  Shape shape_;
  Eigen::MatrixXi argmax_;
  Eigen::Index input_rows_ = 0;
};

class GlobalAvgPool final : public Layer {
 public:
  explicit GlobalAvgPool(Shape shape) : shape_(shape) {}
  LayerType type() const override { return LayerType::GlobalAvgPool; }
  Shape input_shape() const override { return shape_; }
  Shape output_shape() const override { return {1, shape_.channels}; }
  Matrix forward(const Matrix& x, Mode mode) override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<std::uint32_t> dims() const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<GlobalAvgPool>(*this); }

 private:
  Shape shape_;
};

/// Fixed per-channel affine map (x - shift) * scale, fitted on training data.
class Standardize final : public Layer {
 public:
  explicit Standardize(Shape shape);
  LayerType type() const override { return LayerType::Standardize; }
  Shape input_shape() const override { return shape_; }
  Shape output_shape() const override { return shape_; }
  Matrix forward(const Matrix& x, Mode mode) override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<Matrix*> state() override { return {&shift_, &scale_}; }
  std::vector<std::uint32_t> dims() const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Standardize>(*this); }

  /// Fits shift/scale from rows laid out as in the activation convention.
  void fit(const Matrix& x);

 private:
  Shape shape_;
  Matrix shift_, scale_;  // 1 x channels
};

/// Builds an empty layer of the given type from its dims (used by model loading).
std::unique_ptr<Layer> make_layer(LayerType type, const std::vector<std::uint32_t>& dims);

}  // namespace h2ad::nn
