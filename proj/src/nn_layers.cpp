#include "h2ad/nn_layers.hpp"

#include <cmath>
#include <random>
#include <string>

namespace h2ad::nn {

namespace {

void expect_cols(const Matrix& x, int channels, const char* layer) {
  if (x.cols() != channels)
    throw InputError(std::string(layer) + ": expected " + std::to_string(channels) + " channels, got " +
                     std::to_string(x.cols()));
}

void expect_rows_multiple(const Matrix& x, int length, const char* layer) {
  if (length <= 0 || x.rows() % length != 0)
    throw InputError(std::string(layer) + ": row count is not a multiple of the sequence length");
}

std::uint32_t u32(int v) { return static_cast<std::uint32_t>(v); }

}  // namespace

// ---- Dense -----------------------------------------------------------------

Dense::Dense(int inputs, int outputs)
    : weight_(Matrix::Zero(inputs, outputs)),
      bias_(Matrix::Zero(1, outputs)),
      dweight_(Matrix::Zero(inputs, outputs)),
      dbias_(Matrix::Zero(1, outputs)) {
  if (inputs < 1 || outputs < 1) throw InputError("dense: dimensions must be positive");
}

void Dense::init(Engine& eng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index j = 0; j < weight_.cols(); ++j)
    for (Eigen::Index i = 0; i < weight_.rows(); ++i) weight_(i, j) = dist(eng);
  bias_.setZero();
}

Matrix Dense::forward(const Matrix& x, Mode) {
  expect_cols(x, static_cast<int>(weight_.rows()), "dense");
  input_ = x;
  Matrix y = x * weight_;
  y.rowwise() += bias_.row(0);
  return y;
}

Matrix Dense::backward(const Matrix& g) {
  dweight_.noalias() = input_.transpose() * g;
  dbias_ = g.colwise().sum();
  return g * weight_.transpose();
}

std::vector<std::uint32_t> Dense::dims() const { return {u32(weight_.rows()), u32(weight_.cols())}; }

// ---- Relu ------------------------------------------------------------------

Matrix Relu::forward(const Matrix& x, Mode) {
  expect_cols(x, shape_.channels, "relu");
  mask_ = (x.array() > 0.0).cast<double>();
  return x.cwiseMax(0.0);
}

Matrix Relu::backward(const Matrix& g) { return g.cwiseProduct(mask_); }

std::vector<std::uint32_t> Relu::dims() const { return {u32(shape_.length), u32(shape_.channels)}; }

// ---- Dropout ---------------------------------------------------------------

Dropout::Dropout(Shape shape, double rate, std::uint64_t seed)
    : shape_(shape), rate_(Matrix::Constant(1, 1, 0.0)), eng_(make_engine(seed, 0xD0)) {
  set_rate(rate);
}

void Dropout::set_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InputError("dropout rate must lie in [0, 1)");
  rate_(0, 0) = rate;
}

Matrix Dropout::forward(const Matrix& x, Mode mode) {
  expect_cols(x, shape_.channels, "dropout");
  const double rate = rate_(0, 0);
  if (mode == Mode::Eval || rate == 0.0) {
    mask_.resize(0, 0);
    return x;
  }
  std::bernoulli_distribution keep(1.0 - rate);
  mask_.resize(x.rows(), x.cols());
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) mask_(i, j) = keep(eng_) ? scale : 0.0;
  return x.cwiseProduct(mask_);
}

Matrix Dropout::backward(const Matrix& g) {
  if (mask_.size() == 0) return g;
  return g.cwiseProduct(mask_);
}

std::vector<std::uint32_t> Dropout::dims() const { return {u32(shape_.length), u32(shape_.channels)}; }

// ---- Conv1d ----------------------------------------------------------------

Conv1d::Conv1d(int length, int in_channels, int out_channels, int kernel)
    : length_(length), in_(in_channels), out_(out_channels), kernel_(kernel) {
  if (length < 1 || in_channels < 1 || out_channels < 1) throw InputError("conv1d: dimensions must be positive");
  if (kernel < 1 || kernel % 2 == 0) throw InputError("conv1d: kernel must be odd for same padding");
  weight_ = Matrix::Zero(kernel * in_channels, out_channels);
  bias_ = Matrix::Zero(1, out_channels);
  dweight_ = weight_;
  dbias_ = bias_;
}

void Conv1d::init(Engine& eng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index j = 0; j < weight_.cols(); ++j)
    for (Eigen::Index i = 0; i < weight_.rows(); ++i) weight_(i, j) = dist(eng);
  bias_.setZero();
}

Matrix Conv1d::forward(const Matrix& x, Mode) {
  expect_cols(x, in_, "conv1d");
  expect_rows_multiple(x, length_, "conv1d");
  const Eigen::Index batch = x.rows() / length_;
  const int half = kernel_ / 2;
  cols_.setZero(x.rows(), static_cast<Eigen::Index>(kernel_) * in_);
  for (int t = 0; t < kernel_; ++t) {
    const int offset = t - half;
    const int lo = std::max(0, -offset);
    const int hi = std::min(length_, length_ - offset);
    if (hi <= lo) continue;
    for (Eigen::Index b = 0; b < batch; ++b) {
      cols_.block(b * length_ + lo, static_cast<Eigen::Index>(t) * in_, hi - lo, in_) =
          x.block(b * length_ + lo + offset, 0, hi - lo, in_);
    }
  }
  Matrix y = cols_ * weight_;
  y.rowwise() += bias_.row(0);
  return y;
}

Matrix Conv1d::backward(const Matrix& g) {
  dweight_.noalias() = cols_.transpose() * g;
  dbias_ = g.colwise().sum();
  const Matrix dcols = g * weight_.transpose();
  const Eigen::Index batch = g.rows() / length_;
  const int half = kernel_ / 2;
  Matrix dx = Matrix::Zero(g.rows(), in_);
  for (int t = 0; t < kernel_; ++t) {
    const int offset = t - half;
    const int lo = std::max(0, -offset);
    const int hi = std::min(length_, length_ - offset);
    if (hi <= lo) continue;
    for (Eigen::Index b = 0; b < batch; ++b) {
      dx.block(b * length_ + lo + offset, 0, hi - lo, in_) +=
          dcols.block(b * length_ + lo, static_cast<Eigen::Index>(t) * in_, hi - lo, in_);
    }
  }
  return dx;
}

std::vector<std::uint32_t> Conv1d::dims() const { return {u32(length_), u32(in_), u32(out_), u32(kernel_)}; }

// ---- BatchNorm -------------------------------------------------------------

BatchNorm::BatchNorm(Shape shape, double momentum, double epsilon)
    : shape_(shape),
      gamma_(Matrix::Ones(1, shape.channels)),
      beta_(Matrix::Zero(1, shape.channels)),
      dgamma_(Matrix::Zero(1, shape.channels)),
      dbeta_(Matrix::Zero(1, shape.channels)),
      running_mean_(Matrix::Zero(1, shape.channels)),
      running_var_(Matrix::Ones(1, shape.channels)),
      hyper_(1, 2) {
  hyper_ << momentum, epsilon;
}

Matrix BatchNorm::forward(const Matrix& x, Mode mode) {
  expect_cols(x, shape_.channels, "batchnorm");
  const double momentum = hyper_(0, 0);
  const double eps = hyper_(0, 1);
  last_mode_ = mode;
  Eigen::RowVectorXd mean, var;
  if (mode == Mode::Train) {
    const double n = static_cast<double>(x.rows());
    mean = x.colwise().mean();
    var = (x.rowwise() - mean).array().square().colwise().sum() / n;
    const double unbias = n > 1.0 ? n / (n - 1.0) : 1.0;
    running_mean_.row(0) = (1.0 - momentum) * running_mean_.row(0) + momentum * mean;
    running_var_.row(0) = (1.0 - momentum) * running_var_.row(0) + momentum * unbias * var;
  } else {
    mean = running_mean_.row(0);
    var = running_var_.row(0);
  }
  inv_std_ = (var.array() + eps).rsqrt().matrix();
  xhat_ = (x.rowwise() - mean).array().rowwise() * inv_std_.array();
  Matrix y = xhat_.array().rowwise() * gamma_.row(0).array();
  y.rowwise() += beta_.row(0);
  return y;
}

Matrix BatchNorm::backward(const Matrix& g) {
  dgamma_ = (g.cwiseProduct(xhat_)).colwise().sum();
  dbeta_ = g.colwise().sum();
  const Matrix dxhat = g.array().rowwise() * gamma_.row(0).array();
  if (last_mode_ == Mode::Eval) return dxhat.array().rowwise() * inv_std_.array();
  const double n = static_cast<double>(g.rows());
  const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
  const Eigen::RowVectorXd sum_dxhat_xhat = dxhat.cwiseProduct(xhat_).colwise().sum();
  Matrix dx = (n * dxhat).rowwise() - sum_dxhat;
  dx -= (xhat_.array().rowwise() * sum_dxhat_xhat.array()).matrix();
  dx = dx.array().rowwise() * (inv_std_.array() / n);
  return dx;
}

std::vector<std::uint32_t> BatchNorm::dims() const { return {u32(shape_.length), u32(shape_.channels)}; }

// ---- MaxPool ---------------------------------------------------------------

Matrix MaxPool::forward(const Matrix& x, Mode) {
  expect_cols(x, shape_.channels, "maxpool");
  expect_rows_multiple(x, shape_.length, "maxpool");
  const int lin = shape_.length;
  const int lout = lin / 2;
  const Eigen::Index batch = x.rows() / lin;
  input_rows_ = x.rows();
  Matrix y(batch * lout, x.cols());
  argmax_.resize(batch * lout, x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index b = 0; b < batch; ++b) {
      for (int l = 0; l < lout; ++l) {
        const Eigen::Index r0 = b * lin + 2 * l;
        const bool second = x(r0 + 1, c) > x(r0, c);
        y(b * lout + l, c) = second ? x(r0 + 1, c) : x(r0, c);
        argmax_(b * lout + l, c) = static_cast<int>(second ? r0 + 1 : r0);
      }
    }
  }
  return y;
}

Matrix MaxPool::backward(const Matrix& g) {
  Matrix dx = Matrix::Zero(input_rows_, g.cols());
  for (Eigen::Index c = 0; c < g.cols(); ++c)
    for (Eigen::Index r = 0; r < g.rows(); ++r) dx(argmax_(r, c), c) += g(r, c);
  return dx;
}

std::vector<std::uint32_t> MaxPool::dims() const { return {u32(shape_.length), u32(shape_.channels)}; }

// ---- GlobalAvgPool ---------------------------------------------------------

Matrix GlobalAvgPool::forward(const Matrix& x, Mode) {
  expect_cols(x, shape_.channels, "gap");
  expect_rows_multiple(x, shape_.length, "gap");
  const int len = shape_.length;
  const Eigen::Index batch = x.rows() / len;
  Matrix y(batch, x.cols());
  for (Eigen::Index b = 0; b < batch; ++b) y.row(b) = x.middleRows(b * len, len).colwise().mean();
  return y;
}

Matrix GlobalAvgPool::backward(const Matrix& g) {
  const int len = shape_.length;
  Matrix dx(g.rows() * len, g.cols());
  for (Eigen::Index b = 0; b < g.rows(); ++b) dx.middleRows(b * len, len).rowwise() = g.row(b) / len;
  return dx;
}

std::vector<std::uint32_t> GlobalAvgPool::dims() const { return {u32(shape_.length), u32(shape_.channels)}; }

// ---- Standardize -----------------------------------------------------------

Standardize::Standardize(Shape shape)
    : shape_(shape), shift_(Matrix::Zero(1, shape.channels)), scale_(Matrix::Ones(1, shape.channels)) {}

void Standardize::fit(const Matrix& x) {
  expect_cols(x, shape_.channels, "standardize");
  if (x.rows() == 0) throw InputError("standardize: cannot fit on an empty set");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::RowVectorXd var = (x.rowwise() - mean).array().square().colwise().mean();
  shift_.row(0) = mean;
  for (Eigen::Index c = 0; c < var.size(); ++c) scale_(0, c) = var[c] > 1e-24 ? 1.0 / std::sqrt(var[c]) : 1.0;
}

Matrix Standardize::forward(const Matrix& x, Mode) {
  expect_cols(x, shape_.channels, "standardize");
  return (x.rowwise() - shift_.row(0)).array().rowwise() * scale_.row(0).array();
}

Matrix Standardize::backward(const Matrix& g) { return g.array().rowwise() * scale_.row(0).array(); }

std::vector<std::uint32_t> Standardize::dims() const { return {u32(shape_.length), u32(shape_.channels)}; }

// ---- factory ---------------------------------------------------------------

std::unique_ptr<Layer> make_layer(LayerType type, const std::vector<std::uint32_t>& d) {
  auto need = [&](size_t n) {
    if (d.size() != n) throw InputError("model file: wrong dimension count for layer type " +
                                        std::to_string(static_cast<int>(type)));
  };
  auto shape = [&] { return Shape{static_cast<int>(d[0]), static_cast<int>(d[1])}; };
  switch (type) {
    case LayerType::Dense:
      need(2);
      return std::make_unique<Dense>(static_cast<int>(d[0]), static_cast<int>(d[1]));
    case LayerType::Relu:
      need(2);
      return std::make_unique<Relu>(shape());
    case LayerType::Dropout:
      need(2);
      return std::make_unique<Dropout>(shape(), 0.0, 0);
    case LayerType::Conv1d:
      need(4);
      return std::make_unique<Conv1d>(static_cast<int>(d[0]), static_cast<int>(d[1]), static_cast<int>(d[2]),
                                      static_cast<int>(d[3]));
    case LayerType::BatchNorm:
      need(2);
      return std::make_unique<BatchNorm>(shape());
    case LayerType::MaxPool:
      need(2);
      return std::make_unique<MaxPool>(shape());
    case LayerType::GlobalAvgPool:
      need(2);
      return std::make_unique<GlobalAvgPool>(shape());
    case LayerType::Standardize:
      need(2);
      return std::make_unique<Standardize>(shape());
  }
  throw InputError("model file: unknown layer type tag " + std::to_string(static_cast<int>(type)));
}

}  // namespace h2ad::nn
