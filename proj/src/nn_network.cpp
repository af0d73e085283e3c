#include "h2ad/nn_network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace h2ad::nn {

namespace {

constexpr char kModelMagic[8] = {'H', '2', 'A', 'D', 'N', 'N', '0', '1'};
constexpr Eigen::Index kEvalChunk = 256;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InputError("model file truncated");
  return v;
}

RMatrix take_rows(const RMatrix& x, std::span<const int> idx) {
  RMatrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
  return out;
}

void check_labels(const Matrix& probs, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != probs.rows()) throw InputError("label count does not match batch");
  for (int y : labels)
    if (y < 0 || y >= probs.cols()) throw InputError("label out of range");
}

}  // namespace

Network::Network(const Network& other) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network tmp(other);
    *this = std::move(tmp);
  }
  return *this;
}

void Network::add(std::unique_ptr<Layer> layer) {
  if (!layers_.empty() && !(layers_.back()->output_shape() == layer->input_shape())) {
    std::ostringstream os;
    os << "layer shape mismatch: previous output (" << layers_.back()->output_shape().length << "x"
       << layers_.back()->output_shape().channels << ") vs next input (" << layer->input_shape().length << "x"
       << layer->input_shape().channels << ")";
    throw InputError(os.str());
  }
  layers_.push_back(std::move(layer));
}

Shape Network::input_shape() const {
  if (layers_.empty()) throw InputError("empty network");
  return layers_.front()->input_shape();
}

int Network::num_classes() const {
  if (layers_.empty()) throw InputError("empty network");
  return layers_.back()->output_shape().channels;
}

Matrix Network::forward(const Matrix& x, Mode mode) {
  if (layers_.empty()) throw InputError("empty network");
  Matrix h = x;
  for (auto& l : layers_) h = l->forward(h, mode);
  return h;
}

Matrix Network::backward(const Matrix& grad_logits) {
  Matrix g = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

Matrix Network::predict_proba(const Matrix& x) {
  const Shape in = input_shape();
  if (x.cols() != in.channels || x.rows() % in.length != 0) throw InputError("input does not match network shape");
  const Eigen::Index n = x.rows() / in.length;
  Matrix out(n, num_classes());
  for (Eigen::Index start = 0; start < n; start += kEvalChunk) {
    const Eigen::Index count = std::min(kEvalChunk, n - start);
    out.middleRows(start, count) = softmax(forward(x.middleRows(start * in.length, count * in.length), Mode::Eval));
  }
  return out;
}

std::vector<int> Network::predict(const Matrix& x) {
  const Matrix p = predict_proba(x);
  std::vector<int> cls(static_cast<size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i).maxCoeff(&cls[static_cast<size_t>(i)]);
  return cls;
}

std::vector<ParamRef> Network::params() {
  std::vector<ParamRef> out;
  for (auto& l : layers_) {
    auto p = l->params();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

void Network::set_dropout(double rate) {
  for (auto& l : layers_)
    if (auto* d = dynamic_cast<Dropout*>(l.get())) d->set_rate(rate);
}

void Network::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open model file for writing: " + path.string());
  os.write(kModelMagic, sizeof(kModelMagic));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(layers_.size()));
  for (const auto& l : layers_) {
    put<std::uint8_t>(os, static_cast<std::uint8_t>(l->type()));
    const auto dims = l->dims();
    put<std::uint32_t>(os, static_cast<std::uint32_t>(dims.size()));
    for (auto d : dims) put<std::uint32_t>(os, d);
    for (Matrix* m : const_cast<Layer&>(*l).state())
      for (Eigen::Index i = 0; i < m->rows(); ++i)
        for (Eigen::Index j = 0; j < m->cols(); ++j) put<double>(os, (*m)(i, j));
  }
  if (!os) throw InputError("failed writing model file: " + path.string());
}

Network Network::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open model file: " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) throw InputError("not a model file: " + path.string());
  const auto count = get<std::uint32_t>(is);
  Network net;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto tag = static_cast<LayerType>(get<std::uint8_t>(is));
    const auto ndims = get<std::uint32_t>(is);
    if (ndims > 16) throw InputError("model file: implausible dimension count");
    std::vector<std::uint32_t> dims(ndims);
    for (auto& d : dims) d = get<std::uint32_t>(is);
    auto layer = make_layer(tag, dims);
    for (Matrix* m : layer->state())
      for (Eigen::Index i = 0; i < m->rows(); ++i)
        for (Eigen::Index j = 0; j < m->cols(); ++j) (*m)(i, j) = get<double>(is);
    net.add(std::move(layer));
  }
  return net;
}

Matrix pack_inputs(const RMatrix& rows, Shape shape) {
  if (rows.cols() != shape.size()) throw InputError("input width does not match network input shape");
  if (shape.length == 1) return rows;
  Matrix out(rows.rows() * shape.length, shape.channels);
  for (Eigen::Index b = 0; b < rows.rows(); ++b)
    for (int l = 0; l < shape.length; ++l)
      for (int c = 0; c < shape.channels; ++c) out(b * shape.length + l, c) = rows(b, l * shape.channels + c);
  return out;
}

Matrix softmax(const Matrix& logits) {
  Matrix p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

double cross_entropy(const Matrix& probs, std::span<const int> labels) {
  check_labels(probs, labels);
  double loss = 0.0;
  for (size_t i = 0; i < labels.size(); ++i)
    loss -= std::log(std::max(probs(static_cast<Eigen::Index>(i), labels[i]), 1e-300));
  return loss / static_cast<double>(labels.size());
}

Matrix cross_entropy_grad(const Matrix& probs, std::span<const int> labels) {
  check_labels(probs, labels);
  Matrix g = probs;
  for (size_t i = 0; i < labels.size(); ++i) g(static_cast<Eigen::Index>(i), labels[i]) -= 1.0;
  return g / static_cast<double>(labels.size());
}

Network make_dense_network(const DenseArch& arch, std::uint64_t seed) {
  if (arch.inputs < 1 || arch.classes < 1 || arch.hidden < 1 || arch.hidden_layers < 0)
    throw InputError("dense architecture: dimensions must be positive");
  Engine eng = make_engine(seed, 0xA1);
  Network net;
  net.add(std::make_unique<Standardize>(Shape{1, arch.inputs}));
  int width = arch.inputs;
  for (int l = 0; l < arch.hidden_layers; ++l) {
    auto dense = std::make_unique<Dense>(width, arch.hidden);
    dense->init(eng, std::sqrt(2.0 / width));
    net.add(std::move(dense));
    net.add(std::make_unique<Relu>(Shape{1, arch.hidden}));
    net.add(std::make_unique<Dropout>(Shape{1, arch.hidden}, arch.dropout, mix_seed(seed, 0xB0 + l)));
    width = arch.hidden;
  }
  auto head = std::make_unique<Dense>(width, arch.classes);
  head->init(eng, 0.1 / std::sqrt(width));
  net.add(std::move(head));
  return net;
}

Network make_cnn(const CnnArch& arch, std::uint64_t seed) {
  if (arch.length < 2 || arch.classes < 1) throw InputError("cnn architecture: input length must be >= 2");
  Engine eng = make_engine(seed, 0xC1);
  const int c1 = arch.conv1_channels, c2 = arch.conv2_channels, k = arch.kernel;
  const int pooled = arch.length / 2;
  Network net;
  net.add(std::make_unique<Standardize>(Shape{arch.length, 1}));
  auto conv1 = std::make_unique<Conv1d>(arch.length, 1, c1, k);
  conv1->init(eng, std::sqrt(2.0 / k));
  net.add(std::move(conv1));
  net.add(std::make_unique<BatchNorm>(Shape{arch.length, c1}));
  net.add(std::make_unique<Relu>(Shape{arch.length, c1}));
  net.add(std::make_unique<MaxPool>(Shape{arch.length, c1}));
  auto conv2 = std::make_unique<Conv1d>(pooled, c1, c2, k);
  conv2->init(eng, std::sqrt(2.0 / (k * c1)));
  net.add(std::move(conv2));
  net.add(std::make_unique<Relu>(Shape{pooled, c2}));
  net.add(std::make_unique<GlobalAvgPool>(Shape{pooled, c2}));
  auto head = std::make_unique<Dense>(c2, arch.classes);
  head->init(eng, 0.1 / std::sqrt(c2));
  net.add(std::move(head));
  return net;
}

void fit_input_standardizer(Network& net, const RMatrix& rows) {
  if (net.num_layers() == 0) return;
  if (auto* s = dynamic_cast<Standardize*>(&net.layer(0))) s->fit(pack_inputs(rows, net.input_shape()));
}

Matrix dense_forward(Network& net, const RMatrix& features) {
  if (net.input_shape().length != 1) throw InputError("dense_forward: network expects a sequence input");
  return net.predict_proba(pack_inputs(features, net.input_shape()));
}

Matrix cnn_forward(Network& net, const RMatrix& log_eigenvalues) {
  const Shape in = net.input_shape();
  if (in.channels != 1 || log_eigenvalues.cols() != in.length)
    throw InputError("cnn_forward: sequence length does not match the network");
  return net.predict_proba(pack_inputs(log_eigenvalues, in));
}

double evaluate_loss(Network& net, const RMatrix& x, std::span<const int> y) {
  return cross_entropy(net.predict_proba(pack_inputs(x, net.input_shape())), y);
}

double evaluate_accuracy(Network& net, const RMatrix& x, std::span<const int> y) {
  const auto pred = net.predict(pack_inputs(x, net.input_shape()));
  if (pred.size() != y.size()) throw InputError("label count does not match inputs");
  if (y.empty()) return 0.0;
  size_t hit = 0;
  for (size_t i = 0; i < y.size(); ++i) hit += pred[i] == y[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

TrainReport train(Network& net, const RMatrix& train_x, std::span<const int> train_y, const RMatrix& val_x,
                  std::span<const int> val_y, const TrainHyper& hyper) {
  if (train_x.rows() == 0) throw InputError("training split is empty");
  if (static_cast<size_t>(train_x.rows()) != train_y.size()) throw InputError("training labels do not match inputs");
  if (hyper.batch < 1 || hyper.epochs < 0) throw InputError("invalid training hyperparameters");
  if (hyper.dropout >= 0.0) net.set_dropout(hyper.dropout);
  const bool has_val = val_x.rows() > 0;
  const Shape in = net.input_shape();

  auto params = net.params();
  std::vector<Matrix> velocity;
  velocity.reserve(params.size());
  for (auto& p : params) velocity.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));

  TrainReport report;
  report.train_loss.push_back(evaluate_loss(net, train_x, train_y));
  report.val_loss.push_back(has_val ? evaluate_loss(net, val_x, val_y) : report.train_loss.back());
  report.val_accuracy.push_back(has_val ? evaluate_accuracy(net, val_x, val_y) : 0.0);
  Network best = net;
  double best_loss = report.val_loss.back();

  std::vector<int> order(static_cast<size_t>(train_x.rows()));
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Engine eng = make_engine(hyper.seed, static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), eng);
    const double lr = hyper.learning_rate *
                      std::pow(hyper.lr_decay, hyper.lr_step_epochs > 0 ? epoch / hyper.lr_step_epochs : 0);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(hyper.batch)) {
      const size_t count = std::min(order.size() - start, static_cast<size_t>(hyper.batch));
      std::span<const int> idx(order.data() + start, count);
      std::vector<int> labels(count);
      for (size_t i = 0; i < count; ++i) labels[i] = train_y[static_cast<size_t>(idx[i])];
      const Matrix probs = softmax(net.forward(pack_inputs(take_rows(train_x, idx), in), Mode::Train));
      const double loss = cross_entropy(probs, labels);
      const auto diverged = [&](double value) {
        std::ostringstream os;
        os << "training diverged at epoch " << epoch << ", batch " << start / hyper.batch << " (loss " << value
           << ", learning rate " << lr << "); lower the learning rate";
        return NumericError(os.str());
      };
      if (!std::isfinite(loss)) throw diverged(loss);
      epoch_loss += loss * static_cast<double>(count);
      net.backward(cross_entropy_grad(probs, labels));
      for (size_t k = 0; k < params.size(); ++k) {
        velocity[k] = hyper.momentum * velocity[k] - lr * (*params[k].grad);
        *params[k].value += velocity[k];
        // The loss clamp keeps the loss finite long after the weights blow up.
        if (!params[k].value->allFinite()) throw diverged(loss);
      }
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    report.val_loss.push_back(has_val ? evaluate_loss(net, val_x, val_y) : report.train_loss.back());
    report.val_accuracy.push_back(has_val ? evaluate_accuracy(net, val_x, val_y) : 0.0);
    if (report.val_loss.back() < best_loss) {
      best_loss = report.val_loss.back();
      best = net;
      report.best_epoch = epoch + 1;
    }
  }
  if (hyper.restore_best) net = std::move(best);
  return report;
}

}  // namespace h2ad::nn
