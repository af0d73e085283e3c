#include "h2ad/nn_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "h2ad/csv.hpp"
#include "h2ad/features.hpp"
#include "h2ad/parallel.hpp"
#include "h2ad/spectral.hpp"

namespace h2ad::nn {

namespace {

constexpr int kMaxAngleRetries = 1000;

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw InputError("dataset: unknown split tag '" + s + "'");
}

}  // namespace

LabeledDataset LabeledDataset::subset(Split which) const {
  std::vector<Eigen::Index> rows;
  for (size_t i = 0; i < split.size(); ++i)
    if (split[i] == which) rows.push_back(static_cast<Eigen::Index>(i));
  LabeledDataset out;
  out.num_classes = num_classes;
  out.kind = kind;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  for (size_t k = 0; k < rows.size(); ++k) {
    out.inputs.row(static_cast<Eigen::Index>(k)) = inputs.row(rows[k]);
    out.labels.push_back(labels[static_cast<size_t>(rows[k])]);
    out.snr_db.push_back(snr_db[static_cast<size_t>(rows[k])]);
    out.split.push_back(which);
  }
  return out;
}

RMatrix LabeledDataset::one_hot() const {
  RMatrix y = RMatrix::Zero(size(), num_classes);
  for (int i = 0; i < size(); ++i) y(i, labels[static_cast<size_t>(i)]) = 1.0;
  return y;
}

void SweepSpec::validate() const {
  if (max_sources < 1) throw ConfigError("dataset: max_sources must be >= 1");
  if (samples_per_class < 1) throw ConfigError("dataset: samples_per_class must be >= 1");
  if (snr_max_db < snr_min_db) throw ConfigError("dataset: snr range is inverted");
  if (!(max_angle_deg > 0.0 && max_angle_deg <= 90.0)) throw ConfigError("dataset: max_angle_deg must be in (0, 90]");
  if (min_separation_deg < 0.0) throw ConfigError("dataset: min_separation_deg must be >= 0");
  if (num_snapshots < 1) throw ConfigError("dataset: num_snapshots must be >= 1");
  if (train_fraction <= 0.0 || val_fraction < 0.0 || train_fraction + val_fraction > 1.0)
    throw ConfigError("dataset: invalid split fractions");
}

std::string SweepSpec::describe() const {
  std::ostringstream os;
  os << "max_sources=" << max_sources << " samples_per_class=" << samples_per_class << " snr_db=[" << snr_min_db
     << "," << snr_max_db << "] max_angle_deg=" << max_angle_deg << " min_separation_deg=" << min_separation_deg
     << " snapshots=" << num_snapshots << " train=" << train_fraction << " val=" << val_fraction;
  return os.str();
}

std::vector<double> draw_angles(Engine& eng, int count, double max_abs, double min_sep) {
  std::uniform_real_distribution<double> uni(-max_abs, max_abs);
  std::vector<double> angles;
  int rejected = 0;
  while (static_cast<int>(angles.size()) < count) {
    const double a = uni(eng);
    const bool ok = std::all_of(angles.begin(), angles.end(), [&](double b) { return std::abs(a - b) >= min_sep; });
    if (ok) {
      angles.push_back(a);
    } else if (++rejected >= kMaxAngleRetries) {
      throw ConfigError("could not place " + std::to_string(count) + " sources with the requested separation after " +
                        std::to_string(kMaxAngleRetries) + " retries");
    }
  }
  return angles;
}

std::vector<double> pooled_eigenvalues(const ArrayConfig& config, const SourceScene& scene, Combining mode) {
  std::vector<double> pooled;
  for (const auto& y : generate_all_groups(config, scene, mode)) {
    const RVector ev = hermitian_eigenvalues(sample_covariance(y).data);
    pooled.insert(pooled.end(), ev.data(), ev.data() + ev.size());
  }
  std::sort(pooled.begin(), pooled.end(), std::greater<>());
  return pooled;
}

LabeledDataset generate_dataset(const ArrayConfig& config, const SweepSpec& sweep, Combining mode) {
  sweep.validate();
  const int total = sweep.max_sources * sweep.samples_per_class;
  int width = 0;
  for (int q = 0; q < config.num_groups(); ++q)
    width += mode == Combining::Analog ? config.subarrays_per_group() : config.group_size(q);

  LabeledDataset data;
  data.num_classes = sweep.max_sources;
  data.kind = InputKind::LogEigenvalues;
  data.inputs.resize(total, width);
  data.labels.resize(static_cast<size_t>(total));
  data.snr_db.resize(static_cast<size_t>(total));
  data.split.resize(static_cast<size_t>(total));

  parallel_for(static_cast<size_t>(total), [&](size_t i) {
    const int cls = static_cast<int>(i) / sweep.samples_per_class;
    Engine eng = make_engine(sweep.seed, i);
    std::uniform_real_distribution<double> snr(sweep.snr_min_db, sweep.snr_max_db);
    const double snr_db = snr(eng);
    auto angles = draw_angles(eng, cls + 1, deg2rad(sweep.max_angle_deg), deg2rad(sweep.min_separation_deg));
    const auto scene = SourceScene::from_snr_db(std::move(angles), snr_db, sweep.num_snapshots, mix_seed(sweep.seed, i));
    const auto ev = pooled_eigenvalues(config, scene, mode);
    for (int k = 0; k < width; ++k)
      data.inputs(static_cast<Eigen::Index>(i), k) = std::log(std::max(ev[static_cast<size_t>(k)], kEigenFloor));
    data.labels[i] = cls;
    data.snr_db[i] = snr_db;
  });

  // Stratified split: shuffle each class block, then cut by fraction.
  Engine eng = make_engine(sweep.seed, 0x5717);
  const int n_train = static_cast<int>(std::lround(sweep.train_fraction * sweep.samples_per_class));
  const int n_val = static_cast<int>(std::lround(sweep.val_fraction * sweep.samples_per_class));
  std::vector<int> order(static_cast<size_t>(sweep.samples_per_class));
  for (int c = 0; c < sweep.max_sources; ++c) {
    std::iota(order.begin(), order.end(), c * sweep.samples_per_class);
    std::shuffle(order.begin(), order.end(), eng);
    for (int k = 0; k < sweep.samples_per_class; ++k) {
      const Split s = k < n_train ? Split::Train : (k < n_train + n_val ? Split::Val : Split::Test);
      data.split[static_cast<size_t>(order[static_cast<size_t>(k)])] = s;
    }
  }
  return data;
}

LabeledDataset to_features(const LabeledDataset& log_spectra, bool with_entropy) {
  if (log_spectra.kind != InputKind::LogEigenvalues) throw InputError("to_features expects a log-eigenvalue dataset");
  const int width = with_entropy ? 5 : 4;
  LabeledDataset out = log_spectra;
  out.kind = with_entropy ? InputKind::Features : InputKind::FeaturesNoEntropy;
  out.inputs.resize(log_spectra.size(), width);
  std::vector<double> ev(static_cast<size_t>(log_spectra.inputs.cols()));
  for (int i = 0; i < log_spectra.size(); ++i) {
    for (size_t k = 0; k < ev.size(); ++k) ev[k] = std::exp(log_spectra.inputs(i, static_cast<Eigen::Index>(k)));
    const auto f = extract_features(ev);
    for (int k = 0; k < width; ++k) out.inputs(i, k) = f.beta[static_cast<size_t>(k)];
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& data, const std::string& meta) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write dataset: " + path.string());
  for (Eigen::Index k = 0; k < data.inputs.cols(); ++k) os << "feat_" << k << ',';
  os << "label,split,snr_db\n";
  for (int i = 0; i < data.size(); ++i) {
    for (Eigen::Index k = 0; k < data.inputs.cols(); ++k) os << format_real(data.inputs(i, k)) << ',';
    os << data.labels[static_cast<size_t>(i)] + 1 << ',' << split_name(data.split[static_cast<size_t>(i)]) << ','
       << format_real(data.snr_db[static_cast<size_t>(i)]) << '\n';
  }
  std::ofstream ms(path.string() + ".meta");
  if (!ms) throw InputError("cannot write dataset metadata: " + path.string() + ".meta");
  ms << meta;
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path, int num_classes) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open dataset: " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw InputError("dataset is empty: " + path.string());
  int width = 0;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ','))
      if (cell.rfind("feat_", 0) == 0) ++width;
  }
  if (width == 0) throw InputError("dataset has no feature columns: " + path.string());
  LabeledDataset data;
  data.num_classes = num_classes;
  data.kind = width == 5 ? InputKind::Features : (width == 4 ? InputKind::FeaturesNoEntropy : InputKind::LogEigenvalues);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    for (int k = 0; k < width; ++k) {
      if (!std::getline(ls, cell, ',')) throw InputError("dataset row too short");
      row.push_back(std::stod(cell));
    }
    std::getline(ls, cell, ',');
    const int label = std::stoi(cell) - 1;
    if (label < 0 || label >= num_classes) throw InputError("dataset label out of range");
    std::getline(ls, cell, ',');
    data.split.push_back(parse_split(cell));
    std::getline(ls, cell, ',');
    data.snr_db.push_back(std::stod(cell));
    data.labels.push_back(label);
    rows.push_back(std::move(row));
  }
  data.inputs.resize(static_cast<Eigen::Index>(rows.size()), width);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < width; ++k) data.inputs(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<size_t>(k)];
  return data;
}

}  // namespace h2ad::nn
