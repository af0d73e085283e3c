#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "h2ad/rng.hpp"
#include "h2ad/signal_sim.hpp"

namespace h2ad::nn {

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

enum class InputKind {
  LogEigenvalues,     // pooled spectrum, sorted descending, natural log
  Features,           // the five eigenvalue statistics
  FeaturesNoEntropy,  // first four statistics only
};

struct LabeledDataset {
  RMatrix inputs;             // one sample per row
  std::vector<int> labels;    // class index, i.e. source count - 1
  std::vector<double> snr_db;
  std::vector<Split> split;
  int num_classes = 0;
  InputKind kind = InputKind::LogEigenvalues;

  int size() const { return static_cast<int>(labels.size()); }
  /// Rows of one split, in dataset order.
  LabeledDataset subset(Split which) const;
  RMatrix one_hot() const;
};

struct SweepSpec {
  int max_sources = 4;  // classes 1..max_sources
  int samples_per_class = 300;
  double snr_min_db = -20.0;
  double snr_max_db = 0.0;
  double max_angle_deg = 60.0;
  double min_separation_deg = 10.0;
  int num_snapshots = 200;
  std::uint64_t seed = 1;
  double train_fraction = 0.8;
  double val_fraction = 0.1;

  void validate() const;
  std::string describe() const;
};

/// count angles uniform in [-max_abs, max_abs] (radians), pairwise at least
/// min_sep apart. Throws ConfigError after 1000 rejected draws.
std::vector<double> draw_angles(Engine& eng, int count, double max_abs, double min_sep);

/// Eigenvalues of every group's sample covariance, concatenated and sorted descending.
std::vector<double> pooled_eigenvalues(const ArrayConfig& config, const SourceScene& scene,
                                       Combining mode = Combining::FullyDigital);

/// Balanced dataset of pooled log-spectra. Sample i is simulated from
/// mix_seed(seed, i), so the result does not depend on the worker count.
LabeledDataset generate_dataset(const ArrayConfig& config, const SweepSpec& sweep,
                                Combining mode = Combining::FullyDigital);

/// Maps a log-eigenvalue dataset to eigenvalue statistics.
LabeledDataset to_features(const LabeledDataset& log_spectra, bool with_entropy);

/// CSV with header feat_0..feat_k,label,split,snr_db (label is the source
/// count) plus a "<path>.meta" key=value sidecar.
void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& data, const std::string& meta);
LabeledDataset read_dataset_csv(const std::filesystem::path& path, int num_classes);

}  // namespace h2ad::nn
