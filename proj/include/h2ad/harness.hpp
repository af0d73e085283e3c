#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "h2ad/config_file.hpp"
#include "h2ad/edc.hpp"
#include "h2ad/fusion.hpp"
#include "h2ad/nn_dataset.hpp"
#include "h2ad/nn_network.hpp"

namespace h2ad::harness {

inline constexpr int kSchemaVersion = 1;

enum class Profile { Default, Smoke, Paper };
Profile parse_profile(const std::string& name);

struct SnrSweep {
  double start_db = -20.0;
  double stop_db = 0.0;
  double step_db = 2.0;

  /// start, start + step, ... up to stop (inclusive, with rounding slack).
  std::vector<double> points() const;
  void validate() const;
};

struct ArraySettings {
  int subarrays = 16;
  std::vector<int> antennas{7, 13, 17};
  double spacing = 0.5;  // in wavelengths
  double wavelength = 1.0;

  ArrayConfig build() const;
};

/// Command-line level overrides shared by every experiment.
struct RunOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_dir = "results";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::filesystem::path> models_dir;
  Profile profile = Profile::Default;
};

struct NumberSensingConfig {
  ArraySettings array{1, {29, 31, 37}};
  int num_sources = 3;
  int snapshots = 200;
  double max_angle_deg = 60.0;
  double min_separation_deg = 10.0;
  SnrSweep sweep{-20.0, 0.0, 2.0};
  int trials = 500;
  std::uint64_t seed = 1;
  bool use_edc = true;
  bool use_dense = false;
  bool use_cnn = false;
  bool use_fcnn = false;
  std::filesystem::path dense_model;
  std::filesystem::path cnn_model;
  std::filesystem::path fcnn_model;
  edc::Params edc;
  std::filesystem::path out_dir = "results";

  void validate() const;
};

struct DoaConfig {
  ArraySettings array{16, {7, 13, 17}};
  std::vector<double> angles_deg{11.0, 23.0};
  int snapshots = 200;
  SnrSweep sweep{-20.0, 10.0, 5.0};
  int trials = 200;
  std::uint64_t seed = 1;
  bool use_omc = true;
  bool use_wgmd = true;
  bool use_wlmd = true;
  OmcParams omc;
  DistanceParams distance;
  double gate_deg = 1.0;
  std::filesystem::path out_dir = "results";

  void validate() const;
};

struct ComplexityConfig {
  int subarrays = 16;
  std::vector<std::vector<int>> sizes{{3, 5, 7}, {5, 7, 11}, {7, 11, 13}, {7, 13, 17},
                                      {11, 13, 17}, {13, 17, 19}, {17, 19, 23}};
  std::vector<double> angles_deg{11.0, 23.0};
  double snr_db = 10.0;
  int snapshots = 200;
  int repetitions = 20;
  std::uint64_t seed = 1;
  OmcParams omc;
  std::filesystem::path out_dir = "results";

  void validate() const;
};

struct CrlbSweepConfig {
  ArraySettings array{16, {7, 13, 17}};
  std::vector<double> angles_deg{11.0, 23.0};
  int snapshots = 200;
  SnrSweep sweep{-20.0, 10.0, 1.0};
  std::filesystem::path out_dir = "results";

  void validate() const;
};

struct TrainConfig {
  ArraySettings array{1, {29, 31, 37}};
  nn::SweepSpec data;
  nn::DenseArch dense;
  nn::CnnArch cnn;
  nn::TrainHyper dense_hyper;
  nn::TrainHyper cnn_hyper;
  bool train_dense = true;
  bool train_fcnn = true;
  bool train_cnn = true;
  std::filesystem::path out_dir = "results";

  void validate() const;
};

NumberSensingConfig load_number_sensing(const RunOptions& opts);
DoaConfig load_doa(const RunOptions& opts);
ComplexityConfig load_complexity(const RunOptions& opts);
CrlbSweepConfig load_crlb_sweep(const RunOptions& opts);
TrainConfig load_train(const RunOptions& opts);

/// Accuracy per estimator, aligned with snr_db.
struct NumberSensingResult {
  std::vector<double> snr_db;
  std::map<std::string, std::vector<double>> accuracy;
  std::filesystem::path trials_csv;
  std::filesystem::path summary_csv;
};

struct DoaPoint {
  double snr_db = 0.0;
  std::string estimator;
  double angle_deg = 0.0;
  double accuracy = 0.0;
  double rmse_deg = 0.0;
  double crlb_std_deg = 0.0;
  int failures = 0;
};

struct DoaResult {
  std::vector<DoaPoint> points;
  std::vector<int> candidate_counts;  // every trial, every SNR
  std::filesystem::path trials_csv;
  std::filesystem::path summary_csv;
};

struct ComplexityRow {
  int antennas = 0;
  int candidates = 0;
  std::string method;
  double ns_per_trial = 0.0;
  std::int64_t op_count = 0;
};

struct ComplexityResult {
  std::vector<ComplexityRow> rows;
  std::filesystem::path csv;
};

struct CrlbSweepResult {
  std::filesystem::path csv;
};

struct TrainResult {
  std::map<std::string, std::filesystem::path> models;
  std::map<std::string, nn::TrainReport> reports;
  std::map<std::string, double> test_accuracy;
  std::filesystem::path dataset_csv;
  std::filesystem::path log_csv;
};

NumberSensingResult run_number_sensing_experiment(const NumberSensingConfig& cfg);
DoaResult run_doa_experiment(const DoaConfig& cfg);
ComplexityResult run_complexity_benchmark(const ComplexityConfig& cfg);
CrlbSweepResult run_crlb_sweep(const CrlbSweepConfig& cfg);
TrainResult run_training(const TrainConfig& cfg);

}  // namespace h2ad::harness
