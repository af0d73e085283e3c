#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace h2ad::nn {

/// Log-domain eigenvalue statistics:
/// [ln max, ln min, ln std, ln mean, spectral entropy].
struct FeatureVector {
  std::array<double, 5> beta{};
  bool clamped = false;      // a non-positive eigenvalue was clamped to kEigenFloor
  bool std_guarded = false;  // zero spread; ln std evaluated at kEigenFloor

  double log_max() const { return beta[0]; }
  double log_min() const { return beta[1]; }
  double log_std() const { return beta[2]; }
  double log_mean() const { return beta[3]; }
  double entropy() const { return beta[4]; }
};

inline constexpr double kEigenFloor = 1e-300;

FeatureVector extract_features(std::span<const double> eigenvalues);

struct DenseFlopSpec {
  int inputs = 0;
  int hidden = 0;
  int classes = 0;
};

struct CnnFlopSpec {
  int inputs = 0;
  int classes = 0;
};

struct FlopEstimate {
  std::int64_t flops = 0;
  bool valid = true;  // false when any dimension is non-positive
};

/// Forward-pass FLOPs of the three-layer dense classifier: 2(LH + 2H^2 + HA).
FlopEstimate flops_estimate(const DenseFlopSpec& spec);
/// Forward-pass FLOPs of the 1-D CNN: 24960 L + 256 A.
FlopEstimate flops_estimate(const CnnFlopSpec& spec);

}  // namespace h2ad::nn
