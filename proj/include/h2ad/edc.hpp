#pragma once

#include <vector>

#include "h2ad/spectral.hpp"

namespace h2ad::edc {

struct Standardized {
  std::vector<double> z;
  bool degenerate = false;  // zero variance: z is all zeros
};

/// z_j = (lambda_j - mean) / popstd.
Standardized standardize(const std::vector<double>& eigenvalues);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct LiftedPoint {
  Point2 pos;
  int group = 0;
  int index = 0;  // eigenvalue index within the group
};

/// (z, sign(z)|z|^eps) for every entry; eps >= 1.
std::vector<LiftedPoint> lift(const std::vector<double>& z, double exponent, int group = 0);

inline constexpr int kNoise = -1;

struct ClusterLabeling {
  std::vector<int> labels;  // cluster id or kNoise
  std::vector<bool> core;
  int num_clusters = 0;
};

/// Euclidean DBSCAN. A point is core when at least min_pts points (itself
/// included) lie within eps. Points are scanned in input order; border points
/// belong to the first cluster that reaches them.
ClusterLabeling dbscan(const std::vector<Point2>& points, double eps, int min_pts);

struct Params {
  double exponent = 2.0;
  double eps = 0.5;
  int min_pts = 0;  // 0 -> max(4, Q + 1)
};

struct CountResult {
  int estimate = 0;
  int signal_points = 0;
  int noise_cluster_size = 0;
  int total_points = 0;
  ClusterLabeling labeling;
  std::vector<LiftedPoint> points;
};

/// Pools the lifted spectra of all groups, takes the largest DBSCAN cluster as
/// the noise cluster and returns round(|rest| / Q). DBSCAN noise points count
/// as signal.
CountResult estimate_count(const std::vector<std::vector<double>>& spectra, const Params& params = {});
CountResult estimate_count(const std::vector<EigenSpectrum>& spectra, const Params& params = {});

}  // namespace h2ad::edc
