#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "h2ad/esprit.hpp"

namespace h2ad {

enum class FusionMethod { Omc, Wgmd, Wlmd };

std::string method_name(FusionMethod method);

struct FusionResult {
  std::vector<double> angles;   // radians, ascending
  std::vector<double> support;  // member count behind each angle
  std::vector<double> score;    // cluster weight (OMC) or combination cost (WGMD/WLMD)
  FusionMethod method = FusionMethod::Omc;
  std::int64_t op_count = 0;  // candidate-distance evaluations
  bool low_confidence = false;
};

struct MicroCluster {
  double centroid = 0.0;  // radians
  double weight = 0.0;    // as of last_update; decays by gamma per later arrival
  int member_count = 0;
  long last_update = 0;   // arrival index
};

enum class OmcRanking {
  Weight,   // decayed weight, then smaller |centroid|
  Support,  // member count, then decayed weight, then smaller |centroid|
};

struct OmcParams {
  double radius_deg = 0.25;
  double decay = 0.98;
  double eviction_floor = 0.05;
  double merge_deg = 0.2;
  OmcRanking ranking = OmcRanking::Weight;
};

/// Online micro-clustering over the candidate stream, in the given order.
/// Distances are |sin a - sin b|; degree thresholds map to sin(threshold).
FusionResult omc_fuse(std::span<const CandidateAngle> stream, int num_sources, const OmcParams& params = {});

/// Micro-clusters alive at the end of the stream, before merging, with
/// weights brought up to the final arrival.
std::vector<MicroCluster> omc_clusters(std::span<const CandidateAngle> stream, const OmcParams& params = {});

/// Per-candidate weights for the minimum-distance fusers; empty means all 1.
struct DistanceParams {
  std::vector<double> group_weights;
};

/// Exhaustive one-candidate-per-group search. A combination costs
/// sum over pairs of w_a w_b |sin a - sin b|; the A cheapest combinations
/// sharing no candidate are kept.
FusionResult wgmd_fuse(std::span<const CandidateAngle> candidates, int num_sources, const DistanceParams& params = {});

/// Local variant: each first-group candidate is joined by its nearest
/// candidate from every other group.
FusionResult wlmd_fuse(std::span<const CandidateAngle> candidates, int num_sources, const DistanceParams& params = {});

struct AccuracyReport {
  std::vector<double> rmse_deg;  // per true angle, over correct trials; NaN if none
  std::vector<double> accuracy;  // per true angle
  double overall_accuracy = 0.0;   // mean over angles
  double overall_rmse_deg = 0.0;   // pooled over all correct (trial, angle) pairs
};

/// Scores per-trial estimates (nullopt = failed trial) against the truth.
/// Each true angle is matched to its nearest estimate; the match counts if
/// it lies within gate_deg.
AccuracyReport accuracy_and_rmse(const std::vector<std::optional<std::vector<double>>>& estimates,
                                 const std::vector<double>& truth, double gate_deg = 1.0);

}  // namespace h2ad
