#pragma once

#include <filesystem>
#include <vector>

#include "h2ad/signal_sim.hpp"

namespace h2ad {

struct CandidateAngle {
  double angle = 0.0;      // radians
  double sin_value = 0.0;  // sin(angle), the fusion metric coordinate
  int group = 0;
  int branch = 0;  // ESPRIT root index within the group (roots sorted ascending)
  int m = 0;       // ambiguity index in [0, M_q)
};

struct CandidateAngleSet {
  std::vector<CandidateAngle> candidates;  // group, branch, m order
  std::vector<int> per_group;

  int size() const { return static_cast<int>(candidates.size()); }
};

/// LS-ESPRIT phases of a K x K covariance, sorted ascending in (-pi, pi].
/// Forward-backward averaging is applied when requested.
std::vector<double> esprit_phases(const CMatrix& covariance, int num_sources, bool forward_backward);

/// LS-ESPRIT on one group's virtual array. Forward-backward averaging is used for A >= 2.
std::vector<double> esprit_group(const SnapshotMatrix& y, int num_sources);

/// Every angle whose virtual-array phase wraps to psi: sin values
/// (psi + 2 pi m) / (2 pi M_q d / lambda) inside [-1, 1). With d = lambda / 2
/// this yields exactly M_q candidates.
std::vector<CandidateAngle> expand_ambiguities(const ArrayConfig& config, int q, double psi, int branch = 0);

/// Wrapped virtual-array phase of a direction in group q.
double virtual_phase(const ArrayConfig& config, int q, double theta);

CandidateAngleSet build_candidate_set(const ArrayConfig& config, const std::vector<SnapshotMatrix>& groups,
                                      int num_sources);

/// CSV: angle_deg,group,branch,m (group is 1-based in the file).
void write_candidates_csv(const std::filesystem::path& path, const CandidateAngleSet& set);

}  // namespace h2ad
