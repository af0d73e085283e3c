#pragma once

#include <string>
#include <vector>

#include "h2ad/types.hpp"

namespace h2ad {

/// Geometry of a heterogeneous hybrid analog-digital receiver.
///
/// The ULA is split into Q groups. Group q holds K subarrays (same K for every
/// group) of M_q antennas each, so N_q = K * M_q. Group indices are 0-based.
/// Analog phases default to zero (identity combining).
class ArrayConfig {
 public:
  ArrayConfig(int subarrays_per_group, std::vector<int> antennas_per_subarray,
              double element_spacing, double wavelength);

  /// Same as above with explicit analog phases, one vector of N_q radians per group.
  ArrayConfig(int subarrays_per_group, std::vector<int> antennas_per_subarray,
              double element_spacing, double wavelength,
              std::vector<std::vector<double>> analog_phases);

  /// Half-wavelength spacing with unit wavelength.
  static ArrayConfig half_wavelength(int subarrays_per_group, std::vector<int> antennas_per_subarray);

  int num_groups() const { return static_cast<int>(antennas_.size()); }
  int subarrays_per_group() const { return subarrays_; }
  int antennas_per_subarray(int q) const;
  const std::vector<int>& antennas_per_subarray() const { return antennas_; }
  int group_size(int q) const;
  int total_antennas() const;
  /// Antennas preceding group q on the global ULA.
  int group_offset(int q) const;

  double element_spacing() const { return spacing_; }
  double wavelength() const { return wavelength_; }
  /// 2*pi*d/lambda.
  double phase_scale() const { return 2.0 * kPi * spacing_ / wavelength_; }

  /// Analog phase of antenna n (global index within group q).
  double analog_phase(int q, int n) const;
  bool has_identity_phases() const { return phases_.empty(); }

  bool is_pairwise_coprime() const;

  /// Non-fatal validation findings (e.g. spacing above lambda/2).
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Stable textual description, used for hashing into result metadata.
  std::string describe() const;

  void check_group(int q) const;

 private:
  void validate();

  int subarrays_;
  std::vector<int> antennas_;
  double spacing_;
  double wavelength_;
  std::vector<std::vector<double>> phases_;
  std::vector<std::string> warnings_;
};

struct SteeringVector {
  CVector entries;
  double angle = 0.0;
  int group = 0;
};

/// Element manifold of group q: entry n = exp(j*2pi/lambda*(n + offset)*d*sin(theta)).
/// A non-zero offset places the group at its global position on the ULA.
SteeringVector steering(const ArrayConfig& config, int q, double theta, int position_offset = 0);

/// Virtual-array manifold of group q (K entries, spacing M_q*d).
SteeringVector virtual_steering(const ArrayConfig& config, int q, double theta);

/// Geometric-sum gain of one M_q-antenna subarray; M_q at the singular points.
cdouble subarray_gain(const ArrayConfig& config, int q, double theta);

/// K_q x N_q analog combiner B^H, including the 1/sqrt(M_q) normalization.
CMatrix combiner(const ArrayConfig& config, int q);

void check_angle(double theta);

}  // namespace h2ad
