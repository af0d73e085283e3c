#include "h2ad/array_model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace h2ad {

ArrayConfig::ArrayConfig(int subarrays_per_group, std::vector<int> antennas_per_subarray,
                         double element_spacing, double wavelength)
    : ArrayConfig(subarrays_per_group, std::move(antennas_per_subarray), element_spacing, wavelength, {}) {}

ArrayConfig::ArrayConfig(int subarrays_per_group, std::vector<int> antennas_per_subarray,
                         double element_spacing, double wavelength,
                         std::vector<std::vector<double>> analog_phases)
    : subarrays_(subarrays_per_group),
      antennas_(std::move(antennas_per_subarray)),
      spacing_(element_spacing),
      wavelength_(wavelength),
      phases_(std::move(analog_phases)) {
  validate();
}

ArrayConfig ArrayConfig::half_wavelength(int subarrays_per_group, std::vector<int> antennas_per_subarray) {
  return ArrayConfig(subarrays_per_group, std::move(antennas_per_subarray), 0.5, 1.0);
}

void ArrayConfig::validate() {
  if (antennas_.empty()) throw ConfigError("array config: at least one group is required");
  if (subarrays_ < 1) throw ConfigError("array config: subarrays per group must be positive");
  for (int m : antennas_) {
    if (m < 1) throw ConfigError("array config: antennas per subarray must be positive");
  }
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) throw ConfigError("array config: element spacing must be positive");
  if (!(wavelength_ > 0.0) || !std::isfinite(wavelength_)) throw ConfigError("array config: wavelength must be positive");
  if (!phases_.empty()) {
    if (phases_.size() != antennas_.size()) throw ConfigError("array config: analog phases must cover every group");
    for (int q = 0; q < num_groups(); ++q) {
      if (static_cast<int>(phases_[q].size()) != group_size(q))
        throw ConfigError("array config: analog phase count must equal N_q for group " + std::to_string(q));
    }
  }
  if (spacing_ > wavelength_ / 2.0 * (1.0 + 1e-12)) {
    warnings_.push_back("element spacing exceeds half a wavelength; element-level grating lobes possible");
  }
}

int ArrayConfig::antennas_per_subarray(int q) const {
  check_group(q);
  return antennas_[q];
}

int ArrayConfig::group_size(int q) const {
  check_group(q);
  return subarrays_ * antennas_[q];
}

int ArrayConfig::total_antennas() const {
  return subarrays_ * std::accumulate(antennas_.begin(), antennas_.end(), 0);
}

int ArrayConfig::group_offset(int q) const {
  check_group(q);
  int offset = 0;
  for (int p = 0; p < q; ++p) offset += group_size(p);
  return offset;
}

double ArrayConfig::analog_phase(int q, int n) const {
  check_group(q);
  if (phases_.empty()) return 0.0;
  return phases_[q].at(n);
}

bool ArrayConfig::is_pairwise_coprime() const {
  for (size_t a = 0; a < antennas_.size(); ++a) {
    for (size_t b = a + 1; b < antennas_.size(); ++b) {
      if (std::gcd(antennas_[a], antennas_[b]) != 1) return false;
    }
  }
  return true;
}

std::string ArrayConfig::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "K=" << subarrays_ << ";M=";
  for (size_t q = 0; q < antennas_.size(); ++q) os << (q ? "," : "") << antennas_[q];
  os << ";d=" << spacing_ << ";lambda=" << wavelength_;
  if (!phases_.empty()) {
    os << ";phases=";
    for (const auto& g : phases_)
      for (double p : g) os << p << ',';
  }
  return os.str();
}

void ArrayConfig::check_group(int q) const {
  if (q < 0 || q >= num_groups())
    throw ConfigError("group index " + std::to_string(q) + " out of range [0, " + std::to_string(num_groups()) + ")");
}

void check_angle(double theta) {
  if (!std::isfinite(theta) || std::abs(theta) > kPi / 2.0)
    throw InputError("angle must lie in [-pi/2, pi/2]");
}

SteeringVector steering(const ArrayConfig& config, int q, double theta, int position_offset) {
  config.check_group(q);
  check_angle(theta);
  const int n = config.group_size(q);
  const double step = config.phase_scale() * std::sin(theta);
  SteeringVector sv{CVector(n), theta, q};
  for (int i = 0; i < n; ++i) sv.entries[i] = std::polar(1.0, step * (i + position_offset));
  return sv;
}

SteeringVector virtual_steering(const ArrayConfig& config, int q, double theta) {
  config.check_group(q);
  check_angle(theta);
  const int k = config.subarrays_per_group();
  const double step = config.phase_scale() * config.antennas_per_subarray(q) * std::sin(theta);
  SteeringVector sv{CVector(k), theta, q};
  for (int i = 0; i < k; ++i) sv.entries[i] = std::polar(1.0, step * i);
  return sv;
}

cdouble subarray_gain(const ArrayConfig& config, int q, double theta) {
  config.check_group(q);
  check_angle(theta);
  const int m = config.antennas_per_subarray(q);
  const double phi = config.phase_scale() * std::sin(theta);
  const cdouble den = 1.0 - std::polar(1.0, phi);
  if (std::abs(den) < 1e-6) {
    // Near the removable singularity the closed form cancels badly; sum directly.
    cdouble sum = 0.0;
    for (int i = 0; i < m; ++i) sum += std::polar(1.0, phi * i);
    return sum;
  }
  return (1.0 - std::polar(1.0, phi * m)) / den;
}

CMatrix combiner(const ArrayConfig& config, int q) {
  const int k = config.subarrays_per_group();
  const int m = config.antennas_per_subarray(q);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  CMatrix bh = CMatrix::Zero(k, k * m);
  for (int sub = 0; sub < k; ++sub) {
    for (int a = 0; a < m; ++a) {
      const int n = sub * m + a;
      bh(sub, n) = std::polar(scale, -config.analog_phase(q, n));
    }
  }
  return bh;
}

}  // namespace h2ad
