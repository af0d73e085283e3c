#include "h2ad/features.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "h2ad/types.hpp"

namespace h2ad::nn {

FeatureVector extract_features(std::span<const double> eigenvalues) {
  const size_t m = eigenvalues.size();
  if (m < 2) throw InputError("feature extraction needs at least two eigenvalues");

  FeatureVector out;
  std::vector<double> lam(eigenvalues.begin(), eigenvalues.end());
  for (double& v : lam) {
    if (!std::isfinite(v)) throw NumericError("non-finite eigenvalue");
    if (v <= 0.0) {
      v = kEigenFloor;
      out.clamped = true;
    }
  }

  const auto [mn, mx] = std::minmax_element(lam.begin(), lam.end());
  double sum = 0.0;
  for (double v : lam) sum += v;
  const double mean = sum / static_cast<double>(m);
  double var = 0.0;
  for (double v : lam) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m);
  double sd = std::sqrt(var);
  if (sd <= 1e-15 * mean) {
    sd = kEigenFloor;
    out.std_guarded = true;
  }

  double entropy = 0.0;
  for (double v : lam) {
    const double p = v / sum;
    if (p > 0.0) entropy -= p * std::log(p);
  }

  out.beta = {std::log(*mx), std::log(*mn), std::log(sd), std::log(mean), entropy};
  return out;
}

FlopEstimate flops_estimate(const DenseFlopSpec& s) {
  const std::int64_t l = s.inputs, h = s.hidden, a = s.classes;
  return {2 * (l * h + 2 * h * h + h * a), l > 0 && h > 0 && a > 0};
}

FlopEstimate flops_estimate(const CnnFlopSpec& s) {
  const std::int64_t l = s.inputs, a = s.classes;
  return {24960 * l + 256 * a, l > 0 && a > 0};
}

}  // namespace h2ad::nn
