#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "h2ad/signal_sim.hpp"

namespace h2ad {

/// R_q = sigma_s^2 sum_i B^H a_i a_i^H B + sigma_v^2 I, with a_i placed at the
/// group's global position on the ULA.
CMatrix model_covariance(const ArrayConfig& config, const SourceScene& scene, int q,
                         Combining mode = Combining::Analog);

/// dR_q / d theta_i = sigma_s^2 B^H (a' a^H + a a'^H) B,
/// a' = j (2 pi / lambda) d cos(theta_i) D_q a with D_q the antenna index matrix.
CMatrix covariance_derivative(const ArrayConfig& config, const SourceScene& scene, int q, int source,
                              Combining mode = Combining::Analog);

struct FimMatrix {
  RMatrix entries;                  // A x A
  std::vector<RMatrix> per_group;   // contribution of each group
  std::vector<std::string> warnings;
};

/// FIM_pr = sum_q Tr(R_q^-1 dR_q/dtheta_p R_q^-1 dR_q/dtheta_r), per snapshot.
FimMatrix fim(const ArrayConfig& config, const SourceScene& scene, Combining mode = Combining::Analog);

struct CrlbResult {
  std::vector<double> bound;  // radians^2, one per source
  int snapshots = 0;
  std::uint64_t config_hash = 0;
  std::vector<std::string> warnings;
};

/// diag(FIM^-1) / L, or 1 / (L FIM_ii) with the diagonal approximation.
CrlbResult crlb(const ArrayConfig& config, const SourceScene& scene, int snapshots,
                bool diagonal_approximation = false, Combining mode = Combining::Analog);

/// (1/N)|a^H(theta_p) a(theta_r)| for each N, in closed form:
/// |sin(N delta / 2)| / (N |sin(delta / 2)|), delta = 2 pi d/lambda (sin theta_r - sin theta_p).
std::vector<double> orthogonality_profile(double spacing_over_wavelength, double theta_p, double theta_r,
                                          std::span<const int> sizes);

}  // namespace h2ad
