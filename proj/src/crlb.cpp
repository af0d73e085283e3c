#include "h2ad/crlb.hpp"

#include <cmath>
#include <sstream>

#include "h2ad/hash.hpp"
#include "h2ad/spectral.hpp"

namespace h2ad {

namespace {

constexpr double kConditionWarning = 1e12;
constexpr double kSingularFim = 1e-12;

void check_scene(const SourceScene& scene) {
  if (scene.angles.empty()) throw ConfigError("CRLB needs at least one source");
  for (double a : scene.angles) check_angle(a);
  if (!(scene.signal_power >= 0.0) || !(scene.noise_power >= 0.0)) throw ConfigError("powers must be non-negative");
}

CMatrix project(const ArrayConfig& config, int q, const CVector& v, Combining mode) {
  if (mode == Combining::FullyDigital) return v;
  return combiner(config, q) * v;
}

CVector global_steering(const ArrayConfig& config, int q, double theta) {
  return steering(config, q, theta, config.group_offset(q)).entries;
}

CVector steering_derivative(const ArrayConfig& config, int q, double theta) {
  const CVector a = global_steering(config, q, theta);
  const double c = config.phase_scale() * std::cos(theta);
  const int offset = config.group_offset(q);
  CVector da(a.size());
  for (Eigen::Index n = 0; n < a.size(); ++n)
    da(n) = cdouble(0.0, c * static_cast<double>(n + offset)) * a(n);
  return da;
}

}  // namespace

CMatrix model_covariance(const ArrayConfig& config, const SourceScene& scene, int q, Combining mode) {
  config.check_group(q);
  const Eigen::Index dim = mode == Combining::FullyDigital ? config.group_size(q) : config.subarrays_per_group();
  CMatrix r = scene.noise_power * CMatrix::Identity(dim, dim);
  for (double theta : scene.angles) {
    const CMatrix v = project(config, q, global_steering(config, q, theta), mode);
    r += scene.signal_power * v * v.adjoint();
  }
  return r;
}

CMatrix covariance_derivative(const ArrayConfig& config, const SourceScene& scene, int q, int source,
                              Combining mode) {
  config.check_group(q);
  if (source < 0 || source >= scene.num_sources()) throw InputError("source index out of range");
  const double theta = scene.angles[static_cast<size_t>(source)];
  const CMatrix v = project(config, q, global_steering(config, q, theta), mode);
  const CMatrix dv = project(config, q, steering_derivative(config, q, theta), mode);
  const CMatrix x = dv * v.adjoint();
  return scene.signal_power * (x + x.adjoint());
}

FimMatrix fim(const ArrayConfig& config, const SourceScene& scene, Combining mode) {
  check_scene(scene);
  if (scene.noise_power == 0.0) throw NumericError("degenerate model: noise power is zero, R is singular");
  const int a = scene.num_sources();
  FimMatrix out;
  out.entries = RMatrix::Zero(a, a);
  for (int q = 0; q < config.num_groups(); ++q) {
    const CMatrix r = model_covariance(config, scene, q, mode);
    const RVector ev = hermitian_eigenvalues(r);
    const double cond = ev(0) / ev(ev.size() - 1);
    if (!(ev(ev.size() - 1) > 0.0)) throw NumericError("degenerate model: covariance of group " + std::to_string(q + 1) + " is singular");
    if (cond > kConditionWarning) {
      std::ostringstream os;
      os << "group " << q + 1 << " covariance condition number " << cond << " exceeds " << kConditionWarning;
      out.warnings.push_back(os.str());
    }
    const Eigen::LDLT<CMatrix> solver(r);
    std::vector<CMatrix> x;
    x.reserve(static_cast<size_t>(a));
    for (int i = 0; i < a; ++i) x.push_back(solver.solve(covariance_derivative(config, scene, q, i, mode)));
    RMatrix part(a, a);
    for (int p = 0; p < a; ++p)
      for (int s = p; s < a; ++s) {
        // Tr(X_p X_s) without forming the product.
        const double v = (x[static_cast<size_t>(p)].transpose().cwiseProduct(x[static_cast<size_t>(s)])).sum().real();
        part(p, s) = v;
        part(s, p) = v;
      }
    out.entries += part;
    out.per_group.push_back(std::move(part));
  }
  return out;
}

CrlbResult crlb(const ArrayConfig& config, const SourceScene& scene, int snapshots, bool diagonal_approximation,
                Combining mode) {
  if (snapshots < 1) throw ConfigError("CRLB needs at least one snapshot");
  const FimMatrix f = fim(config, scene, mode);
  CrlbResult out;
  out.snapshots = snapshots;
  out.config_hash = fnv1a(config.describe());
  out.warnings = f.warnings;
  const double inv_l = 1.0 / static_cast<double>(snapshots);
  const auto a = f.entries.rows();
  if (diagonal_approximation) {
    for (Eigen::Index i = 0; i < a; ++i) {
      if (!(f.entries(i, i) > 0.0)) throw NumericError("ill-posed scene: zero Fisher information for a source");
      out.bound.push_back(inv_l / f.entries(i, i));
    }
    return out;
  }
  const Eigen::LDLT<RMatrix> solver(f.entries);
  if (solver.info() != Eigen::Success || !(solver.rcond() > kSingularFim))
    throw NumericError("ill-posed scene: Fisher information matrix is singular");
  const RMatrix inv = solver.solve(RMatrix::Identity(a, a));
  for (Eigen::Index i = 0; i < a; ++i) {
    if (!(inv(i, i) > 0.0)) throw NumericError("ill-posed scene: non-positive bound");
    out.bound.push_back(inv_l * inv(i, i));
  }
  return out;
}

std::vector<double> orthogonality_profile(double spacing_over_wavelength, double theta_p, double theta_r,
                                          std::span<const int> sizes) {
  const double delta = 2.0 * kPi * spacing_over_wavelength * (std::sin(theta_r) - std::sin(theta_p));
  const double den_half = std::abs(std::sin(0.5 * delta));
  std::vector<double> out;
  out.reserve(sizes.size());
  for (int n : sizes) {
    if (n < 1) throw InputError("orthogonality profile needs N >= 1");
    if (den_half < 1e-15) {
      out.push_back(1.0);
    } else {
      out.push_back(std::abs(std::sin(0.5 * n * delta)) / (n * den_half));
    }
  }
  return out;
}

}  // namespace h2ad
