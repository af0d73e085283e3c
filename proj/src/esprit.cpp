#include "h2ad/esprit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "h2ad/csv.hpp"
#include "h2ad/spectral.hpp"

namespace h2ad {

namespace {

constexpr double kRankTolerance = 1e-12;

double wrap_phase(double x) {
  double w = std::remainder(x, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

}  // namespace

std::vector<double> esprit_phases(const CMatrix& covariance, int num_sources, bool forward_backward) {
  const auto k = covariance.rows();
  if (num_sources < 1) throw InputError("ESPRIT needs at least one source");
  if (covariance.cols() != k) throw InputError("ESPRIT covariance must be square");
  if (num_sources >= k)
    throw ModelOrderError("ESPRIT needs more virtual elements (" + std::to_string(k) + ") than sources (" +
                          std::to_string(num_sources) + ")");
  CMatrix r = covariance;
  if (forward_backward) {
    const CMatrix flipped = covariance.conjugate().colwise().reverse().rowwise().reverse();
    r = 0.5 * (covariance + flipped);
  }
  const auto spec = hermitian_eig(r);
  const double top = spec.eigenvalues(0);
  const double last = spec.eigenvalues(num_sources - 1);
  if (!(top > 0.0) || last <= kRankTolerance * top)
    throw DegenerateSubspaceError("signal subspace has rank below " + std::to_string(num_sources));
  const CMatrix es = spec.eigenvectors.leftCols(num_sources);
  const CMatrix upper = es.topRows(k - 1);
  const CMatrix lower = es.bottomRows(k - 1);
  const CMatrix psi = upper.colPivHouseholderQr().solve(lower);
  Eigen::ComplexEigenSolver<CMatrix> solver(psi, false);
  if (solver.info() != Eigen::Success) throw NumericError("ESPRIT rotation eigen-solve failed");
  std::vector<double> phases;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double p = std::arg(solver.eigenvalues()(i));
    phases.push_back(p <= -kPi ? kPi : p);
  }
  std::sort(phases.begin(), phases.end());
  return phases;
}

std::vector<double> esprit_group(const SnapshotMatrix& y, int num_sources) {
  return esprit_phases(sample_covariance(y).data, num_sources, num_sources >= 2);
}

double virtual_phase(const ArrayConfig& config, int q, double theta) {
  return wrap_phase(config.phase_scale() * config.antennas_per_subarray(q) * std::sin(theta));
}

std::vector<CandidateAngle> expand_ambiguities(const ArrayConfig& config, int q, double psi, int branch) {
  config.check_group(q);
  if (!std::isfinite(psi)) throw InputError("ambiguity expansion needs a finite phase");
  const int mq = config.antennas_per_subarray(q);
  const double span = config.phase_scale() * mq;  // phase at sin = 1
  const double two_pi = 2.0 * kPi;
  const auto m_lo = static_cast<long>(std::ceil((-span - psi) / two_pi));
  const auto m_hi = static_cast<long>(std::ceil((span - psi) / two_pi)) - 1;
  std::vector<CandidateAngle> out;
  for (long m = m_lo; m <= m_hi; ++m) {
    const double s = std::clamp((psi + two_pi * static_cast<double>(m)) / span, -1.0, 1.0);
    CandidateAngle c;
    c.sin_value = s;
    c.angle = std::asin(s);
    c.group = q;
    c.branch = branch;
    c.m = static_cast<int>(((m % mq) + mq) % mq);
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const CandidateAngle& a, const CandidateAngle& b) { return a.m < b.m; });
  return out;
}

CandidateAngleSet build_candidate_set(const ArrayConfig& config, const std::vector<SnapshotMatrix>& groups,
                                      int num_sources) {
  CandidateAngleSet set;
  set.per_group.assign(static_cast<size_t>(config.num_groups()), 0);
  for (const auto& y : groups) {
    config.check_group(y.group);
    const auto phases = esprit_group(y, num_sources);
    for (size_t b = 0; b < phases.size(); ++b) {
      const auto cands = expand_ambiguities(config, y.group, phases[b], static_cast<int>(b));
      set.candidates.insert(set.candidates.end(), cands.begin(), cands.end());
      set.per_group[static_cast<size_t>(y.group)] += static_cast<int>(cands.size());
    }
  }
  return set;
}

void write_candidates_csv(const std::filesystem::path& path, const CandidateAngleSet& set) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write candidates: " + path.string());
  os << "angle_deg,group,branch,m\n";
  for (const auto& c : set.candidates) {
    os << format_real(rad2deg(c.angle)) << ',' << c.group + 1 << ',' << c.branch << ',' << c.m << '\n';
  }
}

}  // namespace h2ad
