#include "h2ad/edc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace h2ad::edc {

Standardized standardize(const std::vector<double>& eigenvalues) {
  const size_t n = eigenvalues.size();
  if (n < 2) throw InputError("standardize needs at least two eigenvalues");
  double mean = 0.0;
  for (double v : eigenvalues) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : eigenvalues) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  Standardized out{std::vector<double>(n, 0.0), false};
  const double sd = std::sqrt(var);
  if (!(sd > 1e-300) || sd <= 1e-14 * std::abs(mean)) {
    out.degenerate = true;
    return out;
  }
  for (size_t j = 0; j < n; ++j) out.z[j] = (eigenvalues[j] - mean) / sd;
  return out;
}

std::vector<LiftedPoint> lift(const std::vector<double>& z, double exponent, int group) {
  if (!(exponent >= 1.0)) throw InputError("lift exponent must be >= 1");
  std::vector<LiftedPoint> out;
  out.reserve(z.size());
  for (size_t j = 0; j < z.size(); ++j) {
    const double mag = std::pow(std::abs(z[j]), exponent);
    out.push_back({{z[j], z[j] < 0.0 ? -mag : mag}, group, static_cast<int>(j)});
  }
  return out;
}

ClusterLabeling dbscan(const std::vector<Point2>& points, double eps, int min_pts) {
  if (!(eps > 0.0)) throw InputError("dbscan eps must be positive");
  if (min_pts < 1) throw InputError("dbscan min_pts must be >= 1");
  const size_t n = points.size();
  const double eps2 = eps * eps;

  std::vector<std::vector<int>> neighbors(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      const double dx = points[i].x - points[j].x;
      const double dy = points[i].y - points[j].y;
      if (dx * dx + dy * dy <= eps2) neighbors[i].push_back(static_cast<int>(j));
    }
  }

  ClusterLabeling out;
  out.labels.assign(n, kNoise);
  out.core.assign(n, false);
  for (size_t i = 0; i < n; ++i) out.core[i] = static_cast<int>(neighbors[i].size()) >= min_pts;

  std::vector<bool> assigned(n, false);
  for (size_t seed = 0; seed < n; ++seed) {
    if (assigned[seed] || !out.core[seed]) continue;
    const int id = out.num_clusters++;
    std::deque<int> frontier{static_cast<int>(seed)};
    assigned[seed] = true;
    out.labels[seed] = id;
    while (!frontier.empty()) {
      const int p = frontier.front();
      frontier.pop_front();
      if (!out.core[p]) continue;
      for (int nb : neighbors[p]) {
        if (assigned[nb]) continue;
        assigned[nb] = true;
        out.labels[nb] = id;
        frontier.push_back(nb);
      }
    }
  }
  return out;
}

CountResult estimate_count(const std::vector<std::vector<double>>& spectra, const Params& params) {
  if (spectra.empty()) throw InputError("EDC needs at least one group spectrum");
  const int groups = static_cast<int>(spectra.size());

  CountResult res;
  for (int q = 0; q < groups; ++q) {
    const auto lifted = lift(standardize(spectra[q]).z, params.exponent, q);
    res.points.insert(res.points.end(), lifted.begin(), lifted.end());
  }
  if (res.points.empty()) throw InputError("EDC pool is empty");
  res.total_points = static_cast<int>(res.points.size());

  std::vector<Point2> pos;
  pos.reserve(res.points.size());
  for (const auto& p : res.points) pos.push_back(p.pos);
  const int min_pts = params.min_pts > 0 ? params.min_pts : std::max(4, groups + 1);
  res.labeling = dbscan(pos, params.eps, min_pts);

  // Noise cluster: most members, ties to the centroid nearest the origin.
  std::vector<int> size(res.labeling.num_clusters, 0);
  std::vector<Point2> sum(res.labeling.num_clusters);
  for (size_t i = 0; i < pos.size(); ++i) {
    const int id = res.labeling.labels[i];
    if (id == kNoise) continue;
    ++size[id];
    sum[id].x += pos[i].x;
    sum[id].y += pos[i].y;
  }
  int best = -1;
  double best_norm = 0.0;
  for (int id = 0; id < res.labeling.num_clusters; ++id) {
    const double cx = sum[id].x / size[id];
    const double cy = sum[id].y / size[id];
    const double norm = std::hypot(cx, cy);
    if (best < 0 || size[id] > size[best] || (size[id] == size[best] && norm < best_norm)) {
      best = id;
      best_norm = norm;
    }
  }
  res.noise_cluster_size = best < 0 ? 0 : size[best];
  res.signal_points = res.total_points - res.noise_cluster_size;
  res.estimate = std::max(0, static_cast<int>(std::lround(static_cast<double>(res.signal_points) / groups)));
  return res;
}

CountResult estimate_count(const std::vector<EigenSpectrum>& spectra, const Params& params) {
  std::vector<std::vector<double>> values;
  values.reserve(spectra.size());
  for (const auto& s : spectra) values.emplace_back(s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size());
  return estimate_count(values, params);
}

}  // namespace h2ad::edc
