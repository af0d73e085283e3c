#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "h2ad/edc.hpp"
#include "h2ad/spectral.hpp"

using namespace h2ad;

namespace {

// O(n^2) reference: union-find over core points, borders go to the component
// whose lowest core index is smallest.
std::vector<int> reference_dbscan(const std::vector<edc::Point2>& pts, double eps, int min_pts) {
  const int n = static_cast<int>(pts.size());
  auto near = [&](int i, int j) { return std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= eps; };
  std::vector<bool> core(n);
  for (int i = 0; i < n; ++i) {
    int c = 0;
    for (int j = 0; j < n; ++j) c += near(i, j) ? 1 : 0;
    core[i] = c >= min_pts;
  }
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (core[i] && core[j] && near(i, j)) parent[std::max(find(i), find(j))] = std::min(find(i), find(j));
  std::vector<int> label(n, -1);
  for (int i = 0; i < n; ++i) {
    if (core[i]) {
      label[i] = find(i);
      continue;
    }
    for (int j = 0; j < n; ++j)
      if (core[j] && near(i, j) && (label[i] < 0 || find(j) < label[i])) label[i] = find(j);
  }
  return label;
}

// Canonical relabeling by first appearance so partitions compare directly.
std::vector<int> canonical(const std::vector<int>& labels) {
  std::map<int, int> ids;
  std::vector<int> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      out[i] = -1;
      continue;
    }
    auto it = ids.try_emplace(labels[i], static_cast<int>(ids.size())).first;
    out[i] = it->second;
  }
  return out;
}

std::vector<edc::Point2> random_points(std::mt19937_64& eng, int n) {
  std::uniform_real_distribution<double> uni(0.0, 2.0);
  std::vector<edc::Point2> pts(n);
  for (auto& p : pts) p = {uni(eng), uni(eng)};
  return pts;
}

std::vector<std::vector<double>> spectra_of(const ArrayConfig& cfg, const SourceScene& scene) {
  std::vector<std::vector<double>> out;
  for (const auto& y : generate_all_groups(cfg, scene, Combining::FullyDigital)) {
    const RVector ev = hermitian_eigenvalues(sample_covariance(y).data);
    out.emplace_back(ev.data(), ev.data() + ev.size());
  }
  return out;
}

}  // namespace

TEST_SUITE("edc") {

TEST_CASE("standardize") {
  const auto s = edc::standardize({2.0, 0.0});
  CHECK(s.z[0] == doctest::Approx(1.0));
  CHECK(s.z[1] == doctest::Approx(-1.0));
  CHECK_FALSE(s.degenerate);

  std::mt19937_64 eng(1);
  std::exponential_distribution<double> ex(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(2 + trial);
    for (auto& x : v) x = ex(eng);
    const auto z = edc::standardize(v).z;
    double mean = 0.0, var = 0.0;
    for (double x : z) mean += x;
    mean /= z.size();
    for (double x : z) var += (x - mean) * (x - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(std::sqrt(var / z.size()) - 1.0) < 1e-12);
  }

  const auto flat = edc::standardize({3.0, 3.0, 3.0});
  CHECK(flat.degenerate);
  CHECK(std::all_of(flat.z.begin(), flat.z.end(), [](double x) { return x == 0.0; }));
  CHECK_THROWS_AS(edc::standardize({1.0}), InputError);
}

TEST_CASE("standardized high-SNR spectrum has exactly A entries above 1") {
  const auto cfg = ArrayConfig::half_wavelength(1, {29});
  const auto scene = SourceScene::from_snr_db({deg2rad(-20), deg2rad(10), deg2rad(35)}, 10.0, 200, 3);
  const auto z = edc::standardize(spectra_of(cfg, scene)[0]).z;
  CHECK(std::count_if(z.begin(), z.end(), [](double x) { return x > 1.0; }) == 3);
}

TEST_CASE("lift") {
  for (double e : {1.0, 1.5, 2.0, 3.0}) {
    const auto p = edc::lift({1.0}, e)[0].pos;
    CHECK(p.x == 1.0);
    CHECK(p.y == doctest::Approx(1.0));
  }
  const auto neg = edc::lift({-2.0}, 2.0)[0].pos;
  CHECK(neg.x == -2.0);
  CHECK(neg.y == doctest::Approx(-4.0));
  CHECK(edc::lift({2.0}, 3.0)[0].pos.y == doctest::Approx(8.0));
  const auto tagged = edc::lift({0.1, 0.2}, 2.0, 4);
  CHECK(tagged[1].group == 4);
  CHECK(tagged[1].index == 1);
  CHECK_THROWS_AS(edc::lift({1.0}, 0.5), InputError);
}

TEST_CASE("dbscan small cases") {
  const auto pair = edc::dbscan({{0, 0}, {0.1, 0}}, 0.5, 2);
  CHECK(pair.num_clusters == 1);
  CHECK(pair.labels[0] == pair.labels[1]);
  const auto lone = edc::dbscan({{0, 0}, {0.1, 0}, {5, 5}}, 0.5, 2);
  CHECK(lone.labels[2] == edc::kNoise);
  CHECK_THROWS_AS(edc::dbscan({{0, 0}}, 0.0, 2), InputError);
  CHECK_THROWS_AS(edc::dbscan({{0, 0}}, 1.0, 0), InputError);
}

TEST_CASE("dbscan matches the brute-force reference on 200 random point sets") {
  std::mt19937_64 eng(7);
  std::uniform_int_distribution<int> count(5, 80);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = random_points(eng, trial == 0 ? 40 : count(eng));
    const double eps = trial == 0 ? 0.3 : 0.15 + 0.01 * (trial % 30);
    const int min_pts = trial == 0 ? 4 : 1 + trial % 6;
    const auto got = edc::dbscan(pts, eps, min_pts);
    if (canonical(got.labels) != canonical(reference_dbscan(pts, eps, min_pts))) ++mismatches;
    // Every cluster holds a core point, and no neighbour of a core point is NOISE.
    // (A cluster may still end up below min_pts when an earlier cluster
    // claimed its shared border points.)
    std::map<int, int> cores;
    for (size_t i = 0; i < pts.size(); ++i) {
      if (got.labels[i] == edc::kNoise) continue;
      cores[got.labels[i]] += got.core[i] ? 1 : 0;
    }
    for (auto [id, c] : cores) CHECK(c >= 1);
    for (size_t i = 0; i < pts.size(); ++i) {
      if (!got.core[i]) continue;
      for (size_t j = 0; j < pts.size(); ++j)
        if (std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= eps) CHECK(got.labels[j] != edc::kNoise);
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("dbscan partition is permutation invariant") {
  std::mt19937_64 eng(8);
  for (int trial = 0; trial < 50; ++trial) {
    // Well separated blobs so no border point touches two clusters.
    std::normal_distribution<double> g(0.0, 0.05);
    std::vector<edc::Point2> pts;
    for (int b = 0; b < 3; ++b)
      for (int i = 0; i < 10; ++i) pts.push_back({3.0 * b + g(eng), g(eng)});
    pts.push_back({10.0, 10.0});
    std::vector<int> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), eng);
    std::vector<edc::Point2> shuffled(pts.size());
    for (size_t i = 0; i < perm.size(); ++i) shuffled[i] = pts[perm[i]];
    const auto a = edc::dbscan(pts, 0.4, 3).labels;
    const auto b = edc::dbscan(shuffled, 0.4, 3).labels;
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = 0; j < pts.size(); ++j) {
        const bool same_a = a[perm[i]] >= 0 && a[perm[i]] == a[perm[j]];
        const bool same_b = b[i] >= 0 && b[i] == b[j];
        CHECK(same_a == same_b);
      }
    CHECK(b[std::find(perm.begin(), perm.end(), 30) - perm.begin()] == edc::kNoise);
  }
}

TEST_CASE("count estimate examples") {
  std::vector<double> one(29, 1.0);
  one[0] = 100.0;
  const auto r = edc::estimate_count(std::vector<std::vector<double>>{one});
  CHECK(r.estimate == 1);
  CHECK(r.signal_points + r.noise_cluster_size == r.total_points);
  CHECK_THROWS_AS(edc::estimate_count(std::vector<std::vector<double>>{}), InputError);

  const auto cfg = ArrayConfig::half_wavelength(1, {29, 31, 37});
  const auto scene = SourceScene::from_snr_db({deg2rad(-30), deg2rad(5), deg2rad(40)}, 10.0, 200, 11);
  const auto spectra = spectra_of(cfg, scene);
  CHECK(edc::estimate_count(spectra).estimate == 3);

  auto scaled = spectra;
  for (auto& s : scaled)
    for (auto& v : s) v *= 37.5;
  CHECK(edc::estimate_count(scaled).estimate == 3);
}

TEST_CASE("scale invariance over random scenes") {
  const auto cfg = ArrayConfig::half_wavelength(1, {29, 31, 37});
  for (int trial = 0; trial < 20; ++trial) {
    const auto scene = SourceScene::from_snr_db({deg2rad(-12), deg2rad(20)}, -14.0 + trial, 200, 100 + trial);
    const auto spectra = spectra_of(cfg, scene);
    auto scaled = spectra;
    for (auto& s : scaled)
      for (auto& v : s) v *= 1e-3;
    CHECK(edc::estimate_count(spectra).estimate == edc::estimate_count(scaled).estimate);
  }
}

TEST_CASE("noise-only scenes give zero sources at a moderate eps") {
  // At the default eps = 0.5 the upper tail of the noise spectrum splits off
  // as isolated points; eps = 1.5 keeps the whole noise spectrum in one cluster.
  const auto cfg = ArrayConfig::half_wavelength(1, {29, 31, 37});
  edc::Params params;
  params.eps = 1.5;
  int zeros = 0;
  for (int trial = 0; trial < 100; ++trial) {
    SourceScene scene;
    scene.angles = {0.1};
    scene.signal_power = 0.0;
    scene.num_snapshots = 200;
    scene.seed = 500 + trial;
    zeros += edc::estimate_count(spectra_of(cfg, scene), params).estimate == 0 ? 1 : 0;
  }
  CHECK(zeros >= 95);
}

}
