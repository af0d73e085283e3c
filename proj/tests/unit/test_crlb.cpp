#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "h2ad/crlb.hpp"
#include "h2ad/spectral.hpp"

using namespace h2ad;

namespace {

const ArrayConfig& reference_array() {
  static const auto cfg = ArrayConfig::half_wavelength(16, {7, 13, 17});
  return cfg;
}

SourceScene scene_deg(std::vector<double> deg, double snr_db) {
  std::vector<double> rad;
  for (double d : deg) rad.push_back(deg2rad(d));
  return SourceScene::from_snr_db(rad, snr_db, 200, 1);
}

// Trace formula with explicit inverses and products, no solver reuse.
RMatrix slow_fim(const ArrayConfig& cfg, const SourceScene& scene, Combining mode) {
  const int a = scene.num_sources();
  RMatrix f = RMatrix::Zero(a, a);
  for (int q = 0; q < cfg.num_groups(); ++q) {
    const CMatrix rinv = model_covariance(cfg, scene, q, mode).inverse();
    for (int p = 0; p < a; ++p)
      for (int r = 0; r < a; ++r) {
        const CMatrix prod = rinv * covariance_derivative(cfg, scene, q, p, mode) * rinv *
                             covariance_derivative(cfg, scene, q, r, mode);
        f(p, r) += prod.trace().real();
      }
  }
  return f;
}

}  // namespace

TEST_SUITE("crlb") {

TEST_CASE("model covariance structure") {
  const auto cfg = ArrayConfig::half_wavelength(1, {9});
  const auto scene = scene_deg({20.0}, 3.0);
  const CMatrix r = model_covariance(cfg, scene, 0, Combining::FullyDigital);
  CHECK(r.trace().real() == doctest::Approx(scene.signal_power * 9 + 9));
  CHECK((r - r.adjoint()).norm() < 1e-12);

  auto muted = scene;
  muted.signal_power = 0.0;
  CHECK((model_covariance(reference_array(), muted, 1) - CMatrix::Identity(16, 16)).norm() < 1e-14);
}

TEST_CASE("Monte Carlo sample covariance matches the model") {
  auto scene = scene_deg({11.0, 23.0}, 0.0);
  scene.num_snapshots = 100000;
  scene.seed = 77;
  for (int q = 0; q < 3; ++q) {
    const CMatrix model = model_covariance(reference_array(), scene, q);
    const CMatrix sample = sample_covariance(generate_group_snapshots(reference_array(), scene, q)).data;
    CHECK((sample - model).norm() / model.norm() < 0.03);
  }
}

TEST_CASE("analytic derivative matches central differences") {
  const double h = 1e-6;
  for (auto mode : {Combining::Analog, Combining::FullyDigital}) {
    for (double deg : {-50.0, 0.0, 11.0, 23.0, 70.0}) {
      const auto cfg = mode == Combining::Analog ? reference_array() : ArrayConfig::half_wavelength(1, {29, 31});
      auto scene = scene_deg({deg, 40.0}, 5.0);
      for (int q = 0; q < cfg.num_groups(); ++q) {
        const CMatrix an = covariance_derivative(cfg, scene, q, 0, mode);
        auto up = scene, dn = scene;
        up.angles[0] += h;
        dn.angles[0] -= h;
        const CMatrix fd = (model_covariance(cfg, up, q, mode) - model_covariance(cfg, dn, q, mode)) / (2 * h);
        CHECK((an - fd).norm() / an.norm() < 1e-6);
        CHECK((an - an.adjoint()).norm() < 1e-12 * an.norm());
      }
    }
  }
  const auto endfire = scene_deg({90.0, 10.0}, 0.0);
  CHECK(covariance_derivative(reference_array(), endfire, 0, 0).norm() < 1e-10);
  CHECK_THROWS(covariance_derivative(reference_array(), endfire, 0, 2));
}

TEST_CASE("fim against an explicit-inverse evaluator; symmetry and PSD") {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> ang(-70.0, 70.0);
  std::uniform_real_distribution<double> snr(-20.0, 15.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int a = 1 + trial % 3;
    std::vector<double> deg;
    while (static_cast<int>(deg.size()) < a) {
      const double d = ang(eng);
      if (std::all_of(deg.begin(), deg.end(), [&](double x) { return std::abs(x - d) > 3.0; })) deg.push_back(d);
    }
    const auto scene = scene_deg(deg, snr(eng));
    const auto f = fim(reference_array(), scene);
    CHECK(f.entries.rows() == a);
    CHECK((f.entries - f.entries.transpose()).norm() <= 1e-9 * f.entries.norm());
    const Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (f.entries + f.entries.transpose()));
    CHECK(es.eigenvalues().minCoeff() >= -1e-9 * f.entries.norm());
    if (trial < 20) {
      const RMatrix slow = slow_fim(reference_array(), scene, Combining::Analog);
      CHECK((slow - f.entries).norm() <= 1e-8 * slow.norm());
    }
    RMatrix sum = RMatrix::Zero(a, a);
    for (const auto& g : f.per_group) sum += g;
    CHECK((sum - f.entries).norm() <= 1e-12 * f.entries.norm());
  }
  const auto single = fim(reference_array(), scene_deg({11.0}, 0.0));
  CHECK(single.entries.rows() == 1);
  CHECK(single.entries(0, 0) > 0.0);
}

TEST_CASE("cross terms fade as the aperture grows") {
  const auto scene = scene_deg({11.0, 23.0}, 0.0);
  double prev = 2.0;
  for (int n : {16, 32, 64, 128, 256}) {
    const auto cfg = ArrayConfig::half_wavelength(1, {n});
    const RMatrix f = fim(cfg, scene, Combining::FullyDigital).entries;
    const double c = std::abs(f(0, 1)) / std::sqrt(f(0, 0) * f(1, 1));
    CHECK(c < prev);
    prev = c;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("bound scaling, monotonicity, approximation, evenness") {
  const auto scene = scene_deg({11.0, 23.0}, 0.0);
  const auto b200 = crlb(reference_array(), scene, 200);
  const auto b100 = crlb(reference_array(), scene, 100);
  for (int i = 0; i < 2; ++i) CHECK(b100.bound[i] == 2.0 * b200.bound[i]);
  CHECK(b200.config_hash == crlb(reference_array(), scene, 50).config_hash);

  std::vector<double> prev{INFINITY, INFINITY};
  for (double snr = -20.0; snr <= 10.0; snr += 1.0) {
    const auto b = crlb(reference_array(), scene_deg({11.0, 23.0}, snr), 200);
    for (int i = 0; i < 2; ++i) {
      CHECK(b.bound[i] < prev[i]);
      prev[i] = b.bound[i];
    }
  }

  const auto diag = crlb(reference_array(), scene, 200, true);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(diag.bound[i] - b200.bound[i]) <= 0.05 * b200.bound[i]);

  for (double th : {5.0, 20.0, 45.0}) {
    const auto sym = crlb(reference_array(), scene_deg({-th, th}, 0.0), 200);
    CHECK(sym.bound[0] == doctest::Approx(sym.bound[1]).epsilon(1e-9));
  }
  const auto mirrored = crlb(reference_array(), scene_deg({-23.0, -11.0}, 0.0), 200);
  CHECK(mirrored.bound[0] == doctest::Approx(b200.bound[1]).epsilon(1e-9));
  CHECK(mirrored.bound[1] == doctest::Approx(b200.bound[0]).epsilon(1e-9));
}

TEST_CASE("ill-posed and degenerate scenes") {
  SourceScene near;
  near.angles = {0.2, 0.2 + 1e-12};
  CHECK_THROWS_AS(crlb(reference_array(), near, 200), NumericError);
  auto silent = scene_deg({11.0}, 0.0);
  silent.noise_power = 0.0;
  CHECK_THROWS_AS(fim(reference_array(), silent), NumericError);
  CHECK_THROWS_AS(crlb(reference_array(), scene_deg({11.0}, 0.0), 0), ConfigError);
}

TEST_CASE("orthogonality profile") {
  std::vector<int> sizes;
  for (int n = 1; n <= 10000; n = n < 10 ? n + 1 : n * 3 / 2) sizes.push_back(n);
  sizes.push_back(10000);
  const double p = deg2rad(11.0), r = deg2rad(23.0);
  const auto prof = orthogonality_profile(0.5, p, r, sizes);
  const auto same = orthogonality_profile(0.5, p, p, sizes);
  const double delta = kPi * (std::sin(r) - std::sin(p));
  for (size_t i = 0; i < sizes.size(); ++i) {
    const int n = sizes[i];
    cdouble sum = 0.0;
    for (int k = 0; k < n; ++k) sum += std::polar(1.0, k * delta);
    CHECK(std::abs(prof[i] - std::abs(sum) / n) < 1e-12);
    CHECK(prof[i] <= 2.0 / (n * std::abs(1.0 - std::polar(1.0, delta))) + 1e-15);
    CHECK(same[i] == 1.0);
  }
  CHECK(prof.back() < 1e-3);
}

}
