#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "h2ad/spectral.hpp"

using namespace h2ad;

TEST_SUITE("signal_sim") {

TEST_CASE("scene validation") {
  SourceScene s;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.angles = {0.1, 0.1};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.angles = {0.1, 0.2};
  s.signal_power = 0.0;
  s.noise_power = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.noise_power = 1.0;
  CHECK_NOTHROW(s.validate());
  s.num_snapshots = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  const auto t = SourceScene::from_snr_db({0.1}, -7.0, 10, 1);
  CHECK(t.snr_db() == doctest::Approx(-7.0));
}

TEST_CASE("same seed gives identical snapshots") {
  const auto cfg = ArrayConfig::half_wavelength(4, {3, 5});
  const auto scene = SourceScene::from_snr_db({0.2, -0.4}, 3.0, 50, 99);
  const auto a = generate_all_groups(cfg, scene);
  const auto b = generate_all_groups(cfg, scene);
  REQUIRE(a.size() == 2);
  for (size_t q = 0; q < a.size(); ++q) CHECK(a[q].data == b[q].data);
  CHECK(generate_group_snapshots(cfg, scene, 1).data == a[1].data);
  auto other = scene;
  other.seed = 100;
  CHECK(generate_all_groups(cfg, other)[0].data != a[0].data);
}

TEST_CASE("broadside coherent combining") {
  const auto cfg = ArrayConfig::half_wavelength(3, {4});
  SourceScene scene;
  scene.angles = {0.0};
  scene.noise_power = 0.0;
  scene.num_snapshots = 20;
  scene.seed = 4;
  const auto y = generate_group_snapshots(cfg, scene, 0);
  const CMatrix s = source_signals(scene);
  CHECK(y.rows() == 3);
  for (int k = 0; k < 3; ++k) CHECK((y.data.row(k) - 2.0 * s.row(0)).norm() < 1e-12);
}

TEST_CASE("output dimensions and model order") {
  const auto cfg = ArrayConfig::half_wavelength(2, {3, 5});
  const auto scene = SourceScene::from_snr_db({0.1, 0.3, 0.5}, 0.0, 7, 1);
  CHECK_THROWS_AS(generate_all_groups(cfg, scene), ModelOrderError);
  const auto fd = generate_all_groups(cfg, scene, Combining::FullyDigital);
  CHECK(fd.size() == 2);
  CHECK(fd[0].rows() == 6);
  CHECK(fd[1].rows() == 10);
  CHECK(fd[1].snapshots() == 7);
}

TEST_CASE("muted sources give white noise with the configured power") {
  const auto cfg = ArrayConfig::half_wavelength(6, {5});
  SourceScene scene;
  scene.angles = {0.3};
  scene.signal_power = 0.0;
  scene.noise_power = 2.0;
  scene.num_snapshots = 100000;
  scene.seed = 8;
  const auto r = sample_covariance(generate_group_snapshots(cfg, scene, 0)).data;
  const CMatrix expect = 2.0 * CMatrix::Identity(6, 6);
  CHECK((r - expect).norm() / expect.norm() < 0.03);
  const CMatrix off = r - CMatrix(r.diagonal().asDiagonal());
  CHECK(off.norm() < 0.05 * r.diagonal().norm());
}

TEST_CASE("source power and cross-group noise independence") {
  const auto cfg = ArrayConfig::half_wavelength(2, {3, 4});
  SourceScene scene;
  scene.angles = {0.0};
  scene.signal_power = 1.5;
  scene.noise_power = 1.0;
  scene.num_snapshots = 100000;
  scene.seed = 21;
  const CMatrix s = source_signals(scene);
  CHECK(s.squaredNorm() / s.cols() == doctest::Approx(1.5).epsilon(0.02));

  scene.signal_power = 0.0;
  const auto g = generate_all_groups(cfg, scene);
  const cdouble cross = (g[0].data.row(0) * g[1].data.row(0).adjoint())(0, 0) / static_cast<double>(scene.num_snapshots);
  // Standard deviation of the estimate is 1 / sqrt(T).
  CHECK(std::abs(cross) < 3.0 / std::sqrt(static_cast<double>(scene.num_snapshots)) * std::sqrt(2.0));
}

TEST_CASE("noise-free outputs of all groups share one source matrix") {
  const auto cfg = ArrayConfig::half_wavelength(3, {2, 3, 5});
  SourceScene scene;
  scene.angles = {0.25};
  scene.noise_power = 0.0;
  scene.num_snapshots = 64;
  scene.seed = 2;
  const auto g = generate_all_groups(cfg, scene);
  const CVector a = g[0].data.row(0).transpose();
  const CVector b = g[2].data.row(1).transpose();
  CHECK(std::abs(a.dot(b)) / (a.norm() * b.norm()) == doctest::Approx(1.0).epsilon(1e-12));

  scene.angles = {0.25, -0.5};
  CMatrix stacked(9, 64);
  const auto g2 = generate_all_groups(cfg, scene);
  stacked << g2[0].data, g2[1].data, g2[2].data;
  const auto ev = hermitian_eigenvalues(stacked * stacked.adjoint());
  CHECK(ev(1) > 1e-6 * ev(0));
  CHECK(ev(2) < 1e-10 * ev(0));
}

TEST_CASE("snapshot dump round trip") {
  const auto cfg = ArrayConfig::half_wavelength(4, {3});
  const auto y = generate_group_snapshots(cfg, SourceScene::from_snr_db({0.1}, 0.0, 9, 3), 0);
  const auto path = std::filesystem::temp_directory_path() / "h2ad_snap_test.bin";
  write_snapshots(path, y);
  CHECK(std::filesystem::file_size(path) == 24 + 4 * 9 * 16);
  const auto back = read_snapshots(path);
  CHECK(back.group == 0);
  CHECK(back.data == y.data);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_snapshots(path), InputError);
}

}
