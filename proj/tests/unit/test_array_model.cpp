#include <doctest.h>

#include <cmath>
#include <random>

#include "h2ad/array_model.hpp"

using namespace h2ad;

TEST_SUITE("array_model") {

TEST_CASE("geometry bookkeeping") {
  const auto cfg = ArrayConfig::half_wavelength(16, {7, 13, 17});
  CHECK(cfg.num_groups() == 3);
  CHECK(cfg.group_size(1) == 16 * 13);
  CHECK(cfg.total_antennas() == 16 * 37);
  CHECK(cfg.group_offset(0) == 0);
  CHECK(cfg.group_offset(2) == 16 * 20);
  CHECK(cfg.is_pairwise_coprime());
  CHECK(cfg.warnings().empty());
  CHECK_FALSE(ArrayConfig::half_wavelength(2, {4, 6}).is_pairwise_coprime());
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(ArrayConfig(0, {7}, 0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(ArrayConfig(4, {}, 0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(ArrayConfig(4, {0}, 0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(ArrayConfig(4, {3}, -1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(ArrayConfig(2, {2}, 0.5, 1.0, {{0.0, 0.0}}), ConfigError);
  const auto cfg = ArrayConfig::half_wavelength(4, {3});
  CHECK_THROWS_AS(steering(cfg, 1, 0.1), ConfigError);
  CHECK_THROWS_AS(steering(cfg, -1, 0.1), ConfigError);
  CHECK_THROWS_AS(steering(cfg, 0, 2.0), InputError);
}

TEST_CASE("wide spacing is a warning only") {
  const ArrayConfig cfg(4, {3}, 0.8, 1.0);
  CHECK(cfg.warnings().size() == 1);
}

TEST_CASE("steering vector entries") {
  const auto cfg = ArrayConfig::half_wavelength(1, {29});
  const auto zero = steering(cfg, 0, 0.0);
  CHECK(zero.entries.size() == 29);
  CHECK((zero.entries - CVector::Ones(29)).norm() == doctest::Approx(0.0));

  const double th = deg2rad(11.0);
  const auto sv = steering(cfg, 0, th);
  CHECK(sv.entries(0) == cdouble(1.0, 0.0));
  CHECK(std::arg(sv.entries(1)) == doctest::Approx(kPi * std::sin(th)).epsilon(1e-14));
  for (int n = 0; n < 29; ++n) {
    CHECK(std::abs(std::abs(sv.entries(n)) - 1.0) < 1e-12);
    const cdouble expect = std::exp(cdouble(0.0, kPi * n * std::sin(th)));
    CHECK(std::abs(sv.entries(n) - expect) < 1e-12);
  }
  const auto neg = steering(cfg, 0, -th);
  CHECK((neg.entries - sv.entries.conjugate()).norm() < 1e-12);
}

TEST_CASE("virtual steering") {
  const auto cfg = ArrayConfig::half_wavelength(16, {7});
  CHECK((virtual_steering(cfg, 0, 0.0).entries - CVector::Ones(16)).norm() == doctest::Approx(0.0));
  const double th = deg2rad(23.0);
  const auto v = virtual_steering(cfg, 0, th);
  const double expect = std::remainder(7.0 * kPi * std::sin(th), 2.0 * kPi);
  CHECK(std::abs(std::remainder(std::arg(v.entries(1)) - expect, 2.0 * kPi)) < 1e-12);

  const auto one = ArrayConfig::half_wavelength(16, {1});
  const auto full = steering(one, 0, th).entries;
  CHECK((virtual_steering(one, 0, th).entries - full.head(16)).norm() < 1e-12);
}

TEST_CASE("subarray gain equals the explicit geometric sum") {
  const auto cfg = ArrayConfig::half_wavelength(4, {7});
  CHECK(std::abs(subarray_gain(cfg, 0, 0.0) - cdouble(7.0, 0.0)) < 1e-12);
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> uni(-kPi / 2, kPi / 2);
  for (int trial = 0; trial < 1000; ++trial) {
    const double th = trial == 0 ? deg2rad(11.0) : uni(eng);
    cdouble sum = 0.0;
    for (int m = 0; m < 7; ++m) sum += std::exp(cdouble(0.0, kPi * m * std::sin(th)));
    const cdouble g = subarray_gain(cfg, 0, th);
    CHECK(std::abs(g - sum) < 1e-10);
    CHECK(std::abs(g) <= 7.0 + 1e-12);
  }
  // sin(theta) d / lambda integer: theta = 90 deg with d = lambda.
  const ArrayConfig wide(2, {5}, 1.0, 1.0);
  CHECK(std::abs(subarray_gain(wide, 0, kPi / 2) - cdouble(5.0, 0.0)) < 1e-9);
}

TEST_CASE("analog combining factorizes into virtual steering times gain") {
  const auto cfg = ArrayConfig::half_wavelength(16, {7});
  for (double deg : {-40.0, 0.0, 11.0, 23.0, 61.0}) {
    const double th = deg2rad(deg);
    const CVector combined = combiner(cfg, 0) * steering(cfg, 0, th).entries;
    const CVector factored = virtual_steering(cfg, 0, th).entries * subarray_gain(cfg, 0, th) / std::sqrt(7.0);
    CHECK((combined - factored).norm() < 1e-10);
  }
}

TEST_CASE("combiner rows are orthonormal") {
  const auto cfg = ArrayConfig::half_wavelength(5, {3});
  const CMatrix bh = combiner(cfg, 0);
  CHECK((bh * bh.adjoint() - CMatrix::Identity(5, 5)).norm() < 1e-12);
}

TEST_CASE("global offset multiplies by a common phase") {
  const auto cfg = ArrayConfig::half_wavelength(2, {3, 5});
  const double th = 0.3;
  const auto local = steering(cfg, 1, th).entries;
  const auto global = steering(cfg, 1, th, cfg.group_offset(1)).entries;
  const cdouble ratio = global(0) / local(0);
  CHECK(std::abs(std::arg(ratio) - std::remainder(kPi * 6 * std::sin(th), 2 * kPi)) < 1e-12);
  CHECK((global - ratio * local).norm() < 1e-12);
}

}
