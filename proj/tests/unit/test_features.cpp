#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "h2ad/features.hpp"
#include "h2ad/types.hpp"

using namespace h2ad;
using namespace h2ad::nn;

TEST_SUITE("features") {

TEST_CASE("uniform spectrum") {
  const std::vector<double> v(10, 2.5);
  const auto f = extract_features(v);
  CHECK(f.log_max() == doctest::Approx(std::log(2.5)));
  CHECK(f.log_min() == doctest::Approx(std::log(2.5)));
  CHECK(f.log_mean() == doctest::Approx(std::log(2.5)));
  CHECK(f.std_guarded);
  CHECK(std::isfinite(f.log_std()));
  CHECK(f.entropy() == doctest::Approx(std::log(10.0)));
}

TEST_CASE("hand-evaluated examples") {
  const std::vector<double> a{std::exp(1.0), 1.0};
  const auto f = extract_features(a);
  CHECK(f.log_max() == doctest::Approx(1.0));
  CHECK(f.log_min() == doctest::Approx(0.0));
  CHECK(f.log_mean() == doctest::Approx(std::log((std::exp(1.0) + 1.0) / 2.0)));
  CHECK(f.log_std() == doctest::Approx(std::log((std::exp(1.0) - 1.0) / 2.0)));

  const std::vector<double> b{9.0, 1.0};
  CHECK(extract_features(b).entropy() == doctest::Approx(0.3251).epsilon(1e-4));
  CHECK(extract_features(b).entropy() == doctest::Approx(-(0.9 * std::log(0.9) + 0.1 * std::log(0.1))));
}

TEST_CASE("clamping and input errors") {
  const std::vector<double> v{3.0, 0.0, -1.0};
  const auto f = extract_features(v);
  CHECK(f.clamped);
  CHECK(f.log_min() == doctest::Approx(std::log(kEigenFloor)));
  CHECK(std::isfinite(f.entropy()));
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(extract_features(one), InputError);
}

TEST_CASE("ordering and entropy bounds on random spectra") {
  std::mt19937_64 eng(2);
  std::lognormal_distribution<double> ln(0.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(2 + trial % 100);
    for (auto& x : v) x = ln(eng);
    const auto f = extract_features(v);
    CHECK(f.beta[0] >= f.beta[3]);
    CHECK(f.beta[3] >= f.beta[1]);
    CHECK(f.entropy() >= 0.0);
    CHECK(f.entropy() <= std::log(static_cast<double>(v.size())) + 1e-12);
  }
}

TEST_CASE("entropy decreases toward zero with one dominant eigenvalue") {
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 6; ++k) {
    std::vector<double> v(20, 1.0);
    v[0] = std::pow(10.0, k);
    const double h = extract_features(v).entropy();
    CHECK(h < prev);
    prev = h;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("flop estimates") {
  const auto dense = flops_estimate(DenseFlopSpec{5, 64, 3});
  CHECK(dense.flops == 17408);
  CHECK(dense.valid);
  const auto cnn = flops_estimate(CnnFlopSpec{97, 3});
  CHECK(cnn.flops == 2421888);
  const auto bad = flops_estimate(DenseFlopSpec{5, 64, 0});
  CHECK_FALSE(bad.valid);
  CHECK(bad.flops == 2 * (5 * 64 + 2 * 64 * 64));
  CHECK_FALSE(flops_estimate(CnnFlopSpec{97, 0}).valid);
}

}
